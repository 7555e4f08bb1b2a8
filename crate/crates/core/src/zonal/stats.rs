use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::intersections::IntersectionsFile;
use super::raster::{Pixel, RasterGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stat {
    Min,
    Max,
    Median,
    Sum,
    Mode,
    Count,
}

impl Stat {
    pub const ALL: [Stat; 6] = [Stat::Min, Stat::Max, Stat::Median, Stat::Sum, Stat::Mode, Stat::Count];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Min => "min",
            Stat::Max => "max",
            Stat::Median => "median",
            Stat::Sum => "sum",
            Stat::Mode => "mode",
            Stat::Count => "count",
        }
    }

    /// Parses a comma separated list such as `min,max,count`.
    pub fn parse_list(s: &str) -> Result<Vec<Stat>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let stat: Stat = part.parse()?;
            if !out.contains(&stat) {
                out.push(stat);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("empty statistics list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stat::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown statistic `{s}`")))
    }
}

/// Statistics of a zone with at least one valid pixel. The median of an even
/// count is the lower median; mode ties go to the smallest value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<V> {
    pub min: V,
    pub max: V,
    pub median: V,
    pub mode: V,
    /// Accumulated in raster order.
    pub sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneStats<V> {
    pub id: u64,
    /// Valid (non-nodata) pixels.
    pub count: usize,
    /// `None` when `count == 0`.
    pub summary: Option<Summary<V>>,
}

impl<V: Pixel> ZoneStats<V> {
    /// One statistic as a number; `None` for an empty zone (except `count`).
    pub fn value(&self, stat: Stat) -> Option<f64> {
        if stat == Stat::Count {
            return Some(self.count as f64);
        }
        let s = self.summary.as_ref()?;
        Some(match stat {
            Stat::Min => s.min.to_f64(),
            Stat::Max => s.max.to_f64(),
            Stat::Median => s.median.to_f64(),
            Stat::Mode => s.mode.to_f64(),
            Stat::Sum => s.sum,
            Stat::Count => unreachable!(),
        })
    }

    /// One statistic formatted for CSV output; empty for a missing value.
    pub fn field(&self, stat: Stat) -> String {
        if stat == Stat::Count {
            return self.count.to_string();
        }
        match &self.summary {
            None => String::new(),
            Some(s) => match stat {
                Stat::Min => s.min.to_string(),
                Stat::Max => s.max.to_string(),
                Stat::Median => s.median.to_string(),
                Stat::Mode => s.mode.to_string(),
                Stat::Sum => s.sum.to_string(),
                Stat::Count => unreachable!(),
            },
        }
    }
}

/// Per-polygon statistics in the polygon order of the intersections file.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalResult<V> {
    zones: Vec<ZoneStats<V>>,
}

impl<V: Pixel> ZonalResult<V> {
    pub fn zones(&self) -> &[ZoneStats<V>] {
        &self.zones
    }

    pub fn get(&self, id: u64) -> Option<&ZoneStats<V>> {
        self.zones.iter().find(|z| z.id == id)
    }

    pub fn ids(&self) -> Vec<u64> {
        self.zones.iter().map(|z| z.id).collect()
    }
}

/// Statistics of `values`, given in raster order.
pub(crate) fn summarize<V: Pixel>(values: &mut [V]) -> Option<Summary<V>> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().map(|v| v.to_f64()).sum();
    let mut min = values[0];
    let mut max = values[0];
    let mut counts: HashMap<u64, (usize, V)> = HashMap::new();
    for &v in values.iter() {
        if v.total_cmp(&min) == Ordering::Less {
            min = v;
        }
        if v.total_cmp(&max) == Ordering::Greater {
            max = v;
        }
        counts.entry(v.key()).or_insert((0, v)).0 += 1;
    }
    let mode = counts
        .values()
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.total_cmp(&a.1)))
        .map(|&(_, v)| v)
        .expect("non-empty");
    let k = (values.len() - 1) / 2;
    let (_, median, _) = values.select_nth_unstable_by(k, V::total_cmp);
    Some(Summary {
        min,
        max,
        median: *median,
        mode,
        sum,
    })
}

/// Aggregates `raster` over the zones of `ix` with one pass over its rows.
/// Rows are split into contiguous blocks processed in parallel; the result
/// does not depend on the number of blocks.
pub fn zonal_stats<V: Pixel>(ix: &IntersectionsFile, raster: &RasterGrid<V>) -> Result<ZonalResult<V>> {
    let parts = rayon::current_num_threads().max(1) * 4;
    zonal_stats_partitioned(ix, raster, parts)
}

/// [`zonal_stats`] with an explicit number of row blocks.
pub fn zonal_stats_partitioned<V: Pixel>(
    ix: &IntersectionsFile,
    raster: &RasterGrid<V>,
    parts: usize,
) -> Result<ZonalResult<V>> {
    let meta = raster.metadata();
    if (ix.n_rows(), ix.n_cols()) != (meta.n_rows, meta.n_cols) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} raster", ix.n_rows(), ix.n_cols()),
            found: format!("{}x{}", meta.n_rows, meta.n_cols),
        });
    }
    let slot: HashMap<u64, u32> = ix.ids().iter().enumerate().map(|(i, &id)| (id, i as u32)).collect();
    let entries = ix.entries();
    let rows = meta.n_rows;
    let parts = parts.clamp(1, rows);
    let bounds: Vec<(usize, usize)> = (0..parts).map(|p| (p * rows / parts, (p + 1) * rows / parts)).collect();

    // each block emits (zone, value) pairs in raster order
    let blocks: Vec<Vec<(u32, V)>> = bounds
        .par_iter()
        .map(|&(r0, r1)| {
            let lo = entries.partition_point(|e| e.row < r0);
            let hi = entries.partition_point(|e| e.row < r1);
            let mut out = Vec::new();
            for e in &entries[lo..hi] {
                let z = slot[&e.polygon_id];
                let row = raster.row(e.row);
                for &v in &row[e.col_start..=e.col_end] {
                    if !raster.is_nodata(v) {
                        out.push((z, v));
                    }
                }
            }
            out
        })
        .collect();

    let mut per_zone: Vec<Vec<V>> = vec![Vec::new(); ix.ids().len()];
    for block in blocks {
        for (z, v) in block {
            per_zone[z as usize].push(v);
        }
    }
    let zones = per_zone
        .into_par_iter()
        .zip(ix.ids().par_iter())
        .map(|(mut values, &id)| ZoneStats {
            id,
            count: values.len(),
            summary: summarize(&mut values),
        })
        .collect();
    Ok(ZonalResult { zones })
}
