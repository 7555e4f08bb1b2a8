use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::raster::Pixel;
use super::stats::{Stat, ZonalResult};
use crate::error::{Error, Result};

/// A per-polygon statistics table that can be written as covariate columns.
pub trait StatsTable {
    fn ids(&self) -> Vec<u64>;
    /// Formatted value of `stat` for the zone at `index`; empty when absent.
    fn field(&self, index: usize, stat: Stat) -> String;
}

impl<V: Pixel> StatsTable for ZonalResult<V> {
    fn ids(&self) -> Vec<u64> {
        ZonalResult::ids(self)
    }

    fn field(&self, index: usize, stat: Stat) -> String {
        self.zones()[index].field(stat)
    }
}

/// Writes one row per polygon with columns `id,<layer>_<stat>,...`, layers in
/// the given order. Every layer must cover the same polygon ids; rows follow
/// the id order of the first layer. Returns the number of rows written.
pub fn export_covariates(layers: &[(&str, &dyn StatsTable)], stats: &[Stat], out: impl AsRef<Path>) -> Result<usize> {
    let ids = layers.first().map(|(_, t)| t.ids()).unwrap_or_default();
    let reference: BTreeSet<u64> = ids.iter().copied().collect();
    let mut index_of = Vec::with_capacity(layers.len());
    for (_, table) in layers {
        let layer_ids = table.ids();
        let own: BTreeSet<u64> = layer_ids.iter().copied().collect();
        if own != reference {
            let missing: Vec<u64> = reference.symmetric_difference(&own).copied().collect();
            return Err(Error::IdMismatch(missing));
        }
        let pos: HashMap<u64, usize> =
            layer_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        index_of.push(pos);
    }

    let mut w = csv::Writer::from_path(out.as_ref())?;
    let mut header = vec!["id".to_string()];
    for (name, _) in layers {
        header.extend(stats.iter().map(|s| format!("{name}_{s}")));
    }
    w.write_record(&header)?;
    for &id in &ids {
        let mut row = vec![id.to_string()];
        for ((_, table), pos) in layers.iter().zip(&index_of) {
            let i = pos[&id];
            row.extend(stats.iter().map(|&s| table.field(i, s)));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(ids.len())
}

/// Covariate CSV read back as numbers; empty fields become `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateTable {
    pub columns: Vec<String>,
    pub rows: Vec<(u64, Vec<Option<f64>>)>,
}

impl CovariateTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn read_covariates(path: impl AsRef<Path>) -> Result<CovariateTable> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.get(0) != Some("id") {
        return Err(Error::parse(path, 1, "first column must be `id`"));
    }
    let columns: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let id: u64 = rec[0]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad id `{}`", &rec[0])))?;
        let mut values = Vec::with_capacity(columns.len());
        for field in rec.iter().skip(1) {
            values.push(if field.is_empty() {
                None
            } else {
                Some(
                    field
                        .parse::<f64>()
                        .map_err(|_| Error::parse(path, line, format!("bad value `{field}`")))?,
                )
            });
        }
        rows.push((id, values));
    }
    Ok(CovariateTable { columns, rows })
}
