use rayon::prelude::*;

use super::polygon::{crossing_x, is_collinear, Polygon, PolygonSet};
use super::raster::RasterMetadata;

/// Pixels `col_start..=col_end` of `row` whose centers fall inside polygon
/// `polygon_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowRange {
    pub row: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub polygon_id: u64,
}

impl RowRange {
    pub fn width(&self) -> usize {
        self.col_end - self.col_start + 1
    }
}

/// Polygon coverage of a raster grid, sorted by `(row, col_start)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionsFile {
    n_rows: usize,
    n_cols: usize,
    ids: Vec<u64>,
    entries: Vec<RowRange>,
}

impl IntersectionsFile {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Every polygon id of the input, in input order, including polygons
    /// that cover no pixel center.
    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn entries(&self) -> &[RowRange] {
        &self.entries
    }

    /// Entries of `row`.
    pub fn row(&self, row: usize) -> &[RowRange] {
        let lo = self.entries.partition_point(|e| e.row < row);
        let hi = self.entries.partition_point(|e| e.row <= row);
        &self.entries[lo..hi]
    }

    pub fn covered_pixels(&self) -> usize {
        self.entries.iter().map(RowRange::width).sum()
    }
}

/// First column whose center is at or east of `x`.
fn first_col_at_or_after(meta: &RasterMetadata, x: f64) -> usize {
    let n = meta.n_cols;
    let est = ((x - meta.x_origin) / meta.cell_size - 0.5).ceil();
    let mut c = est.clamp(0.0, n as f64) as usize;
    while c > 0 && meta.col_center(c - 1) >= x {
        c -= 1;
    }
    while c < n && meta.col_center(c) < x {
        c += 1;
    }
    c
}

fn polygon_ranges(poly: &Polygon, meta: &RasterMetadata) -> Vec<RowRange> {
    let rings: Vec<&Vec<[f64; 2]>> = poly
        .rings()
        .iter()
        .filter(|r| {
            let degenerate = is_collinear(r);
            if degenerate {
                log::warn!("polygon {}: skipping a ring with collinear vertices", poly.id());
            }
            !degenerate
        })
        .collect();
    if rings.is_empty() {
        return Vec::new();
    }
    let [_, min_y, _, max_y] = poly.bbox();
    let rows = meta.n_rows as f64;
    // rows whose centers may lie in [min_y, max_y], widened by one for rounding
    let first = ((rows - (max_y - meta.y_origin) / meta.cell_size - 0.5).floor() - 1.0).clamp(0.0, rows) as usize;
    let last = ((rows - (min_y - meta.y_origin) / meta.cell_size - 0.5).ceil() + 1.0).clamp(0.0, rows) as usize;

    let mut out = Vec::new();
    let mut xs = Vec::new();
    for row in first..last.min(meta.n_rows) {
        let y = meta.row_center(row);
        xs.clear();
        for ring in &rings {
            xs.extend(ring.windows(2).filter_map(|w| crossing_x(w[0], w[1], y)));
        }
        if xs.is_empty() {
            continue;
        }
        xs.sort_by(f64::total_cmp);
        let mut pending: Option<(usize, usize)> = None;
        for pair in xs.chunks_exact(2) {
            let start = first_col_at_or_after(meta, pair[0]);
            let end = first_col_at_or_after(meta, pair[1]);
            if start >= end {
                continue;
            }
            pending = match pending {
                Some((s, e)) if e == start => Some((s, end)),
                Some((s, e)) => {
                    out.push(RowRange {
                        row,
                        col_start: s,
                        col_end: e - 1,
                        polygon_id: poly.id(),
                    });
                    Some((start, end))
                }
                None => Some((start, end)),
            };
        }
        if let Some((s, e)) = pending {
            out.push(RowRange {
                row,
                col_start: s,
                col_end: e - 1,
                polygon_id: poly.id(),
            });
        }
    }
    out
}

/// Rasterizes every polygon against the grid described by `meta` by pixel
/// center containment (even-odd rule). Raster values are never needed.
pub fn build_intersections(polys: &PolygonSet, meta: &RasterMetadata) -> IntersectionsFile {
    let mut entries: Vec<RowRange> = polys
        .polygons()
        .par_iter()
        .flat_map_iter(|p| polygon_ranges(p, meta))
        .collect();
    entries.par_sort_unstable();
    IntersectionsFile {
        n_rows: meta.n_rows,
        n_cols: meta.n_cols,
        ids: polys.ids(),
        entries,
    }
}
