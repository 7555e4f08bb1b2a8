use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Georeferencing of a north-up raster. `(x_origin, y_origin)` is the
/// lower-left corner of the grid; row 0 is the northernmost row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterMetadata {
    pub n_rows: usize,
    pub n_cols: usize,
    pub x_origin: f64,
    pub y_origin: f64,
    pub cell_size: f64,
    pub nodata: f64,
}

impl RasterMetadata {
    pub fn new(n_rows: usize, n_cols: usize, x_origin: f64, y_origin: f64, cell_size: f64, nodata: f64) -> Result<Self> {
        let meta = RasterMetadata {
            n_rows,
            n_cols,
            x_origin,
            y_origin,
            cell_size,
            nodata,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "raster must have at least one row and column, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell size must be positive, got {}", self.cell_size)));
        }
        if !self.x_origin.is_finite() || !self.y_origin.is_finite() {
            return Err(Error::InvalidParameter("raster origin must be finite".into()));
        }
        Ok(())
    }

    pub fn n_pixels(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// X coordinate of the centers of column `col`.
    #[inline]
    pub fn col_center(&self, col: usize) -> f64 {
        self.x_origin + (col as f64 + 0.5) * self.cell_size
    }

    /// Y coordinate of the centers of row `row`.
    #[inline]
    pub fn row_center(&self, row: usize) -> f64 {
        self.y_origin + (self.n_rows as f64 - row as f64 - 0.5) * self.cell_size
    }

    pub fn x_max(&self) -> f64 {
        self.x_origin + self.n_cols as f64 * self.cell_size
    }

    pub fn y_max(&self) -> f64 {
        self.y_origin + self.n_rows as f64 * self.cell_size
    }
}

/// Value type of a raster layer.
pub trait Pixel: Copy + Send + Sync + PartialEq + Debug + Display + FromStr + 'static {
    fn to_f64(self) -> f64;
    fn total_cmp(&self, other: &Self) -> Ordering;
    /// Bit pattern used to count equal values.
    fn key(self) -> u64;
}

macro_rules! int_pixel {
    ($($t:ty),*) => {$(
        impl Pixel for $t {
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn total_cmp(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
            fn key(self) -> u64 {
                self as i64 as u64
            }
        }
    )*};
}

int_pixel!(i16, i32, i64, u8, u16, u32);

impl Pixel for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f32::total_cmp(self, other)
    }
    fn key(self) -> u64 {
        // fold -0.0 onto 0.0 so equal values share a bucket
        (self + 0.0).to_bits() as u64
    }
}

impl Pixel for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn key(self) -> u64 {
        (self + 0.0).to_bits()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid<V> {
    metadata: RasterMetadata,
    values: Vec<V>,
}

impl<V: Pixel> RasterGrid<V> {
    /// `values` are row-major, northernmost row first.
    pub fn new(metadata: RasterMetadata, values: Vec<V>) -> Result<Self> {
        metadata.validate()?;
        if values.len() != metadata.n_pixels() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values ({}x{})", metadata.n_pixels(), metadata.n_rows, metadata.n_cols),
                found: format!("{} values", values.len()),
            });
        }
        Ok(RasterGrid { metadata, values })
    }

    pub fn metadata(&self) -> &RasterMetadata {
        &self.metadata
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn row(&self, row: usize) -> &[V] {
        let n = self.metadata.n_cols;
        &self.values[row * n..(row + 1) * n]
    }

    pub fn get(&self, row: usize, col: usize) -> V {
        self.values[row * self.metadata.n_cols + col]
    }

    pub fn is_nodata(&self, v: V) -> bool {
        v.to_f64() == self.metadata.nodata
    }
}

/// A raster read from disk whose value type was detected from its contents.
#[derive(Debug, Clone, PartialEq)]
pub enum RasterLayer {
    Int(RasterGrid<i64>),
    Float(RasterGrid<f64>),
}

impl RasterLayer {
    pub fn metadata(&self) -> &RasterMetadata {
        match self {
            RasterLayer::Int(r) => r.metadata(),
            RasterLayer::Float(r) => r.metadata(),
        }
    }
}

const HEADER_KEYS: [&str; 6] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"];

fn parse_header(path: &Path, text: &str) -> Result<(RasterMetadata, usize)> {
    let mut fields = [f64::NAN; 6];
    let mut lines = text.lines().enumerate();
    for slot in 0..6 {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(path, slot + 1, "truncated header"))?;
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or("").to_ascii_lowercase();
        let value = parts.next().ok_or_else(|| Error::parse(path, no + 1, "header line without a value"))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse(path, no + 1, format!("bad header value `{value}`")))?;
        let idx = HEADER_KEYS
            .iter()
            .position(|h| *h == key)
            .ok_or_else(|| Error::parse(path, no + 1, format!("unknown header key `{key}`")))?;
        fields[idx] = value;
    }
    if let Some(i) = fields.iter().position(|v| v.is_nan()) {
        return Err(Error::parse(path, 6, format!("missing header key `{}`", HEADER_KEYS[i])));
    }
    let count = |v: f64, name: &str| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::parse(path, 1, format!("{name} must be a positive integer, got {v}")))
        }
    };
    let meta = RasterMetadata::new(
        count(fields[1], "nrows")?,
        count(fields[0], "ncols")?,
        fields[2],
        fields[3],
        fields[4],
        fields[5],
    )?;
    Ok((meta, 6))
}

fn parse_body<V: Pixel>(path: &Path, text: &str, meta: RasterMetadata, skip: usize) -> Result<RasterGrid<V>> {
    let mut values = Vec::with_capacity(meta.n_pixels());
    for (no, line) in text.lines().enumerate().skip(skip) {
        for tok in line.split_whitespace() {
            let v = tok
                .parse::<V>()
                .map_err(|_| Error::parse(path, no + 1, format!("bad value `{tok}`")))?;
            values.push(v);
        }
    }
    if values.len() != meta.n_pixels() {
        return Err(Error::parse(
            path,
            text.lines().count(),
            format!("expected {} values, found {}", meta.n_pixels(), values.len()),
        ));
    }
    RasterGrid::new(meta, values)
}

/// Reads an ASCII grid: a six line header (`ncols`, `nrows`, `xllcorner`,
/// `yllcorner`, `cellsize`, `nodata_value`) followed by row-major values.
pub fn read_ascii_grid<V: Pixel>(path: impl AsRef<Path>) -> Result<RasterGrid<V>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (meta, skip) = parse_header(path, &text)?;
    parse_body(path, &text, meta, skip)
}

/// Like [`read_ascii_grid`], reading integers when every value parses as one.
pub fn read_ascii_layer(path: impl AsRef<Path>) -> Result<RasterLayer> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (meta, skip) = parse_header(path, &text)?;
    match parse_body::<i64>(path, &text, meta, skip) {
        Ok(grid) => Ok(RasterLayer::Int(grid)),
        Err(Error::Parse { .. }) => parse_body::<f64>(path, &text, meta, skip).map(RasterLayer::Float),
        Err(e) => Err(e),
    }
}

pub fn write_ascii_grid<V: Pixel>(raster: &RasterGrid<V>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let m = raster.metadata();
    let mut out = String::new();
    out.push_str(&format!("ncols {}\nnrows {}\n", m.n_cols, m.n_rows));
    out.push_str(&format!("xllcorner {}\nyllcorner {}\n", m.x_origin, m.y_origin));
    out.push_str(&format!("cellsize {}\nnodata_value {}\n", m.cell_size, m.nodata));
    for r in 0..m.n_rows {
        let row: Vec<String> = raster.row(r).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
