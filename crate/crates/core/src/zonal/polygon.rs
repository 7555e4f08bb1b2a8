use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A polygon zone. Each ring is closed (first vertex repeated at the end);
/// membership over all rings follows the even-odd rule, so inner rings act as
/// holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    id: u64,
    rings: Vec<Vec<Point>>,
}

impl Polygon {
    pub fn new(id: u64, rings: Vec<Vec<Point>>) -> Result<Self> {
        if rings.is_empty() {
            return Err(Error::InvalidParameter(format!("polygon {id} has no rings")));
        }
        for ring in &rings {
            if ring.len() < 4 {
                return Err(Error::InvalidParameter(format!(
                    "polygon {id}: a ring needs at least 3 vertices plus the closing vertex, got {} points",
                    ring.len()
                )));
            }
            if ring.first() != ring.last() {
                return Err(Error::InvalidParameter(format!("polygon {id}: ring is not closed")));
            }
            if ring.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("polygon {id}: non-finite coordinate")));
            }
        }
        Ok(Polygon { id, rings })
    }

    /// Single-ring polygon; closes the ring if needed.
    pub fn from_ring(id: u64, mut ring: Vec<Point>) -> Result<Self> {
        if ring.len() >= 3 && ring.first() != ring.last() {
            ring.push(ring[0]);
        }
        Polygon::new(id, vec![ring])
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(id: u64, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Polygon::from_ring(id, vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// Parses `POLYGON ((x y, ...), (x y, ...))`.
    pub fn from_wkt(id: u64, wkt: &str) -> Result<Self> {
        let rings = parse_wkt(wkt).map_err(|m| Error::InvalidParameter(format!("polygon {id}: {m}")))?;
        Polygon::new(id, rings)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn rings(&self) -> &[Vec<Point>] {
        &self.rings
    }

    /// Iterates all edges of all rings.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.rings.iter().flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
    }

    /// `[min_x, min_y, max_x, max_y]`
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in self.rings.iter().flatten() {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].min(p[1]);
            b[2] = b[2].max(p[0]);
            b[3] = b[3].max(p[1]);
        }
        b
    }

    pub fn to_wkt(&self) -> String {
        let rings: Vec<String> = self
            .rings
            .iter()
            .map(|r| {
                let pts: Vec<String> = r.iter().map(|p| format!("{} {}", p[0], p[1])).collect();
                format!("({})", pts.join(", "))
            })
            .collect();
        format!("POLYGON ({})", rings.join(", "))
    }

    /// Even-odd membership of a point. A point on an edge belongs to the
    /// polygon whose interior lies east or south of it.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if let Some(x) = crossing_x(a, b, p[1]) {
                if x > p[0] {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Abscissa where edge `a-b` crosses the horizontal line at `y`, counting an
/// edge when its endpoints straddle `y` with the upper endpoint closed.
#[inline]
pub(crate) fn crossing_x(a: Point, b: Point, y: f64) -> Option<f64> {
    if (a[1] < y) != (b[1] < y) {
        Some(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]))
    } else {
        None
    }
}

/// Signed shoelace area of a closed ring.
/// All vertices lie on one line, so the ring encloses nothing. A zero signed
/// area is not enough: a self-crossing ring can cancel to zero.
pub(crate) fn is_collinear(ring: &[Point]) -> bool {
    let o = ring[0];
    let Some(d) = ring.iter().map(|p| [p[0] - o[0], p[1] - o[1]]).find(|d| d[0] != 0.0 || d[1] != 0.0) else {
        return true;
    };
    ring.iter().all(|p| d[0] * (p[1] - o[1]) - d[1] * (p[0] - o[0]) == 0.0)
}

fn parse_wkt(text: &str) -> Result<Vec<Vec<Point>>, String> {
    let t = text.trim();
    let upper = t.get(..7).map(|s| s.to_ascii_uppercase());
    if upper.as_deref() != Some("POLYGON") {
        return Err(format!("expected POLYGON, got `{}`", t.chars().take(20).collect::<String>()));
    }
    let body = t[7..].trim();
    let body = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .ok_or("POLYGON body must be parenthesised")?;
    let mut rings = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('(').ok_or("expected `(` opening a ring")?;
        let close = inner.find(')').ok_or("unterminated ring")?;
        let mut ring = Vec::new();
        for pair in inner[..close].split(',') {
            let nums: Vec<&str> = pair.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(format!("expected `x y`, got `{}`", pair.trim()));
            }
            let x: f64 = nums[0].parse().map_err(|_| format!("bad coordinate `{}`", nums[0]))?;
            let y: f64 = nums[1].parse().map_err(|_| format!("bad coordinate `{}`", nums[1]))?;
            ring.push([x, y]);
        }
        rings.push(ring);
        rest = inner[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err("trailing comma".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("unexpected `{}`", rest.chars().take(10).collect::<String>()));
        }
    }
    if rings.is_empty() {
        return Err("empty POLYGON".into());
    }
    Ok(rings)
}

/// Polygons with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolygonSet {
    polygons: Vec<Polygon>,
}

impl PolygonSet {
    pub fn new(polygons: Vec<Polygon>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(polygons.len());
        for p in &polygons {
            if !seen.insert(p.id) {
                return Err(Error::InvalidParameter(format!("duplicate polygon id {}", p.id)));
            }
        }
        Ok(PolygonSet { polygons })
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.polygons.iter().map(|p| p.id).collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["id", "wkt"])?;
        for p in &self.polygons {
            w.write_record([p.id.to_string(), p.to_wkt()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Deserialize)]
struct PolygonRow {
    id: u64,
    wkt: String,
}

/// Reads a CSV with header `id,wkt`.
pub fn read_polygons(path: impl AsRef<Path>) -> Result<PolygonSet> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "wkt"] {
        return Err(Error::parse(path, 1, "expected header `id,wkt`"));
    }
    let mut polygons = Vec::new();
    for (i, row) in reader.deserialize::<PolygonRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
        let poly = Polygon::from_wkt(row.id, &row.wkt).map_err(|e| Error::parse(path, line, e.to_string()))?;
        polygons.push(poly);
    }
    PolygonSet::new(polygons).map_err(|e| Error::parse(path, 0, e.to_string()))
}
