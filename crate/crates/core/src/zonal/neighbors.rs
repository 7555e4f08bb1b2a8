use super::polygon::{Point, Polygon, PolygonSet};

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn within_box(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed segments `p1-p2` and `q1-q2` share at least one point.
fn segments_touch(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within_box(q1, q2, p1))
        || (d2 == 0.0 && within_box(q1, q2, p2))
        || (d3 == 0.0 && within_box(p1, p2, q1))
        || (d4 == 0.0 && within_box(p1, p2, q2))
}

fn boxes_overlap(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}

/// The closed polygons share a boundary point or interior area.
pub fn polygons_intersect(a: &Polygon, b: &Polygon) -> bool {
    if !boxes_overlap(&a.bbox(), &b.bbox()) {
        return false;
    }
    for (p1, p2) in a.edges() {
        for (q1, q2) in b.edges() {
            if segments_touch(p1, p2, q1, q2) {
                return true;
            }
        }
    }
    // boundaries are disjoint, so one is either inside the other or apart
    a.contains(b.rings()[0][0]) || b.contains(a.rings()[0][0])
}

/// All pairs of intersecting polygons (touching corners included) as
/// `(smaller id, larger id)`, sorted.
pub fn neighbor_join(polys: &PolygonSet) -> Vec<(u64, u64)> {
    let items = polys.polygons();
    let boxes: Vec<[f64; 4]> = items.iter().map(Polygon::bbox).collect();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| boxes[i][0].total_cmp(&boxes[j][0]).then(i.cmp(&j)));

    let mut active: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for &i in &order {
        let min_x = boxes[i][0];
        active.retain(|&j| boxes[j][2] >= min_x);
        for &j in &active {
            if boxes_overlap(&boxes[i], &boxes[j]) && polygons_intersect(&items[i], &items[j]) {
                let (a, b) = (items[i].id(), items[j].id());
                pairs.push((a.min(b), a.max(b)));
            }
        }
        active.push(i);
    }
    pairs.sort_unstable();
    pairs
}
