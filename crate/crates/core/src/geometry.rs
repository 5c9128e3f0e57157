//! Planar geometry used to present and probe 2-D regions: an exact
//! orientation predicate, the monotone-chain convex hull, closed
//! point-in-convex-polygon and shoelace area.

use robust::Coord;

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];

/// Exact orientation of `c` relative to the directed line `a → b`.
///
/// Positive when `a, b, c` turn counterclockwise, negative when clockwise,
/// and exactly zero when collinear. Only the sign is meaningful.
#[inline]
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
    )
}

/// `x` lies on the closed segment `[a, b]` (which may be a single point).
pub fn on_segment(a: Point2, b: Point2, x: Point2) -> bool {
    orient2d(a, b, x) == 0.0
        && x[0] >= a[0].min(b[0])
        && x[0] <= a[0].max(b[0])
        && x[1] >= a[1].min(b[1])
        && x[1] <= a[1].max(b[1])
}

/// A convex polygon with counterclockwise vertices and no repeated closing
/// vertex. Fewer than three vertices marks a degenerate point or segment.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon2D {
    vertices: Vec<Point2>,
}

impl Polygon2D {
    /// Wraps vertices that are already in counterclockwise convex position.
    pub fn from_ccw_vertices(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyInput);
        }
        let poly = Self { vertices };
        if !poly.is_convex() {
            return Err(Error::Domain(
                "vertices are not in counterclockwise convex position".into(),
            ));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Every turn is strictly counterclockwise (or the polygon is degenerate).
    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        let k = v.len();
        if k < 3 {
            return true;
        }
        (0..k).all(|i| orient2d(v[i], v[(i + 1) % k], v[(i + 2) % k]) > 0.0)
    }
}

/// Convex hull by Andrew's monotone chain.
///
/// Duplicates and collinear boundary points are dropped. All-collinear input
/// gives a two-vertex segment, a single distinct point gives one vertex.
pub fn convex_hull_2d(points: &[Point2]) -> Result<Polygon2D> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return Ok(Polygon2D { vertices: pts });
    }

    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && orient2d(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && orient2d(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Ok(Polygon2D { vertices: hull })
}

/// Closed membership test for a convex polygon.
///
/// For a degenerate polygon the answer is only defined on its supporting
/// line; other points give `DegeneratePolygon`.
pub fn point_in_polygon(poly: &Polygon2D, x: Point2) -> Result<bool> {
    let v = &poly.vertices;
    match v.len() {
        0 => Err(Error::EmptyInput),
        1 => {
            if v[0] == x {
                Ok(true)
            } else {
                Err(Error::DegeneratePolygon)
            }
        }
        2 => {
            if orient2d(v[0], v[1], x) != 0.0 {
                Err(Error::DegeneratePolygon)
            } else {
                Ok(on_segment(v[0], v[1], x))
            }
        }
        k => Ok((0..k).all(|i| orient2d(v[i], v[(i + 1) % k], x) >= 0.0)),
    }
}

/// Shoelace area; zero for degenerate polygons.
pub fn polygon_area(poly: &Polygon2D) -> f64 {
    let v = &poly.vertices;
    if v.len() < 3 {
        return 0.0;
    }
    let twice: f64 = (0..v.len())
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}
