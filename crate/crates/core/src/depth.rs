//! Data depth: Mahalanobis depth and simplicial depth.
//!
//! Simplicial depth is the fraction of closed simplices spanned by `p + 1`
//! sample points that contain the query point. Two routes compute it:
//!
//! - [`simplicial_count_naive`] enumerates every simplex (any `p`), and is
//!   the reference implementation.
//! - [`simplicial_count_fast2d`] counts the complementary triangles with an
//!   angular sweep around the query point in O(n log n).
//!
//! In 2-D both routes use the same exact orientation predicate, so their
//! counts agree exactly, including points on edges, collinear triples and
//! duplicated observations.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{on_segment, orient2d, Point2};
use crate::numerics::linalg::check_dim;
use crate::numerics::{cholesky, sample_cov, tol, Cholesky, Distribution, Matrix};

/// Which depth function to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DepthKind {
    Mahalanobis,
    /// Simplicial depth, using the angular sweep when `p = 2`.
    Simplicial,
    /// Simplicial depth by full enumeration of simplices.
    SimplicialNaive,
}

impl DepthKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Mahalanobis => "mahalanobis",
            Self::Simplicial => "simplicial",
            Self::SimplicialNaive => "simplicial-naive",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "mahalanobis" => Ok(Self::Mahalanobis),
            "simplicial" => Ok(Self::Simplicial),
            "simplicial-naive" => Ok(Self::SimplicialNaive),
            other => Err(Error::Domain(format!(
                "unknown depth '{other}' (expected mahalanobis, simplicial or simplicial-naive)"
            ))),
        }
    }

    /// Simplicial in the plane, Mahalanobis in every other dimension.
    pub fn default_for_dim(p: usize) -> Self {
        if p == 2 {
            Self::Simplicial
        } else {
            Self::Mahalanobis
        }
    }

    pub fn is_simplicial(self) -> bool {
        matches!(self, Self::Simplicial | Self::SimplicialNaive)
    }
}

/// Number of closed simplices containing a point, out of all `C(n, p+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimplicialCount {
    pub containing: u64,
    pub total: u64,
}

impl SimplicialCount {
    pub fn value(self) -> f64 {
        self.containing as f64 / self.total as f64
    }
}

/// Binomial coefficient; panics on u64 overflow.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// Closed-simplex membership: `x` lies in the convex hull of `vertices`.
///
/// Degenerate simplices (repeated or affinely dependent vertices) are
/// handled as their lower-dimensional hulls. The planar case is exact.
pub fn point_in_simplex<V: AsRef<[f64]>>(x: &[f64], vertices: &[V]) -> Result<bool> {
    let p = x.len();
    check_dim(p + 1, vertices.len())?;
    for v in vertices {
        check_dim(p, v.as_ref().len())?;
    }
    Ok(match p {
        1 => {
            let (a, b) = (vertices[0].as_ref()[0], vertices[1].as_ref()[0]);
            a.min(b) <= x[0] && x[0] <= a.max(b)
        }
        2 => triangle_contains(
            to_point(vertices[0].as_ref()),
            to_point(vertices[1].as_ref()),
            to_point(vertices[2].as_ref()),
            to_point(x),
        ),
        _ => {
            let refs: Vec<&[f64]> = vertices.iter().map(|v| v.as_ref()).collect();
            in_hull_general(x, &refs)
        }
    })
}

#[inline]
fn to_point(v: &[f64]) -> Point2 {
    [v[0], v[1]]
}

/// Exact closed-triangle test, including collinear and coincident vertices.
#[inline]
pub(crate) fn triangle_contains(a: Point2, b: Point2, c: Point2, x: Point2) -> bool {
    if orient2d(a, b, c) != 0.0 {
        let d1 = orient2d(a, b, x);
        let d2 = orient2d(b, c, x);
        let d3 = orient2d(c, a, x);
        let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
        let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
        !(has_neg && has_pos)
    } else {
        on_segment(a, b, x) || on_segment(b, c, x) || on_segment(a, c, x)
    }
}

/// Convex-hull membership for a small vertex set in any dimension.
///
/// Affinely independent vertices are tested by barycentric coordinates;
/// dependent ones reduce to the union of hulls of one-smaller subsets.
fn in_hull_general(x: &[f64], pts: &[&[f64]]) -> bool {
    let base = pts[0];
    let scale = pts
        .iter()
        .flat_map(|p| p.iter().zip(base).map(|(a, b)| (a - b).abs()))
        .chain(x.iter().zip(base).map(|(a, b)| (a - b).abs()))
        .fold(0.0_f64, f64::max);
    let eps = tol::SIMPLEX_REL * scale.max(f64::MIN_POSITIVE);
    let v: Vec<f64> = x.iter().zip(base).map(|(a, b)| a - b).collect();
    if pts.len() == 1 {
        return v.iter().all(|d| d.abs() <= eps);
    }

    let k = pts.len() - 1;
    let diffs: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, w)| u * w).sum::<f64>();
    let mut gram = Matrix::zeros(k);
    for i in 0..k {
        for j in 0..=i {
            let g = dot(&diffs[i], &diffs[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    match cholesky(&gram) {
        Ok(chol) => {
            let rhs: Vec<f64> = diffs.iter().map(|d| dot(d, &v)).collect();
            let lambda = chol.solve_upper(&chol.solve_lower(&rhs));
            let residual = (0..x.len())
                .map(|c| v[c] - (0..k).map(|i| lambda[i] * diffs[i][c]).sum::<f64>())
                .fold(0.0_f64, |m, r| m.max(r.abs()));
            let first = 1.0 - lambda.iter().sum::<f64>();
            residual <= eps
                && first >= -tol::SIMPLEX_REL
                && lambda.iter().all(|&l| l >= -tol::SIMPLEX_REL)
        }
        Err(_) => (0..pts.len()).any(|drop| {
            let subset: Vec<&[f64]> = pts
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != drop)
                .map(|(_, p)| *p)
                .collect();
            in_hull_general(x, &subset)
        }),
    }
}

fn check_simplicial_input(x: &[f64], data: &Dataset) -> Result<()> {
    check_dim(data.dim(), x.len())?;
    let needed = data.dim() + 1;
    if data.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            found: data.len(),
        });
    }
    Ok(())
}

/// Simplicial depth count by enumerating all `C(n, p+1)` simplices.
pub fn simplicial_count_naive(x: &[f64], data: &Dataset) -> Result<SimplicialCount> {
    check_simplicial_input(x, data)?;
    let (n, p) = (data.len(), data.dim());
    let total = binomial(n as u64, p as u64 + 1);
    let mut containing = 0u64;

    if p == 2 {
        let pts: Vec<Point2> = data.rows().map(to_point).collect();
        let q = to_point(x);
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if triangle_contains(pts[i], pts[j], pts[k], q) {
                        containing += 1;
                    }
                }
            }
        }
    } else {
        let m = p + 1;
        let mut idx: Vec<usize> = (0..m).collect();
        let mut verts: Vec<&[f64]> = Vec::with_capacity(m);
        loop {
            verts.clear();
            verts.extend(idx.iter().map(|&i| data.row(i)));
            if point_in_simplex(x, &verts)? {
                containing += 1;
            }
            // Advance to the next combination in lexicographic order.
            let mut pos = m;
            while pos > 0 && idx[pos - 1] == n - m + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            for t in pos..m {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
    Ok(SimplicialCount { containing, total })
}

/// Simplicial depth by enumeration.
pub fn simplicial_depth_naive(x: &[f64], data: &Dataset) -> Result<f64> {
    simplicial_count_naive(x, data).map(SimplicialCount::value)
}

/// Exact planar simplicial depth count in O(n log n).
///
/// Sample points equal to `x` make every triangle they belong to contain
/// `x`. Among the remaining `m` points, a triangle misses `x` exactly when
/// its three directions from `x` fit in a closed arc shorter than π. After
/// sorting directions by angle (ties by radius, then index), each such
/// triangle is charged once to its first point in counterclockwise order,
/// and point `s` is charged `C(K_s, 2)` where `K_s` counts the points
/// strictly within the following half-turn. A two-pointer sweep finds every
/// `K_s` in linear time.
pub fn simplicial_count_fast2d(x: &[f64], data: &Dataset) -> Result<SimplicialCount> {
    check_simplicial_input(x, data)?;
    if data.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: data.dim(),
        });
    }
    let n = data.len();
    let total = binomial(n as u64, 3);
    let q = to_point(x);

    let mut pts: Vec<(Point2, usize)> = data
        .rows()
        .enumerate()
        .map(|(i, r)| (to_point(r), i))
        .filter(|(p, _)| *p != q)
        .collect();
    let m = pts.len();

    // Upper half-plane (angle in [0, π)) before lower ([π, 2π)).
    let half = |p: &Point2| -> u8 {
        if p[1] > q[1] || (p[1] == q[1] && p[0] > q[0]) {
            0
        } else {
            1
        }
    };
    let radius2 = |p: &Point2| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
    pts.sort_by(|(a, ia), (b, ib)| {
        half(a)
            .cmp(&half(b))
            .then_with(|| {
                let o = orient2d(q, *a, *b);
                if o > 0.0 {
                    Ordering::Less
                } else if o < 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Equal
                }
            })
            .then_with(|| radius2(a).total_cmp(&radius2(b)))
            .then_with(|| ia.cmp(ib))
    });

    let same_direction = |a: &Point2, b: &Point2| {
        a[0].partial_cmp(&q[0]) == b[0].partial_cmp(&q[0])
            && a[1].partial_cmp(&q[1]) == b[1].partial_cmp(&q[1])
    };
    // Is the point at unwrapped position `t` (s < t < s + m) strictly within
    // the half-turn that starts at position `s`?
    let follows = |s: usize, t: usize| -> bool {
        let (a, b) = (&pts[s].0, &pts[t % m].0);
        let o = orient2d(q, *a, *b);
        if o > 0.0 {
            true
        } else if o < 0.0 {
            false
        } else {
            t < m && same_direction(a, b)
        }
    };

    let mut missing = 0u64;
    let mut end = 0usize;
    for s in 0..m {
        end = end.max(s + 1);
        while end < s + m && follows(s, end) {
            end += 1;
        }
        let k = (end - s - 1) as u64;
        missing += k * k.saturating_sub(1) / 2;
    }
    Ok(SimplicialCount {
        containing: total - missing,
        total,
    })
}

/// Planar simplicial depth via the angular sweep.
pub fn simplicial_depth_fast2d(x: &[f64], data: &Dataset) -> Result<f64> {
    simplicial_count_fast2d(x, data).map(SimplicialCount::value)
}

/// `[1 + (x − μ) Σ⁻¹ (x − μ)ᵀ]⁻¹`.
pub fn mahalanobis_depth(x: &[f64], mu: &[f64], sigma: &Matrix) -> Result<f64> {
    crate::numerics::quad_form_inv(x, mu, sigma).map(|q| 1.0 / (1.0 + q))
}

fn mahalanobis_with(x: &[f64], mean: &[f64], chol: &Cholesky) -> f64 {
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    1.0 / (1.0 + chol.inv_quad_form(&diff))
}

/// A depth function that can be evaluated at arbitrary points.
pub trait DepthFunction: Sync {
    fn dim(&self) -> usize;
    fn kind(&self) -> DepthKind;
    fn depth(&self, x: &[f64]) -> Result<f64>;

    /// Depths of every row of `points`, in row order.
    fn depth_many(&self, points: &Dataset) -> Result<Vec<f64>> {
        check_dim(self.dim(), points.dim())?;
        (0..points.len())
            .into_par_iter()
            .map(|i| self.depth(points.row(i)))
            .collect()
    }
}

/// Depth with respect to a frozen reference sample.
///
/// For Mahalanobis depth the sample mean and covariance factor are computed
/// once at construction.
#[derive(Clone, Debug)]
pub struct SampleDepth {
    kind: DepthKind,
    reference: Dataset,
    moments: Option<(Vec<f64>, Cholesky)>,
}

impl SampleDepth {
    pub fn new(reference: Dataset, kind: DepthKind) -> Result<Self> {
        let needed = reference.dim() + 1;
        if reference.len() < needed {
            return Err(Error::TooFewPoints {
                needed,
                found: reference.len(),
            });
        }
        let moments = match kind {
            DepthKind::Mahalanobis => {
                let (mean, cov) = sample_cov(&reference)?;
                Some((mean, cholesky(&cov).map_err(|_| Error::DegenerateSample)?))
            }
            _ => None,
        };
        Ok(Self {
            kind,
            reference,
            moments,
        })
    }

    pub fn reference(&self) -> &Dataset {
        &self.reference
    }

    /// Sample mean and covariance factor (Mahalanobis only).
    pub fn moments(&self) -> Option<(&[f64], &Cholesky)> {
        self.moments.as_ref().map(|(m, c)| (m.as_slice(), c))
    }

    /// Depth of each reference point with respect to the reference sample.
    pub fn reference_depths(&self) -> Result<Vec<f64>> {
        self.depth_many(&self.reference)
    }

    /// Depth that ignores every simplex having a vertex equal to `x`, still
    /// normalised by `C(n, p+1)`.
    ///
    /// A closed simplex always contains its own vertices, so a reference
    /// point gets `C(n−1, p)` containing simplices for free. Dropping them
    /// puts reference points on the same footing as new observations; for
    /// any `x` not in the reference sample this equals [`depth`]. Mahalanobis
    /// depth is returned unchanged.
    ///
    /// [`depth`]: DepthFunction::depth
    pub fn off_vertex_depth(&self, x: &[f64]) -> Result<f64> {
        if self.kind == DepthKind::Mahalanobis {
            return self.depth(x);
        }
        check_dim(self.reference.dim(), x.len())?;
        let count = if self.kind == DepthKind::Simplicial && self.reference.dim() == 2 {
            simplicial_count_fast2d(x, &self.reference)?
        } else {
            simplicial_count_naive(x, &self.reference)?
        };
        let (n, p) = (self.reference.len() as u64, self.reference.dim() as u64);
        let equal = self.reference.rows().filter(|r| *r == x).count() as u64;
        let with_vertex = count.total - binomial(n - equal, p + 1);
        Ok(SimplicialCount {
            containing: count.containing - with_vertex,
            total: count.total,
        }
        .value())
    }

    /// [`off_vertex_depth`](Self::off_vertex_depth) of every row, in row order.
    pub fn off_vertex_depth_many(&self, points: &Dataset) -> Result<Vec<f64>> {
        check_dim(self.reference.dim(), points.dim())?;
        (0..points.len())
            .into_par_iter()
            .map(|i| self.off_vertex_depth(points.row(i)))
            .collect()
    }
}

impl DepthFunction for SampleDepth {
    fn dim(&self) -> usize {
        self.reference.dim()
    }

    fn kind(&self) -> DepthKind {
        self.kind
    }

    fn depth(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.reference.dim(), x.len())?;
        match (self.kind, &self.moments) {
            (DepthKind::Mahalanobis, Some((mean, chol))) => Ok(mahalanobis_with(x, mean, chol)),
            (DepthKind::Simplicial, _) if self.reference.dim() == 2 => {
                simplicial_depth_fast2d(x, &self.reference)
            }
            _ => simplicial_depth_naive(x, &self.reference),
        }
    }
}

/// Depth of `x` with respect to the sample `data`.
pub fn depth_wrt_sample(x: &[f64], data: &Dataset, kind: DepthKind) -> Result<f64> {
    match kind {
        DepthKind::Mahalanobis => {
            let (mean, cov) = sample_cov(data)?;
            check_dim(data.dim(), x.len())?;
            mahalanobis_depth(x, &mean, &cov)
        }
        DepthKind::Simplicial if data.dim() == 2 => simplicial_depth_fast2d(x, data),
        _ => simplicial_depth_naive(x, data),
    }
}

/// Mahalanobis depth under a distribution with known mean and covariance.
#[derive(Clone, Debug)]
pub struct PopulationDepth {
    dist: Distribution,
    mean: Vec<f64>,
    chol: Cholesky,
}

impl PopulationDepth {
    pub fn new(dist: &Distribution, kind: DepthKind) -> Result<Self> {
        if kind != DepthKind::Mahalanobis {
            return Err(Error::Unsupported(format!(
                "population {} depth has no closed form",
                kind.tag()
            )));
        }
        let (mean, cov) = dist.moments().ok_or_else(|| {
            Error::Unsupported(format!(
                "the {} distribution has no mean and covariance",
                dist.tag()
            ))
        })?;
        Ok(Self {
            dist: dist.clone(),
            mean,
            chol: cholesky(&cov)?,
        })
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }
}

impl DepthFunction for PopulationDepth {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn kind(&self) -> DepthKind {
        DepthKind::Mahalanobis
    }

    fn depth(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.mean.len(), x.len())?;
        Ok(mahalanobis_with(x, &self.mean, &self.chol))
    }
}

/// Population depth of `x` under `dist`.
pub fn population_depth(x: &[f64], dist: &Distribution, kind: DepthKind) -> Result<f64> {
    PopulationDepth::new(dist, kind)?.depth(x)
}
