//! Depth order statistics and the spacings built from them.
//!
//! With sample depths sorted as `Ẑ[1] ≥ … ≥ Ẑ[n]`, spacing `i` is the shell
//! `{x : Ẑ[i−1] ≥ D(x) > Ẑ[i]}` for `i = 1..=n` (with `Ẑ[0]` the supremum of
//! the depth) and the outermost spacing `n + 1` is `{x : D(x) ≤ Ẑ[n]}`.
//! A point whose depth equals `Ẑ[i]` belongs to a later spacing than `i`.

use rand::Rng;

use crate::data::Dataset;
use crate::depth::{DepthFunction, DepthKind, SampleDepth};
use crate::error::{Error, Result};
use crate::numerics::{chi_square_cdf, sampling::standard_exponential, Distribution};

/// Sample indices sorted by descending depth; ties by ascending index.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthOrder {
    ranked: Vec<(usize, f64)>,
}

impl DepthOrder {
    /// Orders indices `0..depths.len()` by their depth.
    pub fn from_depths(depths: &[f64]) -> Self {
        let mut ranked: Vec<(usize, f64)> = depths.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self { ranked }
    }

    /// `(index, depth)` pairs, deepest first.
    pub fn ranked(&self) -> &[(usize, f64)] {
        &self.ranked
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    /// `Ẑ[rank]` for a 1-based rank.
    pub fn depth_at_rank(&self, rank: usize) -> f64 {
        self.ranked[rank - 1].1
    }

    /// Sample index of `X[rank]` for a 1-based rank.
    pub fn index_at_rank(&self, rank: usize) -> usize {
        self.ranked[rank - 1].0
    }

    /// 1-based rank of every sample index.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.ranked.len()];
        for (pos, &(idx, _)) in self.ranked.iter().enumerate() {
            ranks[idx] = pos + 1;
        }
        ranks
    }

    /// Depth values in descending order.
    pub fn depths_desc(&self) -> Vec<f64> {
        self.ranked.iter().map(|&(_, d)| d).collect()
    }

    /// 1-based index of the spacing whose membership rule `depth` satisfies.
    pub fn spacing_index(&self, depth: f64) -> usize {
        self.ranked.partition_point(|&(_, z)| z >= depth) + 1
    }
}

/// Depth order of a sample with respect to itself.
pub fn depth_order(data: &Dataset, kind: DepthKind) -> Result<DepthOrder> {
    let depth = SampleDepth::new(data.clone(), kind)?;
    Ok(DepthOrder::from_depths(&depth.reference_depths()?))
}

/// Depth order of `data` under an arbitrary depth function.
pub fn depth_order_with<D: DepthFunction + ?Sized>(depth: &D, data: &Dataset) -> Result<DepthOrder> {
    Ok(DepthOrder::from_depths(&depth.depth_many(data)?))
}

/// Upper end of a spacing's depth interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpperBound {
    /// The supremum of the depth; contains every depth value.
    Top,
    Depth(f64),
}

/// One shell of the multivariate spacings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spacing {
    /// 1-based position, `1..=n+1`.
    pub index: usize,
    pub upper: UpperBound,
    pub lower: f64,
    /// The outermost spacing uses `D ≤ upper` and includes depth zero.
    pub outermost: bool,
}

impl Spacing {
    pub fn contains_depth(&self, depth: f64) -> bool {
        if self.outermost {
            return match self.upper {
                UpperBound::Top => true,
                UpperBound::Depth(u) => depth <= u,
            };
        }
        let below_upper = match self.upper {
            UpperBound::Top => true,
            UpperBound::Depth(u) => depth <= u,
        };
        below_upper && depth > self.lower
    }

    /// True when no depth value can satisfy the rule.
    pub fn is_empty(&self) -> bool {
        match self.upper {
            UpperBound::Depth(u) if !self.outermost => u <= self.lower,
            _ => false,
        }
    }
}

/// The `n + 1` spacings defined by a depth order.
pub fn multivariate_spacings(order: &DepthOrder) -> Vec<Spacing> {
    let z = order.depths_desc();
    let n = z.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 1..=n {
        out.push(Spacing {
            index: i,
            upper: if i == 1 {
                UpperBound::Top
            } else {
                UpperBound::Depth(z[i - 2])
            },
            lower: z[i - 1],
            outermost: false,
        });
    }
    out.push(Spacing {
        index: n + 1,
        upper: if n == 0 {
            UpperBound::Top
        } else {
            UpperBound::Depth(z[n - 1])
        },
        lower: 0.0,
        outermost: true,
    });
    out
}

/// A Monte-Carlo proportion with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub reps: usize,
}

impl Estimate {
    pub fn from_hits(hits: usize, reps: usize) -> Self {
        let value = hits as f64 / reps as f64;
        Self {
            value,
            std_error: (value * (1.0 - value) / reps as f64).sqrt(),
            reps,
        }
    }
}

/// Monte-Carlo estimate of `P_F(spacing)` where membership is judged by
/// `depth` (a population depth, or a sample depth on a frozen reference).
pub fn spacing_coverage<D, R>(
    spacing: &Spacing,
    depth: &D,
    dist: &Distribution,
    reps: usize,
    rng: &mut R,
) -> Result<Estimate>
where
    D: DepthFunction + ?Sized,
    R: Rng + ?Sized,
{
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    if depth.dim() != dist.dim() {
        return Err(Error::DimensionMismatch {
            expected: depth.dim(),
            found: dist.dim(),
        });
    }
    let mut x = vec![0.0; dist.dim()];
    let mut hits = 0;
    for _ in 0..reps {
        dist.draw_into(rng, &mut x);
        if spacing.contains_depth(depth.depth(&x)?) {
            hits += 1;
        }
    }
    Ok(Estimate::from_hits(hits, reps))
}

/// `P(D_F(X) > z)` for `X ~ N(μ, Σ)` in `p` dimensions and the population
/// Mahalanobis depth: the event is `(X−μ)Σ⁻¹(X−μ)ᵀ < 1/z − 1`.
pub fn normal_mass_above(z: f64, p: usize) -> f64 {
    if z >= 1.0 {
        0.0
    } else if z <= 0.0 {
        1.0
    } else {
        chi_square_cdf(p, 1.0 / z - 1.0)
    }
}

/// Exact coverage of a spacing defined by the population Mahalanobis depth
/// of a normal distribution.
pub fn spacing_coverage_normal(spacing: &Spacing, dist: &Distribution) -> Result<f64> {
    if !dist.is_normal() {
        return Err(Error::Unsupported(format!(
            "closed-form spacing coverage needs a normal distribution, got {}",
            dist.tag()
        )));
    }
    let p = dist.dim();
    let above_upper = match spacing.upper {
        UpperBound::Top => 0.0,
        UpperBound::Depth(u) => normal_mass_above(u, p),
    };
    let above_lower = if spacing.outermost {
        1.0
    } else {
        normal_mass_above(spacing.lower, p)
    };
    Ok((above_lower - above_upper).max(0.0))
}

/// Gaps between consecutive order statistics of a univariate sample,
/// including the two end gaps to the support boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateSpacings {
    pub support: (f64, f64),
    /// Order statistics `X[1] ≤ … ≤ X[n]`.
    pub points: Vec<f64>,
    /// `D_i = X[i] − X[i−1]` for `i = 1..=n+1`, with `X[0] = a`, `X[n+1] = b`.
    pub gaps: Vec<f64>,
}

impl UnivariateSpacings {
    /// The intervals `L_i = (X[i−1], X[i])`.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let (a, b) = self.support;
        let mut bounds = Vec::with_capacity(self.points.len() + 2);
        bounds.push(a);
        bounds.extend_from_slice(&self.points);
        bounds.push(b);
        bounds.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Univariate spacings of an already sorted sample on the support `(a, b)`.
///
/// Unsorted input or points outside the support are rejected.
pub fn univariate_spacings(sorted: &[f64], support: (f64, f64)) -> Result<UnivariateSpacings> {
    let (a, b) = support;
    if !(a <= b) {
        return Err(Error::SupportViolation(format!("empty support ({a}, {b})")));
    }
    if let Some(w) = sorted.windows(2).find(|w| !(w[0] <= w[1])) {
        return Err(Error::SupportViolation(format!(
            "sample is not sorted ({} before {})",
            w[0], w[1]
        )));
    }
    if let (Some(&lo), Some(&hi)) = (sorted.first(), sorted.last()) {
        if lo < a || hi > b {
            return Err(Error::SupportViolation(format!(
                "sample range [{lo}, {hi}] exceeds support ({a}, {b})"
            )));
        }
    }
    let mut gaps = Vec::with_capacity(sorted.len() + 1);
    let mut prev = a;
    for &x in sorted {
        gaps.push(x - prev);
        prev = x;
    }
    gaps.push(b - prev);
    Ok(UnivariateSpacings {
        support,
        points: sorted.to_vec(),
        gaps,
    })
}

/// Uniform spacings for `n` points realised as normalised exponentials
/// `W_i = U_i / ΣU_j`; the last gap absorbs rounding so the gaps sum to one.
pub fn exponential_spacings<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnivariateSpacings {
    let u: Vec<f64> = (0..=n).map(|_| standard_exponential(rng)).collect();
    let total: f64 = u.iter().sum();
    let mut gaps: Vec<f64> = u[..n].iter().map(|v| v / total).collect();
    let head: f64 = gaps.iter().sum();
    gaps.push((1.0 - head).max(0.0));
    let points = gaps[..n]
        .iter()
        .scan(0.0, |acc, g| {
            *acc += g;
            Some(*acc)
        })
        .collect();
    UnivariateSpacings {
        support: (0.0, 1.0),
        points,
        gaps,
    }
}

/// Wilks' interval `(X[r], X[n−r+1]]` for `1 ≤ r < (n+1)/2`.
pub fn wilks_interval(data: &[f64], r: usize) -> Result<(f64, f64)> {
    let n = data.len();
    if r < 1 || 2 * r > n {
        return Err(Error::Domain(format!(
            "Wilks interval needs 1 <= r < (n+1)/2 (r={r}, n={n})"
        )));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((sorted[r - 1], sorted[n - r]))
}
