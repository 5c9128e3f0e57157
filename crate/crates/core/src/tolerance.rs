//! Tolerance regions built from the inner depth spacings.
//!
//! A fitted region is `{x : D_Fn(x) > Ẑ[r_n]}`, the union of the `r_n`
//! innermost sample spacings with the boundary shell excluded. Under a
//! continuous `F` its coverage follows `Beta(r_n, n + 1 − r_n)`, which is what
//! both planners invert.
//!
//! Regions measure depth with [`SampleDepth::off_vertex_depth`]: for
//! simplicial depth a reference point is not credited with the simplices it
//! spans itself, so the threshold taken from reference points is on the same
//! scale as the depth of new observations. Mahalanobis depth is unaffected.

use std::f64::consts::PI;

use rand::Rng;

use crate::data::Dataset;
use crate::depth::{DepthFunction, DepthKind, PopulationDepth, SampleDepth};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull_2d, Polygon2D};
use crate::numerics::{beta_mean, beta_tail, normal_quantile, Distribution};
use crate::spacings::{normal_mass_above, DepthOrder, Estimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ToleranceKind {
    /// Covers at least `β` of the distribution with confidence `γ`.
    Content,
    /// Covers `β` of the distribution on average.
    Expectation,
}

impl ToleranceKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Content => "content",
            Self::Expectation => "expectation",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "content" => Ok(Self::Content),
            "expectation" => Ok(Self::Expectation),
            other => Err(Error::Domain(format!(
                "unknown tolerance kind '{other}' (expected content or expectation)"
            ))),
        }
    }
}

/// Requested tolerance goal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceSpec {
    pub beta: f64,
    /// Confidence level; present exactly for the content kind.
    pub gamma: Option<f64>,
    pub kind: ToleranceKind,
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl ToleranceSpec {
    pub fn content(beta: f64, gamma: f64) -> Result<Self> {
        let spec = Self {
            beta,
            gamma: Some(gamma),
            kind: ToleranceKind::Content,
        };
        spec.validate().map(|_| spec)
    }

    pub fn expectation(beta: f64) -> Result<Self> {
        let spec = Self {
            beta,
            gamma: None,
            kind: ToleranceKind::Expectation,
        };
        spec.validate().map(|_| spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("beta", self.beta)?;
        match (self.kind, self.gamma) {
            (ToleranceKind::Content, Some(g)) => check_open_unit("gamma", g),
            (ToleranceKind::Content, None) => {
                Err(Error::Domain("content regions need a confidence level gamma".into()))
            }
            (ToleranceKind::Expectation, None) => Ok(()),
            (ToleranceKind::Expectation, Some(_)) => Err(Error::Domain(
                "gamma only applies to content regions".into(),
            )),
        }
    }
}

/// The number of inner spacings to keep for a given sample size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionPlan {
    pub spec: ToleranceSpec,
    pub n: usize,
    pub r_n: usize,
    /// `P(Beta(r_n, n+1−r_n) ≥ β)` for content plans.
    pub chosen_tail_prob: Option<f64>,
    /// `r_n / (n + 1)`, the expected coverage.
    pub achieved_mean: f64,
}

impl RegionPlan {
    /// A plan with an explicit `r_n`, recorded as an expectation plan for
    /// its own expected coverage.
    pub fn fixed(n: usize, r_n: usize) -> Result<Self> {
        if n == 0 || r_n < 1 || r_n > n {
            return Err(Error::Domain(format!("need 1 <= r_n <= n (r_n={r_n}, n={n})")));
        }
        let achieved_mean = beta_mean(r_n as f64, (n + 1 - r_n) as f64)?;
        Ok(Self {
            spec: ToleranceSpec {
                beta: achieved_mean,
                gamma: None,
                kind: ToleranceKind::Expectation,
            },
            n,
            r_n,
            chosen_tail_prob: None,
            achieved_mean,
        })
    }

    fn with_r(spec: ToleranceSpec, n: usize, r_n: usize, tail: Option<f64>) -> Result<Self> {
        Ok(Self {
            spec,
            n,
            r_n,
            chosen_tail_prob: tail,
            achieved_mean: beta_mean(r_n as f64, (n + 1 - r_n) as f64)?,
        })
    }
}

/// `P(Beta(r, n+1−r) ≥ β)`: the chance that `r` inner spacings cover `β`.
pub fn coverage_tail(n: usize, r: usize, beta: f64) -> Result<f64> {
    beta_tail(r as f64, (n + 1 - r) as f64, beta)
}

/// `r_n = round((n+1)β)` (halves up), clamped to `[1, n]`.
pub fn plan_expectation(n: usize, beta: f64) -> Result<RegionPlan> {
    let spec = ToleranceSpec::expectation(beta)?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let raw = ((n + 1) as f64 * beta + 0.5).floor();
    let r_n = (raw as usize).clamp(1, n);
    RegionPlan::with_r(spec, n, r_n, None)
}

/// Normal-approximation start `nβ + ξ_γ√(nβ(1−β))`, then whichever of its
/// floor and ceiling has Beta tail closest to `γ` (the larger on a tie).
pub fn plan_content(n: usize, beta: f64, gamma: f64) -> Result<RegionPlan> {
    let spec = ToleranceSpec::content(beta, gamma)?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let best = coverage_tail(n, n, beta)?;
    if best < gamma - 0.5 {
        return Err(Error::Infeasible(format!(
            "with n={n} even the full sample covers beta={beta} only with probability {best:.4}"
        )));
    }
    let nf = n as f64;
    let raw = nf * beta + normal_quantile(gamma)? * (nf * beta * (1.0 - beta)).sqrt();
    let lo = (raw.floor().max(1.0) as usize).min(n);
    let hi = (raw.ceil().max(1.0) as usize).min(n);
    let (t_lo, t_hi) = (coverage_tail(n, lo, beta)?, coverage_tail(n, hi, beta)?);
    let (r_n, tail) = if (t_lo - gamma).abs() < (t_hi - gamma).abs() {
        (lo, t_lo)
    } else {
        (hi, t_hi)
    };
    RegionPlan::with_r(spec, n, r_n, Some(tail))
}

pub fn plan_region(n: usize, spec: &ToleranceSpec) -> Result<RegionPlan> {
    spec.validate()?;
    match spec.kind {
        ToleranceKind::Expectation => plan_expectation(n, spec.beta),
        ToleranceKind::Content => plan_content(n, spec.beta, spec.gamma.unwrap_or_default()),
    }
}

/// Membership oracle shared by fitted and population regions.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> Result<bool>;

    /// Exact `P_F(region)` when a closed form is known for `dist`.
    fn exact_coverage(&self, _dist: &Distribution) -> Option<f64> {
        None
    }
}

/// A tolerance region fitted to a sample.
#[derive(Clone, Debug)]
pub struct ToleranceRegion {
    plan: RegionPlan,
    threshold: f64,
    depth: SampleDepth,
    retained: Vec<usize>,
    hull: Option<Polygon2D>,
}

/// Fits the region planned from `spec` to `data`.
pub fn fit_region(data: &Dataset, spec: &ToleranceSpec, kind: DepthKind) -> Result<ToleranceRegion> {
    let plan = plan_region(data.len(), spec)?;
    fit_region_with_plan(data, plan, kind)
}

/// Fits a region with a prescribed plan; `plan.n` must equal the sample size.
pub fn fit_region_with_plan(data: &Dataset, plan: RegionPlan, kind: DepthKind) -> Result<ToleranceRegion> {
    if plan.n != data.len() {
        return Err(Error::Domain(format!(
            "plan is for n={} but the sample has {} points",
            plan.n,
            data.len()
        )));
    }
    let depth = SampleDepth::new(data.clone(), kind)?;
    let order = DepthOrder::from_depths(&depth.off_vertex_depth_many(data)?);
    let threshold = order.depth_at_rank(plan.r_n);
    build_region(depth, &order, plan, threshold)
}

fn build_region(depth: SampleDepth, order: &DepthOrder, plan: RegionPlan, threshold: f64) -> Result<ToleranceRegion> {
    let mut retained: Vec<usize> = order
        .ranked()
        .iter()
        .take_while(|&&(_, d)| d > threshold)
        .map(|&(i, _)| i)
        .collect();
    retained.sort_unstable();
    let reference = depth.reference();
    let hull = if reference.dim() == 2 && !retained.is_empty() {
        let pts: Vec<[f64; 2]> = retained
            .iter()
            .map(|&i| {
                let r = reference.row(i);
                [r[0], r[1]]
            })
            .collect();
        Some(convex_hull_2d(&pts)?)
    } else {
        None
    };
    Ok(ToleranceRegion {
        plan,
        threshold,
        depth,
        retained,
        hull,
    })
}

/// Allowed drift of a stored Mahalanobis threshold on reload.
pub const THRESHOLD_RELOAD_TOL: f64 = 1e-12;

impl ToleranceRegion {
    /// Rebuilds a stored region, checking that `threshold` is still the
    /// `r_n`-th largest reference depth (exactly for simplicial depth, within
    /// [`THRESHOLD_RELOAD_TOL`] for Mahalanobis).
    pub fn from_parts(reference: Dataset, kind: DepthKind, plan: RegionPlan, threshold: f64) -> Result<Self> {
        if plan.n != reference.len() || plan.r_n < 1 || plan.r_n > plan.n {
            return Err(Error::Domain(format!(
                "plan (n={}, r_n={}) does not fit a reference of {} points",
                plan.n,
                plan.r_n,
                reference.len()
            )));
        }
        let depth = SampleDepth::new(reference, kind)?;
        let order = DepthOrder::from_depths(&depth.off_vertex_depth_many(depth.reference())?);
        let expected = order.depth_at_rank(plan.r_n);
        // Simplicial depths are count ratios and must match exactly.
        let slack = if kind.is_simplicial() { 0.0 } else { THRESHOLD_RELOAD_TOL };
        if !((expected - threshold).abs() <= slack) {
            return Err(Error::Domain(format!(
                "stored threshold {threshold} differs from the recomputed {expected}"
            )));
        }
        build_region(depth, &order, plan, expected)
    }

    pub fn plan(&self) -> &RegionPlan {
        &self.plan
    }

    pub fn kind(&self) -> DepthKind {
        self.depth.kind()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn reference(&self) -> &Dataset {
        self.depth.reference()
    }

    pub fn depth_function(&self) -> &SampleDepth {
        &self.depth
    }

    /// Sample indices with depth strictly above the threshold, ascending.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// Hull of the retained points (2-D only, and only when some are retained).
    pub fn hull(&self) -> Option<&Polygon2D> {
        self.hull.as_ref()
    }

    /// Region depth of `x` with respect to the reference sample.
    pub fn depth(&self, x: &[f64]) -> Result<f64> {
        self.depth.off_vertex_depth(x)
    }

    /// Region depth of every row of `points`, in row order.
    pub fn depth_many(&self, points: &Dataset) -> Result<Vec<f64>> {
        self.depth.off_vertex_depth_many(points)
    }
}

impl Region for ToleranceRegion {
    fn dim(&self) -> usize {
        self.reference().dim()
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.depth(x)? > self.threshold)
    }
}

/// The level set `{x : D_F(x) > η}` of a known population depth.
#[derive(Clone, Debug)]
pub struct PopulationRegion {
    depth: PopulationDepth,
    threshold: f64,
}

/// The population region of coverage `β`: `η` solves `P(D_F(X) > η) = β`.
///
/// Only the bivariate normal with Mahalanobis depth is available, where
/// `η = 1/(1+t)` and `t = −2 ln(1−β)` is the χ²(2) quantile.
pub fn population_region(dist: &Distribution, beta: f64, kind: DepthKind) -> Result<PopulationRegion> {
    check_open_unit("beta", beta)?;
    if kind != DepthKind::Mahalanobis || !dist.is_normal() || dist.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "population region needs a bivariate normal with mahalanobis depth (got {} / {})",
            dist.tag(),
            kind.tag()
        )));
    }
    let t = -2.0 * (-beta).ln_1p();
    PopulationRegion::with_threshold(dist, 1.0 / (1.0 + t))
}

impl PopulationRegion {
    /// The population Mahalanobis level set at an arbitrary threshold.
    pub fn with_threshold(dist: &Distribution, threshold: f64) -> Result<Self> {
        Ok(Self {
            depth: PopulationDepth::new(dist, DepthKind::Mahalanobis)?,
            threshold,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn distribution(&self) -> &Distribution {
        self.depth.distribution()
    }

    /// Squared Mahalanobis radius `t = 1/η − 1` of the boundary ellipsoid.
    pub fn radius_sq(&self) -> f64 {
        if self.threshold <= 0.0 {
            f64::INFINITY
        } else {
            (1.0 / self.threshold - 1.0).max(0.0)
        }
    }

    /// Area of the bivariate ellipse, `π t √det Σ`.
    pub fn area(&self) -> Result<f64> {
        let (_, cov) = self
            .distribution()
            .moments()
            .ok_or_else(|| Error::Unsupported("distribution has no covariance".into()))?;
        if cov.dim() != 2 {
            return Err(Error::Unsupported("area is only available in two dimensions".into()));
        }
        Ok(PI * self.radius_sq() * cov.determinant().sqrt())
    }

    /// Axis-aligned bounding box `[lo, hi]` of the ellipsoid.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mean, cov) = self
            .distribution()
            .moments()
            .ok_or_else(|| Error::Unsupported("distribution has no covariance".into()))?;
        let t = self.radius_sq();
        let half: Vec<f64> = (0..mean.len()).map(|i| (t * cov[(i, i)]).sqrt()).collect();
        Ok((
            mean.iter().zip(&half).map(|(m, h)| m - h).collect(),
            mean.iter().zip(&half).map(|(m, h)| m + h).collect(),
        ))
    }
}

impl Region for PopulationRegion {
    fn dim(&self) -> usize {
        self.depth.dim()
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.depth.depth(x)? > self.threshold)
    }

    fn exact_coverage(&self, dist: &Distribution) -> Option<f64> {
        (dist.is_normal() && dist == self.distribution())
            .then(|| normal_mass_above(self.threshold, dist.dim()))
    }
}

/// `P_F(region)`: exact when a closed form exists (then `reps == 0`),
/// otherwise the in-region fraction of `reps` fresh draws.
pub fn coverage_of_region<G, R>(region: &G, dist: &Distribution, reps: usize, rng: &mut R) -> Result<Estimate>
where
    G: Region + ?Sized,
    R: Rng + ?Sized,
{
    if region.dim() != dist.dim() {
        return Err(Error::DimensionMismatch {
            expected: region.dim(),
            found: dist.dim(),
        });
    }
    if let Some(value) = region.exact_coverage(dist) {
        return Ok(Estimate {
            value,
            std_error: 0.0,
            reps: 0,
        });
    }
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let mut x = vec![0.0; dist.dim()];
    let mut hits = 0;
    for _ in 0..reps {
        dist.draw_into(rng, &mut x);
        if region.contains(&x)? {
            hits += 1;
        }
    }
    Ok(Estimate::from_hits(hits, reps))
}

/// Monte-Carlo area of a symmetric difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    /// Estimated area of `S_n Δ R`.
    pub gap: f64,
    pub std_error: f64,
    pub box_area: f64,
    pub population_area: f64,
    pub probes: usize,
}

impl GapEstimate {
    /// Gap relative to the population region's area.
    pub fn ratio(&self) -> f64 {
        self.gap / self.population_area
    }
}

/// Probe box: the reference bounding box widened by half its width on each
/// side, then enlarged to contain the population region's bounding box.
fn probe_box(region: &ToleranceRegion, pop: &PopulationRegion) -> Result<([f64; 2], [f64; 2])> {
    let data = region.reference();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for row in data.rows() {
        for k in 0..2 {
            lo[k] = lo[k].min(row[k]);
            hi[k] = hi[k].max(row[k]);
        }
    }
    let (plo, phi) = pop.bounding_box()?;
    for k in 0..2 {
        let pad = 0.5 * (hi[k] - lo[k]);
        lo[k] = (lo[k] - pad).min(plo[k]);
        hi[k] = (hi[k] + pad).max(phi[k]);
    }
    Ok((lo, hi))
}

/// `λ(S_n Δ R_{D,β})` for a fitted bivariate region against the population
/// region at the plan's target `β`.
pub fn minimality_gap<R: Rng + ?Sized>(
    region: &ToleranceRegion,
    dist: &Distribution,
    probes: usize,
    rng: &mut R,
) -> Result<GapEstimate> {
    let pop = population_region(dist, region.plan().spec.beta, region.kind())?;
    symmetric_difference_area(region, &pop, probes, rng)
}

/// Monte-Carlo area of `region Δ pop` over the probe box.
pub fn symmetric_difference_area<R: Rng + ?Sized>(
    region: &ToleranceRegion,
    pop: &PopulationRegion,
    probes: usize,
    rng: &mut R,
) -> Result<GapEstimate> {
    if region.dim() != 2 {
        return Err(Error::Unsupported("minimality probing is bivariate only".into()));
    }
    if probes == 0 {
        return Err(Error::Domain("need at least one probe".into()));
    }
    let (lo, hi) = probe_box(region, pop)?;
    let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let mut hits = 0usize;
    for _ in 0..probes {
        let x = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if region.contains(&x)? != pop.contains(&x)? {
            hits += 1;
        }
    }
    let frac = Estimate::from_hits(hits, probes);
    Ok(GapEstimate {
        gap: box_area * frac.value,
        std_error: box_area * frac.std_error,
        box_area,
        population_area: pop.area()?,
        probes,
    })
}

/// Sample-versus-population depth discrepancies at one rank.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthGap {
    /// `|Ẑ[r] − Z[r]|`.
    pub rank_gap: f64,
    /// `max_i |Ẑ_i − Z_i|` over the sample points.
    pub sample_sup: f64,
    /// `max |D_Fn − D_F|` over a 41×41 grid spanning the data (bivariate only).
    pub grid_sup: Option<f64>,
}

impl DepthGap {
    /// Lower estimate of `sup_x |D_Fn(x) − D_F(x)|`.
    pub fn sup_estimate(&self) -> f64 {
        self.grid_sup.map_or(self.sample_sup, |g| g.max(self.sample_sup))
    }

    /// Whether the rank gap stays under the sup estimate (up to 1e-6).
    pub fn bound_holds(&self) -> bool {
        self.rank_gap <= self.sup_estimate() + 1e-6
    }
}

pub const GAP_GRID: usize = 41;

/// Compares the `r`-th largest sample and population Mahalanobis depths of
/// the points of `data`.
pub fn depth_gap(data: &Dataset, dist: &Distribution, r: usize) -> Result<DepthGap> {
    let pop = PopulationDepth::new(dist, DepthKind::Mahalanobis)?;
    let n = data.len();
    if r < 1 || r > n {
        return Err(Error::Domain(format!("rank r={r} outside 1..={n}")));
    }
    let sample = SampleDepth::new(data.clone(), DepthKind::Mahalanobis)?;
    let zs = sample.depth_many(data)?;
    let zp = pop.depth_many(data)?;
    let rank_gap = (DepthOrder::from_depths(&zs).depth_at_rank(r)
        - DepthOrder::from_depths(&zp).depth_at_rank(r))
    .abs();
    let sample_sup = zs.iter().zip(&zp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let grid_sup = if data.dim() == 2 {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for row in data.rows() {
            for k in 0..2 {
                lo[k] = lo[k].min(row[k]);
                hi[k] = hi[k].max(row[k]);
            }
        }
        let step = |k: usize, i: usize| lo[k] + (hi[k] - lo[k]) * i as f64 / (GAP_GRID - 1) as f64;
        let mut sup = 0.0f64;
        for i in 0..GAP_GRID {
            for j in 0..GAP_GRID {
                let x = [step(0, i), step(1, j)];
                sup = sup.max((sample.depth(&x)? - pop.depth(&x)?).abs());
            }
        }
        Some(sup)
    } else {
        None
    };
    Ok(DepthGap {
        rank_gap,
        sample_sup,
        grid_sup,
    })
}
