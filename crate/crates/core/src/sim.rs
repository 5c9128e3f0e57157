//! Monte-Carlo harness: repeated fit-and-evaluate simulation of tolerance
//! regions and checks of the exact coverage laws.
//!
//! Replication `i` draws from the stream `RngState::new(seed, 0).derive(i)`,
//! so results do not depend on how replications are scheduled.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use statrs::statistics::{Data, Median, Statistics};

use crate::depth::{DepthFunction, DepthKind, PopulationDepth};
use crate::error::{Error, Result};
use crate::numerics::{beta_cdf, beta_mean, sample_dist, Distribution, RngState};
use crate::spacings::{
    depth_order_with, multivariate_spacings, normal_mass_above, spacing_coverage_normal, wilks_interval,
};
use crate::tolerance::{
    fit_region, fit_region_with_plan, minimality_gap, plan_region, population_region, GapEstimate, RegionPlan,
    ToleranceKind, ToleranceSpec,
};

/// Where the Step-2 evaluation points come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// `m` fresh samples of `eval_size` points each.
    Fresh,
    /// Reuse the fitting sample itself (bookkeeping check).
    FittingSample,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub dist: Distribution,
    pub kind: DepthKind,
    pub n: usize,
    /// Evaluation samples per replication.
    pub m: usize,
    /// Number of replications.
    pub big_m: usize,
    pub spec: ToleranceSpec,
    pub seed: u64,
    /// Size of each evaluation sample; defaults to `n`.
    pub eval_size: usize,
    pub evaluation: Evaluation,
}

impl SimConfig {
    pub fn new(
        dist: Distribution,
        kind: DepthKind,
        n: usize,
        m: usize,
        big_m: usize,
        spec: ToleranceSpec,
        seed: u64,
    ) -> Result<Self> {
        let config = Self {
            dist,
            kind,
            n,
            m,
            big_m,
            spec,
            seed,
            eval_size: n,
            evaluation: Evaluation::Fresh,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.dist.moments().is_none() && self.kind == DepthKind::Mahalanobis {
            return Err(Error::Unsupported(format!(
                "mahalanobis depth needs finite moments; use simplicial depth for the {} distribution",
                self.dist.tag()
            )));
        }
        let needed = self.dist.dim() + 1;
        if self.n < needed {
            return Err(Error::TooFewPoints {
                needed,
                found: self.n,
            });
        }
        if self.m == 0 || self.big_m == 0 || self.eval_size == 0 {
            return Err(Error::Domain("m, M and the evaluation size must be positive".into()));
        }
        plan_region(self.n, &self.spec).map(|_| ())
    }

    pub fn plan(&self) -> Result<RegionPlan> {
        plan_region(self.n, &self.spec)
    }

    fn rep_state(&self, rep: u64) -> RngState {
        RngState::new(self.seed, 0).derive(rep)
    }
}

/// One replication: fit on a fresh sample, then average the in-region
/// fraction over `m` evaluation samples.
pub fn run_replication(config: &SimConfig, rep: u64) -> Result<f64> {
    let plan = config.plan()?;
    run_with_plan(config, plan, rep)
}

fn run_with_plan(config: &SimConfig, plan: RegionPlan, rep: u64) -> Result<f64> {
    let mut rng = config.rep_state(rep).to_rng();
    let data = sample_dist(&config.dist, config.n, &mut rng);
    let region = fit_region_with_plan(&data, plan, config.kind)?;
    let threshold = region.threshold();
    let mut total = 0.0;
    for _ in 0..config.m {
        let eval = match config.evaluation {
            Evaluation::Fresh => sample_dist(&config.dist, config.eval_size, &mut rng),
            Evaluation::FittingSample => data.clone(),
        };
        let inside = region.depth_many(&eval)?.iter().filter(|&&d| d > threshold).count();
        total += inside as f64 / eval.len() as f64;
    }
    Ok(total / config.m as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub r_n: usize,
    /// Fraction of `β̄ > β` (content) or mean of `β̄` (expectation).
    pub estimate: f64,
    pub std_error: f64,
    /// `β̄` of every replication, in replication order.
    pub beta_bars: Vec<f64>,
    /// Wall time; not part of the reproducible result.
    pub elapsed: Duration,
}

impl SimulationReport {
    pub fn gamma_hat(&self) -> Option<f64> {
        (self.config.spec.kind == ToleranceKind::Content).then_some(self.estimate)
    }

    pub fn beta_hat(&self) -> Option<f64> {
        (self.config.spec.kind == ToleranceKind::Expectation).then_some(self.estimate)
    }

    /// Equality of everything except the wall time.
    pub fn same_result(&self, other: &Self) -> bool {
        self.config == other.config
            && self.r_n == other.r_n
            && self.estimate == other.estimate
            && self.std_error == other.std_error
            && self.beta_bars == other.beta_bars
    }
}

/// All `M` replications and the Step-4 estimate.
pub fn run_simulation(config: &SimConfig) -> Result<SimulationReport> {
    config.validate()?;
    let start = Instant::now();
    let plan = config.plan()?;
    let beta_bars: Vec<f64> = (0..config.big_m as u64)
        .into_par_iter()
        .map(|rep| run_with_plan(config, plan, rep))
        .collect::<Result<_>>()?;
    let big_m = beta_bars.len() as f64;
    let (estimate, std_error) = match config.spec.kind {
        ToleranceKind::Content => {
            let beta = config.spec.beta;
            let g = beta_bars.iter().filter(|&&b| b > beta).count() as f64 / big_m;
            (g, (g * (1.0 - g) / big_m).sqrt())
        }
        ToleranceKind::Expectation => {
            let (mean, sd) = mean_sd(&beta_bars);
            (mean, sd / big_m.sqrt())
        }
    };
    Ok(SimulationReport {
        config: config.clone(),
        r_n: plan.r_n,
        estimate,
        std_error,
        beta_bars,
        elapsed: start.elapsed(),
    })
}

/// Mean and sample standard deviation (divisor `len − 1`).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let mean = values.mean();
    if values.len() < 2 {
        return (mean, 0.0);
    }
    (mean, values.std_dev())
}

/// Sample median; NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    Data::new(values.to_vec()).median()
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Outcome of comparing simulated coverages with a Beta law.
#[derive(Clone, Debug, PartialEq)]
pub struct LawCheck {
    pub ks: f64,
    pub mean: f64,
    pub expected_mean: f64,
    /// Standard deviation of the Beta law divided by `√M`.
    pub std_error: f64,
    pub coverages: Vec<f64>,
}

impl LawCheck {
    fn new(coverages: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        let ks = ks_distance(&coverages, |x| beta_cdf(a, b, x.clamp(0.0, 1.0)).unwrap_or(f64::NAN));
        let (mean, _) = mean_sd(&coverages);
        let sd = (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt();
        Ok(Self {
            ks,
            mean,
            expected_mean: beta_mean(a, b)?,
            std_error: sd / (coverages.len() as f64).sqrt(),
            coverages,
        })
    }

    /// `|mean − expected| ≤ k·SE`.
    pub fn mean_within(&self, k: f64) -> bool {
        (self.mean - self.expected_mean).abs() <= k * self.std_error
    }
}

/// Coverage of `{D_F > Z[r]}` over `reps` bivariate standard normal samples
/// of size `n`, with the exact χ²(2) coverage per sample, against
/// `Beta(r, n+1−r)`.
pub fn verify_beta_law(n: usize, r: usize, reps: usize, state: RngState) -> Result<LawCheck> {
    if r < 1 || r > n || reps == 0 {
        return Err(Error::Domain(format!(
            "need 1 <= r <= n and M >= 1 (r={r}, n={n}, M={reps})"
        )));
    }
    let dist = Distribution::StdNormal;
    let pop = PopulationDepth::new(&dist, DepthKind::Mahalanobis)?;
    let coverages: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let data = sample_dist(&dist, n, &mut state.derive(rep).to_rng());
            let z = depth_order_with(&pop, &data)?.depth_at_rank(r);
            Ok(normal_mass_above(z, pop.dim()))
        })
        .collect::<Result<_>>()?;
    LawCheck::new(coverages, r as f64, (n + 1 - r) as f64)
}

/// Coverage of Wilks' interval `(X[r], X[n−r+1]]` for uniform samples, which
/// is `X[n−r+1] − X[r]`, against `Beta(n−2r+1, 2r)`.
pub fn verify_wilks(n: usize, r: usize, reps: usize, state: RngState) -> Result<LawCheck> {
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let coverages: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = state.derive(rep).to_rng();
            let u: Vec<f64> = (0..n).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
            let (lo, hi) = wilks_interval(&u, r)?;
            Ok(hi - lo)
        })
        .collect::<Result<_>>()?;
    LawCheck::new(coverages, (n + 1 - 2 * r) as f64, (2 * r) as f64)
}

/// Coverage of the innermost spacing `{D_F > Z[1]}` over `reps` bivariate
/// standard normal samples of size `n`, against `Beta(1, n)`.
pub fn verify_spacing_law(n: usize, reps: usize, state: RngState) -> Result<LawCheck> {
    if n == 0 || reps == 0 {
        return Err(Error::Domain(format!("need n >= 1 and M >= 1 (n={n}, M={reps})")));
    }
    let dist = Distribution::StdNormal;
    let pop = PopulationDepth::new(&dist, DepthKind::Mahalanobis)?;
    let coverages: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let data = sample_dist(&dist, n, &mut state.derive(rep).to_rng());
            let spacings = multivariate_spacings(&depth_order_with(&pop, &data)?);
            spacing_coverage_normal(&spacings[0], &dist)
        })
        .collect::<Result<_>>()?;
    LawCheck::new(coverages, 1.0, n as f64)
}

/// Symmetric-difference gaps between fitted Mahalanobis expectation regions
/// and the population region, one per replication.
///
/// Replication `i` fits a sample of size `n` drawn from
/// `RngState::new(seed, 0).derive(i)` and probes with the same stream.
pub fn minimality_study(
    dist: &Distribution,
    n: usize,
    beta: f64,
    reps: usize,
    probes: usize,
    seed: u64,
) -> Result<Vec<GapEstimate>> {
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    // Fails early for distributions without a closed-form population region.
    population_region(dist, beta, DepthKind::Mahalanobis)?;
    let spec = ToleranceSpec::expectation(beta)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngState::new(seed, 0).derive(rep).to_rng();
            let data = sample_dist(dist, n, &mut rng);
            let region = fit_region(&data, &spec, DepthKind::Mahalanobis)?;
            minimality_gap(&region, dist, probes, &mut rng)
        })
        .collect()
}
