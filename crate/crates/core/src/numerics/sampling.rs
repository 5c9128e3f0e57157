//! Seedable random sampling for the benchmark distributions.
//!
//! Every draw goes through a [`SimRng`] built from an explicit [`RngState`],
//! so a `(seed, stream)` pair always reproduces the same sample.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{check_dim, cholesky, Cholesky, Matrix};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Generator type used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// A `(seed, stream)` pair identifying one reproducible random sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn to_rng(self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// A child state whose stream is a hash of `(self.stream, id)`.
    pub fn derive(self, id: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(id)),
        }
    }
}

/// The SplitMix64 finaliser; used to spread replication ids over streams.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multivariate normal with a validated covariance.
#[derive(Clone, PartialEq)]
pub struct MultiNormal {
    mean: Vec<f64>,
    cov: Matrix,
    chol: Cholesky,
}

impl MultiNormal {
    pub fn new(mean: Vec<f64>, cov: Matrix) -> Result<Self> {
        check_dim(cov.dim(), mean.len())?;
        let chol = cholesky(&cov)?;
        Ok(Self { mean, cov, chol })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }
}

impl fmt::Debug for MultiNormal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiNormal")
            .field("mean", &self.mean)
            .field("cov", &self.cov)
            .finish()
    }
}

/// The sampling distributions used by the simulations.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    /// Standard bivariate normal N(0, I₂).
    StdNormal,
    /// N(μ, Σ) in any dimension.
    Normal(MultiNormal),
    /// Elliptical standard bivariate Cauchy, `Z / |Z'|` with one shared
    /// scale per draw.
    StdCauchy,
    /// Two independent Exp(1) marginals.
    Exponential,
}

impl Distribution {
    pub fn normal(mean: Vec<f64>, cov: Matrix) -> Result<Self> {
        MultiNormal::new(mean, cov).map(Self::Normal)
    }

    /// Parses the command-line tags `normal`, `cauchy`, `exponential`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "normal" => Ok(Self::StdNormal),
            "cauchy" => Ok(Self::StdCauchy),
            "exponential" => Ok(Self::Exponential),
            other => Err(Error::Domain(format!(
                "unknown distribution '{other}' (expected normal, cauchy or exponential)"
            ))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::StdNormal | Self::Normal(_) => "normal",
            Self::StdCauchy => "cauchy",
            Self::Exponential => "exponential",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Normal(n) => n.mean.len(),
            _ => 2,
        }
    }

    /// Mean vector and covariance, when both exist.
    pub fn moments(&self) -> Option<(Vec<f64>, Matrix)> {
        match self {
            Self::StdNormal => Some((vec![0.0; 2], Matrix::identity(2))),
            Self::Normal(n) => Some((n.mean.clone(), n.cov.clone())),
            Self::Exponential => Some((vec![1.0; 2], Matrix::identity(2))),
            Self::StdCauchy => None,
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Self::StdNormal | Self::Normal(_))
    }

    /// Draws one observation into `out`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            Self::StdNormal => fill_standard_normal(rng, out),
            Self::Normal(n) => {
                let mut z = vec![0.0; out.len()];
                fill_standard_normal(rng, &mut z);
                let l = n.chol.factor();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = n.mean[i] + (0..=i).map(|k| l[(i, k)] * z[k]).sum::<f64>();
                }
            }
            Self::StdCauchy => {
                let mut z = [0.0; 4];
                fill_standard_normal(rng, &mut z);
                let w = z[2].abs();
                out[0] = z[0] / w;
                out[1] = z[1] / w;
            }
            Self::Exponential => {
                out[0] = standard_exponential(rng);
                out[1] = standard_exponential(rng);
            }
        }
    }
}

/// Uniform on (0, 1].
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Exp(1) by inversion.
pub fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -open_unit(rng).ln()
}

/// Fills `out` with independent N(0, 1) draws (Box–Muller, both outputs used).
pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_mut(2);
    for chunk in &mut chunks {
        let r = (-2.0 * open_unit(rng).ln()).sqrt();
        let theta = 2.0 * PI * rng.gen::<f64>();
        chunk[0] = r * theta.cos();
        if chunk.len() == 2 {
            chunk[1] = r * theta.sin();
        }
    }
}

/// Draws `n` observations from `dist`.
pub fn sample_dist<R: Rng + ?Sized>(dist: &Distribution, n: usize, rng: &mut R) -> Dataset {
    let p = dist.dim();
    let mut coords = vec![0.0; n * p];
    for row in coords.chunks_mut(p) {
        dist.draw_into(rng, row);
    }
    Dataset::from_flat(p, coords).expect("sampler produces finite coordinates")
}
