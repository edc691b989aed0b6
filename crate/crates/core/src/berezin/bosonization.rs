//! Two routes to `∫ F(φ̄φ) dΦ` for a function of the 2×2 Gram matrix of a
//! pair of complex `W`-vectors: Monte Carlo over the `4W` real coordinates,
//! and a four-dimensional quadrature over positive Hermitian `B` with weight
//! `det^{W−2} B`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{composite_on, legendre_on};
use crate::seed::{tag, Seed};
use crate::spectra::{mean_and_stderr, Estimate};

/// Registered test functions of the Gram matrix `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    /// `exp(−Tr B)`.
    ExpTrace,
    /// `exp(−Tr B)·(1 + |B₁₂|²)`.
    ExpTraceCoupled,
}

impl TestFunction {
    pub const ALL: [TestFunction; 2] = [TestFunction::ExpTrace, TestFunction::ExpTraceCoupled];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::ExpTrace => "exp-trace",
            TestFunction::ExpTraceCoupled => "exp-trace-coupled",
        }
    }

    /// Value at `B = [[b11, b12], [conj(b12), b22]]`.
    pub fn eval(self, b11: f64, b22: f64, b12: Complex64) -> f64 {
        let base = (-(b11 + b22)).exp();
        match self {
            TestFunction::ExpTrace => base,
            TestFunction::ExpTraceCoupled => base * (1.0 + b12.norm_sqr()),
        }
    }

    /// Closed-form `∫ F(φ̄φ) dΦ`: Gaussian moments give `π^{2W}` and
    /// `E|B₁₂|² = W` under the normalised weight.
    pub fn exact(self, block: usize) -> f64 {
        let gauss = PI.powi(2 * block as i32);
        match self {
            TestFunction::ExpTrace => gauss,
            TestFunction::ExpTraceCoupled => gauss * (1.0 + block as f64),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown test function {s:?}")))
    }
}

/// `π^{2W−1} / ((W−1)!(W−2)!)`.
pub fn prefactor(block: usize) -> f64 {
    let factorial = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
    PI.powi(2 * block as i32 - 1) / (factorial(block - 1) * factorial(block - 2))
}

/// Resolution of the `B` quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixQuadrature {
    /// Upper cutoff of `B₁₁` and `B₂₂`.
    pub cutoff: f64,
    /// Panels per diagonal axis.
    pub panels: usize,
    /// Gauss nodes per panel.
    pub points: usize,
    /// Trapezoid nodes in the phase of `B₁₂`.
    pub phases: usize,
    /// Relative change allowed when the panel count doubles.
    pub tolerance: f64,
}

impl Default for MatrixQuadrature {
    fn default() -> Self {
        Self {
            cutoff: 50.0,
            panels: 8,
            points: 16,
            phases: 8,
            tolerance: 1e-9,
        }
    }
}

fn matrix_integral(f: TestFunction, block: usize, q: &MatrixQuadrature, panels: usize) -> f64 {
    let (diag, weights) = composite_on(panels, q.points, 0.0, q.cutoff);
    let radial_points = block + 4;
    let power = block as i32 - 2;
    let phases: Vec<Complex64> = (0..q.phases)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / q.phases as f64))
        .collect();
    let phase_weight = 2.0 * PI / q.phases as f64;
    diag.par_iter()
        .zip(weights.par_iter())
        .map(|(&a, &wa)| {
            let mut row = 0.0;
            for (&b, &wb) in diag.iter().zip(&weights) {
                let ab = a * b;
                let (radii, rw) = legendre_on(radial_points, 0.0, ab.sqrt());
                let mut inner = 0.0;
                for (&r, &w) in radii.iter().zip(&rw) {
                    let det = (ab - r * r).max(0.0).powi(power);
                    let ring: f64 = phases.iter().map(|&p| f.eval(a, b, p * r)).sum();
                    inner += w * r * det * ring * phase_weight;
                }
                row += wb * inner;
            }
            wa * row
        })
        .sum()
}

/// Right-hand side `prefactor · ∫ F(B) det^{W−2} B dB` with its
/// doubling-error estimate.
pub fn matrix_side(f: TestFunction, block: usize, q: &MatrixQuadrature) -> Result<(f64, f64)> {
    if block < 2 {
        return Err(Error::InvalidArgument(format!("block size must be at least 2, got {block}")));
    }
    let coarse = matrix_integral(f, block, q, q.panels);
    let fine = matrix_integral(f, block, q, 2 * q.panels);
    let value = prefactor(block) * fine;
    let error = prefactor(block) * (fine - coarse).abs();
    if !(error <= q.tolerance * value.abs()) {
        return Err(Error::QuadratureNotConverged {
            context: format!("bosonization matrix side, W = {block}"),
            estimate: value,
            error,
        });
    }
    Ok((value, error))
}

/// Left-hand side by importance sampling: each of the `2W` complex
/// coordinates is drawn with density `e^{−|φ|²/2}/(2π)`.
pub fn vector_side(f: TestFunction, block: usize, samples: usize, seed: Seed) -> Result<Estimate> {
    if samples < 2 {
        return Err(Error::InvalidSampleCount {
            count: samples,
            minimum: 2,
        });
    }
    let chunk = 4096usize;
    let chunks = samples.div_ceil(chunk);
    let log_norm = 2.0 * block as f64 * (2.0 * PI).ln();
    let values: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = seed.stream(tag::BOSONIZATION, c as u64);
            let count = chunk.min(samples - c * chunk);
            let mut out = Vec::with_capacity(count);
            let mut first = vec![Complex64::new(0.0, 0.0); block];
            let mut second = vec![Complex64::new(0.0, 0.0); block];
            for _ in 0..count {
                let mut norm = 0.0;
                for v in first.iter_mut().chain(second.iter_mut()) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *v = Complex64::new(re, im);
                    norm += v.norm_sqr();
                }
                let b11: f64 = first.iter().map(|z| z.norm_sqr()).sum();
                let b22: f64 = second.iter().map(|z| z.norm_sqr()).sum();
                let b12: Complex64 = first.iter().zip(&second).map(|(x, y)| x.conj() * y).sum();
                out.push(f.eval(b11, b22, b12) * (log_norm + 0.5 * norm).exp());
            }
            out
        })
        .collect();
    Ok(mean_and_stderr(&values))
}

/// Both sides of the identity for one `(W, F)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BosonizationCheck {
    pub block: usize,
    pub function: TestFunction,
    pub exact: f64,
    pub matrix_side: f64,
    pub matrix_error: f64,
    pub vector_side: Estimate,
}

impl BosonizationCheck {
    pub fn matrix_relative_error(&self) -> f64 {
        (self.matrix_side - self.exact).abs() / self.exact
    }

    /// Distance of the Monte Carlo side from the exact value in standard errors.
    pub fn vector_sigmas(&self) -> f64 {
        (self.vector_side.mean - self.exact).abs() / self.vector_side.stderr
    }
}

pub fn bosonization_check(
    block: usize,
    f: TestFunction,
    samples: usize,
    seed: Seed,
    q: &MatrixQuadrature,
) -> Result<BosonizationCheck> {
    let (matrix, error) = matrix_side(f, block, q)?;
    let vector = vector_side(f, block, samples, seed)?;
    Ok(BosonizationCheck {
        block,
        function: f,
        exact: f.exact(block),
        matrix_side: matrix,
        matrix_error: error,
        vector_side: vector,
    })
}
