//! Bulk constants and closed-form large-(β, n) limits of the two-point
//! determinant-ratio correlators, ending in the sine kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Semicircle density `ρ(E) = √(4 − E²) / 2π` (zero outside `[-2, 2]`).
pub fn semicircle_density(energy: f64) -> f64 {
    if energy.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - energy * energy).sqrt() / (2.0 * PI)
    }
}

/// Cumulative semicircle law `1/2 + x√(4 − x²)/4π + arcsin(x/2)/π`,
/// clamped to 0 and 1 outside the support.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Inverse of [`semicircle_cdf`] on `(0, 1)` by safeguarded Newton steps.
pub fn semicircle_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    if p >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    let mut x = 4.0 * p - 2.0;
    for _ in 0..200 {
        let f = semicircle_cdf(x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let density = semicircle_density(x);
        let newton = x - f / density;
        let next = if density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() < 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Energy-dependent constants of the bulk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BulkConstants {
    pub energy: f64,
    pub rho: f64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// `√(4 − E²) = 2πρ(E) = a₊ − a₋`.
    pub c0: f64,
    pub beta: f64,
    /// `c₀² β`.
    pub beta_tilde: f64,
}

/// Evaluates the bulk constants at `energy` for coupling `beta`.
pub fn bulk_constants(energy: f64, beta: f64) -> Result<BulkConstants> {
    if !(energy.abs() < 2.0) {
        return Err(Error::OutOfBulk { energy, bound: 2.0 });
    }
    let c0 = (4.0 - energy * energy).sqrt();
    let a_plus = Complex64::new(c0 / 2.0, energy / 2.0);
    let a_minus = Complex64::new(-c0 / 2.0, energy / 2.0);
    Ok(BulkConstants {
        energy,
        rho: c0 / (2.0 * PI),
        a_plus,
        a_minus,
        c_plus: 1.0 + a_plus.powi(-2),
        c_minus: 1.0 + a_minus.powi(-2),
        c0,
        beta,
        beta_tilde: c0 * c0 * beta,
    })
}

/// Spectral shifts `(ξ₁, ξ₂, ξ₁′, ξ₂′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shifts {
    pub xi1: Complex64,
    pub xi2: Complex64,
    pub xi1p: Complex64,
    pub xi2p: Complex64,
}

impl Shifts {
    pub fn new(xi1: Complex64, xi2: Complex64, xi1p: Complex64, xi2p: Complex64) -> Self {
        Self { xi1, xi2, xi1p, xi2p }
    }

    pub fn real(xi1: f64, xi2: f64, xi1p: f64, xi2p: f64) -> Self {
        Self::new(xi1.into(), xi2.into(), xi1p.into(), xi2p.into())
    }

    /// Same shifts with `ξ′ = ξ`.
    pub fn coincident(xi1: Complex64, xi2: Complex64) -> Self {
        Self::new(xi1, xi2, xi1, xi2)
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.xi1, self.xi2, self.xi1p, self.xi2p]
    }

    /// Checks `|Im ξ_j| < ε ρ(E) / 2` for every component. Real shifts are
    /// always accepted, including the degenerate `ε = 0`.
    pub fn check_admissible(&self, eps: f64, rho: f64) -> Result<()> {
        let bound = eps * rho / 2.0;
        if self.as_array().iter().any(|xi| !(xi.im == 0.0 || xi.im.abs() < bound)) {
            return Err(Error::InvalidArgument(format!(
                "shifts need |Im xi| < eps*rho/2 = {bound:.3e}"
            )));
        }
        Ok(())
    }
}

/// Combinations of `(E, ε, ξ)` entering the limit formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitShifts {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub delta1: Complex64,
    pub delta2: Complex64,
    /// `2iα₁ρ = 2iερ + ξ₁ − ξ₂`.
    pub theta_eps: Complex64,
    /// `exp(E(ξ₁ + ξ₂ − ξ₁′ − ξ₂′) / 2ρ)`.
    pub prefactor: Complex64,
    /// `diag(ε − iξ₁/ρ, ε − iξ₂/ρ, ε − iξ₁′/ρ, ε − iξ₂′/ρ)`.
    pub lambda_diag: [Complex64; 4],
}

impl LimitShifts {
    pub fn new(bulk: &BulkConstants, eps: f64, xi: &Shifts) -> Self {
        let rho = bulk.rho;
        let half = 1.0 / (2.0 * rho);
        let alpha1 = eps - I * (xi.xi1 - xi.xi2) * half;
        let alpha2 = eps - I * (xi.xi1p - xi.xi2p) * half;
        Self {
            alpha1,
            alpha2,
            delta1: I * (xi.xi1p - xi.xi1) * half,
            delta2: I * (xi.xi2 - xi.xi2p) * half,
            theta_eps: 2.0 * I * alpha1 * rho,
            prefactor: (bulk.energy * (xi.xi1 + xi.xi2 - xi.xi1p - xi.xi2p) * half).exp(),
            lambda_diag: xi.as_array().map(|x| eps - I * x / rho),
        }
    }
}

/// Large-(β, n) limit of the `+−` correlator.
pub fn r_plus_minus_limit(energy: f64, eps: f64, xi: &Shifts) -> Result<Complex64> {
    let bulk = bulk_constants(energy, 0.0)?;
    xi.check_admissible(eps, bulk.rho)?;
    let s = LimitShifts::new(&bulk, eps, xi);
    if s.alpha1.norm() == 0.0 || s.alpha2.norm() == 0.0 {
        return Err(Error::DivisionByZero {
            context: "alpha1 * alpha2",
        });
    }
    let c0 = bulk.c0;
    let grow = (2.0 * c0 * s.alpha1).exp();
    let bracket = s.delta1 * s.delta2 * (grow - 1.0) / (s.alpha1 * s.alpha2)
        - (s.delta1 + s.delta2) * grow / s.alpha2
        + grow * s.alpha1 / s.alpha2;
    Ok(s.prefactor * (-c0 * (s.alpha1 + s.alpha2)).exp() * bracket)
}

/// Large-W limit of the `++` correlator, `exp(ia₊(ξ₁′ + ξ₂′ − ξ₁ − ξ₂)/ρ)`.
pub fn r_plus_plus_limit(energy: f64, eps: f64, xi: &Shifts) -> Result<Complex64> {
    let bulk = bulk_constants(energy, 0.0)?;
    xi.check_admissible(eps, bulk.rho)?;
    Ok(plus_plus_exponential(&bulk, xi))
}

/// `∂²/∂ξ₁′∂ξ₂′` of [`r_plus_plus_limit`]: `−a₊²/ρ²` times the exponential.
pub fn r_plus_plus_second_derivative(energy: f64, eps: f64, xi: &Shifts) -> Result<Complex64> {
    let bulk = bulk_constants(energy, 0.0)?;
    xi.check_admissible(eps, bulk.rho)?;
    Ok(-bulk.a_plus * bulk.a_plus / (bulk.rho * bulk.rho) * plus_plus_exponential(&bulk, xi))
}

fn plus_plus_exponential(bulk: &BulkConstants, xi: &Shifts) -> Complex64 {
    (I * bulk.a_plus * (xi.xi1p + xi.xi2p - xi.xi1 - xi.xi2) / bulk.rho).exp()
}

/// `(1 − e^{2πiθ}) / θ²`, with a five-term Laurent expansion for
/// `|θ| < 10⁻³` where the direct form cancels catastrophically.
pub fn oscillating_quotient(theta: Complex64) -> Complex64 {
    if theta.norm() < 1e-3 {
        let w = 2.0 * PI * I;
        let mut term = -w / theta;
        let mut sum = term;
        for k in 2..=5 {
            term *= w * theta / k as f64;
            sum += term;
        }
        sum
    } else {
        (1.0 - (2.0 * PI * I * theta).exp()) / (theta * theta)
    }
}

/// `∂²R^{+−}/∂ξ₁′∂ξ₂′` at `ξ′ = ξ`: `1/ρ² − (1 − e^{2πiθ_ε})/θ_ε²`.
pub fn d2_r_plus_minus_coincident(
    energy: f64,
    eps: f64,
    xi1: Complex64,
    xi2: Complex64,
) -> Result<Complex64> {
    let bulk = bulk_constants(energy, 0.0)?;
    let theta = 2.0 * I * eps * bulk.rho + xi1 - xi2;
    Ok(1.0 / (bulk.rho * bulk.rho) - oscillating_quotient(theta))
}

/// Settings of the `ε → 0` extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    /// Decreasing positive sequence of `ε` values.
    pub eps_sequence: Vec<f64>,
    /// Largest accepted difference between the last two extrapolants.
    pub tolerance: f64,
}

impl Default for Extrapolation {
    fn default() -> Self {
        Self {
            eps_sequence: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            tolerance: 1e-10,
        }
    }
}

/// Result of [`sine_kernel_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SineKernelValue {
    pub value: f64,
    /// Imaginary part of the assembled combination before taking `Re`.
    pub imaginary_residue: f64,
    /// Difference between the last two extrapolants.
    pub extrapolation_residual: f64,
}

/// Assembles `(2π)^{-2} ∂²[R^{+−} + conj R^{+−} − R^{++} − conj R^{++}]` at
/// `ξ′ = ξ` from the closed forms for each `ε` in the sequence and
/// extrapolates to `ε = 0` by polynomial (Neville) extrapolation.
///
/// The sequence is rescaled so its first element is at most `0.01|x|/ρ`.
/// The tolerance is applied relative to `1 + 1/x²`; at `x = 0` the
/// combination diverges like `1/ε` and the result is `NotConverged`.
pub fn sine_kernel_limit(energy: f64, x: f64, settings: &Extrapolation) -> Result<SineKernelValue> {
    let bound = 2f64.sqrt();
    if !(energy.abs() < bound) {
        return Err(Error::OutOfBulk { energy, bound });
    }
    let seq = &settings.eps_sequence;
    if seq.len() < 2 || seq.windows(2).any(|w| !(w[1] < w[0])) || seq.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument(
            "eps sequence must be positive, strictly decreasing, length >= 2".into(),
        ));
    }
    let rho = semicircle_density(energy);
    // The ε-dependence has radius of convergence |x|/2ρ; keep the largest ε
    // well inside it so the polynomial extrapolation is accurate.
    let shrink = if x != 0.0 {
        (0.01 * x.abs() / (rho * seq[0])).min(1.0)
    } else {
        1.0
    };
    let seq: Vec<f64> = seq.iter().map(|e| e * shrink).collect();
    let xi1 = Complex64::new(x, 0.0);
    let xi2 = Complex64::new(0.0, 0.0);
    let mut values = Vec::with_capacity(seq.len());
    let mut imaginary_residue = 0.0f64;
    for &eps in &seq {
        let pm = d2_r_plus_minus_coincident(energy, eps, xi1, xi2)?;
        let pp = r_plus_plus_second_derivative(energy, eps, &Shifts::coincident(xi1, xi2))?;
        let combined = (pm + pm.conj() - pp - pp.conj()) / (4.0 * PI * PI);
        imaginary_residue = imaginary_residue.max(combined.im.abs());
        values.push(combined.re);
    }
    let (value, residual) = neville_at_zero(&seq, &values);
    // Individual terms are of size 1 + 1/x²; the tolerance is relative to that.
    let scale = if x != 0.0 { 1.0 + 1.0 / (x * x) } else { 1.0 };
    if !(residual <= settings.tolerance * scale) {
        return Err(Error::NotConverged {
            residual,
            tolerance: settings.tolerance,
        });
    }
    Ok(SineKernelValue {
        value,
        imaginary_residue,
        extrapolation_residual: residual,
    })
}

/// Polynomial extrapolation of `values(nodes)` to 0; returns the final
/// estimate and its difference from the previous-order estimate.
fn neville_at_zero(nodes: &[f64], values: &[f64]) -> (f64, f64) {
    let n = nodes.len();
    let mut table = values.to_vec();
    let mut previous = table[n - 1];
    let mut current = previous;
    for order in 1..n {
        for i in 0..n - order {
            let (a, b) = (nodes[i], nodes[i + order]);
            table[i] = (b * table[i] - a * table[i + 1]) / (b - a);
        }
        previous = current;
        current = table[0];
    }
    let residual = if n > 1 {
        (current - previous).abs()
    } else {
        f64::INFINITY
    };
    (current, residual)
}

/// The target `1 − sin²(πx)/(πx)²`.
pub fn sine_kernel_target(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let s = (PI * x).sin() / (PI * x);
    1.0 - s * s
}
