//! Eigenvalues of the zonal difference operators on each irreducible sector.
//!
//! Compact sectors are labelled by `l = 0, 1, …`, hyperbolic ones by
//! `l' = −1/2 + iρ′`. Haar measures are normalised, so in the variables
//! `x = |U₁₂|²` and `s = |S₁₂|²` they read `dx` on `[0, 1]` and `ds` on
//! `[0, ∞)`.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::special::{conical, hyperbolic_rep_function, legendre_p, rep_function};
use crate::error::{Error, Result};
use crate::quadrature::Adaptive;

/// Integrals stop at `β̃·x = CUTOFF`, where `e^{−β̃x}` is below `1e-34`.
const CUTOFF: f64 = 78.0;

/// The representation functions carry absolute roundoff near `1e-16`, which
/// caps the attainable relative accuracy of the small `(−1, 1)` blocks.
fn sector_quadrature() -> Adaptive {
    Adaptive {
        points: 16,
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_depth: 40,
    }
}

fn check_beta(beta_tilde: f64) -> Result<()> {
    if !(beta_tilde > 0.0 && beta_tilde.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "beta_tilde must be positive and finite, got {beta_tilde}"
        )));
    }
    Ok(())
}

/// `β̃ ∫ e^{−β̃y} weight(y) dy` over `[0, upper]`, `weight` possibly failing.
fn weighted_integral<F>(beta_tilde: f64, upper: f64, weight: F, context: &str) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    check_beta(beta_tilde)?;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |y: f64| match weight(y) {
        Ok(v) => v * beta_tilde * (-beta_tilde * y).exp(),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(f64::NAN, 0.0)
        }
    };
    let value = sector_quadrature().integrate_complex(integrand, 0.0, upper, context);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    value
}

fn compact_upper(beta_tilde: f64) -> f64 {
    (CUTOFF / beta_tilde).min(1.0)
}

fn hyperbolic_upper(beta_tilde: f64) -> f64 {
    CUTOFF / beta_tilde
}

/// Polar angle with `sin²(θ/2) = x`.
fn compact_angle(x: f64) -> f64 {
    2.0 * x.clamp(0.0, 1.0).sqrt().asin()
}

/// Hyperbolic angle with `sinh²(t/2) = s`.
fn hyperbolic_angle(s: f64) -> f64 {
    2.0 * s.max(0.0).sqrt().asinh()
}

/// `μ_a^(l) = β̃ ∫₀¹ x^a e^{−β̃x} P_l(1 − 2x) dx`; `a = 0` is `λ^(l)U`.
pub fn u_moment(l: u32, power: u32, beta_tilde: f64) -> Result<f64> {
    weighted_integral(
        beta_tilde,
        compact_upper(beta_tilde),
        |x| Ok(Complex64::new(x.powi(power as i32) * legendre_p(l, 1.0 - 2.0 * x), 0.0)),
        "compact sector moment",
    )
    .map(|z| z.re)
}

/// `β̃ ∫₀^∞ s^a e^{−β̃s} P_{−1/2+iρ′}(1 + 2s) ds`; `a = 0` is `λ^(ρ′)S`.
pub fn s_moment(rho_prime: f64, power: u32, beta_tilde: f64) -> Result<f64> {
    weighted_integral(
        beta_tilde,
        hyperbolic_upper(beta_tilde),
        |s| {
            conical(rho_prime, hyperbolic_angle(s))
                .map(|p| Complex64::new(s.powi(power as i32) * p, 0.0))
        },
        "hyperbolic sector moment",
    )
    .map(|z| z.re)
}

/// `λ^(l)U`, eigenvalue of `K_U` on the compact sector `l`.
pub fn ku_eigenvalue(l: u32, beta_tilde: f64) -> Result<f64> {
    u_moment(l, 0, beta_tilde)
}

/// `λ^(ρ′)S`, eigenvalue of `K_S` on the hyperbolic sector `−1/2 + iρ′`.
pub fn ks_eigenvalue(rho_prime: f64, beta_tilde: f64) -> Result<f64> {
    s_moment(rho_prime, 0, beta_tilde)
}

/// Eigenvalues of the off-diagonal blocks on the compact sector `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffDiagonal {
    /// `β̃ ∫ e^{−β̃x} √(x(1−x)) · i P^(l)_{−1,0}(1 − 2x) dx` (real).
    pub m10: f64,
    /// `β̃ ∫ e^{−β̃x} (1 − x) P^(l)_{−1,−1}(1 − 2x) dx`.
    pub m1m1: f64,
    /// `β̃ ∫ x e^{−β̃x} P^(l)_{−1,1}(1 − 2x) dx`.
    pub m11: f64,
}

/// Off-diagonal block eigenvalues on the compact sector `l ≥ 1`.
pub fn offdiag_eigenvalues(l: u32, beta_tilde: f64) -> Result<OffDiagonal> {
    if l == 0 {
        return Err(Error::InvalidArgument("off-diagonal sectors need l >= 1".into()));
    }
    let upper = compact_upper(beta_tilde);
    let i = Complex64::new(0.0, 1.0);
    let m10 = weighted_integral(
        beta_tilde,
        upper,
        |x| Ok(i * rep_function(l, -1, 0, compact_angle(x))? * (x * (1.0 - x)).sqrt()),
        "compact (-1, 0) block",
    )?;
    let m1m1 = weighted_integral(
        beta_tilde,
        upper,
        |x| Ok(rep_function(l, -1, -1, compact_angle(x))? * (1.0 - x)),
        "compact (-1, -1) block",
    )?;
    let m11 = weighted_integral(
        beta_tilde,
        upper,
        |x| Ok(rep_function(l, -1, 1, compact_angle(x))? * x),
        "compact (-1, 1) block",
    )?;
    Ok(OffDiagonal {
        m10: m10.re,
        m1m1: m1m1.re,
        m11: m11.re,
    })
}

/// Off-diagonal block eigenvalues on a hyperbolic sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicOffDiagonal {
    /// `β̃ ∫ e^{−β̃s} √(s(1+s)) B_{−1,0}(t) ds`.
    pub m10: Complex64,
    /// `β̃ ∫ e^{−β̃s} (1 + s) B_{−1,−1}(t) ds`.
    pub m1m1: Complex64,
    /// `β̃ ∫ s e^{−β̃s} B_{−1,1}(t) ds`.
    pub m11: Complex64,
}

pub fn hyperbolic_offdiag_eigenvalues(rho_prime: f64, beta_tilde: f64) -> Result<HyperbolicOffDiagonal> {
    let upper = hyperbolic_upper(beta_tilde);
    let rep = |m, k, s: f64| hyperbolic_rep_function(rho_prime, m, k, hyperbolic_angle(s));
    Ok(HyperbolicOffDiagonal {
        m10: weighted_integral(
            beta_tilde,
            upper,
            |s| Ok(rep(-1, 0, s)? * (s * (1.0 + s)).sqrt()),
            "hyperbolic (-1, 0) block",
        )?,
        m1m1: weighted_integral(
            beta_tilde,
            upper,
            |s| Ok(rep(-1, -1, s)? * (1.0 + s)),
            "hyperbolic (-1, -1) block",
        )?,
        m11: weighted_integral(beta_tilde, upper, |s| Ok(rep(-1, 1, s)? * s), "hyperbolic (-1, 1) block")?,
    })
}

/// Sector label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Compact(u32),
    Hyperbolic(f64),
}

/// Sector data of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorSpectrum {
    pub sector: Sector,
    pub lambda: f64,
    pub lambda_m10: Complex64,
    pub lambda_m1m1: Complex64,
    pub lambda_m11: Complex64,
    /// First moment `β̃ ∫ y e^{−β̃y} P(y) dy`.
    pub mu: f64,
}

pub fn compact_sector(l: u32, beta_tilde: f64) -> Result<SectorSpectrum> {
    let (m10, m1m1, m11) = if l == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let off = offdiag_eigenvalues(l, beta_tilde)?;
        (off.m10, off.m1m1, off.m11)
    };
    Ok(SectorSpectrum {
        sector: Sector::Compact(l),
        lambda: ku_eigenvalue(l, beta_tilde)?,
        lambda_m10: m10.into(),
        lambda_m1m1: m1m1.into(),
        lambda_m11: m11.into(),
        mu: u_moment(l, 1, beta_tilde)?,
    })
}

pub fn hyperbolic_sector(rho_prime: f64, beta_tilde: f64) -> Result<SectorSpectrum> {
    let off = hyperbolic_offdiag_eigenvalues(rho_prime, beta_tilde)?;
    Ok(SectorSpectrum {
        sector: Sector::Hyperbolic(rho_prime),
        lambda: ks_eigenvalue(rho_prime, beta_tilde)?,
        lambda_m10: off.m10,
        lambda_m1m1: off.m1m1,
        lambda_m11: off.m11,
        mu: s_moment(rho_prime, 1, beta_tilde)?,
    })
}

/// One relation of the moment lemma on one sector pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub l: u32,
    pub rho_prime: f64,
    pub relation: &'static str,
    pub value: f64,
    pub leading: f64,
    /// `|value − leading| / ((1 − λ^(l)U λ^(ρ′)S) · order)`.
    pub normalized_residual: f64,
}

/// Residuals of the five moment relations over a set of sector pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub beta_tilde: f64,
    pub rows: Vec<MomentRow>,
    pub max_normalized_residual: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Bound on the normalized residuals of [`moment_identities_check`].
pub const MOMENT_BOUND: f64 = 10.0;

/// Checks `K_US·u ≈ 1/β̃`, `K_US·s ≈ 1/β̃`, `K_US·u² ≈ 2/β̃²`,
/// `K_US·s² ≈ 2/β̃²` and `K_US·us ≈ 1/β̃²` sector by sector, each up to
/// `O((1 − K_US)·order)`.
pub fn moment_identities_check(beta_tilde: f64, ls: &[u32], rhos: &[f64]) -> Result<MomentReport> {
    if beta_tilde < 10.0 {
        return Err(Error::InvalidArgument(format!(
            "moment identities need beta_tilde >= 10, got {beta_tilde}"
        )));
    }
    let mut rows = Vec::new();
    let b = beta_tilde;
    for &l in ls {
        let u: Vec<f64> = (0..3).map(|a| u_moment(l, a, b)).collect::<Result<_>>()?;
        for &rho in rhos {
            let s: Vec<f64> = (0..3).map(|a| s_moment(rho, a, b)).collect::<Result<_>>()?;
            let gap = 1.0 - u[0] * s[0];
            let relations = [
                ("u", u[1] * s[0], 1.0 / b, 1.0 / b),
                ("s", u[0] * s[1], 1.0 / b, 1.0 / b),
                ("u^2", u[2] * s[0], 2.0 / (b * b), 1.0 / (b * b)),
                ("s^2", u[0] * s[2], 2.0 / (b * b), 1.0 / (b * b)),
                ("us", u[1] * s[1], 1.0 / (b * b), 1.0 / (b * b)),
            ];
            for (relation, value, leading, order) in relations {
                rows.push(MomentRow {
                    l,
                    rho_prime: rho,
                    relation,
                    value,
                    leading,
                    normalized_residual: (value - leading).abs() / (gap * order),
                });
            }
        }
    }
    let max = rows
        .iter()
        .map(|r| r.normalized_residual)
        .fold(0.0f64, f64::max);
    Ok(MomentReport {
        beta_tilde,
        rows,
        max_normalized_residual: max,
        bound: MOMENT_BOUND,
        pass: max <= MOMENT_BOUND,
    })
}

/// Eigenvalue on the sector pair `(l, ρ′)` of `K_US` composed with the
/// multiplication symbol `Σ c_ab u^a s^b`.
pub fn symbol_sector_eigenvalue(
    coefficients: &BTreeMap<(u32, u32), f64>,
    l: u32,
    rho_prime: f64,
    beta_tilde: f64,
) -> Result<f64> {
    let max_a = coefficients.keys().map(|k| k.0).max().unwrap_or(0);
    let max_b = coefficients.keys().map(|k| k.1).max().unwrap_or(0);
    let u: Vec<f64> = (0..=max_a).map(|a| u_moment(l, a, beta_tilde)).collect::<Result<_>>()?;
    let s: Vec<f64> = (0..=max_b)
        .map(|b| s_moment(rho_prime, b, beta_tilde))
        .collect::<Result<_>>()?;
    Ok(coefficients
        .iter()
        .map(|(&(a, b), &c)| c * u[a as usize] * s[b as usize])
        .sum())
}

/// The second-order correction eigenvalue on a sector pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionEigenvalue {
    pub value: Complex64,
    /// `λ^(l)U_{−1,1} · λ^(ρ′)S_{−1,1}`.
    pub m11_product: Complex64,
    /// `|λ̃| β̃⁴ (|z| − λλ′)² / (1 − λλ′)`.
    pub fitted_constant: f64,
}

/// `|λU_{−1,0}|² |λS_{−1,0}|² λU_{−1,1} λS_{−1,1} / (z − λU_{−1,−1} λS_{−1,−1})²`.
pub fn correction_eigenvalue(l: u32, rho_prime: f64, beta_tilde: f64, z: Complex64) -> Result<CorrectionEigenvalue> {
    if !(z.norm() > 1.0) {
        return Err(Error::InvalidArgument(format!("need |z| > 1, got {}", z.norm())));
    }
    let u = compact_sector(l.max(1), beta_tilde)?;
    let s = hyperbolic_sector(rho_prime, beta_tilde)?;
    let product = u.lambda_m11 * s.lambda_m11;
    let denominator = z - u.lambda_m1m1 * s.lambda_m1m1;
    let value =
        u.lambda_m10.norm_sqr() * s.lambda_m10.norm_sqr() * product / (denominator * denominator);
    let ll = u.lambda * s.lambda;
    let fitted = value.norm() * beta_tilde.powi(4) * (z.norm() - ll).powi(2) / (1.0 - ll);
    Ok(CorrectionEigenvalue {
        value,
        m11_product: product,
        fitted_constant: fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_sector_has_closed_form() {
        for b in [5.0, 50.0] {
            let v = ku_eigenvalue(0, b).unwrap();
            assert!((v - (1.0 - (-b).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn off_diagonal_requires_nontrivial_sector() {
        assert!(offdiag_eigenvalues(0, 100.0).is_err());
    }

    #[test]
    fn correction_requires_large_z() {
        assert!(correction_eigenvalue(1, 0.0, 100.0, Complex64::new(0.5, 0.0)).is_err());
    }
}
