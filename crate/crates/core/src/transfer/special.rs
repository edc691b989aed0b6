//! Representation functions of SU(2) and SU(1,1) by their angular integrals.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Legendre polynomial `P_l(x)` by the three-term recursion.
pub fn legendre_p(l: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return prev;
    }
    for k in 1..l {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `P^(l)_{mk}(cos θ)`:
/// `c_mk/2π ∫ (cos(θ/2) + i sin(θ/2) e^{iφ})^{l+k} (cos(θ/2) + i sin(θ/2) e^{−iφ})^{l−k} e^{i(m−k)φ} dφ`
/// with `c_mk = √((l−m)!(l+m)!/((l−k)!(l+k)!))`.
///
/// The integrand is a trigonometric polynomial, so the trapezoid rule with
/// more nodes than its degree is exact.
pub fn rep_function(l: u32, m: i32, k: i32, theta: f64) -> Result<Complex64> {
    let li = l as i32;
    if m.abs() > li || k.abs() > li {
        return Err(Error::InvalidArgument(format!(
            "indices m = {m}, k = {k} exceed l = {l}"
        )));
    }
    let norm = (factorial((li - m) as u32) * factorial((li + m) as u32)
        / (factorial((li - k) as u32) * factorial((li + k) as u32)))
    .sqrt();
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let nodes = 2 * l as usize + (m - k).unsigned_abs() as usize + 8;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let phi = 2.0 * PI * j as f64 / nodes as f64;
        let e = Complex64::from_polar(1.0, phi);
        let plus = Complex64::new(c, 0.0) + Complex64::new(0.0, s) * e;
        let minus = Complex64::new(c, 0.0) + Complex64::new(0.0, s) * e.conj();
        sum += plus.powi(li + k) * minus.powi(li - k) * Complex64::from_polar(1.0, f64::from(m - k) * phi);
    }
    Ok(sum * norm / nodes as f64)
}

/// Hyperbolic analogue of [`rep_function`] for the principal series
/// `l' = −1/2 + iρ′`: `cos(θ/2) → cosh(t/2)`, `i sin(θ/2) → sinh(t/2)`,
/// unit normalisation, principal branch of the complex powers.
///
/// The integrand is analytic and periodic; the trapezoid rule is doubled
/// until two successive values agree to `1e-14`.
pub fn hyperbolic_rep_function(rho_prime: f64, m: i32, k: i32, t: f64) -> Result<Complex64> {
    let order = Complex64::new(-0.5, rho_prime);
    let (c, s) = ((0.5 * t).cosh(), (0.5 * t).sinh());
    let eval = |nodes: usize| {
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..nodes {
            let phi = 2.0 * PI * j as f64 / nodes as f64;
            let e = Complex64::from_polar(1.0, phi);
            let plus = c + s * e;
            let minus = c + s * e.conj();
            sum += (plus.ln() * (order + f64::from(k))).exp()
                * (minus.ln() * (order - f64::from(k))).exp()
                * Complex64::from_polar(1.0, f64::from(m - k) * phi);
        }
        sum / nodes as f64
    };
    let mut nodes = 32;
    let mut previous = eval(nodes);
    while nodes < 1 << 16 {
        nodes *= 2;
        let current = eval(nodes);
        if (current - previous).norm() <= 1e-14 * current.norm().max(1.0) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::QuadratureNotConverged {
        context: format!("hyperbolic representation function at t = {t}"),
        estimate: previous.norm(),
        error: f64::NAN,
    })
}

/// Conical function `P_{−1/2+iρ′}(cosh t)`.
pub fn conical(rho_prime: f64, t: f64) -> Result<f64> {
    hyperbolic_rep_function(rho_prime, 0, 0, t).map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_low_orders() {
        let x = 0.3;
        assert_eq!(legendre_p(0, x), 1.0);
        assert_eq!(legendre_p(1, x), x);
        assert!((legendre_p(2, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rep_function_rejects_large_indices() {
        assert!(rep_function(1, 2, 0, 0.3).is_err());
    }

    #[test]
    fn conical_at_origin_is_one() {
        for rho in [0.0, 0.7, 3.0] {
            assert!((conical(rho, 0.0).unwrap() - 1.0).abs() < 1e-14);
        }
    }
}
