//! Exact Grassmann algebra with Berezin integration.
//!
//! Generators are numbered `0..2m`; the pair `(ψ̄_j, ψ_j)` is
//! `(2j, 2j + 1)`. A monomial is a bitmask of generators written in
//! ascending order; reordering signs are tracked on multiplication.
//!
//! Integration follows the repeated-integral convention: the differential
//! written nearest to the integrand acts first, and `∫ψ_g dψ_g = 1` after
//! moving `ψ_g` to the right end of the monomial. The measure
//! `∏_j dψ̄_j dψ_j` therefore integrates `ψ̄₁, ψ₁, ψ̄₂, ψ₂, …` in that order,
//! and with it `∫ exp(−Σ A_jk ψ̄_j ψ_k) ∏ dψ̄_j dψ_j = det A`.

pub mod bosonization;
pub mod nilpotent;
pub mod poly;

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported number of generators.
pub const MAX_GENERATORS: usize = 64;

/// Element of the Grassmann algebra on `generators` generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannElement {
    generators: usize,
    coeffs: BTreeMap<u64, Complex64>,
}

/// Index of `ψ̄_j`.
pub fn psi_bar(j: usize) -> usize {
    2 * j
}

/// Index of `ψ_j`.
pub fn psi(j: usize) -> usize {
    2 * j + 1
}

fn check_universe(generators: usize) -> Result<()> {
    if generators > MAX_GENERATORS {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_GENERATORS} generators supported, got {generators}"
        )));
    }
    Ok(())
}

/// Sign of the product of ascending monomials `a · b` after sorting, or
/// `None` when they share a generator.
fn merge_sign(a: u64, b: u64) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        let above = if j >= 63 { 0 } else { a >> (j + 1) };
        swaps += above.count_ones();
        rest &= rest - 1;
    }
    Some(if swaps.is_multiple_of(2) { 1.0 } else { -1.0 })
}

impl GrassmannElement {
    pub fn zero(generators: usize) -> Result<Self> {
        check_universe(generators)?;
        Ok(Self {
            generators,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn scalar(generators: usize, value: Complex64) -> Result<Self> {
        let mut x = Self::zero(generators)?;
        x.add_term(0, value);
        Ok(x)
    }

    /// The single generator `g`.
    pub fn generator(generators: usize, g: usize) -> Result<Self> {
        check_universe(generators)?;
        if g >= generators {
            return Err(Error::UnknownGenerator {
                generator: g,
                universe: generators,
            });
        }
        let mut x = Self::zero(generators)?;
        x.add_term(1 << g, Complex64::new(1.0, 0.0));
        Ok(x)
    }

    /// Product of the listed generators in the given order, times `coeff`.
    pub fn monomial(generators: usize, order: &[usize], coeff: Complex64) -> Result<Self> {
        let mut x = Self::scalar(generators, coeff)?;
        for &g in order {
            x = x.mul(&Self::generator(generators, g)?)?;
        }
        Ok(x)
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    /// Coefficient of the ascending monomial `mask`.
    pub fn coeff(&self, mask: u64) -> Complex64 {
        self.coeffs.get(&mask).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    /// Scalar (body) part.
    pub fn body(&self) -> Complex64 {
        self.coeff(0)
    }

    fn add_term(&mut self, mask: u64, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.coeffs.entry(mask).or_default();
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&mask);
        }
    }

    fn same_universe(&self, other: &Self) -> Result<()> {
        if self.generators != other.generators {
            return Err(Error::UniverseMismatch {
                left: self.generators,
                right: other.generators,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_universe(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.coeffs {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self {
            generators: self.generators,
            coeffs: BTreeMap::new(),
        };
        for (&m, &v) in &self.coeffs {
            out.add_term(m, v * c);
        }
        out
    }

    /// Sign-correct product in canonical order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_universe(other)?;
        let mut out = Self {
            generators: self.generators,
            coeffs: BTreeMap::new(),
        };
        for (&a, &ca) in &self.coeffs {
            for (&b, &cb) in &other.coeffs {
                if let Some(sign) = merge_sign(a, b) {
                    out.add_term(a | b, ca * cb * sign);
                }
            }
        }
        Ok(out)
    }

    /// `true` if every monomial has even degree.
    pub fn is_even(&self) -> bool {
        self.coeffs.keys().all(|m| m.count_ones() % 2 == 0)
    }

    /// `exp(x) = e^a Σ_k (x − a)^k / k!` with `a` the body; the series stops
    /// once the nilpotent part's power vanishes.
    pub fn exp(&self) -> Self {
        let a = self.body();
        let mut nilpotent = self.clone();
        nilpotent.coeffs.remove(&0);
        let mut out = Self::scalar(self.generators, Complex64::new(1.0, 0.0)).expect("checked universe");
        let mut power = out.clone();
        let mut k = 1.0;
        loop {
            power = power.mul(&nilpotent).expect("same universe").scale(Complex64::new(1.0 / k, 0.0));
            if power.coeffs.is_empty() {
                break;
            }
            out = out.add(&power).expect("same universe");
            k += 1.0;
        }
        out.scale(a.exp())
    }

    /// Integrates over the generators in `order`, first entry first.
    pub fn integrate(&self, order: &[usize]) -> Result<Self> {
        let mut seen = 0u64;
        for &g in order {
            if g >= self.generators {
                return Err(Error::UnknownGenerator {
                    generator: g,
                    universe: self.generators,
                });
            }
            if seen & (1 << g) != 0 {
                return Err(Error::InvalidArgument(format!("generator {g} listed twice")));
            }
            seen |= 1 << g;
        }
        let mut current = self.clone();
        for &g in order {
            let bit = 1u64 << g;
            let mut next = Self {
                generators: self.generators,
                coeffs: BTreeMap::new(),
            };
            for (&m, &c) in &current.coeffs {
                if m & bit == 0 {
                    continue;
                }
                let after = if g >= 63 { 0 } else { m >> (g + 1) };
                let sign = if after.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                next.add_term(m & !bit, c * sign);
            }
            current = next;
        }
        Ok(current)
    }
}

impl Add for &GrassmannElement {
    type Output = Result<GrassmannElement>;
    fn add(self, rhs: Self) -> Self::Output {
        GrassmannElement::add(self, rhs)
    }
}

impl Sub for &GrassmannElement {
    type Output = Result<GrassmannElement>;
    fn sub(self, rhs: Self) -> Self::Output {
        GrassmannElement::sub(self, rhs)
    }
}

impl Mul for &GrassmannElement {
    type Output = Result<GrassmannElement>;
    fn mul(self, rhs: Self) -> Self::Output {
        GrassmannElement::mul(self, rhs)
    }
}

/// Product of two elements (see [`GrassmannElement::mul`]).
pub fn gmul(a: &GrassmannElement, b: &GrassmannElement) -> Result<GrassmannElement> {
    a.mul(b)
}

/// Grassmann exponential (see [`GrassmannElement::exp`]).
pub fn gexp(x: &GrassmannElement) -> GrassmannElement {
    x.exp()
}

/// Berezin integral over `order` (see [`GrassmannElement::integrate`]).
pub fn berezin_integrate(x: &GrassmannElement, order: &[usize]) -> Result<GrassmannElement> {
    x.integrate(order)
}

/// Integration order realising the measure `∏_j dψ̄_j dψ_j` for `m` pairs.
pub fn pair_measure(m: usize) -> Vec<usize> {
    (0..m).flat_map(|j| [psi_bar(j), psi(j)]).collect()
}

/// `∫ exp(−Σ_{jk} A_jk ψ̄_j ψ_k) ∏ dψ̄_j dψ_j`, computed symbolically.
pub fn gaussian_grassmann(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let generators = 2 * m;
    let mut exponent = GrassmannElement::zero(generators)?;
    for j in 0..m {
        for k in 0..m {
            let term = GrassmannElement::monomial(generators, &[psi_bar(j), psi(k)], -a[(j, k)])?;
            exponent = exponent.add(&term)?;
        }
    }
    let integrated = exponent.exp().integrate(&pair_measure(m))?;
    Ok(integrated.body())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn nilpotency_and_anticommutation() {
        let p0 = GrassmannElement::generator(2, 0).unwrap();
        let p1 = GrassmannElement::generator(2, 1).unwrap();
        assert!(gmul(&p0, &p0).unwrap().terms().next().is_none());
        let sum = gmul(&p0, &p1).unwrap().add(&gmul(&p1, &p0).unwrap()).unwrap();
        assert!(sum.terms().next().is_none());
    }

    #[test]
    fn product_of_conjugate_pair_factors() {
        let x = GrassmannElement::monomial(2, &[0, 1], one()).unwrap();
        let a = GrassmannElement::scalar(2, one()).unwrap().add(&x).unwrap();
        let b = GrassmannElement::scalar(2, one()).unwrap().sub(&x).unwrap();
        let p = gmul(&a, &b).unwrap();
        assert_eq!(p, GrassmannElement::scalar(2, one()).unwrap());
    }

    #[test]
    fn universe_mismatch_is_reported() {
        let a = GrassmannElement::generator(2, 0).unwrap();
        let b = GrassmannElement::generator(4, 0).unwrap();
        assert!(matches!(gmul(&a, &b), Err(Error::UniverseMismatch { left: 2, right: 4 })));
    }

    #[test]
    fn exp_of_zero_and_pair() {
        let zero = GrassmannElement::zero(2).unwrap();
        assert_eq!(gexp(&zero), GrassmannElement::scalar(2, one()).unwrap());
        let a = Complex64::new(0.7, -0.2);
        let x = GrassmannElement::monomial(2, &[psi_bar(0), psi(0)], -a).unwrap();
        let expected = GrassmannElement::scalar(2, one()).unwrap().add(&x).unwrap();
        assert_eq!(gexp(&x), expected);
    }

    #[test]
    fn defining_integrals() {
        let p0 = GrassmannElement::generator(2, 0).unwrap();
        assert_eq!(berezin_integrate(&p0, &[0]).unwrap().body(), one());
        let unit = GrassmannElement::scalar(2, one()).unwrap();
        assert_eq!(berezin_integrate(&unit, &[0]).unwrap().body(), Complex64::new(0.0, 0.0));
        assert!(matches!(
            berezin_integrate(&unit, &[5]),
            Err(Error::UnknownGenerator { generator: 5, universe: 2 })
        ));
    }

    #[test]
    fn one_by_one_gaussian() {
        let a = Complex64::new(2.5, 0.5);
        let x = GrassmannElement::monomial(2, &[psi_bar(0), psi(0)], -a).unwrap();
        let v = berezin_integrate(&gexp(&x), &pair_measure(1)).unwrap().body();
        assert_eq!(v, a);
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!((gaussian_grassmann(&id).unwrap() - one()).norm() < 1e-15);
    }
}
