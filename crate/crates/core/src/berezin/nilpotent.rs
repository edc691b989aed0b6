//! Polynomials in four commuting nilpotents `n1, n2, n1', n2'` with
//! coefficients in [`Poly`], and the 4×4 coefficient matrix read off from
//! the zonal transfer-kernel generating function.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_rational::Rational64;
use serde::Serialize;

use super::poly::{Poly, Var};

/// One of the four commuting nilpotents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nilpotent {
    N1,
    N2,
    N1p,
    N2p,
}

impl Nilpotent {
    fn bit(self) -> u8 {
        match self {
            Nilpotent::N1 => 1,
            Nilpotent::N2 => 2,
            Nilpotent::N1p => 4,
            Nilpotent::N2p => 8,
        }
    }
}

/// Monomial masks of the row basis `(1, n1, n2, n1 n2)`.
const ROW_BASIS: [u8; 4] = [0, 1, 2, 3];
/// Monomial masks of the column basis `(n1' n2', n2', n1', 1)`.
const COL_BASIS: [u8; 4] = [12, 8, 4, 0];

/// Polynomial in `n1, n2, n1', n2'` (each squaring to zero).
///
/// The coefficient of a subset is indexed by its mask with `n1 = 1`,
/// `n2 = 2`, `n1' = 4`, `n2' = 8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotentPolynomial {
    coeffs: [Poly; 16],
}

impl Default for NilpotentPolynomial {
    fn default() -> Self {
        Self {
            coeffs: std::array::from_fn(|_| Poly::zero()),
        }
    }
}

impl NilpotentPolynomial {
    pub fn scalar(c: Poly) -> Self {
        let mut out = Self::default();
        out.coeffs[0] = c;
        out
    }

    pub fn one() -> Self {
        Self::scalar(Poly::one())
    }

    /// The bare nilpotent `n`.
    pub fn nilpotent(n: Nilpotent) -> Self {
        let mut out = Self::default();
        out.coeffs[n.bit() as usize] = Poly::one();
        out
    }

    /// `c · Π n` over the listed nilpotents.
    pub fn term(c: Poly, factors: &[Nilpotent]) -> Self {
        factors
            .iter()
            .fold(Self::scalar(c), |acc, &n| &acc * &Self::nilpotent(n))
    }

    pub fn coeff(&self, mask: u8) -> &Poly {
        &self.coeffs[mask as usize & 15]
    }

    pub fn scale(&self, c: &Poly) -> Self {
        Self {
            coeffs: std::array::from_fn(|k| &self.coeffs[k] * c),
        }
    }

    /// `exp(x)` for `x` with zero constant term; the series stops at the
    /// fourth power.
    pub fn exp_nilpotent(&self) -> Self {
        let mut part = self.clone();
        part.coeffs[0] = Poly::zero();
        let mut out = Self::one();
        let mut power = Self::one();
        for k in 1..=4i64 {
            power = (&power * &part).scale(&Poly::constant(Rational64::new(1, k)));
            out = &out + &power;
        }
        out
    }

    /// Coefficient matrix `K_ij = [e_i ē_j]` with `e = (1, n1, n2, n1 n2)` and
    /// `ē = (n1' n2', n2', n1', 1)`; zero-based indices.
    pub fn coefficient_matrix(&self) -> CoefficientMatrix {
        CoefficientMatrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.coeff(ROW_BASIS[i] | COL_BASIS[j]).clone())
        }))
    }
}

impl Add for &NilpotentPolynomial {
    type Output = NilpotentPolynomial;
    fn add(self, rhs: Self) -> NilpotentPolynomial {
        NilpotentPolynomial {
            coeffs: std::array::from_fn(|k| &self.coeffs[k] + &rhs.coeffs[k]),
        }
    }
}

impl Sub for &NilpotentPolynomial {
    type Output = NilpotentPolynomial;
    fn sub(self, rhs: Self) -> NilpotentPolynomial {
        NilpotentPolynomial {
            coeffs: std::array::from_fn(|k| &self.coeffs[k] - &rhs.coeffs[k]),
        }
    }
}

impl Mul for &NilpotentPolynomial {
    type Output = NilpotentPolynomial;
    fn mul(self, rhs: Self) -> NilpotentPolynomial {
        let mut out = NilpotentPolynomial::default();
        for a in 0..16usize {
            if self.coeffs[a].is_zero() {
                continue;
            }
            for b in 0..16usize {
                if a & b != 0 || rhs.coeffs[b].is_zero() {
                    continue;
                }
                out.coeffs[a | b] = &out.coeffs[a | b] + &(&self.coeffs[a] * &rhs.coeffs[b]);
            }
        }
        out
    }
}

/// Expands a product of factors into the 16 nilpotent coefficients.
pub fn nilpotent_expand(factors: &[NilpotentPolynomial]) -> NilpotentPolynomial {
    factors
        .iter()
        .fold(NilpotentPolynomial::one(), |acc, f| &acc * f)
}

/// The four factors of the zonal kernel generating function:
/// `e^{d(n1+n2+n1'+n2')}`,
/// `1 − w(n1+n2)(n1'+n2')/β̃ + 2w² n1n2n1'n2'/β̃²`,
/// `1 − (n1n2 + n1'n2')/β̃² + n1n2n1'n2'/β̃⁴` and
/// `1 − d(n1n1' + n2n2') + us(n1+n2)(n1'+n2') + d² n1n2n1'n2'`.
pub fn generating_factors() -> [NilpotentPolynomial; 4] {
    use Nilpotent::*;
    let d = Poly::var(Var::D);
    let w = Poly::var(Var::W);
    let us = Poly::var(Var::Us);
    let b = Poly::var(Var::BetaInv);
    let np = NilpotentPolynomial::nilpotent;
    let all = &(&np(N1) + &np(N2)) + &(&np(N1p) + &np(N2p));
    let left = &np(N1) + &np(N2);
    let right = &np(N1p) + &np(N2p);
    let cross = &left * &right;
    let top = [N1, N2, N1p, N2p];
    let t = NilpotentPolynomial::term;

    let exponential = all.scale(&d).exp_nilpotent();
    let second = &(&NilpotentPolynomial::one() - &cross.scale(&(&w * &b)))
        + &t(&(&w * &w) * &(&b * &b).scale(Rational64::from_integer(2)), &top);
    let third = &(&NilpotentPolynomial::one()
        - &(&t(b.pow(2), &[N1, N2]) + &t(b.pow(2), &[N1p, N2p])))
        + &t(b.pow(4), &top);
    let fourth = &(&(&NilpotentPolynomial::one()
        - &(&t(d.clone(), &[N1, N1p]) + &t(d.clone(), &[N2, N2p])))
        + &cross.scale(&us))
        + &t(d.pow(2), &top);
    [exponential, second, third, fourth]
}

/// The expanded generating function.
pub fn generating_function() -> NilpotentPolynomial {
    nilpotent_expand(&generating_factors())
}

/// 4×4 matrix of symbol polynomials (zero-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMatrix(pub [[Poly; 4]; 4]);

impl CoefficientMatrix {
    /// Entry `K_{row,col}` with one-based indices, as printed in formulas.
    pub fn entry(&self, row: usize, col: usize) -> &Poly {
        &self.0[row - 1][col - 1]
    }

    /// `T K T` with `T` antidiagonal, `T_14 = β̃`, `T_23 = T_32 = 1`,
    /// `T_41 = 1/β̃`.
    ///
    /// Entries are returned as a pair `(power, poly)` meaning
    /// `β̃^power · poly`, since `poly` only carries non-positive powers.
    pub fn t_conjugate(&self) -> [[(i32, Poly); 4]; 4] {
        // T_{i, 3-i} = β̃^{scale[i]}.
        let scale = [1, 0, 0, -1];
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let si = 3 - i;
                let sj = 3 - j;
                (scale[i] + scale[sj], self.0[si][sj].clone())
            })
        })
    }

    /// Symbols of the leading operator: diagonal `1` and upper entries
    /// `(1,2) = β̃K43`, `(1,3) = β̃K42`, `(1,4) = β̃²K41`, `(2,4) = β̃K31`,
    /// `(3,4) = β̃K21`, each still to be composed with the zonal kernel;
    /// all other entries are zero.
    pub fn leading_symbols(&self) -> LeadingSymbols {
        let conj = self.t_conjugate();
        let mut entries: [[Option<(i32, Poly)>; 4]; 4] = Default::default();
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Some((0, Poly::one()));
        }
        for &(i, j) in &UPPER_ENTRIES {
            entries[i][j] = Some(conj[i][j].clone());
        }
        LeadingSymbols(entries)
    }

    /// JSON object `{"K11": "...", ...}` with the printed polynomial forms.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = BTreeMap::new();
        for i in 0..4 {
            for j in 0..4 {
                map.insert(format!("K{}{}", i + 1, j + 1), self.0[i][j].to_string());
            }
        }
        serde_json::to_value(map).expect("string map serializes")
    }
}

/// Zero-based positions of the off-diagonal blocks kept in the leading operator.
pub const UPPER_ENTRIES: [(usize, usize); 5] = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)];

/// Entries `β̃^power · poly` of the leading transfer operator; `None` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingSymbols(pub [[Option<(i32, Poly)>; 4]; 4]);

/// Coefficient table of `u^a s^b` for one symbol at a numeric `β̃`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UsCoefficients(pub BTreeMap<(u32, u32), f64>);

impl LeadingSymbols {
    /// Substitutes `d, w, us` in terms of `u, s` and multiplies by `β̃^power`.
    pub fn in_u_s(&self, beta_tilde: f64) -> [[Option<UsCoefficients>; 4]; 4] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                self.0[i][j].as_ref().map(|(power, poly)| {
                    let factor = beta_tilde.powi(*power);
                    let mut table = poly.in_u_s(beta_tilde);
                    for v in table.values_mut() {
                        *v *= factor;
                    }
                    UsCoefficients(table)
                })
            })
        })
    }
}
