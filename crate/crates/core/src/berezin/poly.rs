//! Multivariate polynomials in `(d, w, us, 1/β̃)` with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Variable of a [`Poly`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// `d = 1 − u + s`.
    D,
    /// `w = u + s`.
    W,
    /// The product `u·s`.
    Us,
    /// `1/β̃`.
    BetaInv,
}

impl Var {
    const ALL: [Var; 4] = [Var::D, Var::W, Var::Us, Var::BetaInv];

    fn name(self) -> &'static str {
        match self {
            Var::D => "d",
            Var::W => "w",
            Var::Us => "us",
            Var::BetaInv => "bt^-1",
        }
    }
}

/// Exponents of `(d, w, us, 1/β̃)`.
pub type Exponents = [u32; 4];

/// Sparse polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exponents, Rational64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational64::one())
    }

    pub fn constant(c: Rational64) -> Self {
        Self::monomial(c, [0; 4])
    }

    pub fn integer(c: i64) -> Self {
        Self::constant(Rational64::from_integer(c))
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 4];
        e[v as usize] = 1;
        Self::monomial(Rational64::one(), e)
    }

    pub fn monomial(c: Rational64, exponents: Exponents) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exponents, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational64)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: Rational64) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, *v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    fn add_term(&mut self, e: Exponents, c: Rational64) {
        let entry = self.terms.entry(e).or_insert_with(Rational64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Numerical value at `(d, w, us, 1/β̃)`.
    pub fn eval(&self, values: [f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let coef = c.to_f64().unwrap_or(f64::NAN);
                coef * e
                    .iter()
                    .zip(values)
                    .map(|(&k, x)| x.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Substitutes `d = 1 − u + s`, `w = u + s`, `us = u·s` and the numeric
    /// `β̃`, returning coefficients `c_{ab}` of `u^a s^b`.
    pub fn in_u_s(&self, beta_tilde: f64) -> BTreeMap<(u32, u32), f64> {
        // Polynomials in (u, s) as maps (a, b) -> coefficient.
        type Us = BTreeMap<(u32, u32), f64>;
        fn mul(x: &Us, y: &Us) -> Us {
            let mut out = Us::new();
            for (&(a1, b1), &c1) in x {
                for (&(a2, b2), &c2) in y {
                    *out.entry((a1 + a2, b1 + b2)).or_insert(0.0) += c1 * c2;
                }
            }
            out
        }
        let base: [Us; 3] = [
            Us::from([((0, 0), 1.0), ((1, 0), -1.0), ((0, 1), 1.0)]),
            Us::from([((1, 0), 1.0), ((0, 1), 1.0)]),
            Us::from([((1, 1), 1.0)]),
        ];
        let mut out = Us::new();
        for (e, c) in &self.terms {
            let mut term = Us::from([((0, 0), c.to_f64().unwrap_or(f64::NAN) * beta_tilde.powi(-(e[3] as i32)))]);
            for (k, factor) in base.iter().enumerate() {
                for _ in 0..e[k] {
                    term = mul(&term, factor);
                }
            }
            for (key, v) in term {
                *out.entry(key).or_insert(0.0) += v;
            }
        }
        out.retain(|_, v| *v != 0.0);
        out
    }

    /// Parses the plain-text form produced by `Display`, e.g.
    /// `d^4 - 2*d^3 + 4*d^2*us - 4*d^2*w/bt + bt^-4`.
    ///
    /// `bt` denotes `β̃` and may only appear in the denominator or with a
    /// negative exponent.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |msg: &str| Error::InvalidArgument(format!("cannot parse polynomial {text:?}: {msg}"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut result = Poly::zero();
        let mut chunks = Vec::new();
        let mut current = String::new();
        let mut previous = None;
        for ch in compact.chars() {
            if (ch == '+' || ch == '-') && previous.is_some_and(|p| p != '^') {
                chunks.push(std::mem::take(&mut current));
            }
            current.push(ch);
            previous = Some(ch);
        }
        chunks.push(current);
        for chunk in chunks {
            let (sign, body) = match chunk.strip_prefix('-') {
                Some(rest) => (-1, rest.to_string()),
                None => (1, chunk.trim_start_matches('+').to_string()),
            };
            if body.is_empty() {
                return Err(err("empty term"));
            }
            let mut coef = Rational64::from_integer(sign);
            let mut exps = [0i64; 4];
            let (num, den) = match body.split_once('/') {
                Some((n, d)) => (n.to_string(), Some(d.to_string())),
                None => (body, None),
            };
            let mut apply = |factor: &str, power_sign: i64| -> Result<()> {
                let (name, power) = match factor.split_once('^') {
                    Some((n, p)) => (n, p.parse::<i64>().map_err(|_| err("bad exponent"))?),
                    None => (factor, 1),
                };
                let power = power * power_sign;
                match name {
                    "d" => exps[0] += power,
                    "w" => exps[1] += power,
                    "us" => exps[2] += power,
                    "bt" => exps[3] -= power,
                    _ => {
                        let value: i64 = name.parse().map_err(|_| err("unknown factor"))?;
                        let value = Rational64::from_integer(value);
                        coef *= if power >= 0 {
                            num_traits::pow(value, power as usize)
                        } else {
                            Rational64::one() / num_traits::pow(value, (-power) as usize)
                        };
                    }
                }
                Ok(())
            };
            for factor in num.split('*').filter(|f| !f.is_empty()) {
                if factor != "1" {
                    apply(factor, 1)?;
                }
            }
            if let Some(den) = den {
                for factor in den.split('*').filter(|f| !f.is_empty()) {
                    apply(factor, -1)?;
                }
            }
            if exps.iter().any(|&k| k < 0) {
                return Err(err("negative power of d, w, us or positive power of bt"));
            }
            result.add_term(exps.map(|k| k as u32), coef);
        }
        Ok(result)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree in (d, w, us) first, then lexicographic.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let deg = |e: &Exponents| e[0] + e[1] + e[2];
            deg(b).cmp(&deg(a)).then(a[3].cmp(&b[3])).then(b.cmp(a))
        });
        for (i, (e, c)) in terms.iter().enumerate() {
            let negative = c.is_negative();
            let magnitude = c.abs();
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            if !magnitude.numer().is_one() || e.iter().all(|&k| k == 0) {
                factors.push(magnitude.numer().to_string());
            }
            for v in Var::ALL.iter().take(3) {
                match e[*v as usize] {
                    0 => {}
                    1 => factors.push(v.name().to_string()),
                    k => factors.push(format!("{}^{k}", v.name())),
                }
            }
            let mut text = factors.join("*");
            let mut den: Vec<String> = Vec::new();
            if !magnitude.denom().is_one() {
                den.push(magnitude.denom().to_string());
            }
            match e[3] {
                0 => {}
                1 => den.push("bt".into()),
                k => den.push(format!("bt^{k}")),
            }
            if text.is_empty() {
                text.push('1');
            }
            if !den.is_empty() {
                text = format!("{text}/{}", den.join("*"));
            }
            write!(f, "{text}")?;
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Rational64::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
                out.add_term(e, *c1 * *c2);
            }
        }
        out
    }
}
