//! Gauss–Legendre rules (nodes from `gauss-quad`) with composite and
//! adaptive drivers.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights on `[-1, 1]`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Cached `points`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn legendre_rule(points: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(points)
        .or_insert_with(|| {
            let degree = NonZeroUsize::new(points.max(1)).expect("nonzero");
            let mut pairs: Vec<(f64, f64)> =
                GaussLegendre::new(degree).as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(Rule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            })
        })
        .clone()
}

/// Nodes and weights of a `points`-point rule mapped to `[a, b]`.
pub fn legendre_on(points: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = legendre_rule(points);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let nodes = rule.nodes.iter().map(|x| mid + half * x).collect();
    let weights = rule.weights.iter().map(|w| half * w).collect();
    (nodes, weights)
}

/// Composite rule with `panels` equal panels of `points` nodes each.
pub fn composite_on(panels: usize, points: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * points);
    let mut weights = Vec::with_capacity(panels * points);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let (x, w) = legendre_on(points, lo, lo + width);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// Fixed-order integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize) -> f64 {
    let (x, w) = legendre_on(points, a, b);
    x.iter().zip(&w).map(|(&x, &w)| w * f(x)).sum()
}

/// Fixed-order integral of a complex integrand.
pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    points: usize,
) -> Complex64 {
    let (x, w) = legendre_on(points, a, b);
    x.iter().zip(&w).map(|(&x, &w)| f(x) * w).sum()
}

/// Settings of the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    /// Base rule size; each panel is compared against twice that size.
    pub points: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            points: 20,
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_depth: 30,
        }
    }
}

impl Adaptive {
    /// Integrates `f` on `[a, b]` by recursive bisection until a panel's
    /// `n`- and `2n`-point estimates agree.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, context: &str) -> Result<f64> {
        let g = |x: f64| Complex64::new(f(x), 0.0);
        self.integrate_complex(g, a, b, context).map(|z| z.re)
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        context: &str,
    ) -> Result<Complex64> {
        let whole = integrate_complex(&f, a, b, 2 * self.points);
        let scale_tol = self.abs_tol.max(self.rel_tol * whole.norm());
        let mut total = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        let mut stack = vec![(a, b, 0u32)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let coarse = integrate_complex(&f, lo, hi, self.points);
            let fine = integrate_complex(&f, lo, hi, 2 * self.points);
            let diff = (fine - coarse).norm();
            let share = scale_tol * (hi - lo) / (b - a);
            if diff <= share.max(f64::EPSILON * fine.norm()) {
                total += fine;
                error += diff;
            } else if depth >= self.max_depth {
                return Err(Error::QuadratureNotConverged {
                    context: context.to_string(),
                    estimate: fine.norm(),
                    error: diff,
                });
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::QuadratureNotConverged {
                context: context.to_string(),
                estimate: f64::NAN,
                error,
            });
        }
        Ok(total)
    }
}

/// Adaptive integral with default settings.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, context: &str) -> Result<f64> {
    Adaptive::default().integrate(f, a, b, context)
}
