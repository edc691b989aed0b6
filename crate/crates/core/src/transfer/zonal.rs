//! Nyström discretisation of the zonal difference kernels.
//!
//! A zonal function depends on `u = |U₁₂|² = sin²(θ/2)` on the sphere and on
//! `s = |S₁₂|² = sinh²(t/2)` on the hyperboloid. For a difference kernel
//! `β̃ x^a e^{−β̃x}` of the relative element, averaging over the relative
//! phase leaves the reduced kernel
//!
//! `k_a(θ, θ′) = (1/π) ∫₀^π β̃ x^a e^{−β̃x} dφ`,
//! `x = sin²((θ−θ′)/2) + sin θ sin θ′ sin²(φ/2)`
//!
//! (with `sinh` in place of `sin` on the hyperboloid), acting with the
//! normalised measures `du` and `ds`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{composite_on, legendre_on};

/// Pairs with `β̃·x₀ > BAND_CUTOFF` are dropped from the kernels.
const BAND_CUTOFF: f64 = 40.0;
/// Phase window `φ ≤ PHASE_WINDOW / √(β̃ sin θ sin θ′)`.
const PHASE_WINDOW: f64 = 18.0;
/// Gauss nodes in the phase average.
const PHASE_POINTS: usize = 48;
/// Gauss nodes per panel of the hyperbolic-angle grid.
const PANEL_POINTS: usize = 16;
/// Largest accepted row-mass defect of the hyperbolic kernel.
pub const ROW_MASS_TOLERANCE: f64 = 1e-8;

/// Sizes of a [`ZonalGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_u: usize,
    pub n_s: usize,
    pub s_max: f64,
}

impl GridSpec {
    /// Roughly 1.8 nodes per kernel width `√(2/β̃)` in both angles.
    pub fn suggested(beta_tilde: f64, s_max: f64) -> Self {
        let width = (2.0 / beta_tilde).sqrt();
        let round = |x: f64| ((x / PANEL_POINTS as f64).ceil() as usize).max(2) * PANEL_POINTS;
        let span = 2.0 * s_max.sqrt().asinh();
        Self {
            n_u: round(1.8 * PI / width),
            n_s: round(1.8 * span / width),
            s_max,
        }
    }

    /// Twice the nodes on both axes and twice the cutoff.
    pub fn doubled(&self) -> Self {
        Self {
            n_u: 2 * self.n_u,
            n_s: 2 * self.n_s,
            s_max: 2.0 * self.s_max,
        }
    }
}

/// Quadrature grid for zonal functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalGrid {
    pub spec: GridSpec,
    /// Gauss–Legendre nodes in `u` on `[0, 1]`.
    pub u: Vec<f64>,
    pub u_weights: Vec<f64>,
    /// Polar angles with `sin²(θ/2) = u`.
    pub theta: Vec<f64>,
    /// Nodes in `s` on `[0, s_max]`.
    pub s: Vec<f64>,
    /// Weights for `ds` (positive).
    pub s_weights: Vec<f64>,
    /// Hyperbolic angles with `sinh²(t/2) = s`.
    pub t: Vec<f64>,
}

impl ZonalGrid {
    /// `n_u` Gauss nodes in `u`; `n_s` nodes of a composite Gauss rule in the
    /// hyperbolic angle `t ∈ [0, 2 asinh √s_max]`, so geodesic resolution is
    /// uniform along the hyperboloid.
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.n_u < 2 || spec.n_s < PANEL_POINTS || !(spec.s_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs n_u >= 2, n_s >= {PANEL_POINTS}, s_max > 0 (got {spec:?})"
            )));
        }
        let (u, u_weights) = legendre_on(spec.n_u, 0.0, 1.0);
        let theta = u.iter().map(|&x| 2.0 * x.sqrt().asin()).collect();
        let panels = spec.n_s.div_ceil(PANEL_POINTS);
        let span = 2.0 * spec.s_max.sqrt().asinh();
        let (t, t_weights) = composite_on(panels, PANEL_POINTS, 0.0, span);
        let s = t.iter().map(|&x: &f64| (0.5 * x).sinh().powi(2)).collect();
        let s_weights = t
            .iter()
            .zip(&t_weights)
            .map(|(&x, &w): (&f64, &f64)| 0.5 * x.sinh() * w)
            .collect();
        Ok(Self {
            spec: GridSpec {
                n_s: panels * PANEL_POINTS,
                ..spec
            },
            u,
            u_weights,
            theta,
            s,
            s_weights,
            t,
        })
    }

    pub fn n_u(&self) -> usize {
        self.u.len()
    }

    pub fn n_s(&self) -> usize {
        self.s.len()
    }
}

/// Square matrix stored as one contiguous run of columns per row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    size: usize,
    starts: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Row `i` as `(first column, values)`.
    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        (self.starts[i], &self.rows[i])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let start = self.starts[i];
        if j < start {
            return 0.0;
        }
        self.rows[i].get(j - start).copied().unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    /// Largest number of stored entries in a row.
    pub fn bandwidth(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `Σ c_k M_k` over matrices sharing this matrix's band pattern.
    pub fn combine(terms: &[(f64, &BandedMatrix)]) -> Option<BandedMatrix> {
        let (_, first) = terms.first()?;
        let mut out = BandedMatrix {
            size: first.size,
            starts: first.starts.clone(),
            rows: first.rows.iter().map(|r| vec![0.0; r.len()]).collect(),
        };
        for (c, m) in terms {
            debug_assert_eq!(m.starts, out.starts);
            for (dst, src) in out.rows.iter_mut().zip(&m.rows) {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
        Some(out)
    }
}

/// Discretised `K_U·x^a` and `K_S·y^b` for `a, b = 0..=max_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalKernels {
    pub beta_tilde: f64,
    pub u: Vec<BandedMatrix>,
    pub s: Vec<BandedMatrix>,
    /// Largest `|1 − (K_S 1)(s)|` over nodes whose kernel window lies
    /// inside `[0, s_max]`.
    pub row_mass_defect: f64,
}

/// Which symmetric space a kernel lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Geometry {
    Sphere,
    Hyperboloid,
}

impl Geometry {
    fn half_chord(self, angle: f64) -> f64 {
        match self {
            Geometry::Sphere => angle.sin(),
            Geometry::Hyperboloid => angle.sinh(),
        }
    }

    fn x0(self, a: f64, b: f64) -> f64 {
        self.half_chord(0.5 * (a - b)).powi(2)
    }
}

/// Phase-averaged kernels `k_a(θ, θ′)` for `a = 0..=max_power`.
fn reduced_kernels(geometry: Geometry, beta_tilde: f64, a: f64, b: f64, max_power: u32) -> Vec<f64> {
    let x0 = geometry.x0(a, b);
    let product = geometry.half_chord(a) * geometry.half_chord(b);
    let mut out = vec![0.0; max_power as usize + 1];
    let c = beta_tilde * product;
    if c <= 0.0 {
        let base = beta_tilde * (-beta_tilde * x0).exp();
        for (p, v) in out.iter_mut().enumerate() {
            *v = base * x0.powi(p as i32);
        }
        return out;
    }
    let window = (PHASE_WINDOW / c.sqrt()).min(PI);
    let (phi, w) = legendre_on(PHASE_POINTS, 0.0, window);
    for (&phi, &w) in phi.iter().zip(&w) {
        let x = x0 + product * (0.5 * phi).sin().powi(2);
        let base = w * beta_tilde * (-beta_tilde * x).exp() / PI;
        let mut power = 1.0;
        for v in out.iter_mut() {
            *v += base * power;
            power *= x;
        }
    }
    out
}

fn kernel_family(
    geometry: Geometry,
    beta_tilde: f64,
    angles: &[f64],
    weights: &[f64],
    max_power: u32,
) -> Vec<BandedMatrix> {
    let n = angles.len();
    let rows: Vec<(usize, Vec<Vec<f64>>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let inside = |j: usize| beta_tilde * geometry.x0(angles[i], angles[j]) <= BAND_CUTOFF;
            let mut lo = i;
            while lo > 0 && inside(lo - 1) {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < n && inside(hi + 1) {
                hi += 1;
            }
            let mut per_power = vec![Vec::with_capacity(hi - lo + 1); max_power as usize + 1];
            for j in lo..=hi {
                let k = reduced_kernels(geometry, beta_tilde, angles[i], angles[j], max_power);
                for (dst, v) in per_power.iter_mut().zip(k) {
                    dst.push(v * weights[j]);
                }
            }
            (lo, per_power)
        })
        .collect();
    (0..=max_power as usize)
        .map(|p| BandedMatrix {
            size: n,
            starts: rows.iter().map(|r| r.0).collect(),
            rows: rows.iter().map(|r| r.1[p].clone()).collect(),
        })
        .collect()
}

/// Nyström matrices of the phase-averaged kernels on both axes.
///
/// Fails with `TRUNCATION_TOO_SMALL` when no node has its kernel window
/// `β̃ sinh²((t − t′)/2) ≤ BAND_CUTOFF` inside `[0, s_max]`, or when `K_S`
/// applied to the constant function deviates from 1 by more than
/// [`ROW_MASS_TOLERANCE`] at such a node.
pub fn zonal_kernel_matrix(beta_tilde: f64, grid: &ZonalGrid, max_power: u32) -> Result<ZonalKernels> {
    if !(beta_tilde > 0.0) {
        return Err(Error::InvalidArgument(format!("beta_tilde must be positive, got {beta_tilde}")));
    }
    let u = kernel_family(Geometry::Sphere, beta_tilde, &grid.theta, &grid.u_weights, max_power);
    let s = kernel_family(Geometry::Hyperboloid, beta_tilde, &grid.t, &grid.s_weights, max_power);
    let sums = s[0].row_sums();
    let t_max = 2.0 * grid.spec.s_max.sqrt().asinh();
    let margin = 2.0 * (BAND_CUTOFF / beta_tilde).sqrt().asinh();
    let interior: Vec<f64> = grid
        .t
        .iter()
        .zip(&sums)
        .filter(|(&t, _)| t <= t_max - margin)
        .map(|(_, &m)| (1.0 - m).abs())
        .collect();
    let defect = interior.iter().copied().fold(0.0f64, f64::max);
    if interior.is_empty() || !(defect <= ROW_MASS_TOLERANCE) {
        return Err(Error::TruncationTooSmall {
            defect,
            s_max: grid.spec.s_max,
        });
    }
    Ok(ZonalKernels {
        beta_tilde,
        u,
        s,
        row_mass_defect: defect,
    })
}

/// Eigenvalues (descending) of a Nyström matrix with positive weights,
/// from the symmetric similarity transform `W^{1/2} K W^{1/2}`.
pub fn nystrom_eigenvalues(matrix: &BandedMatrix, weights: &[f64]) -> Vec<f64> {
    let n = matrix.size();
    let sym = DMatrix::from_fn(n, n, |i, j| {
        let v = matrix.get(i, j) / weights[j];
        0.5 * (v + matrix.get(j, i) / weights[i]) * (weights[i] * weights[j]).sqrt()
    });
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_weights_cover_domains() {
        let g = ZonalGrid::new(GridSpec {
            n_u: 40,
            n_s: 64,
            s_max: 3.0,
        })
        .unwrap();
        assert!((g.u_weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((g.s_weights.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(g.s_weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn coincident_pole_kernel_is_exponential() {
        let k = reduced_kernels(Geometry::Sphere, 10.0, 0.0, 0.4, 1);
        let x0 = (0.2f64).sin().powi(2);
        assert!((k[0] - 10.0 * (-10.0 * x0).exp()).abs() < 1e-14);
        assert!((k[1] - 10.0 * x0 * (-10.0 * x0).exp()).abs() < 1e-14);
    }
}
