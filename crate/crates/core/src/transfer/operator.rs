//! The 4×4 zonal transfer operator and the finite-`n` correlator
//! `C e^{c₀(α₁−α₂)} (M̂^{n−1} f̂, ĝ)` with `M̂ = F̂ K̂₀ F̂`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::zonal::{zonal_kernel_matrix, BandedMatrix, GridSpec, ZonalGrid, ZonalKernels};
use crate::berezin::nilpotent::{generating_function, LeadingSymbols};
use crate::error::{Error, Result};
use crate::scalars::{bulk_constants, r_plus_minus_limit, BulkConstants, LimitShifts, Shifts};

/// Highest power of `u` or `s` in the leading symbols.
const MAX_POWER: u32 = 4;
/// `F^{2n}` is below `e^{−TAIL_DECAY}` beyond the default `s_max`.
const TAIL_DECAY: f64 = 40.0;
/// Fallback cutoff when `Re α₂ ≤ 0`.
const FALLBACK_S_MAX: f64 = 20.0;

/// Which kernel operator sits between the two `F̂` factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelOrder {
    /// `K̂₀ = I`: the `β̃ → ∞` limit, used to validate the pipeline.
    Identity,
    /// Diagonal `K_US` plus the five upper blocks of the leading operator.
    #[default]
    Leading,
}

/// Physical parameters of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferParams {
    pub energy: f64,
    pub eps: f64,
    pub xi: Shifts,
    pub beta: f64,
    pub n: usize,
}

impl TransferParams {
    /// Parameters with the coupling given through `β̃ = c₀² β`.
    pub fn with_beta_tilde(energy: f64, eps: f64, xi: Shifts, beta_tilde: f64, n: usize) -> Result<Self> {
        let bulk = bulk_constants(energy, 0.0)?;
        Ok(Self {
            energy,
            eps,
            xi,
            beta: beta_tilde / (bulk.c0 * bulk.c0),
            n,
        })
    }
}

/// `s_max` with `e^{−2c₀ Re(α₂) s_max} = e^{−40}`.
pub fn default_s_max(bulk: &BulkConstants, shifts: &LimitShifts) -> f64 {
    let rate = bulk.c0 * shifts.alpha2.re;
    if rate > 0.0 {
        TAIL_DECAY / (2.0 * rate)
    } else {
        FALLBACK_S_MAX
    }
}

/// Complex zonal function sampled on the grid, `u`-major.
pub type Field = Vec<Complex64>;

/// `Σ_a (K_U x^a) ⊗ C_a` for one block.
#[derive(Debug, Clone, PartialEq)]
struct Block {
    row: usize,
    col: usize,
    terms: Vec<(usize, BandedMatrix)>,
}

/// Assembled operator with its boundary vectors.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    pub params: TransferParams,
    pub bulk: BulkConstants,
    pub shifts: LimitShifts,
    pub order: KernelOrder,
    pub grid: ZonalGrid,
    pub kernels: Option<ZonalKernels>,
    pub symbols: LeadingSymbols,
    /// `F`, `F₁`, `F₂` on the grid.
    pub f: Field,
    pub f1: Field,
    pub f2: Field,
    /// `f̂ = F̂(e₄ − e₁)`.
    pub fvec: [Field; 4],
    /// `ĝ = F̂ᵗ(e₁ − e₄)`.
    pub gvec: [Field; 4],
    blocks: Vec<Block>,
}

/// Builds the operator; `grid` defaults to [`GridSpec::suggested`] with
/// [`default_s_max`].
pub fn assemble_transfer(params: TransferParams, grid: Option<GridSpec>, order: KernelOrder) -> Result<TransferOperator> {
    if params.n < 2 {
        return Err(Error::InvalidArgument(format!("transfer evaluation needs n >= 2, got {}", params.n)));
    }
    if !(params.eps >= 0.0) || !(params.beta > 0.0) {
        return Err(Error::InvalidArgument("need eps >= 0 and beta > 0".into()));
    }
    let bulk = bulk_constants(params.energy, params.beta)?;
    let shifts = LimitShifts::new(&bulk, params.eps, &params.xi);
    let beta_tilde = bulk.beta_tilde;
    let spec = grid.unwrap_or_else(|| GridSpec::suggested(beta_tilde, default_s_max(&bulk, &shifts)));
    let grid = ZonalGrid::new(spec)?;
    let symbols = generating_function().coefficient_matrix().leading_symbols();

    let (kernels, blocks) = match order {
        KernelOrder::Identity => (None, Vec::new()),
        KernelOrder::Leading => {
            let kernels = zonal_kernel_matrix(beta_tilde, &grid, MAX_POWER)?;
            let tables = symbols.in_u_s(beta_tilde);
            let mut blocks = Vec::new();
            for (row, line) in tables.iter().enumerate() {
                for (col, table) in line.iter().enumerate() {
                    let Some(table) = table else { continue };
                    let mut terms = Vec::new();
                    for a in 0..=MAX_POWER as usize {
                        let parts: Vec<(f64, &BandedMatrix)> = table
                            .0
                            .iter()
                            .filter(|((pa, _), _)| *pa as usize == a)
                            .map(|(&(_, b), &c)| (c, &kernels.s[b as usize]))
                            .collect();
                        if let Some(combined) = BandedMatrix::combine(&parts) {
                            terms.push((a, combined));
                        }
                    }
                    blocks.push(Block { row, col, terms });
                }
            }
            (Some(kernels), blocks)
        }
    };

    let n = params.n as f64;
    let c0 = bulk.c0;
    let (a1, a2, d1, d2) = (shifts.alpha1, shifts.alpha2, shifts.delta1, shifts.delta2);
    let mut f = Vec::with_capacity(grid.n_u() * grid.n_s());
    let mut f1 = Vec::with_capacity(f.capacity());
    let mut f2 = Vec::with_capacity(f.capacity());
    for &u in &grid.u {
        for &s in &grid.s {
            let slope = a1 * u + a2 * s;
            f.push((-(c0 / n) * (a1 * (1.0 - u) + a2 * s)).exp());
            f1.push(-(c0 / n) * (d1 - slope));
            f2.push(-(c0 / n) * (d2 - slope));
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let fvec = [
        pointwise(&f, |k| f1[k] * f2[k] - one),
        pointwise(&f, |k| f2[k]),
        pointwise(&f, |k| f1[k]),
        pointwise(&f, |_| one),
    ];
    let gvec = [
        pointwise(&f, |_| one),
        pointwise(&f, |k| f1[k]),
        pointwise(&f, |k| f2[k]),
        pointwise(&f, |k| f1[k] * f2[k] - one),
    ];
    Ok(TransferOperator {
        params,
        bulk,
        shifts,
        order,
        grid,
        kernels,
        symbols,
        f,
        f1,
        f2,
        fvec,
        gvec,
        blocks,
    })
}

fn pointwise(f: &Field, g: impl Fn(usize) -> Complex64) -> Field {
    f.iter().enumerate().map(|(k, &v)| v * g(k)).collect()
}

/// `(A ⊗ C) v`, i.e. `A V Cᵗ` for `V` stored `u`-major.
fn apply_tensor(a: &BandedMatrix, c: &BandedMatrix, v: &[Complex64], n_u: usize, n_s: usize, out: &mut [Complex64]) {
    let mut tmp = vec![Complex64::new(0.0, 0.0); n_u * n_s];
    for k in 0..n_u {
        let row = &v[k * n_s..(k + 1) * n_s];
        let dst = &mut tmp[k * n_s..(k + 1) * n_s];
        for (j, d) in dst.iter_mut().enumerate() {
            let (start, vals) = c.row(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &w) in row[start..start + vals.len()].iter().zip(vals) {
                acc += x * w;
            }
            *d = acc;
        }
    }
    for i in 0..n_u {
        let (start, vals) = a.row(i);
        let dst = &mut out[i * n_s..(i + 1) * n_s];
        for (offset, &w) in vals.iter().enumerate() {
            let src = &tmp[(start + offset) * n_s..(start + offset + 1) * n_s];
            for (d, &x) in dst.iter_mut().zip(src) {
                *d += x * w;
            }
        }
    }
}

impl TransferOperator {
    pub fn beta_tilde(&self) -> f64 {
        self.bulk.beta_tilde
    }

    /// `F̂ v` for `F̂ = F·[[1,F₁,F₂,F₁F₂],[0,1,0,F₂],[0,0,1,F₁],[0,0,0,1]]`.
    #[allow(clippy::needless_range_loop)]
    pub fn apply_f_hat(&self, v: &[Field; 4]) -> [Field; 4] {
        let len = self.f.len();
        let mut out: [Field; 4] = std::array::from_fn(|_| Vec::with_capacity(len));
        for k in 0..len {
            let (f, f1, f2) = (self.f[k], self.f1[k], self.f2[k]);
            out[0].push(f * (v[0][k] + f1 * v[1][k] + f2 * v[2][k] + f1 * f2 * v[3][k]));
            out[1].push(f * (v[1][k] + f2 * v[3][k]));
            out[2].push(f * (v[2][k] + f1 * v[3][k]));
            out[3].push(f * v[3][k]);
        }
        out
    }

    /// `K̂₀ v`.
    pub fn apply_kernel(&self, v: &[Field; 4]) -> [Field; 4] {
        let Some(kernels) = &self.kernels else {
            return v.clone();
        };
        let (n_u, n_s) = (self.grid.n_u(), self.grid.n_s());
        let mut out: [Field; 4] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n_u * n_s]);
        for block in &self.blocks {
            for (a, c) in &block.terms {
                apply_tensor(&kernels.u[*a], c, &v[block.col], n_u, n_s, &mut out[block.row]);
            }
        }
        out
    }

    /// `M̂ v = F̂ K̂₀ F̂ v`.
    pub fn apply(&self, v: &[Field; 4]) -> [Field; 4] {
        self.apply_f_hat(&self.apply_kernel(&self.apply_f_hat(v)))
    }

    /// `Σ_i ∫∫ x_i y_i du ds` (bilinear).
    pub fn pairing(&self, x: &[Field; 4], y: &[Field; 4]) -> Complex64 {
        let n_s = self.grid.n_s();
        let mut total = Complex64::new(0.0, 0.0);
        for (xi, yi) in x.iter().zip(y) {
            for (p, &wu) in self.grid.u_weights.iter().enumerate() {
                let mut row = Complex64::new(0.0, 0.0);
                for (q, &ws) in self.grid.s_weights.iter().enumerate() {
                    row += xi[p * n_s + q] * yi[p * n_s + q] * ws;
                }
                total += row * wu;
            }
        }
        total
    }

    /// `C e^{c₀(α₁−α₂)} (M̂^{n−1} f̂, ĝ)`.
    pub fn evaluate(&self) -> Result<Complex64> {
        let mut v = self.fvec.clone();
        for step in 1..self.params.n {
            v = self.apply(&v);
            if v.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("transfer power {step}"),
                });
            }
        }
        let prefactor =
            self.shifts.prefactor * (self.bulk.c0 * (self.shifts.alpha1 - self.shifts.alpha2)).exp();
        let value = prefactor * self.pairing(&v, &self.gvec);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonFinite {
                context: "transfer pairing".into(),
            });
        }
        Ok(value)
    }
}

/// Result of [`evaluate_sigma_model`] next to the closed-form limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaModelValue {
    pub value: Complex64,
    pub closed_form: Complex64,
    pub relative_deviation: f64,
    pub beta_tilde: f64,
    pub grid: GridReport,
}

/// Discretisation actually used by an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridReport {
    pub spec: GridSpec,
    /// `None` for [`KernelOrder::Identity`], which builds no kernels.
    pub row_mass_defect: Option<f64>,
    pub u_bandwidth: Option<usize>,
    pub s_bandwidth: Option<usize>,
}

impl TransferOperator {
    pub fn grid_report(&self) -> GridReport {
        GridReport {
            spec: self.grid.spec,
            row_mass_defect: self.kernels.as_ref().map(|k| k.row_mass_defect),
            u_bandwidth: self.kernels.as_ref().map(|k| k.u[0].bandwidth()),
            s_bandwidth: self.kernels.as_ref().map(|k| k.s[0].bandwidth()),
        }
    }
}

/// Finite-`(n, β)` correlator from the assembled transfer operator.
pub fn evaluate_sigma_model(params: TransferParams, grid: Option<GridSpec>, order: KernelOrder) -> Result<SigmaModelValue> {
    let op = assemble_transfer(params, grid, order)?;
    let value = op.evaluate()?;
    let closed_form = r_plus_minus_limit(params.energy, params.eps, &params.xi)?;
    Ok(SigmaModelValue {
        value,
        closed_form,
        relative_deviation: (value - closed_form).norm() / closed_form.norm(),
        beta_tilde: op.beta_tilde(),
        grid: op.grid_report(),
    })
}
