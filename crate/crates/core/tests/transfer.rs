use std::collections::BTreeMap;
use std::f64::consts::PI;

use bandlab::berezin::nilpotent::generating_function;
use bandlab::quadrature::composite_on;
use bandlab::scalars::{r_plus_minus_limit, Shifts};
use bandlab::transfer::*;
use bandlab::Error;
use num_complex::Complex64;

fn xi_a() -> Shifts {
    Shifts::real(0.5, -0.5, 0.25, -0.25)
}

#[test]
fn zonal_matrix_element_is_legendre() {
    for l in 0..=6 {
        assert!((rep_function(l, 0, 0, 0.0).unwrap().re - 1.0).abs() < 1e-12);
    }
    for k in 0..=40 {
        let theta = PI * k as f64 / 40.0;
        let v = rep_function(2, 0, 0, theta).unwrap();
        let x = theta.cos();
        assert!((v.re - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-10 && v.im.abs() < 1e-10);
        assert!((legendre_p(2, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-14);
    }
}

/// Slope of `P^(l)_{mm}(1 − x)` at `x = 0`. The printed slope
/// `−(l+m)(l+m+1)/2` holds for `m = 0`; for `m ≠ 0` the diagonal element
/// behaves as `1 − x (l(l+1) − m²)/2`.
#[test]
fn diagonal_matrix_element_slope_at_the_identity() {
    let h: f64 = 1e-4;
    for l in 1..=4u32 {
        for m in -(l as i32)..=(l as i32) {
            // cos θ = 1 − h.
            let theta = (1.0 - h).acos();
            let v = rep_function(l, m, m, theta).unwrap().re;
            let slope = (v - 1.0) / h;
            let lf = l as f64;
            let expected = -(lf * (lf + 1.0) - (m * m) as f64) / 2.0;
            let second_order = (lf * lf * (lf + 1.0) * (lf + 1.0)) * h;
            assert!((slope - expected).abs() < 1e-6 + second_order, "l = {l}, m = {m}: {slope}");
            if m == 0 {
                assert!((expected + lf * (lf + 1.0) / 2.0).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn trivial_sector_closed_forms() {
    for bt in [5.0, 50.0, 1e3] {
        let lambda = ku_eigenvalue(0, bt).unwrap();
        assert!((lambda - (1.0 - (-bt).exp())).abs() < 1e-12);
        let mu = u_moment(0, 1, bt).unwrap();
        let expected = 1.0 / bt - (-bt).exp() * (1.0 + 1.0 / bt);
        assert!((mu - expected).abs() < 1e-12 * expected.max(1e-3));
    }
}

#[test]
fn first_compact_sector_at_hundred() {
    let bt = 100.0;
    let lambda = ku_eigenvalue(1, bt).unwrap();
    // β̃ ∫₀¹ (1 − 2x) e^{−β̃x} dx, antiderivative evaluated exactly.
    let e = (-bt).exp();
    let exact = (1.0 - e) - 2.0 * (1.0 - e * (1.0 + bt)) / bt;
    assert!((lambda - exact).abs() < 1e-12);
    assert!((lambda - 0.98).abs() < 1e-8);
}

#[test]
fn first_moment_of_the_first_sector() {
    let bt = 1e3;
    let mu = u_moment(1, 1, bt).unwrap();
    assert!((mu - (1.0 / bt - 4.0 / (bt * bt))).abs() <= 50.0 / bt.powi(3), "{mu}");
}

#[test]
fn lowest_hyperbolic_sector_near_one() {
    let bt = 1e3;
    let lambda = ks_eigenvalue(0.0, bt).unwrap();
    assert!((lambda - (1.0 - 0.25 / bt)).abs() <= 5.0 / (bt * bt), "{lambda}");
}

#[test]
fn compact_eigenvalues_decrease_inside_the_unit_interval() {
    for bt in [100.0, 1e3, 1e4] {
        let values: Vec<f64> = (0..=8).map(|l| ku_eigenvalue(l, bt).unwrap()).collect();
        // λ⁽⁰⁾ = 1 − e^{−β̃} is 1 up to quadrature roundoff here.
        assert!(values.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-14), "{values:?}");
        assert!(values[1..].iter().all(|&v| v < 1.0));
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }
}

#[test]
fn off_diagonal_sector_bounds() {
    let bt = 1e2;
    let off = offdiag_eigenvalues(1, bt).unwrap();
    assert!(off.m11.abs() <= 1.0 / bt, "{off:?}");
    assert!(offdiag_eigenvalues(0, bt).is_err());
}

#[test]
fn correction_eigenvalue_is_fourth_order_small() {
    let bt = 1e3;
    let z = Complex64::new(1.0 + 1.0 / 8.0, 0.0);
    let c = correction_eigenvalue(1, 0.0, bt, z).unwrap();
    assert!(c.fitted_constant <= 10.0, "{c:?}");
    assert!(c.m11_product.norm() <= 1.0 / (bt * bt));
    let far = correction_eigenvalue(1, 0.0, bt, Complex64::new(1e6, 0.0)).unwrap();
    assert!(far.value.norm() < 1e-10 * c.value.norm());
    assert!(correction_eigenvalue(1, 0.0, bt, Complex64::new(0.5, 0.0)).is_err());
}

#[test]
fn diagonal_symbols_are_one_to_first_order() {
    let bt = 1e3;
    let k = generating_function().coefficient_matrix();
    for i in 1..=4 {
        let symbol: BTreeMap<(u32, u32), f64> = k.entry(i, i).in_u_s(bt);
        for (l, rho) in [(0, 0.0), (1, 0.0), (3, 0.5), (5, 1.0)] {
            let with_symbol = symbol_sector_eigenvalue(&symbol, l, rho, bt).unwrap();
            let plain = ku_eigenvalue(l, bt).unwrap() * ks_eigenvalue(rho, bt).unwrap();
            assert!((with_symbol - plain).abs() <= 20.0 / bt, "K{i}{i} on ({l}, {rho}): {with_symbol} vs {plain}");
        }
    }
}

fn grid(bt: f64, s_max: f64) -> ZonalGrid {
    ZonalGrid::new(GridSpec::suggested(bt, s_max)).unwrap()
}

#[test]
fn constant_function_is_scaled_by_the_trivial_eigenvalue() {
    let bt = 50.0;
    let g = grid(bt, 2.0);
    let k = zonal_kernel_matrix(bt, &g, 0).unwrap();
    let ones = vec![1.0; g.n_u()];
    let expected = 1.0 - (-bt).exp();
    for i in 0..g.n_u() {
        let (start, row) = k.u[0].row(i);
        let value: f64 = row.iter().zip(&ones[start..]).map(|(a, b)| a * b).sum();
        assert!((value - expected).abs() < 1e-8, "node {i}: {value}");
    }
}

#[test]
fn nystrom_spectrum_matches_sector_quadrature() {
    let bt = 200.0;
    let g = ZonalGrid::new(GridSpec { n_u: 96, n_s: 64, s_max: 1.0 }).unwrap();
    let k = zonal_kernel_matrix(bt, &g, 0).unwrap();
    let values = nystrom_eigenvalues(&k.u[0], &g.u_weights);
    for l in 0..=6 {
        let sector = ku_eigenvalue(l, bt).unwrap();
        assert!((values[l as usize] - sector).abs() < 1e-6, "l = {l}: {} vs {sector}", values[l as usize]);
    }
    let hyperbolic = nystrom_eigenvalues(&k.s[0], &g.s_weights);
    // Positive kernel with unit mass; tiny negative values are roundoff.
    assert!(hyperbolic.iter().all(|&v| v > -1e-12 && v <= 1.0 + 1e-10), "{:?}", &hyperbolic[..3]);
}

/// `∫∫ β̃ e^{−β̃x} f(u′) du′ dφ/2π` over the full relative-phase circle,
/// with `x` the squared off-diagonal entry of the relative element.
fn brute_force_sphere(bt: f64, u: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let (up, uw) = composite_on(200, 16, 0.0, 1.0);
    let (phi, pw) = composite_on(16, 16, 0.0, 2.0 * PI);
    let mut total = 0.0;
    for (&v, &wv) in up.iter().zip(&uw) {
        let cross = (u * (1.0 - u) * v * (1.0 - v)).sqrt();
        let base = (1.0 - u) * v + u * (1.0 - v);
        let inner: f64 = phi
            .iter()
            .zip(&pw)
            .map(|(&p, &w)| w * (-bt * (base - 2.0 * cross * p.cos())).exp())
            .sum();
        total += wv * f(v) * bt * inner / (2.0 * PI);
    }
    total
}

fn brute_force_hyperboloid(bt: f64, s: f64, s_max: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let (sp, sw) = composite_on(400, 16, 0.0, s_max);
    let (phi, pw) = composite_on(16, 16, 0.0, 2.0 * PI);
    let mut total = 0.0;
    for (&v, &wv) in sp.iter().zip(&sw) {
        let cross = (s * (1.0 + s) * v * (1.0 + v)).sqrt();
        let base = (1.0 + s) * v + s * (1.0 + v);
        let inner: f64 = phi
            .iter()
            .zip(&pw)
            .map(|(&p, &w)| w * (-bt * (base - 2.0 * cross * p.cos())).exp())
            .sum();
        total += wv * f(v) * bt * inner / (2.0 * PI);
    }
    total
}

#[test]
fn zonal_reduction_matches_two_dimensional_quadrature() {
    use rand::{Rng, SeedableRng};
    let bt = 50.0;
    let s_max = 2.0;
    let spec = GridSpec::suggested(bt, s_max);
    let g = ZonalGrid::new(GridSpec { n_u: 2 * spec.n_u, n_s: 2 * spec.n_s, s_max }).unwrap();
    let k = zonal_kernel_matrix(bt, &g, 0).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..6 {
        let coeffs: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = |x: f64| coeffs.iter().enumerate().map(|(k, c)| c * (k as f64 * PI * x).cos()).sum::<f64>();
        let fu: Vec<f64> = g.u.iter().map(|&x| f(x)).collect();
        let fs: Vec<f64> = g.s.iter().map(|&x| f(x)).collect();
        for i in [0, g.n_u() / 5, g.n_u() / 2, g.n_u() - 3] {
            let (start, row) = k.u[0].row(i);
            let nystrom: f64 = row.iter().zip(&fu[start..]).map(|(a, b)| a * b).sum();
            let oracle = brute_force_sphere(bt, g.u[i], &f);
            assert!((nystrom - oracle).abs() < 1e-6, "u = {}: {nystrom} vs {oracle}", g.u[i]);
        }
        for i in [0, g.n_s() / 8, g.n_s() / 4] {
            let (start, row) = k.s[0].row(i);
            let nystrom: f64 = row.iter().zip(&fs[start..]).map(|(a, b)| a * b).sum();
            let oracle = brute_force_hyperboloid(bt, g.s[i], s_max, &f);
            assert!((nystrom - oracle).abs() < 1e-6, "s = {}: {nystrom} vs {oracle}", g.s[i]);
        }
    }
}

#[test]
fn short_cutoff_is_reported() {
    let g = ZonalGrid::new(GridSpec { n_u: 32, n_s: 32, s_max: 0.01 }).unwrap();
    assert!(matches!(zonal_kernel_matrix(50.0, &g, 0), Err(Error::TruncationTooSmall { .. })));
}

/// With the kernels replaced by the identity the chain must reproduce the
/// closed form exactly; this checks the boundary vectors, the `F̂` blocks
/// and the prefactor independently of the kernel discretisation.
#[test]
fn identity_kernels_reproduce_the_closed_form() {
    for (energy, eps, n) in [(0.0, 0.5, 8), (0.6, 0.3, 5)] {
        let params = TransferParams::with_beta_tilde(energy, eps, xi_a(), 1e4, n).unwrap();
        let v = evaluate_sigma_model(params, None, KernelOrder::Identity).unwrap();
        let closed = r_plus_minus_limit(energy, eps, &xi_a()).unwrap();
        assert!((v.value - closed).norm() < 1e-12 * closed.norm(), "{v:?}");
    }
}

#[test]
fn coincident_shifts_give_one_at_large_coupling() {
    let xi = Shifts::real(0.3, -0.2, 0.3, -0.2);
    let params = TransferParams::with_beta_tilde(0.0, 0.5, xi, 1e4, 4).unwrap();
    let v = evaluate_sigma_model(params, None, KernelOrder::Leading).unwrap();
    let n = 4.0f64;
    assert!((v.value - 1.0).norm() <= n * n.ln().powi(2) / 1e4 * 5.0, "{v:?}");
}

#[test]
fn degenerate_parameters_stay_finite() {
    let params = TransferParams::with_beta_tilde(0.0, 0.0, Shifts::real(0.0, 0.0, 0.0, 0.0), 1e3, 3).unwrap();
    // The closed form is singular here; only the operator chain is evaluated.
    let op = assemble_transfer(params, Some(GridSpec { n_u: 64, n_s: 64, s_max: 0.2 }), KernelOrder::Leading).unwrap();
    let v = op.evaluate().unwrap();
    assert!(v.re.is_finite() && v.im.is_finite());
}

#[test]
fn assembly_rejects_bad_parameters() {
    let base = TransferParams::with_beta_tilde(0.0, 0.5, xi_a(), 1e3, 4).unwrap();
    for params in [
        TransferParams { n: 1, ..base },
        TransferParams { eps: -0.1, ..base },
        TransferParams { beta: 0.0, ..base },
    ] {
        assert!(assemble_transfer(params, None, KernelOrder::Leading).is_err());
    }
}
