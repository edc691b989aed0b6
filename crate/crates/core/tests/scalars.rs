use std::f64::consts::PI;

use bandlab::scalars::*;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Direct transcription of the `(+−)` limit from the raw definitions of
/// `ρ`, `c₀`, `α`, `δ` and `C`, kept separate from the library path.
fn plus_minus_oracle(energy: f64, eps: f64, xi: [f64; 4]) -> Complex64 {
    let i = c(0.0, 1.0);
    let rho = (4.0 - energy * energy).sqrt() / (2.0 * PI);
    let c0 = 2.0 * PI * rho;
    let a1 = eps - i * (xi[0] - xi[1]) / (2.0 * rho);
    let a2 = eps - i * (xi[2] - xi[3]) / (2.0 * rho);
    let d1 = i * (xi[2] - xi[0]) / (2.0 * rho);
    let d2 = i * (xi[1] - xi[3]) / (2.0 * rho);
    let pref = (energy * (xi[0] + xi[1] - xi[2] - xi[3]) / (2.0 * rho)).exp();
    let e = (2.0 * c0 * a1).exp();
    pref * (-c0 * (a1 + a2)).exp() * (d1 * d2 * (e - 1.0) / (a1 * a2) - (d1 + d2) * e / a2 + e * a1 / a2)
}

fn shifts(xi: [f64; 4]) -> Shifts {
    Shifts::real(xi[0], xi[1], xi[2], xi[3])
}

#[test]
fn constants_at_the_band_centre() {
    let b = bulk_constants(0.0, 1.0).unwrap();
    assert!((b.rho - 1.0 / PI).abs() < 1e-15);
    assert!((b.a_plus - c(1.0, 0.0)).norm() < 1e-15);
    assert!((b.a_minus - c(-1.0, 0.0)).norm() < 1e-15);
    assert!((b.c0 - 2.0).abs() < 1e-15);
    assert!((b.c_plus - c(2.0, 0.0)).norm() < 1e-15);
    assert!((b.c_minus - c(2.0, 0.0)).norm() < 1e-15);
    assert!((b.beta_tilde - 4.0).abs() < 1e-14);
}

#[test]
fn constants_at_unit_energy() {
    let b = bulk_constants(1.0, 0.0).unwrap();
    assert!((b.rho - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
    assert!((b.c0 - 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn energies_outside_the_bulk_are_rejected() {
    assert!(bulk_constants(2.0, 1.0).is_err());
    assert!(bulk_constants(-2.5, 1.0).is_err());
}

#[test]
fn plus_minus_is_one_at_coincident_shifts() {
    for (e, eps, xi) in [(0.0, 0.1, [0.3, -0.3, 0.3, -0.3]), (1.0, 0.5, [0.2, 0.7, 0.2, 0.7])] {
        let v = r_plus_minus_limit(e, eps, &shifts(xi)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14, "{v}");
    }
}

#[test]
fn plus_minus_matches_the_transcribed_oracle() {
    for (e, eps, xi) in [
        (0.0, 0.1, [0.5, -0.5, 0.25, -0.25]),
        (1.0, 0.1, [0.5, -0.5, 0.25, -0.25]),
        (0.0, 0.5, [0.5, -0.5, 0.25, -0.25]),
        (-0.7, 0.3, [0.1, 0.4, -0.2, 0.6]),
    ] {
        let v = r_plus_minus_limit(e, eps, &shifts(xi)).unwrap();
        let oracle = plus_minus_oracle(e, eps, xi);
        assert!((v - oracle).norm() <= 1e-12 * oracle.norm(), "{v} vs {oracle}");
    }
}

/// Frozen from a 40-digit evaluation of the same closed form.
#[test]
fn plus_minus_frozen_values() {
    let cases = [
        (0.0, 0.1, c(-0.007713709895016184, -1.0400615105476779)),
        (1.0, 0.1, c(-0.005962292807008893, -1.035828864055272)),
        (0.0, 0.5, c(-0.06668847882979286, -1.0556842769861976)),
    ];
    for (e, eps, expected) in cases {
        let v = r_plus_minus_limit(e, eps, &shifts([0.5, -0.5, 0.25, -0.25])).unwrap();
        assert!((v - expected).norm() < 1e-12, "E = {e}, eps = {eps}: {v}");
    }
}

#[test]
fn plus_minus_conjugation_swaps_the_pairs() {
    let xi = [0.3, -0.45, 0.1, 0.25];
    for e in [0.0, 0.8] {
        let v = r_plus_minus_limit(e, 0.4, &shifts(xi)).unwrap();
        let swapped = r_plus_minus_limit(e, 0.4, &shifts([xi[1], xi[0], xi[3], xi[2]])).unwrap();
        assert!((v.conj() - swapped).norm() < 1e-13);
    }
}

#[test]
fn plus_plus_limit_values() {
    let same = r_plus_plus_limit(0.3, 0.5, &shifts([0.2, 0.1, 0.2, 0.1])).unwrap();
    assert!((same - c(1.0, 0.0)).norm() < 1e-15);
    let v = r_plus_plus_limit(0.0, 0.5, &shifts([0.0, 0.0, 0.5, 0.5])).unwrap();
    assert!((v - c(-1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn plus_plus_second_derivative_at_coincidence() {
    for e in [0.0, 1.0] {
        let b = bulk_constants(e, 0.0).unwrap();
        let d = r_plus_plus_second_derivative(e, 0.5, &shifts([0.3, 0.1, 0.3, 0.1])).unwrap();
        let expected = -b.a_plus * b.a_plus / (b.rho * b.rho);
        assert!((d - expected).norm() < 1e-12 * expected.norm());
    }
    let d = r_plus_plus_second_derivative(0.0, 0.5, &shifts([0.0, 0.0, 0.0, 0.0])).unwrap();
    assert!((d - c(-PI * PI, 0.0)).norm() < 1e-12);
}

#[test]
fn squared_saddle_gap_is_four_pi_squared_rho_squared() {
    for e in [-1.9, -0.4, 0.0, 0.9, 1.7] {
        let b = bulk_constants(e, 0.0).unwrap();
        let gap = (b.a_plus - b.a_minus).powi(2);
        assert!((gap - c(4.0 * PI * PI * b.rho * b.rho, 0.0)).norm() < 1e-13);
        let sum = b.a_plus * b.a_plus + b.a_minus * b.a_minus + 2.0;
        assert!((sum - gap).norm() < 1e-13);
    }
}

#[test]
fn second_derivative_of_plus_minus_at_half_separation() {
    let v = d2_r_plus_minus_coincident(0.0, 1e-10, c(0.5, 0.0), c(0.0, 0.0)).unwrap();
    assert!((v - c(PI * PI - 8.0, 0.0)).norm() < 1e-6, "{v}");
}

#[test]
fn second_derivative_stays_bounded_for_large_separation() {
    let v = d2_r_plus_minus_coincident(0.0, 0.1, c(40.0, 0.0), c(0.0, 0.0)).unwrap();
    assert!((v - c(PI * PI, 0.0)).norm() < 1.0);
}

#[test]
fn sine_kernel_reference_points() {
    let settings = Extrapolation::default();
    for e in [0.0, 1.0] {
        let one = sine_kernel_limit(e, 1.0, &settings).unwrap();
        assert!((one.value - 1.0).abs() < 1e-8);
        let half = sine_kernel_limit(e, 0.5, &settings).unwrap();
        assert!((half.value - (1.0 - 4.0 / (PI * PI))).abs() < 1e-8);
        assert!(half.imaginary_residue < 1e-10);
        let small = sine_kernel_limit(e, 0.05, &settings).unwrap();
        assert!(small.value.abs() < 0.01);
    }
}

#[test]
fn sine_kernel_rejects_energies_beyond_root_two() {
    assert!(matches!(
        sine_kernel_limit(1.5, 0.5, &Extrapolation::default()),
        Err(bandlab::Error::OutOfBulk { .. })
    ));
}
