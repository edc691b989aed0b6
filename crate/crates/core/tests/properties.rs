use bandlab::berezin::poly::Poly;
use bandlab::berezin::*;
use bandlab::ensemble::{build_covariance, sample_block_band, Boundary, LatticeSpec, Scaling};
use bandlab::harness::config::DetRatioSection;
use bandlab::harness::{ExperimentConfig, ExperimentId};
use bandlab::scalars::{bulk_constants, r_plus_minus_limit, Shifts};
use bandlab::spectra::gap_ratios;
use bandlab::transfer::ku_eigenvalue;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

const GENERATORS: usize = 4;

/// Fixed case count, no regression files written next to the tests.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn element(coeffs: &[(f64, f64)], keep: impl Fn(u64) -> bool) -> GrassmannElement {
    let mut x = GrassmannElement::zero(GENERATORS).unwrap();
    for (mask, &(re, im)) in coeffs.iter().enumerate() {
        let mask = mask as u64;
        if !keep(mask) {
            continue;
        }
        let order: Vec<usize> = (0..GENERATORS).filter(|g| mask >> g & 1 == 1).collect();
        let term = GrassmannElement::monomial(GENERATORS, &order, Complex64::new(re, im)).unwrap();
        x = x.add(&term).unwrap();
    }
    x
}

fn coefficients() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1 << GENERATORS)
}

fn assert_close(a: &GrassmannElement, b: &GrassmannElement, tol: f64) -> Result<(), TestCaseError> {
    for mask in 0..1u64 << GENERATORS {
        let (x, y) = (a.coeff(mask), b.coeff(mask));
        prop_assert!((x - y).norm() <= tol, "mask {mask:#b}: {x} vs {y}");
    }
    Ok(())
}

fn odd(mask: u64) -> bool {
    mask.count_ones() % 2 == 1
}

fn even(mask: u64) -> bool {
    !odd(mask)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn grassmann_product_is_associative(a in coefficients(), b in coefficients(), c in coefficients()) {
        let (a, b, c) = (element(&a, |_| true), element(&b, |_| true), element(&c, |_| true));
        let left = gmul(&gmul(&a, &b).unwrap(), &c).unwrap();
        let right = gmul(&a, &gmul(&b, &c).unwrap()).unwrap();
        assert_close(&left, &right, 1e-11)?;
    }

    #[test]
    fn odd_elements_anticommute_and_even_ones_commute(a in coefficients(), b in coefficients()) {
        let (x, y) = (element(&a, odd), element(&b, odd));
        let sum = gmul(&x, &y).unwrap().add(&gmul(&y, &x).unwrap()).unwrap();
        assert_close(&sum, &GrassmannElement::zero(GENERATORS).unwrap(), 1e-12)?;
        let (x, y) = (element(&a, even), element(&b, |_| true));
        assert_close(&gmul(&x, &y).unwrap(), &gmul(&y, &x).unwrap(), 1e-12)?;
    }

    #[test]
    fn exponential_of_commuting_sum_factorises(a in coefficients(), b in coefficients()) {
        let (x, y) = (element(&a, even), element(&b, even));
        let left = gexp(&x.add(&y).unwrap());
        let right = gmul(&gexp(&x), &gexp(&y)).unwrap();
        let scale = left.terms().map(|(_, c)| c.norm()).fold(1.0, f64::max);
        assert_close(&left, &right, 1e-10 * scale)?;
    }

    #[test]
    fn gaussian_integral_is_the_determinant(
        size in 1usize..=5,
        entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 25),
    ) {
        let m = DMatrix::from_fn(size, size, |i, j| {
            let (re, im) = entries[i * 5 + j];
            Complex64::new(re, im) + if i == j { Complex64::new(1.5, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let det = m.determinant();
        let value = gaussian_grassmann(&m).unwrap();
        prop_assert!((value - det).norm() <= 1e-11 * det.norm().max(1.0), "{value} vs {det}");
    }

    #[test]
    fn polynomials_print_and_parse_back(
        terms in prop::collection::vec((-9i64..=9, 1i64..=6, 0u32..3, 0u32..3, 0u32..2, 0u32..3), 0..6),
    ) {
        use bandlab::berezin::poly::Var;
        let mut p = Poly::zero();
        for (num, den, ed, ew, eus, eb) in terms {
            let mono = &(&(&Poly::constant(Rational64::new(num, den)) * &Poly::var(Var::D).pow(ed))
                * &Poly::var(Var::W).pow(ew))
                * &(&Poly::var(Var::Us).pow(eus) * &Poly::var(Var::BetaInv).pow(eb));
            p = &p + &mono;
        }
        let printed = p.to_string();
        prop_assert_eq!(Poly::parse(&printed).unwrap(), p, "{}", printed);
    }

    #[test]
    fn gap_ratios_lie_in_the_unit_interval(mut values in prop::collection::vec(-100.0..100.0f64, 3..60)) {
        values.sort_by(f64::total_cmp);
        let ratios = gap_ratios(&values);
        prop_assert_eq!(ratios.len(), values.len() - 2);
        prop_assert!(ratios.iter().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn bulk_constants_satisfy_their_identities(energy in -1.99..1.99f64, beta in 0.01..10.0f64) {
        let b = bulk_constants(energy, beta).unwrap();
        let one = Complex64::new(1.0, 0.0);
        prop_assert!((b.a_plus.norm() - 1.0).abs() < 1e-12 && (b.a_minus.norm() - 1.0).abs() < 1e-12);
        prop_assert!((b.a_plus * b.a_minus + one).norm() < 1e-12);
        prop_assert!((b.a_plus - b.a_minus - b.c0).norm() < 1e-12);
        prop_assert!((b.c0 - (4.0 - energy * energy).sqrt()).abs() < 1e-12);
        prop_assert!((b.c0 - 2.0 * std::f64::consts::PI * b.rho).abs() < 1e-12);
        prop_assert!((b.c_plus - (one + b.a_plus.powi(-2))).norm() < 1e-12);
        prop_assert!((b.c_minus - (one + b.a_minus.powi(-2))).norm() < 1e-12);
        prop_assert!((b.c_plus * b.a_plus * b.a_plus - b.c0 * b.a_plus).norm() < 1e-12);
        prop_assert!((b.c_minus * b.a_minus * b.a_minus + b.c0 * b.a_minus).norm() < 1e-12);
        prop_assert!((b.beta_tilde - b.c0 * b.c0 * beta).abs() < 1e-12 * b.beta_tilde);
    }

    #[test]
    fn plus_minus_conjugation_reflects_the_shifts(
        energy in -1.5..1.5f64,
        eps in 0.05..1.0f64,
        xi in prop::array::uniform4(-1.0..1.0f64),
    ) {
        let v = r_plus_minus_limit(energy, eps, &Shifts::real(xi[0], xi[1], xi[2], xi[3])).unwrap();
        let w = r_plus_minus_limit(energy, eps, &Shifts::real(xi[1], xi[0], xi[3], xi[2])).unwrap();
        prop_assert!((v.conj() - w).norm() <= 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn sampling_is_hermitian_and_reproducible(seed in any::<u64>(), side in 1usize..4, block in 2usize..6) {
        let profile = build_covariance(LatticeSpec::new(1, side, block).unwrap(), 0.5, Scaling::Sigma, Boundary::Neumann).unwrap();
        let a = sample_block_band(&profile, seed).matrix;
        prop_assert_eq!(&a, &sample_block_band(&profile, seed).matrix);
        prop_assert_eq!(&a, &a.adjoint());
    }

    #[test]
    fn configs_round_trip(seed in any::<u64>(), samples in 2usize..100_000, eps in 0.01..2.0f64, block in 2usize..64) {
        let mut config = ExperimentConfig::new(ExperimentId::A7, seed, "runs/a7");
        config.det_ratio = Some(DetRatioSection { samples, eps, blocks: vec![block, 2 * block], ..Default::default() });
        let text = config.to_toml().unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), config);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn compact_eigenvalues_decrease_in_the_unit_interval(beta_tilde in 100.0..1e4f64) {
        let values: Vec<f64> = (0..=6).map(|l| ku_eigenvalue(l, beta_tilde).unwrap()).collect();
        prop_assert!(values.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-14), "{:?}", values);
        prop_assert!(values.windows(2).all(|w| w[1] < w[0]), "{:?}", values);
    }
}
