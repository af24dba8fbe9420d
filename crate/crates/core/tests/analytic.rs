use cubic_metrology::analytic::*;
use cubic_metrology::fock::{cubic_state_projected_auto, variance, LadderPoly, OperatorMatrix, Truncation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..points).map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)).collect()
}

#[test]
fn asymptotic_values_from_the_text() {
    let (s_inf, coeff) = asymptotic_optimal();
    assert!((s_inf - 0.1013662770).abs() < 1e-10);
    assert!((squeezing_db(s_inf) - 0.880454).abs() < 5e-6);
    assert!((coeff * 4f64.sqrt() - 8.0 / 9.0).abs() < 1e-15);

    let opt = optimal_squeezing(1e4).unwrap();
    assert!((opt.s_opt - 0.101366).abs() < 1e-3);
    assert!((opt.r_opt_abs / (4.0 * 100.0 / 9.0) - 1.0).abs() < 1e-2);
}

#[test]
fn leading_coefficient_at_large_population() {
    for s in [0.0, 0.1, 0.5] {
        let ratio = qfi_ns(1e6, s).unwrap() / 1e12;
        assert!((ratio / C2 - 1.0).abs() < 1e-3);
    }
}

#[test]
fn operating_point_against_golden_section() {
    let opt = optimal_squeezing(0.2).unwrap();
    assert_eq!(opt.method, OptimumMethod::Ferrari);
    let s = golden_section_max(|s| qfi_ns(0.2, s).unwrap(), 0.0, 0.102, 1e-12);
    assert!((opt.s_opt - s).abs() < 1e-7);
    assert!((opt.f_q_max / 0.2 - 18.4415).abs() < 1e-4);
}

#[test]
fn ferrari_and_bracketed_routes_agree() {
    for n in log_grid(1e-2, 1e4, 25) {
        let f = optimal_squeezing_ferrari(n).unwrap();
        let b = optimal_squeezing_bracketed(n).unwrap();
        assert!((f.s_opt - b.s_opt).abs() < 1e-8, "n={n}: {} vs {}", f.s_opt, b.s_opt);
    }
}

#[test]
fn optimum_beats_random_squeezing() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in log_grid(1e-2, 1e3, 12) {
        let opt = optimal_squeezing(n).unwrap();
        let s_max = n.sqrt().asinh();
        for _ in 0..50 {
            let s = rng.random_range(0.0..s_max);
            assert!(opt.f_q_max >= qfi_ns(n, s).unwrap() * (1.0 - 1e-12));
        }
    }
}

#[test]
fn optimum_beats_squeezed_vacuum_and_saturates_monotonically() {
    let (s_inf, _) = asymptotic_optimal();
    let mut prev = 0.0;
    for n in log_grid(1e-2, 1e6, 81) {
        let opt = optimal_squeezing(n).unwrap();
        assert!(opt.f_q_max > squeezed_vacuum_qfi(n));
        assert!(opt.s_opt >= prev - 1e-12, "s_opt decreased at n={n}");
        assert!(opt.s_opt <= s_inf + 1e-9);
        prev = opt.s_opt;
    }
}

#[test]
fn displacement_qfi_against_fock_scan() {
    let (r, s) = (0.2, 0.3);
    let psi = cubic_state_projected_auto(r, s, &Truncation::with_tol(1e-14)).unwrap();
    let best = (0..180)
        .map(|k| {
            let theta = std::f64::consts::PI * k as f64 / 180.0;
            let q = OperatorMatrix::from_poly(&LadderPoly::quadrature(theta), psi.dim()).unwrap();
            4.0 * variance(&psi, &q).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((best - displacement_qfi(r, s)).abs() < 1e-6);
    assert!(displacement_qfi(r, s) <= squeezed_vacuum_displacement_qfi(population(r, s)));
    assert!((displacement_qfi(0.0, 0.0) - 2.0).abs() < 1e-15);
}

#[test]
fn cramer_rao_examples() {
    assert_eq!(cramer_rao_bound(4.0, 1).unwrap(), 0.5);
    let f = optimal_squeezing(1.0).unwrap().f_q_max;
    assert!((cramer_rao_bound(f, 100).unwrap() - 1.0 / (10.0 * f.sqrt())).abs() < 1e-15);
    assert!(cramer_rao_bound(0.0, 1).is_err());
    assert!(cramer_rao_bound(1.0, 0).is_err());
}

proptest! {
    #[test]
    fn qfi_ns_matches_qfi_rs(r in 0.0f64..1.0, s in 0.0f64..1.5) {
        let n = population(r, s);
        let f = qfi_rs(r, s);
        prop_assert!((qfi_ns(n, s).unwrap() - f).abs() < 1e-10 * (1.0 + f));
    }

    #[test]
    fn population_round_trip(n in 1e-3f64..50.0, frac in 0.0f64..1.0) {
        let s = frac * n.sqrt().asinh();
        let p = CubicParams::from_population(n, s).unwrap();
        prop_assert!((population(p.r, p.s) - n).abs() < 1e-10 * (1.0 + n));
    }

    #[test]
    fn squeezed_vacuum_identity(s in 0.0f64..2.0) {
        let n = s.sinh().powi(2);
        prop_assert!((qfi_rs(0.0, s) - squeezed_vacuum_qfi(n)).abs() < 1e-9 * (1.0 + squeezed_vacuum_qfi(n)));
    }

    #[test]
    fn displacement_never_beats_gaussian(r in 0.0f64..0.3, s in 0.0f64..1.0) {
        let gauss = squeezed_vacuum_displacement_qfi(population(r, s));
        prop_assert!(displacement_qfi(r, s) <= gauss * (1.0 + 1e-12));
    }
}
