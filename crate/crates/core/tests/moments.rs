use cubic_metrology::analytic::{optimal_squeezing, population, qfi_rs, CubicParams};
use cubic_metrology::fock::{cubic_state_projected_auto, FockState, LadderPoly, OperatorMatrix, Truncation};
use cubic_metrology::moments::*;
use cubic_metrology::noise::{lossy_cubic_state, LossConfig};
use proptest::prelude::*;

fn deep() -> Truncation {
    Truncation::with_tol(1e-20)
}

#[test]
fn observable_sets() {
    let sizes: Vec<usize> = (1..=4).map(|k| build_observable_set(k, 30).unwrap().len()).collect();
    assert_eq!(sizes, [1, 2, 4, 6]);
    assert!(build_observable_set(5, 30).is_err());
    let set = build_observable_set(2, 30).unwrap();
    assert_eq!(set.polys()[0], LadderPoly::x());
    let xp = &(&LadderPoly::x() * &LadderPoly::p()) + &(&LadderPoly::p() * &LadderPoly::x());
    assert_eq!(set.polys()[1], xp.scale(0.5));

    // S(x³p) against the four orderings as truncated matrices
    let dim = 40;
    let set = build_observable_set(4, dim).unwrap();
    let x = OperatorMatrix::from_poly(&LadderPoly::x(), 60).unwrap().into_matrix();
    let p = OperatorMatrix::from_poly(&LadderPoly::p(), 60).unwrap().into_matrix();
    let sum = &x * &x * &x * &p + &x * &x * &p * &x + &x * &p * &x * &x + &p * &x * &x * &x;
    let want = sum.view((0, 0), (dim, dim)).into_owned() / cubic_metrology::C64::new(4.0, 0.0);
    let got = OperatorMatrix::from_poly(&set.polys()[4], dim).unwrap().into_matrix();
    assert!((got - want).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
}

#[test]
fn table_examples() {
    let md = analytic_moments(0.2, 0.1, 4).unwrap();
    assert!((md.gamma[(0, 0)] - 0.2f64.exp() / 2.0).abs() < 1e-15);
    assert!((md.c_vec[0] + 0.366421).abs() < 1e-6);
    assert!((chi2_inv(&analytic_moments(0.2, 0.1, 1).unwrap()).unwrap().chi2_inv - 0.219853).abs() < 1e-6);
    let r0 = chi2_inv(&analytic_moments(0.0, 0.3, 2).unwrap()).unwrap().chi2_inv;
    assert!((r0 - 2.0 * 0.6f64.sinh().powi(2)).abs() < 1e-12);
}

#[test]
fn analytic_tables_match_fock_expectations() {
    for &(r, s) in &[(0.15, 0.2), (0.05, 0.4), (0.25, 0.0)] {
        let psi = cubic_state_projected_auto(r, s, &deep()).unwrap();
        let a = analytic_moments(r, s, 4).unwrap();
        let n = numeric_moments(&psi, &build_observable_set(4, psi.dim()).unwrap()).unwrap();
        let scale = a.gamma.abs().max();
        assert!((&a.gamma - &n.gamma).abs().max() < 1e-6 * scale.max(1.0));
        assert!((&a.c_vec - &n.c_vec).abs().max() < 1e-6);
    }
}

#[test]
fn closed_forms_match_moment_matrices() {
    for r in [0.0, 0.05, 0.1, 0.2, 0.3] {
        for s in [0.0, 0.1, 0.3, 0.5] {
            if population(r, s) == 0.0 {
                continue;
            }
            for k in 1..=4 {
                let md = analytic_moments(r, s, k).unwrap();
                let got = chi2_inv(&md).unwrap().chi2_inv;
                let want = chi2_closed_form(r, s, k).unwrap();
                assert!((got - want).abs() < 1e-8 * (1.0 + want), "k={k} r={r} s={s}");
            }
            assert!((chi2_closed_form(r, s, 4).unwrap() - qfi_rs(r, s)).abs() < 1e-9 * (1.0 + qfi_rs(r, s)));
        }
    }
}

#[test]
fn hierarchy_at_unit_population_optimum() {
    let opt = optimal_squeezing(1.0).unwrap();
    let xi: Vec<f64> = (1..=4).map(|k| xi2_inv(opt.r_opt_abs, opt.s_opt, k).unwrap()).collect();
    for w in xi.windows(2) {
        assert!(w[0] <= w[1] + 1e-9);
    }
    assert!((xi[3] - opt.f_q_max).abs() < 1e-8 * opt.f_q_max);
}

#[test]
fn large_population_third_order() {
    let opt = optimal_squeezing(1e3).unwrap();
    let ratio = xi2_inv(opt.r_opt_abs, opt.s_opt, 3).unwrap() / 1e3;
    assert!((ratio / 32.0 - 1.0).abs() < 1e-2);
}

#[test]
fn optimal_measurement_reproduces_chi2() {
    let md = analytic_moments(0.2, 0.3, 4).unwrap();
    let c = chi2_inv(&md).unwrap();
    let norm: f64 = c.m_opt.iter().map(|m| m * m).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-12);
    assert!((chi2_of(&md, &c.m_opt) - c.chi2_inv).abs() < 1e-9 * c.chi2_inv);
}

#[test]
fn bias_check_matches_commutator_identity() {
    let (r, s) = (0.2, 0.1);
    let psi = cubic_state_projected_auto(r, s, &deep()).unwrap();
    let set = build_observable_set(4, psi.dim()).unwrap();
    for j in 0..6 {
        let mut m = vec![0.0; 6];
        m[j] = 1.0;
        assert!(estimator_bias_check(&psi, &set, &m).unwrap().mean_at_zero.abs() < 1e-10);
    }
    let set3 = build_observable_set(3, psi.dim()).unwrap();
    let md = numeric_moments(&psi, &set3).unwrap();
    let c = chi2_inv(&md).unwrap();
    let b = estimator_bias_check(&psi, &set3, &c.m_opt).unwrap();
    assert!(!b.degenerate);
    let m = nalgebra::DVector::from_column_slice(&c.m_opt);
    let var = (m.transpose() * &md.gamma * &m)[(0, 0)];
    assert!((b.derivative.powi(2) / var - c.chi2_inv).abs() < 1e-6 * c.chi2_inv);
}

#[test]
fn first_order_estimator_is_odd_in_theta() {
    let psi = cubic_state_projected_auto(0.15, 0.2, &deep()).unwrap();
    let xp = LadderPoly::x();
    for theta in [1e-3, 1e-2, 5e-2] {
        let plus = rotated_mean(&psi, &xp, theta);
        let minus = rotated_mean(&psi, &xp, -theta);
        assert!((plus + minus).abs() < 1e-2 * plus.abs() + 1e-12);
    }
}

#[test]
fn lossy_covariance_stays_positive() {
    let params = CubicParams::new(0.2, 0.1).unwrap();
    let rho = lossy_cubic_state(&params, &LossConfig::with_gamma(0.1), 48).unwrap();
    let md = numeric_moments(&rho, &build_observable_set(4, 48).unwrap()).unwrap();
    md.validate().unwrap();
}

#[test]
fn vacuum_first_order() {
    let vac = FockState::vacuum(10).unwrap();
    let md = numeric_moments(&vac, &build_observable_set(1, 10).unwrap()).unwrap();
    assert!((md.gamma[(0, 0)] - 0.5).abs() < 1e-15 && md.c_vec[0] == 0.0);
    assert!(xi2_inv_numeric(&vac, &build_observable_set(1, 10).unwrap()).is_err());
}

proptest! {
    #[test]
    fn chi2_is_scale_invariant(r in 0.01f64..0.3, s in 0.0f64..0.5, idx in 0usize..6, c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
        let md = analytic_moments(r, s, 4).unwrap();
        let mut scaled = md.clone();
        for j in 0..6 {
            scaled.gamma[(idx, j)] *= c;
            scaled.gamma[(j, idx)] *= c;
        }
        scaled.c_vec[idx] *= c;
        let a = chi2_inv(&md).unwrap().chi2_inv;
        let b = chi2_inv(&scaled).unwrap().chi2_inv;
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a), "{a} {b}");
    }

    #[test]
    fn hierarchy_holds_pointwise(r in 0.0f64..0.3, s in 0.0f64..0.5) {
        prop_assume!(population(r, s) > 1e-6);
        let xi: Vec<f64> = (1..=4).map(|k| xi2_inv(r, s, k).unwrap()).collect();
        for w in xi.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-9) + 1e-9);
        }
        let fn_ = qfi_rs(r, s) / population(r, s);
        prop_assert!((xi[3] - fn_).abs() < 1e-8 * fn_);
    }
}
