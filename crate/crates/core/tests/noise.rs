use cubic_metrology::analytic::{optimal_squeezing, qfi_ns, CubicParams};
use cubic_metrology::fock::*;
use cubic_metrology::moments::{build_observable_set, numeric_moments, xi2_inv_numeric};
use cubic_metrology::noise::*;
use cubic_metrology::{CVector, C64};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

fn op(poly: &LadderPoly, dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_poly(poly, dim).unwrap()
}

fn poly_distance(a: &LadderPoly, b: &LadderPoly) -> f64 {
    (a - b).terms().map(|(_, _, c)| c.norm()).fold(0.0, f64::max)
}

fn mq(theta: f64, k: u32) -> LadderPoly {
    LadderPoly::quadrature(theta).pow(k)
}

#[test]
fn quadrature_decompositions() {
    let s = LadderPoly::symmetrized;
    let r2 = std::f64::consts::SQRT_2;
    let r3 = 3f64.sqrt();
    let q = FRAC_PI_4;
    let q3 = 3.0 * FRAC_PI_4;

    let xp = &(&mq(q, 2) - &mq(0.0, 2).scale(0.5)) - &mq(FRAC_PI_2, 2).scale(0.5);
    assert!(poly_distance(&xp, &s(1, 1)) < 1e-12);

    let x2p = &(&mq(q, 3) + &mq(q3, 3)).scale(r2 / 3.0) - &mq(FRAC_PI_2, 3).scale(1.0 / 3.0);
    assert!(poly_distance(&x2p, &s(2, 1)) < 1e-12);
    let xp2 = &(&mq(q, 3) - &mq(q3, 3)).scale(r2 / 3.0) - &mq(0.0, 3).scale(1.0 / 3.0);
    assert!(poly_distance(&xp2, &s(1, 2)) < 1e-12);

    let x2p2 = &(&mq(q, 4) + &mq(q3, 4)).scale(1.0 / 3.0) - &(&mq(0.0, 4) + &mq(FRAC_PI_2, 4)).scale(1.0 / 6.0);
    assert!(poly_distance(&x2p2, &s(2, 2)) < 1e-12);

    let bracket = &(&(&mq(FRAC_PI_6, 4) - &mq(0.0, 4).scale(9.0 / 16.0)) - &s(2, 2).scale(9.0 / 8.0))
        - &mq(FRAC_PI_2, 4).scale(1.0 / 16.0);
    let diag = &mq(q, 4) - &mq(q3, 4);
    let x3p = &bracket.scale(2.0 / r3) - &diag.scale(0.25);
    assert!(poly_distance(&x3p, &s(3, 1)) < 1e-12);

    // the printed S(xp³) combination is the negative of S(x³p)
    let printed = &diag.scale(0.25) - &bracket.scale(2.0 / r3);
    assert!(poly_distance(&printed, &s(3, 1).scale(-1.0)) < 1e-12);
    let corrected = &diag.scale(0.75) - &bracket.scale(2.0 / r3);
    assert!(poly_distance(&corrected, &s(1, 3)) < 1e-12);
    assert!(poly_distance(&(&x3p - &corrected), &(&s(3, 1) - &s(1, 3))) < 1e-12);
}

#[test]
fn accessible_sets() {
    let sizes: Vec<usize> = (1..=4).map(|k| accessible_set(k, 20).unwrap().len()).collect();
    assert_eq!(sizes, [2, 5, 9, 14]);
    let set = accessible_set(1, 20).unwrap();
    assert!(poly_distance(&set.polys()[0], &LadderPoly::x()) < 1e-15);
    assert!(poly_distance(&set.polys()[1], &LadderPoly::p()) < 1e-15);
}

#[test]
fn vacuum_covariance_gains_noise_variance() {
    let vac = FockState::vacuum(20).unwrap();
    let md = noisy_moments(&vac, 1, &DetectionNoise::new(0.5).unwrap()).unwrap();
    assert!((md.gamma[(0, 0)] - 0.75).abs() < 1e-14);
}

fn operating_state() -> (CubicParams, FockState) {
    let opt = optimal_squeezing(0.2).unwrap();
    let params = CubicParams::new(opt.r_opt_abs, opt.s_opt).unwrap();
    let psi = cubic_state_projected_auto(params.r, params.s, &Truncation::with_tol(1e-20)).unwrap();
    (params, psi)
}

#[test]
fn zero_noise_reproduces_noiseless_moments() {
    let (_, psi) = operating_state();
    for k in 1..=4 {
        let noisy = noisy_moments(&psi, k, &DetectionNoise::none()).unwrap();
        let clean = numeric_moments(&psi, &accessible_set(k, psi.dim()).unwrap()).unwrap();
        assert!((&noisy.gamma - &clean.gamma).abs().max() < 1e-10);
        assert!((&noisy.c_vec - &clean.c_vec).abs().max() < 1e-12);
    }
}

#[test]
fn commutator_corrections() {
    let (_, psi) = operating_state();
    let sigma = 0.4;
    let clean = numeric_moments(&psi, &accessible_set(4, psi.dim()).unwrap()).unwrap();
    let noisy = noisy_moments(&psi, 4, &DetectionNoise::new(sigma).unwrap()).unwrap();
    let s2 = sigma * sigma;
    // M³ entries pick up 3σ² times the first power, M⁴ entries 6σ² times the square
    for (cube, first) in [(5, 0), (6, 1), (7, usize::MAX), (8, usize::MAX)] {
        let base = if first == usize::MAX {
            let theta = if cube == 7 { FRAC_PI_4 } else { 3.0 * FRAC_PI_4 };
            let m = LadderPoly::quadrature(theta);
            psi.expect_poly(&LadderPoly::number().commutator(&m).scale(C64::new(0.0, -1.0))).re
        } else {
            clean.c_vec[first]
        };
        assert!((noisy.c_vec[cube] - clean.c_vec[cube] - 3.0 * s2 * base).abs() < 1e-10);
    }
    for (fourth, square) in [(9, 2), (10, 3), (11, 4)] {
        assert!((noisy.c_vec[fourth] - clean.c_vec[fourth] - 6.0 * s2 * clean.c_vec[square]).abs() < 1e-10);
    }
}

/// Probabilists' Gauss-Hermite rule via Golub-Welsch.
fn gauss_hermite(points: usize) -> Vec<(f64, f64)> {
    let jac = DMatrix::from_fn(points, points, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64).sqrt() } else { 0.0 });
    let eig = jac.symmetric_eigen();
    (0..points).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect()
}

/// `(M_θ + σz)^a ψ` at every quadrature node `z`, with weights.
fn shifted_powers(theta: f64, a: u32, sigma: f64, v: &CVector) -> Vec<(f64, CVector)> {
    let m = op(&LadderPoly::quadrature(theta), v.len()).into_matrix();
    gauss_hermite(8)
        .into_iter()
        .map(|(z, w)| {
            let mut u = v.clone();
            for _ in 0..a {
                u = &m * &u + &u * C64::new(sigma * z, 0.0);
            }
            (w, u)
        })
        .collect()
}

#[test]
fn noisy_table_matches_quadrature_oracle() {
    let (_, psi) = operating_state();
    let sigma = 0.3;
    let v = psi.resized(psi.dim() + 20).unwrap().into_amplitudes();
    let q = accessible_quadratures(4).unwrap();
    let md = noisy_moments(&psi, 4, &DetectionNoise::new(sigma).unwrap()).unwrap();
    let powers: Vec<Vec<(f64, CVector)>> = q.iter().map(|e| shifted_powers(e.theta, e.power, sigma, &v)).collect();
    // E_Δ[(M + Δ)^a] ψ
    let averaged: Vec<CVector> = powers
        .iter()
        .map(|nodes| nodes.iter().fold(CVector::zeros(v.len()), |acc, (w, u)| acc + u * C64::new(*w, 0.0)))
        .collect();
    let means: Vec<f64> = averaged.iter().map(|u| v.dotc(u).re).collect();
    for i in 0..q.len() {
        for j in i..q.len() {
            let second = if q[i].theta == q[j].theta {
                // one noise sample shared by both powers
                powers[i].iter().zip(&powers[j]).map(|((w, ui), (_, uj))| w * ui.dotc(uj).re).sum()
            } else {
                averaged[i].dotc(&averaged[j]).re
            };
            let want = second - means[i] * means[j];
            assert!((md.gamma[(i, j)] - want).abs() < 1e-8 * (1.0 + want.abs()), "({i},{j})");
        }
    }
}

#[test]
fn position_block_matches_monte_carlo() {
    // x outcomes of a cubic state are Gaussian with variance e^{2s}/2
    let (params, psi) = operating_state();
    let sigma = 0.3;
    let md = noisy_moments(&psi, 4, &DetectionNoise::new(sigma).unwrap()).unwrap();
    let outcome = Normal::new(0.0, (0.5 * (2.0 * params.s).exp()).sqrt()).unwrap();
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 1_000_000;
    let draws: Vec<f64> = (0..samples).map(|_| outcome.sample(&mut rng) + noise.sample(&mut rng)).collect();
    let index = [(1u32, 0usize), (2, 2), (3, 5), (4, 9)];
    let mean = |a: u32| draws.iter().map(|d| d.powi(a as i32)).sum::<f64>() / samples as f64;
    for &(a, i) in &index {
        for &(b, j) in &index {
            let terms: Vec<f64> = draws.iter().map(|d| d.powi(a as i32) * d.powi(b as i32)).collect();
            let m = terms.iter().sum::<f64>() / samples as f64;
            let var = terms.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (samples - 1) as f64;
            let stderr = (var / samples as f64).sqrt();
            let cov = m - mean(a) * mean(b);
            assert!((md.gamma[(i, j)] - cov).abs() < 3.0 * stderr, "({a},{b}) {} {cov} {stderr}", md.gamma[(i, j)]);
            // exact: x + Δ is Gaussian with variance v
            let v = 0.5 * (2.0 * params.s).exp() + sigma * sigma;
            let exact = gaussian_moment(a + b, v.sqrt()) - gaussian_moment(a, v.sqrt()) * gaussian_moment(b, v.sqrt());
            assert!((md.gamma[(i, j)] - exact).abs() < 1e-10 * (1.0 + exact));
        }
    }
}

#[test]
fn detection_noise_decays_with_sigma() {
    let (_, psi) = operating_state();
    for k in [3, 4] {
        let mut prev = f64::INFINITY;
        let mut last = 0.0;
        for step in 0..=20 {
            let sigma = 0.1 * step as f64;
            let xi = noisy_xi2_inv(&psi, k, &DetectionNoise::new(sigma).unwrap()).unwrap();
            assert!(xi <= prev * (1.0 + 1e-9), "k={k} sigma={sigma}");
            prev = xi;
            last = xi;
        }
        let clean = noisy_xi2_inv(&psi, k, &DetectionNoise::none()).unwrap();
        assert!(last < 0.05 * clean, "k={k}: {last} vs {clean}");
    }
}

#[test]
fn detection_noise_leaves_the_state_alone() {
    let (_, psi) = operating_state();
    let before = psi.clone();
    let g = op(&LadderPoly::number(), psi.dim());
    let f = pure_qfi(&psi, &g).unwrap();
    noisy_moments(&psi, 4, &DetectionNoise::new(0.7).unwrap()).unwrap();
    assert_eq!(before, psi);
    assert_eq!(f, pure_qfi(&psi, &g).unwrap());
}

#[test]
fn lindblad_trivial_limits() {
    let dim = 12;
    let zero = op(&LadderPoly::zero(), dim);
    let psi = FockState::coherent(C64::new(0.8, 0.3), dim).unwrap();
    let rho = psi.to_density();
    let out = evolve_lindblad(&rho, &zero, &zero, 1.0, 50).unwrap();
    assert!(out.trace_distance(&rho).unwrap() < 1e-12);

    let vac = FockState::vacuum(dim).unwrap().to_density();
    let jump = op(&LadderPoly::a().scale(0.7), dim);
    let out = evolve_lindblad(&vac, &zero, &jump, 2.0, 100).unwrap();
    assert!(out.trace_distance(&vac).unwrap() < 1e-12);
}

#[test]
fn coherent_state_population_decays_exponentially() {
    let dim = 40;
    let alpha = C64::new(1.5, -0.5);
    let (gamma, t): (f64, f64) = (0.3, 2.0);
    let rho = FockState::coherent(alpha, dim).unwrap().to_density();
    let zero = op(&LadderPoly::zero(), dim);
    let jump = op(&LadderPoly::a().scale(gamma.sqrt()), dim);
    let out = evolve_lindblad(&rho, &zero, &jump, t, 400).unwrap();
    let n = out.expect_poly(&LadderPoly::number()).re;
    assert!((n - alpha.norm_sqr() * (-gamma * t).exp()).abs() < 1e-6);
}

#[test]
fn lossless_preparation_recovers_pure_state() {
    let (params, _) = operating_state();
    let dim = 128;
    let rho = lossy_cubic_state(&params, &LossConfig::with_gamma(0.0), dim).unwrap();
    let pure = cubic_state_projected(params.r, params.s, dim, 1.0).unwrap();
    let fid = rho.fidelity_with_pure(&pure).unwrap();
    assert!(fid > 1.0 - 1e-8, "{fid}");
    let f = mixed_qfi(&rho, &op(&LadderPoly::number(), dim)).unwrap();
    let n = rho.expect_poly(&LadderPoly::number()).re;
    assert!((f / n - qfi_ns(0.2, params.s).unwrap() / 0.2).abs() < 1e-5 * (f / n));
}

#[test]
fn halving_the_step_barely_moves_the_state() {
    let (params, _) = operating_state();
    let dim = 48;
    let coarse = lossy_cubic_state(&params, &LossConfig { steps: 200, ..LossConfig::with_gamma(0.69) }, dim).unwrap();
    let fine = lossy_cubic_state(&params, &LossConfig { steps: 400, ..LossConfig::with_gamma(0.69) }, dim).unwrap();
    assert!(coarse.trace_distance(&fine).unwrap() < 1e-7);
}

#[test]
fn sensitivity_falls_with_loss_and_keeps_ordering() {
    let (params, _) = operating_state();
    let dim = 48;
    let g = op(&LadderPoly::number(), dim);
    let set3 = build_observable_set(3, dim).unwrap();
    let set4 = build_observable_set(4, dim).unwrap();
    let mut prev = f64::INFINITY;
    for gamma in [0.0, 0.1, 0.3, 0.69, 1.0] {
        let rho = lossy_cubic_state(&params, &LossConfig::with_gamma(gamma), dim).unwrap();
        let f = mixed_qfi(&rho, &g).unwrap();
        assert!(f <= prev * (1.0 + 1e-9), "gamma={gamma}");
        prev = f;
        let n = rho.expect_poly(&LadderPoly::number()).re;
        let xi3 = xi2_inv_numeric(&rho, &set3).unwrap();
        let xi4 = xi2_inv_numeric(&rho, &set4).unwrap();
        assert!(xi3 <= xi4 * (1.0 + 1e-9) && xi4 <= f / n * (1.0 + 1e-8), "gamma={gamma}");
    }
}

#[test]
fn gaussian_moments_match_samples() {
    let sigma = 0.8;
    let dist = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws: Vec<f64> = (0..200_000).map(|_| dist.sample(&mut rng)).collect();
    for j in 0..=8u32 {
        let vals = DVector::from_iterator(draws.len(), draws.iter().map(|d| d.powi(j as i32)));
        let m = vals.mean();
        let sd = vals.map(|v| (v - m).powi(2)).mean().sqrt();
        let se = sd / (draws.len() as f64).sqrt();
        assert!((gaussian_moment(j, sigma) - m).abs() < 4.0 * se + 1e-12, "j={j}");
    }
}
