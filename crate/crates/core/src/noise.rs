//! Photon loss during preparation and Gaussian noise on detection.
//!
//! Loss follows `dρ/dt = -i[H, ρ] + LρL† - ½{L†L, ρ}` with `L = √γ a`,
//! applied while the squeezing Hamiltonian `H₁ = i s(a†² - a²)/2` and then the
//! cubic Hamiltonian `H₂ = -r x³` act for unit time each.
//!
//! Detection noise adds an independent Gaussian `Δ ~ N(0, σ²)` to every
//! recorded quadrature outcome. Powers of a noisy outcome average to
//! `E[(M + Δ)^a] = Σ_k C(a,k) μ_{a-k} M^k`, with `μ_j` the Gaussian moments,
//! which fixes every noisy covariance and commutator entry.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analytic::CubicParams;
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockState, LadderPoly, OperatorMatrix, QuantumState};
use crate::moments::{chi2_inv, MomentData, MomentSource, ObservableSet, IMAGINARY_TOL};
use crate::{CMatrix, C64};

/// Trace drift above which the integrator gives up.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub gamma: f64,
    pub t1: f64,
    pub t2: f64,
    /// Minimum RK4 steps per stage; raised automatically when the dissipator
    /// would make the step unstable.
    pub steps: usize,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { gamma: 0.0, t1: 1.0, t2: 1.0, steps: 200 }
    }
}

impl LossConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        Self { gamma, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("loss rate must be finite and >= 0, got {}", self.gamma)));
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) || !(self.t1 * self.t2).is_finite() {
            return Err(Error::InvalidParameter("evolution times must be positive".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("need at least one integrator step".into()));
        }
        Ok(())
    }
}

/// Steps actually used for a stage of length `t`: at least `requested`, and
/// enough to keep `dt · γ · dim` inside the RK4 stability region with margin.
pub fn stage_steps(requested: usize, gamma: f64, t: f64, dim: usize) -> usize {
    let stiff = (gamma * t * dim as f64 / 1.5).ceil() as usize;
    requested.max(stiff).max(1)
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Lindblad evolution for time `t` with `steps` RK4 steps, returning the
/// final state and the trace drift removed by renormalization.
///
/// The coherent part is removed exactly by working in the interaction
/// picture of `h`, so the step size is limited only by the dissipator.
pub fn evolve_lindblad_with_drift(
    rho0: &DensityOperator,
    h: &OperatorMatrix,
    jump: &OperatorMatrix,
    t: f64,
    steps: usize,
) -> Result<(DensityOperator, f64)> {
    let dim = rho0.dim();
    if h.dim() != dim || jump.dim() != dim {
        return Err(Error::DimensionMismatch { left: dim, right: if h.dim() != dim { h.dim() } else { jump.dim() } });
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian { deviation: crate::fock::operator::hermitian_defect(h.matrix()) });
    }
    if steps == 0 || !(t >= 0.0) {
        return Err(Error::InvalidParameter("need t >= 0 and at least one step".into()));
    }
    let eig = h.matrix().clone().symmetric_eigen();
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let v = eig.eigenvectors;
    let l = v.adjoint() * jump.matrix() * &v;
    let l_dag = l.adjoint();
    let ldl = &l_dag * &l;
    let dissipator = |rho: &CMatrix| -> CMatrix {
        let lr = &l * rho;
        let anti = &ldl * rho;
        &lr * &l_dag - (&anti + anti.adjoint()) * C64::new(0.5, 0.0)
    };
    // (P(τ) ∘ ρ)_jk = e^{i(λj - λk)τ} ρ_jk moves between pictures.
    let rotate = |rho: &CMatrix, tau: f64| -> CMatrix {
        CMatrix::from_fn(dim, dim, |j, k| rho[(j, k)] * C64::from_polar(1.0, (lam[j] - lam[k]) * tau))
    };
    let rhs = |rho_i: &CMatrix, tau: f64| -> CMatrix { rotate(&dissipator(&rotate(rho_i, -tau)), tau) };

    let mut rho = v.adjoint() * rho0.matrix() * &v;
    let dt = t / steps as f64;
    let zero_loss = jump.matrix().iter().all(|z| z.norm_sqr() == 0.0);
    if !zero_loss {
        for step in 0..steps {
            let tau = step as f64 * dt;
            let k1 = rhs(&rho, tau);
            let k2 = rhs(&(&rho + &k1 * C64::new(0.5 * dt, 0.0)), tau + 0.5 * dt);
            let k3 = rhs(&(&rho + &k2 * C64::new(0.5 * dt, 0.0)), tau + 0.5 * dt);
            let k4 = rhs(&(&rho + &k3 * C64::new(dt, 0.0)), tau + dt);
            rho += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
            rho = hermitize(&rho);
        }
    }
    let rho = &v * rotate(&rho, -t) * v.adjoint();
    let rho = hermitize(&rho);
    let tr = rho.trace().re;
    let drift = (tr - 1.0).abs();
    if drift > MAX_TRACE_DRIFT {
        return Err(Error::Integrator { drift });
    }
    let rho = rho / C64::new(tr, 0.0);
    let out = DensityOperator::new(rho).map_err(|e| match e {
        Error::InvalidState(msg) => Error::InvalidState(format!("{msg}; try more integrator steps")),
        other => other,
    })?;
    Ok((out, drift))
}

/// Lindblad evolution; see [`evolve_lindblad_with_drift`].
pub fn evolve_lindblad(
    rho0: &DensityOperator,
    h: &OperatorMatrix,
    jump: &OperatorMatrix,
    t: f64,
    steps: usize,
) -> Result<DensityOperator> {
    evolve_lindblad_with_drift(rho0, h, jump, t, steps).map(|(rho, _)| rho)
}

/// `H₁ = i s'(a†² - a²)/2` with `s' = s/t₁`.
pub fn squeezing_hamiltonian(s_rate: f64) -> LadderPoly {
    let c = C64::new(0.0, 0.5 * s_rate);
    &LadderPoly::monomial(2, 0, c) - &LadderPoly::monomial(0, 2, c)
}

/// `H₂ = -r' x³` with `r' = r/t₂`.
pub fn cubic_hamiltonian(r_rate: f64) -> LadderPoly {
    LadderPoly::x().pow(3).scale(-r_rate)
}

/// Vacuum evolved under `H₁` then `H₂`, each with loss `√γ a`.
pub fn lossy_cubic_state(params: &CubicParams, cfg: &LossConfig, dim: usize) -> Result<DensityOperator> {
    cfg.validate()?;
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let h1 = OperatorMatrix::hermitian(squeezing_hamiltonian(params.s / cfg.t1).project(dim))?;
    let h2 = OperatorMatrix::hermitian(cubic_hamiltonian(params.r / cfg.t2).project(dim))?;
    let jump = OperatorMatrix::new(LadderPoly::a().project(dim).map(|z| z * cfg.gamma.sqrt()))?;
    let rho0 = FockState::vacuum(dim)?.to_density();
    let n1 = stage_steps(cfg.steps, cfg.gamma, cfg.t1, dim);
    let rho1 = evolve_lindblad(&rho0, &h1, &jump, cfg.t1, n1)?;
    let n2 = stage_steps(cfg.steps, cfg.gamma, cfg.t2, dim);
    evolve_lindblad(&rho1, &h2, &jump, cfg.t2, n2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionNoise {
    pub sigma: f64,
}

impl DetectionNoise {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("noise level must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn none() -> Self {
        Self { sigma: 0.0 }
    }
}

/// `E[Δʲ]` for `Δ ~ N(0, σ²)`: zero for odd `j`, `(j-1)!! σʲ` for even `j`.
pub fn gaussian_moment(j: u32, sigma: f64) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    let double_fact = (1..j).step_by(2).fold(1.0, |acc, k| acc * k as f64);
    double_fact * sigma.powi(j as i32)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * f64::from(n - t) / f64::from(t + 1))
}

/// One member `M_θ^power` of an accessible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub theta: f64,
    pub power: u32,
}

impl Quadrature {
    pub fn label(&self) -> String {
        let angle = match self.theta {
            t if t == 0.0 => "0".to_string(),
            t if (t - std::f64::consts::FRAC_PI_2).abs() < 1e-15 => "pi/2".to_string(),
            t if (t - std::f64::consts::FRAC_PI_4).abs() < 1e-15 => "pi/4".to_string(),
            t if (t - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-15 => "3pi/4".to_string(),
            t if (t - std::f64::consts::FRAC_PI_6).abs() < 1e-15 => "pi/6".to_string(),
            t => format!("{t}"),
        };
        format!("M_{{{angle}}}^{}", self.power)
    }

    pub fn poly(&self) -> LadderPoly {
        LadderPoly::quadrature(self.theta).pow(self.power)
    }

    /// `E_Δ[(M_θ + Δ)^power]` as an operator.
    pub fn noisy_poly(&self, sigma: f64) -> LadderPoly {
        noisy_power(self.theta, self.power, sigma)
    }
}

/// `Σ_k C(a,k) μ_{a-k} M_θ^k`.
pub fn noisy_power(theta: f64, a: u32, sigma: f64) -> LadderPoly {
    let m = LadderPoly::quadrature(theta);
    let mut acc = LadderPoly::zero();
    let mut pow = LadderPoly::identity();
    for k in 0..=a {
        let w = binomial(a, k) * gaussian_moment(a - k, sigma);
        if w != 0.0 {
            acc = &acc + &pow.scale(w);
        }
        pow = &pow * &m;
    }
    acc
}

/// Members of `M′₍ₖ₎`: `{x, p}`, then squares at `0, π/2, π/4`, cubes at
/// `0, π/2, π/4, 3π/4` and fourth powers at those angles plus `π/6`.
pub fn accessible_quadratures(k: usize) -> Result<Vec<Quadrature>> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidOrder(k));
    }
    let angles: [&[f64]; 4] = [
        &[0.0, FRAC_PI_2],
        &[0.0, FRAC_PI_2, FRAC_PI_4],
        &[0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4],
        &[0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4, FRAC_PI_6],
    ];
    Ok(angles[..k]
        .iter()
        .enumerate()
        .flat_map(|(j, list)| list.iter().map(move |&theta| Quadrature { theta, power: j as u32 + 1 }))
        .collect())
}

/// `M′₍ₖ₎` as an observable set; sizes 2, 5, 9, 14.
pub fn accessible_set(k: usize, dim: usize) -> Result<ObservableSet> {
    let q = accessible_quadratures(k)?;
    ObservableSet::from_polys(k, dim, q.iter().map(Quadrature::label).collect(), q.iter().map(Quadrature::poly).collect())
}

fn real(z: C64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOL * z.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue { residue: z.im });
    }
    Ok(z.re)
}

/// Moments of the noisy accessible set `M̃′₍ₖ₎`.
///
/// Outcomes of the same quadrature share one noise sample; different
/// quadratures are measured in separate runs with independent noise.
pub fn noisy_moments<S: QuantumState + ?Sized>(state: &S, k: usize, noise: &DetectionNoise) -> Result<MomentData> {
    let q = accessible_quadratures(k)?;
    let sigma = noise.sigma;
    let l = q.len();
    let noisy: Vec<LadderPoly> = q.iter().map(|e| e.noisy_poly(sigma)).collect();
    let mut mean = Vec::with_capacity(l);
    let mut c_vec = nalgebra::DVector::zeros(l);
    let n = LadderPoly::number();
    for (j, g) in noisy.iter().enumerate() {
        mean.push(real(state.expect_poly(g))?);
        c_vec[j] = real(state.expect_poly(&n.commutator(g).scale(C64::new(0.0, -1.0))))?;
    }
    let mut gamma = DMatrix::zeros(l, l);
    for i in 0..l {
        for j in i..l {
            let second = if q[i].theta == q[j].theta {
                real(state.expect_poly(&noisy_power(q[i].theta, q[i].power + q[j].power, sigma)))?
            } else {
                let anti = &(&noisy[i] * &noisy[j]) + &(&noisy[j] * &noisy[i]);
                0.5 * real(state.expect_poly(&anti))?
            };
            let v = second - mean[i] * mean[j];
            gamma[(i, j)] = v;
            gamma[(j, i)] = v;
        }
    }
    Ok(MomentData { gamma, c_vec, k, source: MomentSource::Numeric })
}

/// `χ⁻²/n` from the noisy accessible set.
pub fn noisy_xi2_inv<S: QuantumState + ?Sized>(state: &S, k: usize, noise: &DetectionNoise) -> Result<f64> {
    let n = real(state.expect_poly(&LadderPoly::number()))?;
    if !(n > 0.0) {
        return Err(Error::ZeroPopulation);
    }
    Ok(chi2_inv(&noisy_moments(state, k, noise)?)?.chi2_inv / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_ladder, squeezed_vacuum};
    use crate::moments::numeric_moments;

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment(0, 0.3), 1.0);
        assert_eq!(gaussian_moment(3, 0.3), 0.0);
        assert!((gaussian_moment(4, 0.5) - 3.0 * 0.0625).abs() < 1e-15);
        assert!((gaussian_moment(8, 2.0) - 105.0 * 256.0).abs() < 1e-9);
    }

    #[test]
    fn set_sizes() {
        for (k, n) in [(1, 2), (2, 5), (3, 9), (4, 14)] {
            assert_eq!(accessible_quadratures(k).unwrap().len(), n);
        }
        assert!(accessible_set(0, 10).is_err());
        let q = accessible_quadratures(1).unwrap();
        assert_eq!(q[0].poly(), LadderPoly::x());
        assert!((&q[1].poly() - &LadderPoly::p()).chop(1e-15) == LadderPoly::zero());
    }

    #[test]
    fn vacuum_variance_with_noise() {
        let vac = FockState::vacuum(20).unwrap();
        let md = noisy_moments(&vac, 1, &DetectionNoise::new(0.5).unwrap()).unwrap();
        assert!((md.gamma[(0, 0)] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn zero_noise_is_noiseless() {
        let psi = squeezed_vacuum(0.3, 80).unwrap();
        let a = noisy_moments(&psi, 3, &DetectionNoise::none()).unwrap();
        let b = numeric_moments(&psi, &accessible_set(3, 80).unwrap()).unwrap();
        assert!((a.gamma - b.gamma).abs().max() < 1e-12);
        assert!((a.c_vec - b.c_vec).abs().max() < 1e-12);
    }

    #[test]
    fn vacuum_is_fixed_point_of_loss() {
        let dim = 12;
        let vac = FockState::vacuum(dim).unwrap().to_density();
        let h = OperatorMatrix::hermitian(CMatrix::zeros(dim, dim)).unwrap();
        let a = make_ladder(dim).unwrap().a;
        let out = evolve_lindblad(&vac, &h, &a, 2.0, 100).unwrap();
        assert!(out.trace_distance(&vac).unwrap() < 1e-14);
    }
}
