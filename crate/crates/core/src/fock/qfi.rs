use crate::error::{Error, Result};
use crate::fock::operator::OperatorMatrix;
use crate::fock::state::{DensityOperator, FockState, DENSITY_TOL};
use crate::fock::QuantumState;

/// `⟨G²⟩ - ⟨G⟩²` for a pure state, with `⟨G²⟩ = ‖Gψ‖²`.
pub fn variance(state: &FockState, generator: &OperatorMatrix) -> Result<f64> {
    if state.dim() != generator.dim() {
        return Err(Error::DimensionMismatch { left: state.dim(), right: generator.dim() });
    }
    let g_psi = generator.matrix() * state.amplitudes();
    let mean = state.amplitudes().dotc(&g_psi).re;
    Ok((g_psi.norm_squared() - mean * mean).max(0.0))
}

/// Pure-state QFI, `4 Var(G)`.
pub fn pure_qfi(state: &FockState, generator: &OperatorMatrix) -> Result<f64> {
    Ok(4.0 * variance(state, generator)?)
}

/// Mixed-state QFI from the spectral decomposition of `ρ`:
/// `2 Σ_{λk+λl>0} (λk - λl)²/(λk + λl) |⟨k|G|l⟩|²`.
pub fn mixed_qfi(rho: &DensityOperator, generator: &OperatorMatrix) -> Result<f64> {
    if rho.dim() != generator.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: generator.dim() });
    }
    let (vals, vecs) = rho.eigen();
    if let Some(&min) = vals.first() {
        if min < -DENSITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
    }
    let lam: Vec<f64> = vals.iter().map(|&l| l.max(0.0)).collect();
    let g = vecs.adjoint() * generator.matrix() * &vecs;
    let floor = 1e-15;
    let mut f = 0.0;
    for k in 0..lam.len() {
        for l in (k + 1)..lam.len() {
            let sum = lam[k] + lam[l];
            if sum > floor {
                let diff = lam[k] - lam[l];
                f += 4.0 * diff * diff / sum * g[(k, l)].norm_sqr();
            }
        }
    }
    Ok(f)
}

/// Convenience wrapper dispatching on the state type.
pub fn qfi<S: QuantumState>(state: &S, generator: &OperatorMatrix) -> Result<f64> {
    mixed_qfi(&state.as_density(), generator)
}
