//! Truncated Fock-space engine: operators, states, gates, expectation values
//! and quantum Fisher information.
//!
//! Quadratures follow `x = (a + a†)/√2`, `p = (a - a†)/(i√2)`, so the vacuum
//! has `Var(x) = 1/2` and a momentum-squeezed vacuum has `Var(x) = e^{2s}/2`.
//! Other literature on cubic phase gates uses `x = (a + a†)/2`; cubicity
//! values are not interchangeable between the two conventions.

pub mod gate;
pub mod operator;
pub mod poly;
pub mod position;
pub mod qfi;
pub mod state;
pub mod wigner;

pub use gate::{apply_gate, apply_gate_with_tol, SpectralGenerator, DEFAULT_TRUNCATION_TOL};
pub use operator::{make_ladder, Ladder, OperatorMatrix};
pub use poly::LadderPoly;
pub use position::{cubic_state_projected, project_wavefunction};
pub use qfi::{mixed_qfi, pure_qfi, variance};
pub use state::{DensityOperator, FockState};
pub use wigner::{linspace, wigner_grid, wigner_point};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

/// Automatic dimension selection: start at `start_dim`, double until the
/// tail mass drops below `tol`, give up beyond `max_dim`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Truncation {
    pub tol: f64,
    pub start_dim: usize,
    pub max_dim: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TRUNCATION_TOL,
            start_dim: 40,
            max_dim: 4096,
        }
    }
}

impl Truncation {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn with_max_dim(self, max_dim: usize) -> Self {
        Self { max_dim, ..self }
    }

    /// Runs `build` at increasing dimensions until it stops reporting a
    /// truncation error.
    pub fn select<T>(&self, mut build: impl FnMut(usize) -> Result<T>) -> Result<T> {
        let mut dim = self.start_dim.max(2).min(self.max_dim);
        loop {
            match build(dim) {
                Err(Error::Truncation { .. }) if dim < self.max_dim => {
                    dim = (dim * 2).min(self.max_dim);
                }
                other => return other,
            }
        }
    }
}

/// Anything that yields expectation values of dense operators.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// `⟨O⟩` without a dimension check.
    fn expect_matrix(&self, op: &CMatrix) -> C64;
    /// Exact `⟨P⟩` of a ladder polynomial, treating levels beyond `dim` as
    /// empty.
    fn expect_poly(&self, op: &LadderPoly) -> C64;
    fn as_density(&self) -> DensityOperator;
}

impl QuantumState for FockState {
    fn dim(&self) -> usize {
        FockState::dim(self)
    }

    fn expect_matrix(&self, op: &CMatrix) -> C64 {
        let v = self.amplitudes();
        v.dotc(&(op * v))
    }

    fn expect_poly(&self, op: &LadderPoly) -> C64 {
        op.expect_vector(self.amplitudes())
    }

    fn as_density(&self) -> DensityOperator {
        self.to_density()
    }
}

impl QuantumState for DensityOperator {
    fn dim(&self) -> usize {
        DensityOperator::dim(self)
    }

    fn expect_matrix(&self, op: &CMatrix) -> C64 {
        let rho = self.matrix();
        let d = rho.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += rho[(i, j)] * op[(j, i)];
            }
        }
        acc
    }

    fn expect_poly(&self, op: &LadderPoly) -> C64 {
        op.expect_density(self.matrix())
    }

    fn as_density(&self) -> DensityOperator {
        self.clone()
    }
}

/// `⟨ψ|O|ψ⟩` or `Tr(ρ O)`.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, obs: &OperatorMatrix) -> Result<C64> {
    if state.dim() != obs.dim() {
        return Err(Error::DimensionMismatch { left: state.dim(), right: obs.dim() });
    }
    Ok(state.expect_matrix(obs.matrix()))
}

/// Amplitudes of `exp[-s(a² - a†²)/2]|0⟩`, the momentum-squeezed vacuum,
/// without any truncation check or renormalization.
pub fn squeezed_vacuum_amplitudes(s: f64, dim: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    let t = s.tanh();
    let mut c = 1.0 / s.cosh().sqrt();
    let mut k = 0;
    while k < dim {
        v[k] = C64::new(c, 0.0);
        let m = (k / 2) as f64;
        c *= t * ((2.0 * m + 1.0) * (2.0 * m + 2.0)).sqrt() / (2.0 * (m + 1.0));
        k += 2;
    }
    v
}

/// Momentum-squeezed vacuum with the default tail tolerance.
pub fn squeezed_vacuum(s: f64, dim: usize) -> Result<FockState> {
    squeezed_vacuum_with_tol(s, dim, DEFAULT_TRUNCATION_TOL)
}

pub fn squeezed_vacuum_with_tol(s: f64, dim: usize, tol: f64) -> Result<FockState> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let psi = FockState::normalized(squeezed_vacuum_amplitudes(s, dim))?;
    psi.check_truncation(tol)?;
    Ok(psi)
}

/// The cubic gate `exp(i r x³)` on a fixed truncation, with the `x³`
/// spectrum computed once.
#[derive(Debug, Clone)]
pub struct CubicGate {
    spectral: SpectralGenerator,
}

impl CubicGate {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, min: 2 });
        }
        let x3 = OperatorMatrix::from_poly(&LadderPoly::x().pow(3), dim)?;
        Ok(Self { spectral: SpectralGenerator::new(&x3)? })
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    pub fn apply(&self, state: &FockState, r: f64, tol: f64) -> Result<FockState> {
        self.spectral.apply(state, r, tol)
    }

    /// `exp(i r x³) S(s)|0⟩`.
    pub fn cubic_state(&self, r: f64, s: f64, tol: f64) -> Result<FockState> {
        let sq = squeezed_vacuum_with_tol(s, self.dim(), tol)?;
        self.apply(&sq, r, tol)
    }
}

/// The cubic phase state `exp(i r x³) exp[-s(a² - a†²)/2]|0⟩` at fixed `dim`.
pub fn cubic_state(r: f64, s: f64, dim: usize, tol: f64) -> Result<FockState> {
    CubicGate::new(dim)?.cubic_state(r, s, tol)
}

/// Cubic phase state at the smallest doubling dimension meeting the tail
/// tolerance, exponentiating the truncated `x³`.
pub fn cubic_state_auto(r: f64, s: f64, trunc: &Truncation) -> Result<FockState> {
    trunc.select(|dim| cubic_state(r, s, dim, trunc.tol))
}

/// Like [`cubic_state_auto`] but with amplitudes projected from the exact
/// wave function.
pub fn cubic_state_projected_auto(r: f64, s: f64, trunc: &Truncation) -> Result<FockState> {
    trunc.select(|dim| cubic_state_projected(r, s, dim, trunc.tol))
}
