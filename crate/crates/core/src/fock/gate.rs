use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::operator::OperatorMatrix;
use crate::fock::state::FockState;
use crate::{CMatrix, CVector, C64};

/// Default bound on the truncation tail after a gate.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
enum Basis {
    Real(DMatrix<f64>),
    Complex(CMatrix),
}

/// Eigendecomposition of a Hermitian generator, reusable for any number of
/// `exp(i c G)` applications.
#[derive(Debug, Clone)]
pub struct SpectralGenerator {
    eigenvalues: Vec<f64>,
    basis: Basis,
}

impl SpectralGenerator {
    pub fn new(generator: &OperatorMatrix) -> Result<Self> {
        if !generator.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: crate::fock::operator::hermitian_defect(generator.matrix()),
            });
        }
        if generator.is_real() {
            let m = generator.matrix().map(|z| z.re);
            let eig = m.symmetric_eigen();
            Ok(Self {
                eigenvalues: eig.eigenvalues.iter().copied().collect(),
                basis: Basis::Real(eig.eigenvectors),
            })
        } else {
            let eig = generator.matrix().clone().symmetric_eigen();
            Ok(Self {
                eigenvalues: eig.eigenvalues.iter().copied().collect(),
                basis: Basis::Complex(eig.eigenvectors),
            })
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `exp(i c G) ψ` without a truncation check.
    pub fn apply_unchecked(&self, state: &FockState, coefficient: f64) -> Result<FockState> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: state.dim(), right: self.dim() });
        }
        if coefficient == 0.0 {
            return Ok(state.clone());
        }
        let psi = state.amplitudes();
        let phases = self.eigenvalues.iter().map(|&l| C64::from_polar(1.0, coefficient * l));
        let out = match &self.basis {
            Basis::Real(v) => {
                let re = v.tr_mul(&psi.map(|z| z.re));
                let im = v.tr_mul(&psi.map(|z| z.im));
                let rotated = CVector::from_iterator(
                    self.dim(),
                    re.iter().zip(im.iter()).zip(phases).map(|((&a, &b), ph)| C64::new(a, b) * ph),
                );
                let re = v * rotated.map(|z| z.re);
                let im = v * rotated.map(|z| z.im);
                CVector::from_iterator(self.dim(), re.iter().zip(im.iter()).map(|(&a, &b)| C64::new(a, b)))
            }
            Basis::Complex(v) => {
                let mut coeffs = v.ad_mul(psi);
                for (c, ph) in coeffs.iter_mut().zip(phases) {
                    *c *= ph;
                }
                v * coeffs
            }
        };
        FockState::normalized(out)
    }

    /// `exp(i c G) ψ`, failing if the output tail exceeds `tol`.
    pub fn apply(&self, state: &FockState, coefficient: f64, tol: f64) -> Result<FockState> {
        let out = self.apply_unchecked(state, coefficient)?;
        if coefficient != 0.0 {
            out.check_truncation(tol)?;
        }
        Ok(out)
    }

    /// Dense unitary `exp(i c G)`.
    pub fn unitary(&self, coefficient: f64) -> CMatrix {
        let d = self.dim();
        let v = match &self.basis {
            Basis::Real(v) => v.map(|x| C64::new(x, 0.0)),
            Basis::Complex(v) => v.clone(),
        };
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let ph = C64::from_polar(1.0, coefficient * l);
            for i in 0..d {
                scaled[(i, j)] *= ph;
            }
        }
        scaled * v.adjoint()
    }
}

/// `exp(i · coefficient · generator) |ψ⟩` with the default tail tolerance.
pub fn apply_gate(state: &FockState, generator: &OperatorMatrix, coefficient: f64) -> Result<FockState> {
    apply_gate_with_tol(state, generator, coefficient, DEFAULT_TRUNCATION_TOL)
}

pub fn apply_gate_with_tol(
    state: &FockState,
    generator: &OperatorMatrix,
    coefficient: f64,
    tol: f64,
) -> Result<FockState> {
    if coefficient == 0.0 {
        if !generator.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: crate::fock::operator::hermitian_defect(generator.matrix()),
            });
        }
        if state.dim() != generator.dim() {
            return Err(Error::DimensionMismatch { left: state.dim(), right: generator.dim() });
        }
        return Ok(state.clone());
    }
    SpectralGenerator::new(generator)?.apply(state, coefficient, tol)
}
