use crate::error::{Error, Result};
use crate::fock::poly::LadderPoly;
use crate::{CMatrix, C64};

/// Tolerance used when checking an operator for Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense operator on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    hermitian: bool,
}

pub(crate) fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl OperatorMatrix {
    /// Wraps a matrix, setting the Hermitian flag when the matrix equals its
    /// adjoint within [`HERMITIAN_TOL`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        let hermitian = hermitian_defect(&matrix) <= HERMITIAN_TOL;
        Ok(Self { matrix, hermitian })
    }

    /// Wraps a matrix that must be Hermitian.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let op = Self::new(matrix)?;
        if !op.hermitian {
            return Err(Error::NotHermitian {
                deviation: hermitian_defect(&op.matrix),
            });
        }
        Ok(op)
    }

    /// Projection of a normal-ordered polynomial onto `dim` Fock levels.
    pub fn from_poly(poly: &LadderPoly, dim: usize) -> Result<Self> {
        Self::new(poly.project(dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn commutator(&self, other: &Self) -> Result<CMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }
}

/// The standard single-mode operators on a truncated space, with the
/// quadrature convention `x = (a + a†)/√2`, `p = (a - a†)/(i√2)` (vacuum
/// variance 1/2).
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: OperatorMatrix,
    pub a_dag: OperatorMatrix,
    pub n: OperatorMatrix,
    pub x: OperatorMatrix,
    pub p: OperatorMatrix,
}

pub fn make_ladder(dim: usize) -> Result<Ladder> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let mut a = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let n = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |k, _| C64::new(k as f64, 0.0)));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &a_dag) * C64::new(s, 0.0);
    let p = (&a - &a_dag) * C64::new(0.0, -s);
    Ok(Ladder {
        a: OperatorMatrix { matrix: a, hermitian: false },
        a_dag: OperatorMatrix { matrix: a_dag, hermitian: false },
        n: OperatorMatrix { matrix: n, hermitian: true },
        x: OperatorMatrix { matrix: x, hermitian: true },
        p: OperatorMatrix { matrix: p, hermitian: true },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::state::FockState;
    use crate::fock::expectation;

    #[test]
    fn rejects_small_dimension() {
        assert!(matches!(make_ladder(1), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn lowering_operator_on_first_excited_state() {
        let l = make_ladder(3).unwrap();
        let one = FockState::basis(1, 3).unwrap();
        let out = l.a.matrix() * one.amplitudes();
        assert!((out[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15 && out[2].norm() < 1e-15);
    }

    #[test]
    fn canonical_commutator_away_from_cutoff() {
        let l = make_ladder(50).unwrap();
        let c = l.x.commutator(&l.p).unwrap();
        for i in 0..45 {
            for j in 0..45 {
                let want = if i == j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) };
                assert!((c[(i, j)] - want).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn vacuum_quadrature_variance_is_one_half() {
        let l = make_ladder(50).unwrap();
        let vac = FockState::vacuum(50).unwrap();
        let x2 = expectation(&vac, &OperatorMatrix::new(l.x.matrix() * l.x.matrix()).unwrap()).unwrap();
        let x1 = expectation(&vac, &l.x).unwrap();
        assert!((x2.re - x1.re * x1.re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hermitian_flags() {
        let l = make_ladder(8).unwrap();
        assert!(l.x.is_hermitian() && l.p.is_hermitian() && l.n.is_hermitian());
        assert!(!l.a.is_hermitian());
        assert!(matches!(
            OperatorMatrix::hermitian(l.a.matrix().clone()),
            Err(Error::NotHermitian { .. })
        ));
    }
}
