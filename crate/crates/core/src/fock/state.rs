use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::operator::hermitian_defect;
use crate::{CMatrix, CVector, C64};

/// Normalization tolerance for [`FockState`].
pub const NORM_TOL: f64 = 1e-12;
/// Number of top Fock levels whose population counts as the truncation tail.
pub const TAIL_LEVELS: usize = 5;

/// A normalized pure state in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: CVector,
}

impl FockState {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm^2 = {norm2}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize a vector of norm {norm}")));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn basis(k: usize, dim: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidDimension { dim, min: k + 1 });
        }
        let mut v = CVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::basis(0, dim)
    }

    /// Coherent state `|α⟩`, renormalized after truncation.
    pub fn coherent(alpha: C64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, min: 1 });
        }
        let mut v = CVector::zeros(dim);
        let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        v[0] = c;
        for k in 1..dim {
            c = c * alpha / (k as f64).sqrt();
            v[k] = c;
        }
        Self::normalized(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// `(⟨n⟩, ⟨n²⟩)` read off the Fock populations.
    pub fn number_moments(&self) -> (f64, f64) {
        self.amplitudes.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (k, c)| {
            let (k, w) = (k as f64, c.norm_sqr());
            (m1 + k * w, m2 + k * k * w)
        })
    }

    /// Population of the top [`TAIL_LEVELS`] levels.
    pub fn tail_mass(&self) -> f64 {
        let d = self.dim();
        let start = d.saturating_sub(TAIL_LEVELS);
        self.amplitudes.rows(start, d - start).norm_squared()
    }

    /// Fails with [`Error::Truncation`] when the tail mass exceeds `tol`.
    pub fn check_truncation(&self, tol: f64) -> Result<()> {
        let tail = self.tail_mass();
        if tail > tol {
            return Err(Error::Truncation { dim: self.dim(), tail, tol });
        }
        Ok(())
    }

    /// Copy embedded in a larger space (zero padded) or cut to a smaller one
    /// and renormalized.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        let mut v = CVector::zeros(dim);
        let m = dim.min(self.dim());
        v.rows_mut(0, m).copy_from(&self.amplitudes.rows(0, m));
        if dim >= self.dim() {
            Ok(Self { amplitudes: v })
        } else {
            Self::normalized(v)
        }
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`, padding the shorter state with zeros.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let d = self.dim().max(other.dim());
        let a = self.resized(d).expect("padding never fails");
        let b = other.resized(d).expect("padding never fails");
        a.amplitudes.dotc(&b.amplitudes).norm_sqr()
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// Little-endian dump: dimension as `u64` followed by interleaved
    /// re/im `f64` pairs.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 16 * self.dim());
        out.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        for z in self.amplitudes.iter() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::InvalidState("malformed state dump".into());
        let head: [u8; 8] = bytes.get(..8).ok_or_else(bad)?.try_into().map_err(|_| bad())?;
        let dim = u64::from_le_bytes(head) as usize;
        if bytes.len() != 8 + 16 * dim {
            return Err(bad());
        }
        let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
        let v = DVector::from_fn(dim, |i, _| C64::new(f(8 + 16 * i), f(16 + 16 * i)));
        Self::new(v)
    }
}

/// Hermiticity and trace tolerance for [`DensityOperator`].
pub const DENSITY_TOL: f64 = 1e-10;

/// A mixed state: Hermitian, positive, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity within [`DENSITY_TOL`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { left: matrix.nrows(), right: matrix.ncols() });
        }
        let defect = hermitian_defect(&matrix);
        if defect > DENSITY_TOL {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({defect:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = Self { matrix };
        let min = rho.eigen().0.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, min: 1 });
        }
        Self::new(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues (ascending) and eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = CMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, idx[c])]);
        (vals, vecs)
    }

    /// Population of the top [`TAIL_LEVELS`] levels.
    pub fn tail_mass(&self) -> f64 {
        let d = self.dim();
        (d.saturating_sub(TAIL_LEVELS)..d).map(|k| self.matrix[(k, k)].re).sum()
    }

    /// `(1/2)‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        let diff = &self.matrix - &other.matrix;
        let eig = diff.symmetric_eigen();
        Ok(0.5 * eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &FockState) -> Result<f64> {
        if self.dim() != psi.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: psi.dim() });
        }
        let v = psi.amplitudes();
        Ok((v.adjoint() * &self.matrix * v)[(0, 0)].re)
    }
}

impl From<&FockState> for DensityOperator {
    fn from(psi: &FockState) -> Self {
        psi.to_density()
    }
}
