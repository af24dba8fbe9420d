//! Trisqueezed vacuum `exp[i(t* a³ + t a†³)]|0⟩`.
//!
//! The generator only connects `|3k⟩` to `|3k ± 3⟩`, so the evolution runs in
//! that sector and is embedded back into the full Fock space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, OperatorMatrix, SpectralGenerator};
use crate::{CMatrix, CVector, C64};

/// Relative change in `⟨n⟩` tolerated between `dim` and `2·dim`.
pub const TRISQUEEZE_CONVERGENCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrisqueezeParams {
    pub t: C64,
    pub dim: usize,
}

impl TrisqueezeParams {
    pub fn new(t: C64, dim: usize) -> Result<Self> {
        if dim < 4 {
            return Err(Error::InvalidDimension { dim, min: 4 });
        }
        if !t.re.is_finite() || !t.im.is_finite() {
            return Err(Error::InvalidParameter("triplicity must be finite".into()));
        }
        Ok(Self { t, dim })
    }
}

fn sector_generator(t: C64, levels: usize) -> CMatrix {
    let mut g = CMatrix::zeros(levels, levels);
    for k in 0..levels.saturating_sub(1) {
        let m = (3 * k) as f64;
        let amp = ((m + 1.0) * (m + 2.0) * (m + 3.0)).sqrt();
        // ⟨3k+3| t a†³ |3k⟩ and its conjugate from t* a³
        g[(k + 1, k)] = t * amp;
        g[(k, k + 1)] = t.conj() * amp;
    }
    g
}

/// Sector amplitudes of `U_T|0⟩` over `levels` sector states.
fn sector_state(t: C64, levels: usize) -> Result<CVector> {
    let op = OperatorMatrix::hermitian(sector_generator(t, levels))?;
    let mut vac = CVector::zeros(levels);
    vac[0] = C64::new(1.0, 0.0);
    let psi = SpectralGenerator::new(&op)?.apply_unchecked(&FockState::new(vac)?, 1.0)?;
    Ok(psi.into_amplitudes())
}

fn sector_mean_n(v: &CVector) -> f64 {
    v.iter().enumerate().map(|(k, c)| 3.0 * k as f64 * c.norm_sqr()).sum()
}

fn embed(v: &CVector, dim: usize) -> Result<FockState> {
    let mut out = CVector::zeros(dim);
    for (k, &c) in v.iter().enumerate() {
        if 3 * k < dim {
            out[3 * k] = c;
        }
    }
    FockState::normalized(out)
}

/// Trisqueezed vacuum at Fock dimension `p.dim`, accepted only when `⟨n⟩`
/// agrees with the `2·dim` result.
pub fn trisqueezed_state(p: &TrisqueezeParams) -> Result<FockState> {
    let levels = p.dim.div_ceil(3);
    let small = sector_state(p.t, levels)?;
    let large = sector_state(p.t, 2 * levels)?;
    let (a, b) = (sector_mean_n(&small), sector_mean_n(&large));
    if (a - b).abs() > TRISQUEEZE_CONVERGENCE_TOL * b.abs().max(f64::MIN_POSITIVE) && (a - b).abs() > 1e-14 {
        return Err(Error::NotConverged { dim: p.dim, at_dim: a, double_dim: 2 * p.dim, at_double: b });
    }
    embed(&small, p.dim)
}

/// `⟨n⟩` and `F = 4 Var(n)` from the sector amplitudes, with the same
/// convergence rule as [`trisqueezed_state`].
pub fn trisqueeze_moments(p: &TrisqueezeParams) -> Result<(f64, f64)> {
    let (m1, m2) = trisqueezed_state(p)?.number_moments();
    Ok((m1, 4.0 * (m2 - m1 * m1).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_triplicity_is_vacuum() {
        let psi = trisqueezed_state(&TrisqueezeParams::new(C64::new(0.0, 0.0), 30).unwrap()).unwrap();
        assert!((psi.amplitudes()[0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_of_t_is_irrelevant_for_population() {
        let a = trisqueeze_moments(&TrisqueezeParams::new(C64::new(0.08, 0.0), 300).unwrap()).unwrap();
        let b = trisqueeze_moments(&TrisqueezeParams::new(C64::from_polar(0.08, 1.1), 300).unwrap()).unwrap();
        assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-9);
    }

    #[test]
    fn unconverged_dimension_is_reported() {
        let err = trisqueezed_state(&TrisqueezeParams::new(C64::new(1.0, 0.0), 30).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotConverged { dim: 30, double_dim: 60, .. }));
    }
}
