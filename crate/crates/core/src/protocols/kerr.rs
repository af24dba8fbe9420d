//! Kerr evolution sandwiched between squeezing and displacement, and the
//! plain driven Kerr oscillator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{squeezed_vacuum, FockState, LadderPoly, OperatorMatrix, SpectralGenerator};
use crate::C64;

/// Coefficients below this are dropped from the frame-transformed generator.
const CHOP: f64 = 1e-10;

/// Default Fock dimension for the transformed-frame generator.
pub const KERR_DEFAULT_DIM: usize = 240;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    pub r: f64,
    pub s: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub kerr_k: f64,
}

impl KerrParams {
    pub fn new(r: f64, s: f64, lambda: f64, alpha: f64, kerr_k: f64) -> Result<Self> {
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must exceed 1, got {lambda}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(kerr_k > 0.0) || !kerr_k.is_finite() {
            return Err(Error::InvalidParameter(format!("K must be positive, got {kerr_k}")));
        }
        if !r.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter("r and s must be finite".into()));
        }
        Ok(Self { r, s, lambda, alpha, kerr_k })
    }

    /// The usual choice `α = λ³`.
    pub fn with_cubic_displacement(r: f64, s: f64, lambda: f64, kerr_k: f64) -> Result<Self> {
        Self::new(r, s, lambda, lambda.powi(3), kerr_k)
    }

    pub fn delta(&self) -> f64 {
        3.0 * self.kerr_k * self.alpha * self.alpha - self.kerr_k
    }

    pub fn beta(&self) -> f64 {
        -2.0 * self.kerr_k * self.alpha.powi(3)
    }

    pub fn tau(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.r / (self.kerr_k * self.alpha * self.lambda.powi(3))
    }

    /// Relative weight `λ/(4√2 α)` of the leading `x⁴` correction.
    pub fn quartic_prefactor(&self) -> f64 {
        self.lambda / (self.alpha * 4.0 * std::f64::consts::SQRT_2)
    }
}

/// `H_Kerr = -(K/2) a†²a² + Δ a†a + β (a + a†)` as a polynomial.
pub fn kerr_hamiltonian(p: &KerrParams) -> LadderPoly {
    let k = p.kerr_k;
    LadderPoly::monomial(2, 2, -0.5 * k)
        + LadderPoly::monomial(1, 1, p.delta())
        + (LadderPoly::a() + LadderPoly::a_dag()).scale(p.beta())
}

/// `τ S†(log λ) D†(α) H_Kerr D(α) S(log λ) / r` without its constant part.
///
/// The frame change maps `a ↦ a cosh ζ + a† sinh ζ + α` with `ζ = log λ`,
/// so `x ↦ λx`. The result depends only on `λ` and `α`.
pub fn kerr_unit_generator(lambda: f64, alpha: f64) -> Result<LadderPoly> {
    let p = KerrParams::new(1.0, 0.0, lambda, alpha, 1.0)?;
    let z = lambda.ln();
    let b = LadderPoly::monomial(0, 1, z.cosh()) + LadderPoly::monomial(1, 0, z.sinh()) + LadderPoly::constant(alpha);
    let bd = b.adjoint();
    let h = (&(&bd * &bd) * &(&b * &b)).scale(-0.5 * p.kerr_k)
        + (&bd * &b).scale(p.delta())
        + (&b + &bd).scale(p.beta());
    let g = h.scale(p.tau());
    let constant = g.coefficient(0, 0);
    let g = g - LadderPoly::constant(constant);
    // Rounding in the large-α cancellations leaves a tiny anti-Hermitian part.
    let g = (&g + &g.adjoint()).scale(0.5);
    Ok(g.chop(CHOP))
}

/// Reusable spectral data for one `(λ, α)` pair; any `(r, s)` then costs a
/// single matrix-vector product.
#[derive(Debug, Clone)]
pub struct KerrGate {
    lambda: f64,
    alpha: f64,
    spectral: SpectralGenerator,
}

impl KerrGate {
    pub fn new(lambda: f64, alpha: f64, dim: usize) -> Result<Self> {
        let g = kerr_unit_generator(lambda, alpha)?;
        let op = OperatorMatrix::hermitian(g.project(dim))?;
        Ok(Self { lambda, alpha, spectral: SpectralGenerator::new(&op)? })
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `exp(-i r G₁) S(s)|0⟩`.
    pub fn apply(&self, r: f64, s: f64, tol: f64) -> Result<FockState> {
        let sv = squeezed_vacuum(s, self.dim())?;
        self.spectral.apply(&sv, -r, tol)
    }
}

/// Approximate cubic phase state from the Kerr sandwich.
pub fn kerr_effective_state(p: &KerrParams, dim: usize, tol: f64) -> Result<FockState> {
    KerrGate::new(p.lambda, p.alpha, dim)?.apply(p.r, p.s, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrPlainParams {
    pub delta: f64,
    pub squeeze: f64,
    pub kerr_k: f64,
    pub time: f64,
}

/// `Δ a†a + s(a†² + a²) - K a†²a²`.
pub fn kerr_plain_hamiltonian(p: &KerrPlainParams) -> LadderPoly {
    LadderPoly::monomial(1, 1, p.delta)
        + (LadderPoly::monomial(2, 0, p.squeeze) + LadderPoly::monomial(0, 2, p.squeeze))
        + LadderPoly::monomial(2, 2, -p.kerr_k)
}

/// State of the plain driven Kerr oscillator reached by switching the drive
/// on adiabatically from the vacuum: the highest-energy eigenstate of the
/// even-parity sector. `p.time` is ignored.
pub fn kerr_plain_state(p: &KerrPlainParams, dim: usize, tol: f64) -> Result<FockState> {
    if dim < 4 {
        return Err(Error::InvalidDimension { dim, min: 4 });
    }
    let h = kerr_plain_hamiltonian(p);
    let half = dim.div_ceil(2);
    let mut m = nalgebra::DMatrix::<f64>::zeros(half, half);
    h.for_each_element(dim, |row, col, v| {
        if row % 2 == 0 && col % 2 == 0 {
            m[(row / 2, col / 2)] += v.re;
        }
    });
    let eig = m.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let mut amps = crate::CVector::zeros(dim);
    for k in 0..half {
        amps[2 * k] = C64::new(eig.eigenvectors[(k, top)], 0.0);
    }
    let psi = FockState::normalized(amps)?;
    psi.check_truncation(tol)?;
    Ok(psi)
}

/// `exp(-i H t)|0⟩`, a sudden quench of the plain driven Kerr oscillator.
pub fn kerr_plain_evolved(p: &KerrPlainParams, dim: usize, tol: f64) -> Result<FockState> {
    let op = OperatorMatrix::hermitian(kerr_plain_hamiltonian(p).project(dim))?;
    let vac = FockState::vacuum(dim)?;
    SpectralGenerator::new(&op)?.apply(&vac, -p.time, tol)
}

/// `exp(iK a†²a²)` in matrix form, used to exhibit that it commutes with `n`.
pub fn kerr_unitary(kerr_k: f64, dim: usize) -> crate::CMatrix {
    let mut u = crate::CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let kf = k as f64;
        u[(k, k)] = C64::from_polar(1.0, kerr_k * kf * (kf - 1.0));
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_fields() {
        let p = KerrParams::with_cubic_displacement(0.1, 0.2, 4.0, 0.5).unwrap();
        assert_eq!(p.alpha, 64.0);
        assert!((p.delta() - (3.0 * 0.5 * 4096.0 - 0.5)).abs() < 1e-9);
        assert!((p.beta() + 262144.0).abs() < 1e-6);
        assert!((p.quartic_prefactor() - 0.011048543).abs() < 1e-8);
    }

    #[test]
    fn generator_leads_with_cubic_term() {
        // The a†³ coefficient of -x³ is -1/(2√2); corrections shrink with λ.
        let target = -LadderPoly::x().pow(3).coefficient(3, 0);
        let err = |lambda: f64| {
            let g = kerr_unit_generator(lambda, lambda.powi(3)).unwrap();
            assert!(g.hermiticity_defect() < 1e-9);
            (g.coefficient(3, 0) - target).norm()
        };
        let (e4, e5) = (err(4.0), err(5.0));
        assert!(e4 < 5e-3 && e5 < e4, "{e4} {e5}");
    }

    #[test]
    fn rejects_small_lambda() {
        assert!(KerrParams::new(0.1, 0.1, 1.0, 1.0, 1.0).is_err());
    }
}
