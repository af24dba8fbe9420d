//! Fock amplitudes from position-space wave functions.
//!
//! `c_k = ∫ φ_k(x) ψ(x) dx` with the Hermite functions of the convention
//! `x = (a + a†)/√2`. The trapezoid rule converges geometrically for smooth,
//! rapidly decaying integrands, so each amplitude is exact to rounding
//! regardless of the truncation; only the levels beyond `dim` are missing.
//! This avoids the edge corruption of exponentiating a truncated `x³`.

use crate::error::{Error, Result};
use crate::{CVector, C64};

use super::state::FockState;

/// Magnitude at which the Hermite recursion is rescaled.
const RESCALE: f64 = 1e150;

/// Projects `ψ(x)` onto `φ_0..φ_{dim-1}` by the trapezoid rule on
/// `[-half_width, half_width]` with step `h`.
///
/// `log_envelope(x)` must return `ln|ψ(x)|`-scale Gaussian part and `phase`
/// the remaining complex factor, so that `ψ = exp(log_envelope) · phase`;
/// splitting them keeps far-out Hermite values from underflowing.
pub fn project_wavefunction(
    log_envelope: impl Fn(f64) -> f64,
    phase: impl Fn(f64) -> C64,
    dim: usize,
    half_width: f64,
    h: f64,
) -> CVector {
    let mut c = CVector::zeros(dim);
    let steps = (half_width / h).ceil() as i64;
    let ln_pi_quarter = 0.25 * std::f64::consts::PI.ln();
    let sqrt_k: Vec<f64> = (0..=dim).map(|k| (k as f64).sqrt()).collect();
    for i in -steps..=steps {
        let x = i as f64 * h;
        // φ_0 = π^{-1/4} e^{-x²/2}, carried as mantissa 1 times exp(log_scale)
        let mut log_scale = -0.5 * x * x - ln_pi_quarter + log_envelope(x);
        let w = phase(x) * h;
        let (mut prev, mut cur) = (0.0f64, 1.0f64);
        let mut factor = if log_scale > -700.0 { w * log_scale.exp() } else { C64::new(0.0, 0.0) };
        for k in 0..dim {
            if factor.re != 0.0 || factor.im != 0.0 {
                c[k] += factor * cur;
            }
            // φ_{k+1} = (√2 x φ_k - √k φ_{k-1}) / √(k+1)
            let next = (std::f64::consts::SQRT_2 * x * cur - sqrt_k[k] * prev) / sqrt_k[k + 1];
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                prev /= RESCALE;
                cur /= RESCALE;
                log_scale += RESCALE.ln();
                factor = if log_scale > -700.0 { w * log_scale.exp() } else { C64::new(0.0, 0.0) };
            }
        }
    }
    c
}

/// `exp(i r x³) S(s)|0⟩` with amplitudes projected from
/// `ψ(x) = (π e^{2s})^{-1/4} exp(-x² e^{-2s}/2 + i r x³)`.
///
/// Fails with a truncation error when the tail mass exceeds `tol`.
pub fn cubic_state_projected(r: f64, s: f64, dim: usize, tol: f64) -> Result<FockState> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let w = (-2.0 * s).exp();
    // Envelope below e^{-40} beyond this width.
    let half_width = (80.0 / w).sqrt();
    let k_max = (2.0 * dim as f64 + 1.0).sqrt() + 3.0 * r.abs() * half_width * half_width + 1.0;
    let h = (std::f64::consts::PI / (2.0 * k_max)).min(0.05);
    let norm = -0.25 * (std::f64::consts::PI / w).ln();
    let amps = project_wavefunction(
        |x| norm - 0.5 * w * x * x,
        |x| C64::from_polar(1.0, r * x * x * x),
        dim,
        half_width,
        h,
    );
    let captured = amps.norm_squared();
    if captured < 1.0 - 1e-3 {
        // Most of the mass lives beyond dim; report it as truncation.
        return Err(Error::Truncation { dim, tail: 1.0 - captured, tol });
    }
    let psi = FockState::normalized(amps)?;
    psi.check_truncation(tol)?;
    Ok(psi)
}
