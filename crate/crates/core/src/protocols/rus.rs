//! Repeat-until-success states `(1 + i(r/N)x³)^N S(s)|0⟩ / √Z_N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{squeezed_vacuum_amplitudes, FockState, LadderPoly};
use crate::{CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RusParams {
    pub r: f64,
    pub s: f64,
    pub n_iter: u32,
}

impl RusParams {
    pub fn new(r: f64, s: f64, n_iter: u32) -> Result<Self> {
        if n_iter == 0 {
            return Err(Error::InvalidParameter("need at least one iteration".into()));
        }
        if !(s >= 0.0) || !r.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("need finite r and s >= 0, got r={r}, s={s}")));
        }
        Ok(Self { r, s, n_iter })
    }
}

/// Normalization, `⟨n⟩`, `⟨n²⟩` and `F = 4 Var(n)` of a pure state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RusMoments {
    pub z: f64,
    pub mean_n: f64,
    pub mean_n2: f64,
    pub f_q: f64,
}

impl RusMoments {
    fn new(z: f64, mean_n: f64, mean_n2: f64) -> Self {
        Self { z, mean_n, mean_n2, f_q: (4.0 * (mean_n2 - mean_n * mean_n)).max(0.0) }
    }
}

/// The state and its squared norm before normalization.
pub fn rus_state_unnormalized(p: &RusParams, dim: usize) -> Result<(FockState, f64)> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let x3 = LadderPoly::x().pow(3);
    let c = C64::new(0.0, p.r / f64::from(p.n_iter));
    let mut v: CVector = squeezed_vacuum_amplitudes(p.s, dim);
    for _ in 0..p.n_iter {
        v = &v + x3.apply_vector(&v) * c;
    }
    let z = v.norm_squared();
    Ok((FockState::normalized(v)?, z))
}

/// Fock-space RUS state; fails when the tail exceeds `tol`.
pub fn rus_state_numeric(p: &RusParams, dim: usize, tol: f64) -> Result<FockState> {
    let (psi, _) = rus_state_unnormalized(p, dim)?;
    psi.check_truncation(tol)?;
    Ok(psi)
}

/// Closed forms for `N = 1..5`.
pub fn rus_analytic(p: &RusParams) -> Result<RusMoments> {
    let (r, s) = (p.r, p.s);
    let e = |k: f64| (k * s).exp();
    let r2 = r * r;
    let q = r2 * e(6.0);
    let sh2 = s.sinh().powi(2);
    let m = match p.n_iter {
        1 => {
            let z = 1.0 + 15.0 / 8.0 * q;
            let n = (sh2 + 3.0 / 16.0 * q * (-5.0 + 23.0 * (2.0 * s).cosh() + 12.0 * (2.0 * s).sinh())) / z;
            let n2 = e(-4.0)
                * (24.0 - 32.0 * e(2.0)
                    + 16.0 * e(4.0)
                    + e(6.0)
                        * (-32.0 + 225.0 * r2
                            + 3.0 * e(2.0) * (8.0 + r2 * (-44.0 + 5.0 * e(2.0) * (26.0 - 28.0 * e(2.0) + 63.0 * e(4.0))))))
                / (16.0 * (8.0 + 15.0 * q));
            RusMoments::new(z, n, n2)
        }
        2 => {
            let d = 1024.0 + 15.0 * q * (64.0 + 693.0 * q);
            let z = d / 1024.0;
            let n = 0.25
                * (-2.0 + e(-2.0) + 13.0 * e(2.0)
                    + 12.0 * e(2.0) * (-1024.0 + 3.0 * e(2.0) * r2 * (224.0 - 160.0 * e(4.0) + 315.0 * q)) / d);
            let n2 = (50.0 + 3.0 * e(-4.0) - 4.0 * e(-2.0) - 52.0 * e(2.0)
                + 195.0 * e(4.0)
                + 48.0
                    * (-1024.0 + 960.0 * q - 32.0 * e(4.0) * (128.0 + 21.0 * r2) + 16.0 * e(2.0) * (64.0 + 45.0 * r2)
                        - 15.0 * e(10.0) * r2 * (176.0 + 63.0 * r2)
                        + 15.0 * e(8.0) * r2 * (32.0 + 147.0 * r2))
                    / d)
                / 16.0;
            RusMoments::new(z, n, n2)
        }
        3 => {
            let d = 4608.0 + 5.0 * q * (576.0 + 77.0 * q * (72.0 + 1105.0 * q));
            let z = d / 4608.0;
            let n = 0.25
                * (-2.0 + e(-2.0) + 19.0 * e(2.0)
                    + 18.0
                        * e(2.0)
                        * (-4608.0
                            + e(2.0)
                                * r2
                                * (2496.0
                                    + 5.0 * e(4.0) * (-384.0 + 7.0 * e(2.0) * r2 * (336.0 - 264.0 * e(4.0) + 715.0 * q))))
                        / d);
            let r4 = r2 * r2;
            let n2 = (74.0 + 3.0 * e(-4.0) - 4.0 * e(-2.0) - 76.0 * e(2.0)
                + 399.0 * e(4.0)
                + 36.0
                    * (-9216.0 + 7680.0 * q + 92400.0 * e(12.0) * r4
                        - 3360.0 * e(10.0) * r2 * (8.0 + 7.0 * r2)
                        - 384.0 * e(4.0) * (132.0 + 13.0 * r2)
                        + 192.0 * e(2.0) * (48.0 + 25.0 * r2)
                        - 770.0 * e(16.0) * r4 * (204.0 + 65.0 * r2)
                        + 385.0 * e(14.0) * r4 * (48.0 + 299.0 * r2)
                        + 3840.0 * e(8.0) * (r2 + 14.0 * r4))
                    / d)
                / 16.0;
            RusMoments::new(z, n, n2)
        }
        4 => {
            let d = 268435456.0 + 15.0 * q * (8388608.0 + 2079.0 * q * (32768.0 + 1105.0 * q * (512.0 + 9177.0 * q)));
            let z = d / 268435456.0;
            let n = 0.25
                * (-2.0 + e(-2.0) + 25.0 * e(2.0)
                    + 24.0
                        * e(2.0)
                        * (-268435456.0
                            + 3.0
                                * e(2.0)
                                * r2
                                * (39845888.0 - 31457280.0 * e(4.0)
                                    + 945.0
                                        * q
                                        * (212992.0 - 180224.0 * e(4.0)
                                            + 715.0 * q * (2688.0 - 2176.0 * e(4.0) + 6783.0 * q))))
                        / d);
            let (r4, r6, r8) = (r2 * r2, r2 * r2 * r2, r2 * r2 * r2 * r2);
            let bracket = 805306368.0 - 1073741824.0 * e(2.0) + 536870912.0 * e(4.0)
                + 30450647040.0 * e(10.0) * r2
                + 345392087040.0 * e(16.0) * r4
                + 5116535424000.0 * e(22.0) * r6
                + 30990946036050.0 * e(28.0) * r8
                - 31623414322500.0 * e(30.0) * r8
                + 213458046676875.0 * e(32.0) * r8
                - 54997242300.0 * e(26.0) * r6 * (-128.0 + 47.0 * r2)
                - 100663296.0 * e(8.0) * (-8.0 + 119.0 * r2)
                - 4151347200.0 * e(20.0) * r4 * (-48.0 + 143.0 * r2)
                - 123863040.0 * e(14.0) * r2 * (-64.0 + 501.0 * r2)
                + 8388608.0 * e(6.0) * (-128.0 + 1305.0 * r2)
                + 654729075.0 * e(24.0) * r6 * (-2048.0 + 6057.0 * r2)
                + 207567360.0 * e(18.0) * r4 * (-256.0 + 6627.0 * r2)
                + 3440640.0 * e(12.0) * r2 * (-1024.0 + 54891.0 * r2);
            let n2 = e(-4.0) * bracket / (16.0 * d);
            RusMoments::new(z, n, n2)
        }
        5 => {
            let d = 512000000.0
                + 3.0 * q * (64000000.0 + 693.0 * q * (640000.0 + 663.0 * q * (16000.0 + 9177.0 * q * (40.0 + 783.0 * q))));
            let z = d / 512000000.0;
            let n = 0.25
                * (-2.0 + e(-2.0) + 31.0 * e(2.0)
                    + 30.0
                        * e(2.0)
                        * (-512000000.0
                            + 3.0
                                * e(2.0)
                                * r2
                                * (64000000.0 - 51200000.0 * e(4.0)
                                    + 63.0
                                        * q
                                        * (4864000.0 - 4224000.0 * e(4.0)
                                            + 429.0
                                                * q
                                                * (124800.0
                                                    + 17.0
                                                        * e(4.0)
                                                        * (-6400.0
                                                            + 399.0
                                                                * e(2.0)
                                                                * r2
                                                                * (224.0 - 184.0 * e(4.0) + 621.0 * q))))))
                        / d);
            let (r4, r6, r8, r10) = (r2 * r2, r2 * r2 * r2, r2 * r2 * r2 * r2, r2 * r2 * r2 * r2 * r2);
            let bracket = 1536000000.0 - 2048000000.0 * e(2.0) + 1024000000.0 * e(4.0)
                + 60288000000.0 * e(10.0) * r2
                + 641329920000.0 * e(16.0) * r4
                + 11159340192000.0 * e(22.0) * r6
                + 195306206855760.0 * e(28.0) * r8
                + 1208343310628454.0 * e(34.0) * r10
                - 1228152217360068.0 * e(36.0) * r10
                + 10132255793220561.0 * e(38.0) * r10
                - 768000000.0 * e(8.0) * (-2.0 + 31.0 * r2)
                - 1366131498732.0 * e(32.0) * r8 * (-250.0 + 59.0 * r2)
                - 87995587680.0 * e(26.0) * r6 * (-100.0 + 191.0 * r2)
                - 483840000.0 * e(14.0) * r2 * (-25.0 + 239.0 * r2)
                - 5189184000.0 * e(20.0) * r4 * (-50.0 + 251.0 * r2)
                + 64000000.0 * e(6.0) * (-32.0 + 333.0 * r2)
                + 12649365729.0 * e(30.0) * r8 * (-4000.0 + 9729.0 * r2)
                + 432432000.0 * e(18.0) * r4 * (-160.0 + 10413.0 * r2)
                + 13440000.0 * e(12.0) * r2 * (-400.0 + 34569.0 * r2)
                + 1047566520.0 * e(24.0) * r6 * (-1600.0 + 38601.0 * r2);
            let n2 = e(-4.0) * bracket / (16.0 * d);
            RusMoments::new(z, n, n2)
        }
        n => return Err(Error::UnsupportedAnalyticOrder(n as usize)),
    };
    Ok(m)
}

/// Polynomial with complex coefficients, lowest degree first.
type Poly = Vec<C64>;

fn poly_mul(a: &[C64], b: &[C64]) -> Poly {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_deriv(a: &[C64]) -> Poly {
    if a.len() <= 1 {
        return vec![C64::new(0.0, 0.0)];
    }
    a.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

/// `∫ |R(x)|² g(x)² dx` for the normalized Gaussian `g²` of variance `v`.
fn gaussian_norm(rp: &[C64], v: f64) -> f64 {
    let deg = 2 * rp.len();
    let mut moments = vec![0.0; deg];
    moments[0] = 1.0;
    for m in (2..deg).step_by(2) {
        moments[m] = moments[m - 2] * (m - 1) as f64 * v;
    }
    let mut acc = 0.0;
    for (j, &a) in rp.iter().enumerate() {
        for (k, &b) in rp.iter().enumerate() {
            if (j + k) % 2 == 0 {
                acc += (a.conj() * b).re * moments[j + k];
            }
        }
    }
    acc
}

/// Exact moments for any `N` from the wave function `P(x) g(x)` with
/// `P = (1 + i(r/N)x³)^N`, using Gaussian integrals of polynomials.
pub fn rus_moments_exact(p: &RusParams) -> RusMoments {
    let w = (2.0 * p.s).exp();
    let zero = C64::new(0.0, 0.0);
    let factor = vec![C64::new(1.0, 0.0), zero, zero, C64::new(0.0, p.r / f64::from(p.n_iter))];
    let mut poly: Poly = vec![C64::new(1.0, 0.0)];
    for _ in 0..p.n_iter {
        poly = poly_mul(&poly, &factor);
    }
    // (x² - ∂² - 1)(P g) = R g
    let d1 = poly_deriv(&poly);
    let d2 = poly_deriv(&d1);
    let deg = poly.len() + 2;
    let mut rp = vec![zero; deg];
    for (k, &c) in poly.iter().enumerate() {
        rp[k + 2] += c * (1.0 - 1.0 / (w * w));
        rp[k] += c * (1.0 / w - 1.0);
    }
    for (k, &c) in d1.iter().enumerate() {
        rp[k + 1] += c * (2.0 / w);
    }
    for (k, &c) in d2.iter().enumerate() {
        rp[k] -= c;
    }
    // ⟨x² - ∂² - 1⟩ = ⟨x²⟩ + ‖ψ'‖² - 1 with ψ' = (P' - xP/w) g
    let v = 0.5 * w;
    let z = gaussian_norm(&poly, v);
    let mut xp = vec![zero; poly.len() + 1];
    for (k, &c) in poly.iter().enumerate() {
        xp[k + 1] = c;
    }
    let mut dpsi = xp.iter().map(|&c| -c / w).collect::<Poly>();
    for (k, &c) in d1.iter().enumerate() {
        dpsi[k] += c;
    }
    let x2 = gaussian_norm(&xp, v) / z;
    let p2 = gaussian_norm(&dpsi, v) / z;
    let mean_n = 0.5 * (x2 + p2 - 1.0);
    let mean_n2 = 0.25 * gaussian_norm(&rp, v) / z;
    RusMoments::new(z, mean_n, mean_n2)
}
