//! Closed-form sensitivity of cubic phase states under rotations
//! `exp(-iθ n)`.
//!
//! Population `n(r, s) = sinh²s + (27/8) e^{4s} r²` and quantum Fisher
//! information
//!
//! ```text
//! F(r, s) = 486 e^{8s} r⁴ + (9/2 e^{2s} + 27 e^{6s}) r² + cosh 4s - 1
//!         = (128/3) n² + c₁(s) n + c₀(s)
//! ```
//!
//! The optimal squeezing at fixed population solves a quartic in `e^{2s}`,
//! handled with Ferrari's method in complex arithmetic.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Leading coefficient of `F(n, s)` in `n`.
pub const C2: f64 = 128.0 / 3.0;
/// Coefficient of `r²` in the population at `s = 0`.
pub const POPULATION_R2: f64 = 27.0 / 8.0;

type Cx = Complex<f64>;

/// Cubicity and squeezing with the derived population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicParams {
    pub r: f64,
    pub s: f64,
    pub n: f64,
}

impl CubicParams {
    pub fn new(r: f64, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !r.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("need finite r and s >= 0, got r={r}, s={s}")));
        }
        Ok(Self { r, s, n: population(r, s) })
    }

    /// Parameters at population `n` and squeezing `s`, with `r ≥ 0`.
    pub fn from_population(n: f64, s: f64) -> Result<Self> {
        let r = cubicity_for_population(n, s)?;
        Ok(Self { r, s, n })
    }
}

/// Mean photon number `sinh²s + (27/8) e^{4s} r²`.
pub fn population(r: f64, s: f64) -> f64 {
    s.sinh().powi(2) + POPULATION_R2 * (4.0 * s).exp() * r * r
}

/// Non-negative cubicity reaching population `n` at squeezing `s`.
pub fn cubicity_for_population(n: f64, s: f64) -> Result<f64> {
    let floor = s.sinh().powi(2);
    if n < floor || !n.is_finite() {
        return Err(Error::InfeasiblePopulation { n, s, min: floor });
    }
    Ok(((n - floor) / (POPULATION_R2 * (4.0 * s).exp())).sqrt())
}

/// `F(r, s)`.
pub fn qfi_rs(r: f64, s: f64) -> f64 {
    let r2 = r * r;
    486.0 * (8.0 * s).exp() * r2 * r2
        + (4.5 * (2.0 * s).exp() + 27.0 * (6.0 * s).exp()) * r2
        + (4.0 * s).cosh()
        - 1.0
}

/// `a(s) = (4/3) e^{-2s} + 8 e^{2s}`.
fn a_coeff(s: f64) -> f64 {
    4.0 / 3.0 * (-2.0 * s).exp() + 8.0 * (2.0 * s).exp()
}

/// Linear coefficient `c₁(s) = a(s) - 2 c₂ sinh²s`.
pub fn c1(s: f64) -> f64 {
    a_coeff(s) - 2.0 * C2 * s.sinh().powi(2)
}

/// Constant coefficient `c₀(s) = [8 - a(s) + (8 + c₂) sinh²s] sinh²s`.
pub fn c0(s: f64) -> f64 {
    let sh2 = s.sinh().powi(2);
    (8.0 - a_coeff(s) + (8.0 + C2) * sh2) * sh2
}

/// `F(n, s) = c₂ n² + c₁(s) n + c₀(s)`, defined for `n ≥ sinh²s`.
pub fn qfi_ns(n: f64, s: f64) -> Result<f64> {
    let floor = s.sinh().powi(2);
    // Relative slack so that n = sinh²(s) computed by the caller is accepted.
    if n < floor * (1.0 - 1e-14) - 1e-300 {
        return Err(Error::InfeasiblePopulation { n, s, min: floor });
    }
    Ok(C2 * n * n + c1(s) * n + c0(s))
}

fn qfi_ns_unchecked(n: f64, s: f64) -> f64 {
    C2 * n * n + c1(s) * n + c0(s)
}

/// Squeezed-vacuum benchmark `8 n (n + 1)`.
pub fn squeezed_vacuum_qfi(n: f64) -> f64 {
    8.0 * n * (n + 1.0)
}

/// Quantum Cramér-Rao bound `1/√(μ F)`.
pub fn cramer_rao_bound(f_q: f64, mu: u64) -> Result<f64> {
    if !(f_q > 0.0) {
        return Err(Error::InvalidParameter(format!("QFI must be positive, got {f_q}")));
    }
    if mu == 0 {
        return Err(Error::InvalidParameter("number of measurements must be positive".into()));
    }
    Ok(1.0 / (mu as f64 * f_q).sqrt())
}

/// Large-population limits: `s → ½ log(√6/2)` and `|r| → (4/9)√n`.
pub fn asymptotic_optimal() -> (f64, f64) {
    (0.5 * (6f64.sqrt() / 2.0).ln(), 4.0 / 9.0)
}

/// Squeezing in decibels, `10 log₁₀ e^{2s}`.
pub fn squeezing_db(s: f64) -> f64 {
    10.0 * (2.0 * s).exp().log10()
}

/// Displacement-sensing QFI maximized over the displacement direction:
/// four times the largest eigenvalue of the quadrature covariance
/// `diag(e^{2s}/2, e^{-2s}/2 + (9/2) r² e^{4s})`.
pub fn displacement_qfi(r: f64, s: f64) -> f64 {
    let var_x = 0.5 * (2.0 * s).exp();
    let var_p = 0.5 * (-2.0 * s).exp() + 4.5 * r * r * (4.0 * s).exp();
    4.0 * var_x.max(var_p)
}

/// Displacement QFI of the squeezed vacuum at population `n`,
/// `2 e^{2s}` with `e^{s} = √n + √(n+1)`.
pub fn squeezed_vacuum_displacement_qfi(n: f64) -> f64 {
    2.0 * (n.sqrt() + (n + 1.0).sqrt()).powi(2)
}

/// How an [`OptimalPoint`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimumMethod {
    Ferrari,
    /// Golden-section fallback after the quartic route failed its checks.
    Bracketed,
}

/// Maximizer of `F(n, ·)` at fixed population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    pub n: f64,
    pub s_opt: f64,
    pub r_opt_abs: f64,
    pub f_q_max: f64,
    /// `|∂F/∂s|` by central difference, relative to `F`.
    pub stationarity_residual: f64,
    /// Second central difference of `F/n` at `s_opt`.
    pub curvature: f64,
    pub method: OptimumMethod,
}

/// Step used for the finite-difference optimality checks.
pub const FD_STEP: f64 = 1e-6;

/// `∂(F/n)/∂s = e^{-4s} [-34 + 14 e^{8s} + 60 A e^{2s} - 40 A e^{6s}] / (3n)`,
/// with `A = 1 + 2n`.
pub fn qfi_ns_slope(n: f64, s: f64) -> f64 {
    let a = 1.0 + 2.0 * n;
    (-4.0 * s).exp() * (-34.0 + 14.0 * (8.0 * s).exp() + 60.0 * a * (2.0 * s).exp() - 40.0 * a * (6.0 * s).exp())
        / (3.0 * n)
}

/// Depressed-quartic coefficients `(p, q, l)` of the stationarity condition
/// in `y = e^{2s} - 5A/7`.
pub fn depressed_quartic(n: f64) -> (f64, f64, f64) {
    let a = 1.0 + 2.0 * n;
    let p = -150.0 / 49.0 * a * a;
    let q = -1000.0 / 343.0 * a.powi(3) + 30.0 / 7.0 * a;
    let l = -1875.0 / 2401.0 * a.powi(4) + 150.0 / 49.0 * a * a - 17.0 / 7.0;
    (p, q, l)
}

/// Root of the resolvent cubic `2m³ - p m² - 2 l m + (p l - q²/4) = 0`
/// in closed form, `m = m₁ + m₂ + m₃`, using the principal cube root of
/// `S(n)`. Other cube-root branches are tried if the principal one does not
/// satisfy the cubic.
pub fn resolvent_root(n: f64) -> Cx {
    let (p, q, l) = depressed_quartic(n);
    let n2 = n * n;
    let qn = -54781.0 - 24301800.0 * n - 553231800.0 * n2 - 4513860000.0 * n2 * n
        - 10896930000.0 * n2 * n2
        - 10368000000.0 * n2 * n2 * n
        - 3456000000.0 * n2 * n2 * n2;
    let s_n = Cx::new(-1125.0 - 4500.0 * n - 4500.0 * n2, 0.0) + Cx::new(3f64.sqrt(), 0.0) * Cx::new(qn, 0.0).sqrt();
    let m1 = -25.0 / 49.0 * (1.0 + 4.0 * n + 4.0 * n2);
    let k2 = -7.0 * (-372.0 / 49.0 - 7200.0 * n / 49.0 - 7200.0 * n2 / 49.0) / 6f64.powf(4.0 / 3.0);
    let k3 = 1.0 / (7.0 * 6f64.powf(2.0 / 3.0));
    let cubic = |m: Cx| m * m * m * 2.0 - m * m * p - m * 2.0 * l + (p * l - q * q / 4.0);
    let root = s_n.powf(1.0 / 3.0);
    let omega = Cx::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let scale = m1.abs().max(1.0).powi(3);
    let mut best = None::<(f64, Cx)>;
    for k in 0..3 {
        let cr = root * omega.powu(k);
        let m = Cx::new(m1, 0.0) + cr.inv() * k2 + cr * k3;
        let res = cubic(m).norm() / scale;
        if best.map_or(true, |(b, _)| res < b) {
            best = Some((res, m));
        }
        if res < 1e-10 && m.im.abs() < 1e-9 * m.norm().max(1.0) {
            return m;
        }
    }
    best.expect("three branches evaluated").1
}

/// The four roots `y` of the depressed quartic via
/// `(y² + m)² = (C y + D)²`, `C = √(2m - p)`, `D = -q/(2C)`.
pub fn quartic_roots(n: f64) -> [Cx; 4] {
    let (p, q, _) = depressed_quartic(n);
    let m = resolvent_root(n);
    let c = (m * 2.0 - p).sqrt();
    let d = -q / (c * 2.0);
    let disc1 = (c * c - (m - d) * 4.0).sqrt();
    let disc2 = (c * c - (m + d) * 4.0).sqrt();
    [
        (c + disc1) * 0.5,
        (c - disc1) * 0.5,
        (-c + disc2) * 0.5,
        (-c - disc2) * 0.5,
    ]
}

fn finish(n: f64, s: f64, method: OptimumMethod) -> OptimalPoint {
    let f = qfi_ns_unchecked(n, s);
    let h = FD_STEP;
    let fp = qfi_ns_unchecked(n, s + h);
    let fm = qfi_ns_unchecked(n, s - h);
    OptimalPoint {
        n,
        s_opt: s,
        r_opt_abs: cubicity_for_population(n, s).unwrap_or(0.0),
        f_q_max: f,
        stationarity_residual: ((fp - fm) / (2.0 * h)).abs() / f,
        curvature: (fp - 2.0 * f + fm) / (h * h) / n,
        method,
    }
}

fn accept(pt: &OptimalPoint) -> bool {
    pt.stationarity_residual < 1e-6 && pt.curvature < 0.0 && pt.s_opt >= 0.0
}

/// Golden-section maximization of `F(n, ·)` on `[lo, hi]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Optimal squeezing at population `n` by Ferrari's method, falling back to
/// a bracketed search when no quartic root passes the optimality checks.
pub fn optimal_squeezing(n: f64) -> Result<OptimalPoint> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!("population must be positive, got {n}")));
    }
    match optimal_squeezing_ferrari(n) {
        Ok(pt) => Ok(pt),
        Err(_) => optimal_squeezing_bracketed(n),
    }
}

/// Ferrari route only; fails with [`Error::NoAdmissibleRoot`] carrying the
/// four candidate roots.
pub fn optimal_squeezing_ferrari(n: f64) -> Result<OptimalPoint> {
    let a = 1.0 + 2.0 * n;
    let shift = 5.0 * a / 7.0;
    let roots = quartic_roots(n);
    let s_max = n.sqrt().asinh();
    let mut best: Option<OptimalPoint> = None;
    for y in roots {
        let u = y + shift;
        if u.im.abs() > 1e-9 * u.re.abs().max(1.0) || u.re <= 1.0 {
            continue;
        }
        let s = 0.5 * u.re.ln();
        if s > s_max {
            continue;
        }
        let pt = finish(n, s, OptimumMethod::Ferrari);
        if accept(&pt) && best.map_or(true, |b| pt.f_q_max > b.f_q_max) {
            best = Some(pt);
        }
    }
    best.ok_or_else(|| Error::NoAdmissibleRoot {
        roots: roots.iter().map(|z| (z.re, z.im)).collect(),
    })
}

/// Golden-section route, flagged as [`OptimumMethod::Bracketed`].
pub fn optimal_squeezing_bracketed(n: f64) -> Result<OptimalPoint> {
    let s_max = n.sqrt().asinh();
    let s0 = golden_section_max(|s| qfi_ns_unchecked(n, s), 0.0, s_max, 1e-9);
    // the maximum is flat, so refine on the sign change of the slope
    let mut h = 1e-6;
    let (mut lo, mut hi) = ((s0 - h).max(0.0), (s0 + h).min(s_max));
    while !(qfi_ns_slope(n, lo) > 0.0 && qfi_ns_slope(n, hi) < 0.0) && h < 1.0 {
        h *= 4.0;
        (lo, hi) = ((s0 - h).max(0.0), (s0 + h).min(s_max));
    }
    let s = if qfi_ns_slope(n, lo) > 0.0 && qfi_ns_slope(n, hi) < 0.0 {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if qfi_ns_slope(n, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    } else {
        s0
    };
    Ok(finish(n, s, OptimumMethod::Bracketed))
}
