//! Wigner function from displaced-parity matrix elements.
//!
//! `W(x, p) = (1/π) Tr[ρ D(β) Π D†(β)]` with `β = (x + ip)/√2`. The matrix
//! elements `⟨m|D Π D†|n⟩` are associated Laguerre polynomials in `4|β|²`;
//! each superdiagonal of `ρ` is summed with a Clenshaw recurrence and the
//! diagonals are combined by Horner's rule, so a grid point costs `O(dim²)`.

use nalgebra::DMatrix;

use crate::fock::QuantumState;
use crate::{CMatrix, C64};

/// `Σ_n c_n (-1)^n sqrt(L! n!/(L+n)!) L_n^{(L)}(x)` by Clenshaw summation.
fn laguerre_series(order: usize, x: f64, c: &[C64]) -> C64 {
    let l = order as f64;
    match c.len() {
        0 => C64::new(0.0, 0.0),
        1 => c[0],
        _ => {
            let mut k = c.len() as f64;
            let mut y0 = c[c.len() - 2];
            let mut y1 = c[c.len() - 1];
            for i in 3..=c.len() {
                k -= 1.0;
                let a = ((k - 1.0) * (l + k - 1.0) / ((l + k) * k)).sqrt();
                let b = ((l + 2.0 * k - 1.0) - x) / ((l + k) * k).sqrt();
                let t = c[c.len() - i] - y1 * a;
                y1 = y0 - y1 * b;
                y0 = t;
            }
            y0 - y1 * ((l + 1.0) - x) / (l + 1.0).sqrt()
        }
    }
}

fn wigner_at(rho: &CMatrix, x: f64, p: f64, diag: &mut Vec<C64>) -> f64 {
    let dim = rho.nrows();
    // A = 2β with β = (x + ip)/√2.
    let a = C64::new(x, p) * std::f64::consts::SQRT_2;
    let b = a.norm_sqr();
    let mut w = rho[(0, dim - 1)] * 2.0;
    if dim == 1 {
        w = rho[(0, 0)];
    }
    let mut order = dim - 1;
    while order > 0 {
        order -= 1;
        diag.clear();
        let weight = if order == 0 { 1.0 } else { 2.0 };
        diag.extend((0..dim - order).map(|n| rho[(n, n + order)] * weight));
        w = laguerre_series(order, b, diag) + w * a / ((order + 1) as f64).sqrt();
    }
    w.re * (-0.5 * b).exp() / std::f64::consts::PI
}

/// Wigner function at a single phase-space point.
pub fn wigner_point<S: QuantumState>(state: &S, x: f64, p: f64) -> f64 {
    let rho = state.as_density();
    wigner_at(rho.matrix(), x, p, &mut Vec::new())
}

/// Wigner function on the tensor grid `xs × ps`; entry `(i, j)` is
/// `W(xs[i], ps[j])`.
pub fn wigner_grid<S: QuantumState>(state: &S, xs: &[f64], ps: &[f64]) -> DMatrix<f64> {
    let rho = state.as_density();
    let mut diag = Vec::new();
    DMatrix::from_fn(xs.len(), ps.len(), |i, j| wigner_at(rho.matrix(), xs[i], ps[j], &mut diag))
}

/// `n` evenly spaced points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cubic_state, FockState};
    use std::f64::consts::PI;

    #[test]
    fn vacuum_peak() {
        let vac = FockState::vacuum(8).unwrap();
        assert!((wigner_point(&vac, 0.0, 0.0) - 1.0 / PI).abs() < 1e-14);
        // Gaussian: W = exp(-(x²+p²))/π
        let w = wigner_point(&vac, 0.7, -0.4);
        assert!((w - (-(0.49 + 0.16f64)).exp() / PI).abs() < 1e-14);
    }

    #[test]
    fn first_fock_state_is_negative_at_origin() {
        let one = FockState::basis(1, 8).unwrap();
        assert!((wigner_point(&one, 0.0, 0.0) + 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn coherent_state_peak_location() {
        // |α⟩ sits at x = √2 Re α, p = √2 Im α.
        let alpha = C64::new(0.6, -0.3);
        let psi = FockState::coherent(alpha, 40).unwrap();
        let (x0, p0) = (2f64.sqrt() * 0.6, -(2f64.sqrt()) * 0.3);
        assert!((wigner_point(&psi, x0, p0) - 1.0 / PI).abs() < 1e-10);
        assert!(wigner_point(&psi, -x0, -p0) < 0.05);
    }

    #[test]
    fn grid_integrates_to_one() {
        let psi = FockState::basis(2, 10).unwrap();
        let xs = linspace(-6.0, 6.0, 121);
        let w = wigner_grid(&psi, &xs, &xs);
        let h = xs[1] - xs[0];
        let total: f64 = w.iter().sum::<f64>() * h * h;
        assert!((total - 1.0).abs() < 1e-3);
    }

    #[test]
    fn cubic_marginal_reproduces_squeezed_density() {
        let (r, s) = (0.2, 0.1);
        let psi = cubic_state(r, s, 160, 1e-8).unwrap();
        let xs = [-1.2, -0.5, 0.0, 0.4, 1.0];
        let ps = linspace(-8.0, 8.0, 801);
        let h = ps[1] - ps[0];
        let w = wigner_grid(&psi, &xs, &ps);
        for (i, &x) in xs.iter().enumerate() {
            let marginal: f64 = w.row(i).iter().sum::<f64>() * h;
            // |ψ(x)|² of the squeezed vacuum; the cubic phase drops out.
            let want = (-x * x / (2.0 * s).exp()).exp() / (PI.sqrt() * s.exp());
            assert!((marginal - want).abs() < 1e-3, "x={x}: {marginal} vs {want}");
        }
    }
}
