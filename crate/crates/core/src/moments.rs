//! Method of moments for phase estimation.
//!
//! For a set of observables `X₁..X_l` and rotations generated by `n`, the
//! best linear combination `M = Σ mᵢ Xᵢ` reaches
//! `χ⁻² = C Γ⁻¹ Cᵀ`, where `Γ` is the symmetrized covariance matrix and
//! `Cⱼ = -i⟨[n, Xⱼ]⟩`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::analytic::population;
use crate::error::{Error, Result};
use crate::fock::{FockState, LadderPoly, OperatorMatrix, QuantumState};
use crate::C64;

/// Largest imaginary part tolerated in a moment that must be real.
pub const IMAGINARY_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff of the covariance pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Number of members of the pruned set at each order.
pub const fn set_size(order: usize) -> usize {
    match order {
        1 => 1,
        2 => 2,
        3 => 4,
        _ => 6,
    }
}

/// An ordered list of Hermitian observables at a fixed truncation.
///
/// Members are kept as exact ladder polynomials; dense matrices are built on
/// request since they dominate memory at large dimension.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    order: usize,
    dim: usize,
    labels: Vec<String>,
    polys: Vec<LadderPoly>,
}

fn pruned_members() -> [(&'static str, LadderPoly); 6] {
    [
        ("x", LadderPoly::x()),
        ("S(xp)", LadderPoly::symmetrized(1, 1)),
        ("x^3", LadderPoly::symmetrized(3, 0)),
        ("S(xp^2)", LadderPoly::symmetrized(1, 2)),
        ("S(x^3p)", LadderPoly::symmetrized(3, 1)),
        ("S(xp^3)", LadderPoly::symmetrized(1, 3)),
    ]
}

/// Pruned set of order `k`: `{x}`, `{x, S(xp)}`, `{.., x³, S(xp²)}`,
/// `{.., S(x³p), S(xp³)}`.
pub fn build_observable_set(k: usize, dim: usize) -> Result<ObservableSet> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidOrder(k));
    }
    let members = pruned_members().into_iter().take(set_size(k));
    let (labels, polys) = members.map(|(l, p)| (l.to_string(), p)).unzip();
    ObservableSet::from_polys(k, dim, labels, polys)
}

impl ObservableSet {
    /// Arbitrary set of Hermitian polynomials.
    pub fn from_polys(order: usize, dim: usize, labels: Vec<String>, polys: Vec<LadderPoly>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, min: 2 });
        }
        for p in &polys {
            let d = p.hermiticity_defect();
            if d > 1e-12 {
                return Err(Error::NotHermitian { deviation: d });
            }
        }
        assert_eq!(labels.len(), polys.len(), "one label per observable");
        Ok(Self { order, dim, labels, polys })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn polys(&self) -> &[LadderPoly] {
        &self.polys
    }

    /// Same observables at another truncation.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::from_polys(self.order, dim, self.labels.clone(), self.polys.clone())
    }

    /// Dense Hermitian matrices of the members.
    pub fn matrices(&self) -> Result<Vec<OperatorMatrix>> {
        self.polys.iter().map(|p| OperatorMatrix::hermitian(p.project(self.dim))).collect()
    }

    /// `Σ mᵢ Xᵢ`.
    pub fn combination(&self, m: &[f64]) -> Result<LadderPoly> {
        if m.len() != self.len() {
            return Err(Error::DimensionMismatch { left: m.len(), right: self.len() });
        }
        Ok(self.polys.iter().zip(m).fold(LadderPoly::zero(), |acc, (p, &c)| &acc + &p.scale(c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSource {
    Analytic,
    Numeric,
}

/// Covariance matrix and commutator vector of an observable set.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentData {
    pub gamma: DMatrix<f64>,
    pub c_vec: DVector<f64>,
    pub k: usize,
    pub source: MomentSource,
}

impl MomentData {
    /// Checks symmetry and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let l = self.c_vec.len();
        if self.gamma.nrows() != l || self.gamma.ncols() != l {
            return Err(Error::DimensionMismatch { left: self.gamma.nrows(), right: l });
        }
        let asym = (&self.gamma - self.gamma.transpose()).abs().max();
        if asym > 1e-10 * self.gamma.abs().max().max(1.0) {
            return Err(Error::InvalidState(format!("covariance asymmetric by {asym:e}")));
        }
        let min = SymmetricEigen::new(self.gamma.clone()).eigenvalues.min();
        if min < -1e-9 * self.gamma.abs().max().max(1.0) {
            return Err(Error::InvalidState(format!("covariance has eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Leading `size × size` block.
    pub fn truncated(&self, size: usize, k: usize) -> Self {
        Self {
            gamma: self.gamma.view((0, 0), (size, size)).into_owned(),
            c_vec: self.c_vec.rows(0, size).into_owned(),
            k,
            source: self.source,
        }
    }
}

fn cov_table(r: f64, s: f64) -> [[f64; 6]; 6] {
    let e = |k: f64| (k * s).exp();
    let r2e6 = r * r * e(6.0);
    let mut g = [[0.0; 6]; 6];
    g[0][0] = 0.5 * e(2.0);
    g[0][1] = 9.0 / 4.0 * r * e(4.0);
    g[0][2] = 0.75 * e(4.0);
    g[0][3] = (135.0 * r2e6 + 2.0) / 8.0;
    g[0][4] = 45.0 / 8.0 * r * e(6.0);
    g[0][5] = 21.0 / 16.0 * r * e(2.0) * (135.0 * r2e6 + 2.0);
    g[1][1] = (135.0 * r2e6 + 4.0) / 8.0;
    g[1][2] = 45.0 / 8.0 * r * e(6.0);
    g[1][3] = 27.0 / 16.0 * r * e(2.0) * (105.0 * r2e6 + 2.0);
    g[1][4] = 3.0 / 16.0 * e(2.0) * (315.0 * r2e6 + 4.0);
    g[1][5] = 3.0 / 32.0 * e(-2.0) * (45.0 * r2e6 * (567.0 * r2e6 + 10.0) + 8.0);
    g[2][2] = 15.0 / 8.0 * e(6.0);
    g[2][3] = 3.0 / 16.0 * e(2.0) * (315.0 * r2e6 - 2.0);
    g[2][4] = 315.0 / 16.0 * r * e(8.0);
    g[2][5] = 45.0 / 32.0 * r * e(4.0) * (567.0 * r2e6 - 2.0);
    g[3][3] = e(-2.0) / 32.0 * (27.0 * r2e6 * (2835.0 * r2e6 + 52.0) + 28.0);
    g[3][4] = 9.0 / 32.0 * r * e(4.0) * (2835.0 * r2e6 + 26.0);
    g[3][5] = 3.0 / 64.0 * r * (945.0 * r2e6 * (891.0 * r2e6 + 16.0) + 124.0);
    g[4][4] = 21.0 / 32.0 * e(4.0) * (405.0 * r2e6 + 4.0);
    g[4][5] = 3.0 / 64.0 * (45.0 * r2e6 * (6237.0 * r2e6 + 50.0) - 8.0);
    g[5][5] = 3.0 / 128.0 * e(-4.0) * (15.0 * r2e6 * (2457.0 * r2e6 * (891.0 * r2e6 + 16.0) + 356.0) + 112.0);
    for i in 0..6 {
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }
    g
}

fn commutator_table(r: f64, s: f64) -> [f64; 6] {
    let e = |k: f64| (k * s).exp();
    let r2e6 = r * r * e(6.0);
    [
        -1.5 * r * e(2.0),
        -27.0 / 4.0 * r * r * e(4.0) + (2.0 * s).sinh(),
        -27.0 / 4.0 * r * e(4.0),
        -3.0 / 8.0 * r * (135.0 * r2e6 - 12.0 * e(4.0) + 2.0),
        -3.0 / 8.0 * (135.0 * r2e6 - 2.0 * e(4.0) + 2.0),
        -3.0 / 16.0 * e(-4.0) * (15.0 * r2e6 * (189.0 * r2e6 - 18.0 * e(4.0) + 4.0) - 4.0 * e(4.0) + 4.0),
    ]
}

/// Closed-form moments of the cubic phase state `exp(irx³)S(s)|0⟩` for the
/// pruned set of order `k`.
pub fn analytic_moments(r: f64, s: f64, k: usize) -> Result<MomentData> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidOrder(k));
    }
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("squeezing must be non-negative, got {s}")));
    }
    let g = cov_table(r, s);
    let c = commutator_table(r, s);
    let l = set_size(k);
    Ok(MomentData {
        gamma: DMatrix::from_fn(l, l, |i, j| g[i][j]),
        c_vec: DVector::from_fn(l, |i, _| c[i]),
        k,
        source: MomentSource::Analytic,
    })
}

fn real_part(z: C64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOL * z.re.abs().max(1.0) {
        let _ = what;
        return Err(Error::ImaginaryResidue { residue: z.im });
    }
    Ok(z.re)
}

/// Moments of an arbitrary state from exact polynomial expectation values.
pub fn numeric_moments<S: QuantumState + ?Sized>(state: &S, set: &ObservableSet) -> Result<MomentData> {
    if state.dim() != set.dim() {
        return Err(Error::DimensionMismatch { left: state.dim(), right: set.dim() });
    }
    let l = set.len();
    let polys = set.polys();
    let n = LadderPoly::number();
    let mut mean = Vec::with_capacity(l);
    let mut c_vec = DVector::zeros(l);
    for (j, x) in polys.iter().enumerate() {
        mean.push(real_part(state.expect_poly(x), "mean")?);
        let comm = n.commutator(x).scale(C64::new(0.0, -1.0));
        c_vec[j] = real_part(state.expect_poly(&comm), "commutator")?;
    }
    let mut gamma = DMatrix::zeros(l, l);
    for i in 0..l {
        for j in i..l {
            let anti = &(&polys[i] * &polys[j]) + &(&polys[j] * &polys[i]);
            let v = 0.5 * real_part(state.expect_poly(&anti), "covariance")? - mean[i] * mean[j];
            gamma[(i, j)] = v;
            gamma[(j, i)] = v;
        }
    }
    Ok(MomentData { gamma, c_vec, k: set.order(), source: MomentSource::Numeric })
}

/// Optimal moment-method sensitivity and the measurement reaching it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2 {
    pub chi2_inv: f64,
    /// Unit-norm coefficients with `C·m ≥ 0`; all zero when `C = 0`.
    pub m_opt: Vec<f64>,
}

/// `χ⁻² = C Γ⁺ Cᵀ` with an eigenvalue-cutoff pseudo-inverse.
///
/// `Γ` is first equilibrated to unit diagonal, which makes the result exactly
/// invariant under rescaling single observables and tames the spread of
/// scales between `x` and fourth-order members.
///
/// Fails when the commutator vector has weight on a direction of vanishing
/// variance, in which case the ratio is unbounded.
pub fn chi2_inv(md: &MomentData) -> Result<Chi2> {
    let l = md.c_vec.len();
    let d: Vec<f64> = (0..l)
        .map(|i| {
            let v = md.gamma[(i, i)];
            if v > 0.0 { v.sqrt() } else { 1.0 }
        })
        .collect();
    let gamma = DMatrix::from_fn(l, l, |i, j| md.gamma[(i, j)] / (d[i] * d[j]));
    let c_vec = DVector::from_fn(l, |i, _| md.c_vec[i] / d[i]);
    let eig = SymmetricEigen::new(gamma);
    let lmax = eig.eigenvalues.max();
    let c_norm = c_vec.norm();
    if !(lmax > 0.0) {
        if c_norm == 0.0 {
            return Ok(Chi2 { chi2_inv: 0.0, m_opt: vec![0.0; l] });
        }
        return Err(Error::SingularCovariance { condition: f64::INFINITY });
    }
    let cut = PINV_CUTOFF * lmax;
    let mut m = DVector::zeros(l);
    let mut chi = 0.0;
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(idx);
        let proj = v.dot(&c_vec);
        if lambda > cut {
            chi += proj * proj / lambda;
            m += v * (proj / lambda);
        } else if proj.abs() > 1e-8 * c_norm.max(1e-300) {
            let condition = if lambda.abs() > 0.0 { lmax / lambda.abs() } else { f64::INFINITY };
            return Err(Error::SingularCovariance { condition });
        }
    }
    // back to the original observables
    for i in 0..l {
        m[i] /= d[i];
    }
    let norm = m.norm();
    let m_opt = if norm > 0.0 {
        let sign = if md.c_vec.dot(&m) < 0.0 { -1.0 } else { 1.0 };
        (m * (sign / norm)).iter().copied().collect()
    } else {
        vec![0.0; l]
    };
    Ok(Chi2 { chi2_inv: chi, m_opt })
}

/// `|C·m|² / (mᵀ Γ m)` for a given measurement.
pub fn chi2_of(md: &MomentData, m: &[f64]) -> f64 {
    let m = DVector::from_column_slice(m);
    let num = md.c_vec.dot(&m).powi(2);
    num / (m.transpose() * &md.gamma * &m)[(0, 0)]
}

/// Closed-form `χ⁻²` of order `k` for the pure cubic phase state.
pub fn chi2_closed_form(r: f64, s: f64, k: usize) -> Result<f64> {
    let e = |k: f64| (k * s).exp();
    let r2 = r * r;
    Ok(match k {
        1 => 4.5 * r2 * e(2.0),
        2 => 4.5 * r2 * e(2.0) + 4.0 * (2.0 * s).sinh().powi(2) / (27.0 * r2 * e(6.0) + 2.0),
        3 => {
            (9.0 * r2 * e(2.0) * (29.0 - 192.0 / (45.0 * r2 * e(6.0) + 8.0))
                + 3645.0 * r2 * r2 * e(8.0)
                + 270.0 * r2 * e(6.0)
                + 5.0 * e(4.0)
                + 5.0 * e(-4.0)
                - 10.0)
                / 10.0
        }
        4 => 0.5 * (-2.0 + e(-4.0) + e(4.0) + 9.0 * e(2.0) * r2 + 54.0 * e(6.0) * r2 + 972.0 * e(8.0) * r2 * r2),
        _ => return Err(Error::InvalidOrder(k)),
    })
}

/// Normalized coefficient `ξ⁻² = χ⁻²/n` of the cubic phase state from the
/// analytic moment tables.
pub fn xi2_inv(r: f64, s: f64, k: usize) -> Result<f64> {
    let n = population(r, s);
    if !(n > 0.0) {
        return Err(Error::ZeroPopulation);
    }
    Ok(chi2_inv(&analytic_moments(r, s, k)?)?.chi2_inv / n)
}

/// `ξ⁻²` of an arbitrary state with the given observable set.
pub fn xi2_inv_numeric<S: QuantumState + ?Sized>(state: &S, set: &ObservableSet) -> Result<f64> {
    let n = state.expect_poly(&LadderPoly::number()).re;
    if !(n > 0.0) {
        return Err(Error::ZeroPopulation);
    }
    Ok(chi2_inv(&numeric_moments(state, set)?)?.chi2_inv / n)
}

/// Finite-difference step of [`estimator_bias_check`].
pub const BIAS_STEP: f64 = 1e-4;

/// Local unbiasedness data of `M = Σ mᵢXᵢ` at `θ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasCheck {
    pub mean_at_zero: f64,
    /// `∂⟨M⟩/∂θ` under `exp(-iθn)`; equals `-C·m`.
    pub derivative: f64,
    /// Set when `|derivative| < 1e-12`, i.e. the estimator is unusable.
    pub degenerate: bool,
}

/// `⟨M(θ)⟩` for the rotated state `exp(-iθn)|ψ⟩`.
pub fn rotated_mean(state: &FockState, m_poly: &LadderPoly, theta: f64) -> f64 {
    let rotated = state
        .amplitudes()
        .map_with_location(|k, _, a| a * C64::from_polar(1.0, -theta * k as f64));
    m_poly.expect_vector(&rotated).re
}

pub fn estimator_bias_check(state: &FockState, set: &ObservableSet, m: &[f64]) -> Result<BiasCheck> {
    if state.dim() != set.dim() {
        return Err(Error::DimensionMismatch { left: state.dim(), right: set.dim() });
    }
    let mp = set.combination(m)?;
    let mean_at_zero = rotated_mean(state, &mp, 0.0);
    let h = BIAS_STEP;
    let derivative = (rotated_mean(state, &mp, h) - rotated_mean(state, &mp, -h)) / (2.0 * h);
    Ok(BiasCheck { mean_at_zero, derivative, degenerate: derivative.abs() < 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_ladder, squeezed_vacuum};

    #[test]
    fn set_sizes() {
        for (k, size) in [(1, 1), (2, 2), (3, 4), (4, 6)] {
            assert_eq!(build_observable_set(k, 10).unwrap().len(), size);
        }
        assert!(matches!(build_observable_set(5, 10), Err(Error::InvalidOrder(5))));
        assert!(matches!(build_observable_set(0, 10), Err(Error::InvalidOrder(0))));
    }

    #[test]
    fn x3p_member_matches_matrix_orderings() {
        let dim = 40;
        let set = build_observable_set(4, dim + 8).unwrap();
        let big = make_ladder(dim + 8).unwrap();
        let (x, p) = (big.x.matrix(), big.p.matrix());
        let want = (x * x * x * p + x * x * p * x + x * p * x * x + p * x * x * x) / C64::new(4.0, 0.0);
        let got = set.matrices().unwrap()[4].matrix().clone();
        let diff = (got.view((0, 0), (dim, dim)) - want.view((0, 0), (dim, dim))).camax();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn vacuum_first_order() {
        let vac = FockState::vacuum(8).unwrap();
        let md = numeric_moments(&vac, &build_observable_set(1, 8).unwrap()).unwrap();
        assert!((md.gamma[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(md.c_vec[0], 0.0);
    }

    #[test]
    fn first_commutator_example() {
        let md = analytic_moments(0.2, 0.1, 1).unwrap();
        assert!((md.c_vec[0] + 0.366421).abs() < 1e-5, "{}", md.c_vec[0]);
        assert!((chi2_inv(&md).unwrap().chi2_inv - 0.219853).abs() < 1e-5);
    }

    #[test]
    fn squeezed_vacuum_second_order() {
        let s: f64 = 0.3;
        let md = analytic_moments(0.0, s, 2).unwrap();
        let chi = chi2_inv(&md).unwrap();
        assert!((chi.chi2_inv - 2.0 * (2.0 * s).sinh().powi(2)).abs() < 1e-12);
        let psi = squeezed_vacuum(s, 80).unwrap();
        let num = numeric_moments(&psi, &build_observable_set(2, 80).unwrap()).unwrap();
        assert!((chi2_inv(&num).unwrap().chi2_inv - chi.chi2_inv).abs() < 1e-10);
    }

    #[test]
    fn pseudo_inverse_handles_zero_rows() {
        let md = MomentData {
            gamma: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            c_vec: DVector::from_vec(vec![2.0, 0.0]),
            k: 2,
            source: MomentSource::Analytic,
        };
        let chi = chi2_inv(&md).unwrap();
        assert!((chi.chi2_inv - 4.0).abs() < 1e-15);
        assert_eq!(chi.m_opt, vec![1.0, 0.0]);
        let bad = MomentData { c_vec: DVector::from_vec(vec![0.0, 1.0]), ..md };
        assert!(matches!(chi2_inv(&bad), Err(Error::SingularCovariance { .. })));
    }

    #[test]
    fn zero_population() {
        assert!(matches!(xi2_inv(0.0, 0.0, 2), Err(Error::ZeroPopulation)));
    }
}
