//! Normal-ordered polynomials in the bosonic ladder operators.
//!
//! A [`LadderPoly`] is a finite sum `Σ c_ij (a†)^i a^j`. Products are
//! reordered with the Wick identity
//! `a^j (a†)^k = Σ_m C(j,m) C(k,m) m! (a†)^(k-m) a^(j-m)`, so every
//! polynomial is stored in a unique normal-ordered form.
//!
//! Projecting a polynomial onto the first `dim` Fock levels gives the exact
//! matrix elements of the infinite-dimensional operator restricted to that
//! subspace. This differs from multiplying truncated matrices, which
//! corrupts entries near the cutoff.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LadderPoly {
    terms: BTreeMap<(u32, u32), C64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, t| acc * f64::from(n - t) / f64::from(t + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, t| acc * f64::from(t))
}

impl LadderPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<C64>) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn identity() -> Self {
        Self::constant(1.0)
    }

    /// `c (a†)^i a^j`.
    pub fn monomial(i: u32, j: u32, c: impl Into<C64>) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c.into());
        p
    }

    pub fn a() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn a_dag() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    pub fn number() -> Self {
        Self::monomial(1, 1, 1.0)
    }

    /// `x = (a + a†)/√2`.
    pub fn x() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::monomial(0, 1, h) + Self::monomial(1, 0, h)
    }

    /// `p = (a - a†)/(i√2)`.
    pub fn p() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::monomial(0, 1, C64::new(0.0, -h)) + Self::monomial(1, 0, C64::new(0.0, h))
    }

    /// Rotated quadrature `cos θ x + sin θ p`.
    pub fn quadrature(theta: f64) -> Self {
        Self::x().scale(theta.cos()) + Self::p().scale(theta.sin())
    }

    fn add_term(&mut self, i: u32, j: u32, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry((i, j)).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn coefficient(&self, i: u32, j: u32) -> C64 {
        self.terms.get(&(i, j)).copied().unwrap_or_default()
    }

    /// Highest total degree `i + j` among the terms.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        let mut out = Self::zero();
        for (i, j, v) in self.terms() {
            out.add_term(i, j, v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| &acc * self)
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            out.add_term(j, i, c.conj());
        }
        out
    }

    /// Largest coefficient magnitude of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint())
            .terms()
            .map(|(_, _, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Drops terms whose magnitude is below `cutoff`.
    pub fn chop(&self, cutoff: f64) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            if c.norm() > cutoff {
                out.add_term(i, j, c);
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Visits every nonzero matrix element `(row, col, value)` of the
    /// operator restricted to Fock levels `0..dim`.
    pub fn for_each_element(&self, dim: usize, mut f: impl FnMut(usize, usize, C64)) {
        for (i, j, c) in self.terms() {
            let (i, j) = (i as usize, j as usize);
            for k in j..dim {
                let row = k - j + i;
                if row >= dim {
                    break;
                }
                // <row| (a†)^i a^j |k> = sqrt(k!/(k-j)!) sqrt(row!/(k-j)!)
                let mut amp = 1.0;
                for t in 0..j {
                    amp *= (k - t) as f64;
                }
                for t in 1..=i {
                    amp *= (k - j + t) as f64;
                }
                f(row, k, c * amp.sqrt());
            }
        }
    }

    /// Matrix of the operator restricted to Fock levels `0..dim`.
    pub fn project(&self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        self.for_each_element(dim, |row, col, v| m[(row, col)] += v);
        m
    }

    /// `⟨ψ|P|ψ⟩` for a state supported on the first `ψ.len()` levels,
    /// without forming a matrix.
    pub fn expect_vector(&self, psi: &CVector) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        self.for_each_element(psi.len(), |row, col, v| acc += psi[row].conj() * v * psi[col]);
        acc
    }

    /// `P ψ` restricted to the first `ψ.len()` levels.
    pub fn apply_vector(&self, psi: &CVector) -> CVector {
        let mut out = CVector::zeros(psi.len());
        self.for_each_element(psi.len(), |row, col, v| out[row] += v * psi[col]);
        out
    }

    /// `Tr(ρ P)`.
    pub fn expect_density(&self, rho: &CMatrix) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        self.for_each_element(rho.nrows(), |row, col, v| acc += rho[(col, row)] * v);
        acc
    }

    /// Fully symmetrized monomial `S(x^nx p^np)`: the average over all
    /// orderings of `nx` copies of `x` and `np` copies of `p`.
    pub fn symmetrized(nx: u32, np: u32) -> Self {
        let x = Self::x();
        let p = Self::p();
        let total = nx + np;
        let mut sum = Self::zero();
        let mut count = 0u64;
        // Enumerate distinct words as bitmasks with exactly `np` set bits.
        for mask in 0u32..(1u32 << total) {
            if mask.count_ones() != np {
                continue;
            }
            let word = (0..total).fold(Self::identity(), |acc, bit| {
                if mask & (1 << bit) != 0 {
                    &acc * &p
                } else {
                    &acc * &x
                }
            });
            sum = &sum + &word;
            count += 1;
        }
        debug_assert_eq!(count as f64, binomial(total, np));
        sum.scale(1.0 / count as f64).chop(1e-13)
    }
}

impl Mul for &LadderPoly {
    type Output = LadderPoly;

    fn mul(self, rhs: &LadderPoly) -> LadderPoly {
        let mut out = LadderPoly::zero();
        for (i, j, c1) in self.terms() {
            for (k, l, c2) in rhs.terms() {
                // (a†)^i a^j (a†)^k a^l
                for m in 0..=j.min(k) {
                    let w = binomial(j, m) * binomial(k, m) * factorial(m);
                    out.add_term(i + k - m, j + l - m, c1 * c2 * w);
                }
            }
        }
        out
    }
}

impl Mul for LadderPoly {
    type Output = LadderPoly;
    fn mul(self, rhs: LadderPoly) -> LadderPoly {
        &self * &rhs
    }
}

impl Add for &LadderPoly {
    type Output = LadderPoly;
    fn add(self, rhs: &LadderPoly) -> LadderPoly {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, c);
        }
        out
    }
}

impl Add for LadderPoly {
    type Output = LadderPoly;
    fn add(self, rhs: LadderPoly) -> LadderPoly {
        &self + &rhs
    }
}

impl Sub for &LadderPoly {
    type Output = LadderPoly;
    fn sub(self, rhs: &LadderPoly) -> LadderPoly {
        self + &rhs.scale(-1.0)
    }
}

impl Sub for LadderPoly {
    type Output = LadderPoly;
    fn sub(self, rhs: LadderPoly) -> LadderPoly {
        &self - &rhs
    }
}

impl Neg for LadderPoly {
    type Output = LadderPoly;
    fn neg(self) -> LadderPoly {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn canonical_commutator_is_exact() {
        let c = LadderPoly::x().commutator(&LadderPoly::p());
        assert_eq!(c.terms().count(), 1);
        let v = c.coefficient(0, 0);
        assert!((v - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn number_operator_from_quadratures() {
        // n = (x^2 + p^2 - 1)/2
        let n = (&(&LadderPoly::x().pow(2) + &LadderPoly::p().pow(2)) - &LadderPoly::identity())
            .scale(0.5);
        assert!((&n - &LadderPoly::number()).chop(1e-14).terms().count() == 0);
    }

    #[test]
    fn projection_matches_truncated_products_away_from_edge() {
        let dim = 30;
        let x = LadderPoly::x().project(dim);
        let x3 = LadderPoly::x().pow(3).project(dim);
        let prod = &x * &x * &x;
        let diff = (x3 - prod).view((0, 0), (dim - 3, dim - 3)).into_owned();
        assert!(max_abs(&diff) < 1e-12);
    }

    #[test]
    fn symmetrized_xp_is_half_anticommutator() {
        let xp = &LadderPoly::x() * &LadderPoly::p();
        let px = &LadderPoly::p() * &LadderPoly::x();
        let expected = (&xp + &px).scale(0.5).chop(1e-14);
        let got = LadderPoly::symmetrized(1, 1);
        assert!((&got - &expected).chop(1e-14).terms().count() == 0);
        assert!(got.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn symmetrized_x3p_matches_four_orderings() {
        let x = LadderPoly::x();
        let p = LadderPoly::p();
        let x2 = x.pow(2);
        let x3 = x.pow(3);
        let four = &(&(&(&x3 * &p) + &(&(&x2 * &p) * &x)) + &(&(&x * &p) * &x2)) + &(&p * &x3);
        let expected = four.scale(0.25);
        let got = LadderPoly::symmetrized(3, 1);
        assert!((&got - &expected).chop(1e-12).terms().count() == 0);
    }
}
