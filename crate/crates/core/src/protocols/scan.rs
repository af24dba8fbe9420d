//! Parameter scans producing `F_Q/n` versus `n` and their binned envelopes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytic::{optimal_squeezing, population, qfi_rs, squeezed_vacuum_qfi};
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::protocols::kerr::{kerr_plain_state, KerrGate, KerrPlainParams};
use crate::protocols::rus::{rus_analytic, rus_moments_exact, RusParams};
use crate::protocols::trisqueeze::{trisqueezed_state, TrisqueezeParams};
use crate::C64;

pub const ENVELOPE_BINS: usize = 200;
pub const ENVELOPE_N_MIN: f64 = 0.01;
pub const ENVELOPE_N_MAX: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Protocol {
    Ideal,
    Rus { n_iter: u32 },
    Kerr,
    KerrPlain,
    Trisqueeze,
    SqueezedVacuum,
}

impl Protocol {
    pub fn label(&self) -> String {
        match self {
            Protocol::Ideal => "ideal".into(),
            Protocol::Rus { n_iter } => format!("rus{n_iter}"),
            Protocol::Kerr => "kerr".into(),
            Protocol::KerrPlain => "kerr_plain".into(),
            Protocol::Trisqueeze => "trisqueeze".into(),
            Protocol::SqueezedVacuum => "squeezed_vacuum".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    /// Dense near `start`: `start + (end - start) u²`.
    Quadratic,
}

/// Samples `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub const fn new(start: f64, end: f64, points: usize) -> Self {
        Self { start, end, points, spacing: Spacing::Linear }
    }

    pub const fn quadratic(start: f64, end: f64, points: usize) -> Self {
        Self { start, end, points, spacing: Spacing::Quadratic }
    }

    pub const fn single(value: f64) -> Self {
        Self::new(value, value, 1)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let denom = self.points.saturating_sub(1).max(1) as f64;
        (0..self.points).map(move |i| {
            let u = i as f64 / denom;
            let u = match self.spacing {
                Spacing::Linear => u,
                Spacing::Quadratic => u * u,
            };
            self.start + (self.end - self.start) * u
        })
    }
}

/// Parameter ranges for a scan; each protocol reads the axes it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub r: Axis,
    pub s: Axis,
    /// Kerr-sandwich squeezing gain, with `α = λ³`.
    pub lambda: Axis,
    pub delta: Axis,
    pub kerr_k: Axis,
    pub time: f64,
    pub triplicity: Axis,
    pub dim: usize,
    pub tol: f64,
}

impl ScanGrid {
    pub fn default_for(protocol: Protocol) -> Self {
        let base = Self {
            r: Axis::quadratic(0.0, 0.4, 401),
            s: Axis::new(0.0, 2.0, 401),
            lambda: Axis::new(2.0, 5.0, 4),
            delta: Axis::single(0.0),
            kerr_k: Axis::single(0.0),
            time: 1.0,
            triplicity: Axis::single(0.0),
            dim: 0,
            tol: 1e-8,
        };
        match protocol {
            Protocol::Ideal | Protocol::Rus { .. } | Protocol::SqueezedVacuum => base,
            Protocol::Kerr => Self { r: Axis::new(0.0, 0.3, 31), s: Axis::new(0.0, 0.6, 31), dim: 320, ..base },
            Protocol::KerrPlain => Self {
                r: Axis::single(0.0),
                s: Axis::new(0.0, 1.0, 21),
                delta: Axis::new(-2.0, 2.0, 21),
                kerr_k: Axis::new(0.05, 0.5, 10),
                dim: 160,
                ..base
            },
            Protocol::Trisqueeze => Self { triplicity: Axis::new(0.0, 0.1, 41), dim: 600, ..base },
        }
    }

    fn point_count(&self, protocol: Protocol) -> usize {
        match protocol {
            Protocol::Ideal | Protocol::Rus { .. } => self.r.points * self.s.points,
            Protocol::SqueezedVacuum => self.s.points,
            Protocol::Kerr => self.lambda.points * self.r.points * self.s.points,
            Protocol::KerrPlain => self.delta.points * self.s.points * self.kerr_k.points,
            Protocol::Trisqueeze => self.triplicity.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub n: f64,
    pub f_q: f64,
    pub params: BTreeMap<String, f64>,
    /// Fock dimension of the state; zero for closed-form points.
    pub dim_used: usize,
    /// Population in the top levels of the truncated state.
    pub truncation_tail: f64,
}

impl SensitivityPoint {
    pub fn f_over_n(&self) -> f64 {
        self.f_q / self.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBin {
    pub index: usize,
    pub n_lo: f64,
    pub n_hi: f64,
    /// Population of the point attaining the maximum.
    pub n: f64,
    pub f_over_n: f64,
    pub dim_used: usize,
    pub truncation_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub protocol: Protocol,
    pub points: Vec<SensitivityPoint>,
    pub envelope: Vec<EnvelopeBin>,
    /// Grid points rejected by truncation or convergence checks.
    pub skipped: usize,
}

impl SensitivityReport {
    pub fn bin(&self, index: usize) -> Option<&EnvelopeBin> {
        self.envelope.iter().find(|b| b.index == index)
    }

    /// Running maximum of the envelope from small to large `n`.
    pub fn monotone_envelope(&self) -> Vec<EnvelopeBin> {
        let mut best = f64::NEG_INFINITY;
        self.envelope
            .iter()
            .map(|b| {
                best = best.max(b.f_over_n);
                EnvelopeBin { f_over_n: best, ..b.clone() }
            })
            .collect()
    }
}

/// Log bin of `n` in `[ENVELOPE_N_MIN, ENVELOPE_N_MAX)`.
pub fn envelope_bin_index(n: f64) -> Option<usize> {
    if !(n >= ENVELOPE_N_MIN && n < ENVELOPE_N_MAX) {
        return None;
    }
    let span = (ENVELOPE_N_MAX / ENVELOPE_N_MIN).ln();
    let idx = ((n / ENVELOPE_N_MIN).ln() / span * ENVELOPE_BINS as f64) as usize;
    Some(idx.min(ENVELOPE_BINS - 1))
}

pub fn envelope_bin_edges(index: usize) -> (f64, f64) {
    let ratio = (ENVELOPE_N_MAX / ENVELOPE_N_MIN).powf(1.0 / ENVELOPE_BINS as f64);
    let lo = ENVELOPE_N_MIN * ratio.powi(index as i32);
    (lo, lo * ratio)
}

/// Maximum `F_Q/n` per occupied bin.
pub fn envelope(points: &[SensitivityPoint]) -> Vec<EnvelopeBin> {
    let mut best: BTreeMap<usize, &SensitivityPoint> = BTreeMap::new();
    for p in points {
        let Some(idx) = envelope_bin_index(p.n) else { continue };
        if !p.f_over_n().is_finite() {
            continue;
        }
        let entry = best.entry(idx).or_insert(p);
        if p.f_over_n() > entry.f_over_n() {
            *entry = p;
        }
    }
    best.into_iter()
        .map(|(index, p)| {
            let (n_lo, n_hi) = envelope_bin_edges(index);
            EnvelopeBin {
                index,
                n_lo,
                n_hi,
                n: p.n,
                f_over_n: p.f_over_n(),
                dim_used: p.dim_used,
                truncation_tail: p.truncation_tail,
            }
        })
        .collect()
}

/// `max_s F_Q(n, s)/n` of the ideal cubic phase state.
pub fn ideal_envelope(n: f64) -> Result<f64> {
    Ok(optimal_squeezing(n)?.f_q_max / n)
}

fn point(n: f64, f_q: f64, params: &[(&str, f64)]) -> SensitivityPoint {
    SensitivityPoint {
        n,
        f_q,
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        dim_used: 0,
        truncation_tail: 0.0,
    }
}

/// `⟨n⟩` and `4 Var(n)` of a truncated pure state.
fn fock_point(psi: &FockState, params: &[(&str, f64)]) -> SensitivityPoint {
    let (m1, m2) = psi.number_moments();
    SensitivityPoint {
        dim_used: psi.dim(),
        truncation_tail: psi.tail_mass(),
        ..point(m1, 4.0 * (m2 - m1 * m1).max(0.0), params)
    }
}

pub fn protocol_scan(protocol: Protocol, grid: &ScanGrid) -> Result<SensitivityReport> {
    if grid.point_count(protocol) == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut points = Vec::new();
    let mut skipped = 0usize;
    match protocol {
        Protocol::Ideal => {
            for r in grid.r.values() {
                for s in grid.s.values() {
                    points.push(point(population(r, s), qfi_rs(r, s), &[("r", r), ("s", s)]));
                }
            }
        }
        Protocol::SqueezedVacuum => {
            for s in grid.s.values() {
                let n = s.sinh().powi(2);
                points.push(point(n, squeezed_vacuum_qfi(n), &[("s", s)]));
            }
        }
        Protocol::Rus { n_iter } => {
            for r in grid.r.values() {
                for s in grid.s.values() {
                    let p = RusParams::new(r, s, n_iter)?;
                    let m = if n_iter <= 5 { rus_analytic(&p)? } else { rus_moments_exact(&p) };
                    points.push(point(m.mean_n, m.f_q, &[("r", r), ("s", s)]));
                }
            }
        }
        Protocol::Kerr => {
            for lambda in grid.lambda.values() {
                let alpha = lambda.powi(3);
                let gate = KerrGate::new(lambda, alpha, grid.dim)?;
                for r in grid.r.values() {
                    for s in grid.s.values() {
                        match gate.apply(r, s, grid.tol) {
                            Ok(psi) => {
                                points.push(fock_point(&psi, &[("r", r), ("s", s), ("lambda", lambda), ("alpha", alpha)]))
                            }
                            Err(Error::Truncation { .. }) => skipped += 1,
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Protocol::KerrPlain => {
            for delta in grid.delta.values() {
                for squeeze in grid.s.values() {
                    for kerr_k in grid.kerr_k.values() {
                        let p = KerrPlainParams { delta, squeeze, kerr_k, time: grid.time };
                        match kerr_plain_state(&p, grid.dim, grid.tol) {
                            Ok(psi) => points.push(fock_point(
                                &psi,
                                &[("delta", delta), ("s", squeeze), ("kerr_k", kerr_k), ("time", grid.time)],
                            )),
                            Err(Error::Truncation { .. }) => skipped += 1,
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Protocol::Trisqueeze => {
            for t in grid.triplicity.values() {
                match trisqueezed_state(&TrisqueezeParams::new(C64::new(t, 0.0), grid.dim)?) {
                    Ok(psi) => points.push(fock_point(&psi, &[("t", t)])),
                    Err(Error::NotConverged { .. }) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let envelope = envelope(&points);
    Ok(SensitivityReport { protocol, points, envelope, skipped })
}
