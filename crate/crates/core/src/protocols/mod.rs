//! Approximate preparation schemes and sensitivity scans.

pub mod rus;

pub use rus::{rus_analytic, rus_moments_exact, rus_state_numeric, rus_state_unnormalized, RusMoments, RusParams};
pub mod kerr;

pub use kerr::{
    kerr_effective_state, kerr_hamiltonian, kerr_plain_evolved, kerr_plain_hamiltonian, kerr_plain_state, kerr_unit_generator, kerr_unitary,
    KerrGate, KerrParams, KerrPlainParams, KERR_DEFAULT_DIM,
};
pub mod trisqueeze;

pub use trisqueeze::{trisqueeze_moments, trisqueezed_state, TrisqueezeParams, TRISQUEEZE_CONVERGENCE_TOL};
pub mod scan;

pub use scan::{
    envelope, envelope_bin_edges, envelope_bin_index, ideal_envelope, protocol_scan, Axis, Spacing, EnvelopeBin, Protocol,
    ScanGrid, SensitivityPoint, SensitivityReport, ENVELOPE_BINS, ENVELOPE_N_MAX, ENVELOPE_N_MIN,
};
