//! Analytic reference for the echoed |+> patterns.

/// Probability of reading 0 on an echoed |+> target after `tau_us`, with
/// T1 disabled: `(1 + exp(-tau/T2) * prod cos(2 Omega_i tau)) / 2`, the
/// product running over coupled neighbors that are themselves in
/// superposition. `omegas` are angular couplings in rad/us; neighbors frozen
/// in |0> are refocused by the echo and must be left out.
pub fn closed_form_plus_fidelity(tau_us: f64, t2_us: f64, omegas: &[f64]) -> f64 {
    let osc: f64 = omegas.iter().map(|w| (2.0 * w * tau_us).cos()).product();
    0.5 * (1.0 + (-tau_us / t2_us).exp() * osc)
}
