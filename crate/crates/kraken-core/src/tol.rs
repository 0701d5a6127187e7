//! Numerical tolerances used by validity checks, collected in one place.
//!
//! All values are chosen for IEEE-754 double precision. Matrix-level checks
//! are relative to the largest element magnitude where that makes sense;
//! trace and norm checks are absolute because the quantities are normalized
//! to one.

/// Tolerance block for density-matrix validity checks.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Hermiticity: `|rho[i][j] - conj(rho[j][i])|` relative to `max|rho|`.
    pub hermiticity_rel: f64,
    /// Unit trace: `|tr(rho) - 1|`.
    pub trace_abs: f64,
    /// Positivity: smallest eigenvalue must be `>= -psd_min_eig`.
    pub psd_min_eig: f64,
    /// Wavepacket unit norm: `|sum |a|^2 - 1|`.
    pub unit_norm_abs: f64,
    /// Hermiticity level beyond which symmetrization is refused.
    pub hermitize_max_rel: f64,
    /// Eigenpair residual: `||A v - lambda v||` relative to `||A||`.
    pub eigen_residual_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity_rel: 1e-12,
            trace_abs: 1e-10,
            psd_min_eig: 1e-8,
            unit_norm_abs: 1e-10,
            hermitize_max_rel: 1e-6,
            eigen_residual_rel: 1e-9,
        }
    }
}

/// The default tolerance block.
pub const DEFAULT: Tolerances = Tolerances {
    hermiticity_rel: 1e-12,
    trace_abs: 1e-10,
    psd_min_eig: 1e-8,
    unit_norm_abs: 1e-10,
    hermitize_max_rel: 1e-6,
    eigen_residual_rel: 1e-9,
};
