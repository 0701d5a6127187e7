//! Ground-truth target models: ionizing pulse, bichromatic probe and the
//! helium/argon photoelectron states they produce.

use serde::{Deserialize, Serialize};

use crate::density::{DensityMatrix, Wavepacket, HBAR_EV_FS};
use crate::error::{Error, Result};
use crate::grid::EnergyGrid;
use crate::response::FWHM_PER_SIGMA;

/// Ionizing pulse: Gaussian spectrum with an optional quadratic spectral
/// phase (chirp).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XuvPulse {
    /// Central photon energy (eV).
    pub central_photon_energy: f64,
    /// FWHM of the spectral intensity profile (eV).
    pub intensity_fwhm: f64,
    /// Group-delay dispersion (fs²), applied as
    /// `exp(i (gdd/2) ((eps - center)/hbar)^2)`.
    pub gdd: f64,
}

impl XuvPulse {
    pub fn new(central_photon_energy: f64, intensity_fwhm: f64, gdd: f64) -> Result<Self> {
        if intensity_fwhm <= 0.0 {
            return Err(Error::Config(format!(
                "intensity_fwhm must be > 0, got {intensity_fwhm}"
            )));
        }
        Ok(XuvPulse { central_photon_energy, intensity_fwhm, gdd })
    }

    /// Intensity standard deviation of the spectrum (eV).
    pub fn sigma_e(&self) -> f64 {
        self.intensity_fwhm / FWHM_PER_SIGMA
    }
}

/// The two phase-locked probe components. `omega1_energy` is fixed,
/// `omega2_energy` is tuned; the beat `omega1 - omega2` must be >= 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbePair {
    pub omega1_energy: f64,
    pub omega2_energy: f64,
    /// Field-amplitude ratio of component 2 to component 1.
    pub relative_amplitude: f64,
}

impl ProbePair {
    pub fn new(omega1_energy: f64, omega2_energy: f64, relative_amplitude: f64) -> Result<Self> {
        if omega1_energy <= 0.0 {
            return Err(Error::Config(format!(
                "omega1_energy must be > 0, got {omega1_energy}"
            )));
        }
        if omega1_energy - omega2_energy < 0.0 {
            return Err(Error::Config(format!(
                "beat energy omega1 - omega2 must be >= 0, got {}",
                omega1_energy - omega2_energy
            )));
        }
        if relative_amplitude <= 0.0 {
            return Err(Error::Config(format!(
                "relative_amplitude must be > 0, got {relative_amplitude}"
            )));
        }
        Ok(ProbePair { omega1_energy, omega2_energy, relative_amplitude })
    }

    /// Probe with a given beat energy below the fixed component.
    pub fn with_beat(omega1_energy: f64, beat_energy: f64, relative_amplitude: f64) -> Result<Self> {
        ProbePair::new(omega1_energy, omega1_energy - beat_energy, relative_amplitude)
    }

    /// Beat energy `hbar delta_omega = omega1 - omega2` (eV).
    pub fn beat_energy(&self) -> f64 {
        self.omega1_energy - self.omega2_energy
    }

    /// Beat angular frequency (rad/fs).
    pub fn beat_angular_frequency(&self) -> f64 {
        self.beat_energy() / HBAR_EV_FS
    }

    /// Field amplitudes `(w1, w2)`.
    pub fn amplitudes(&self) -> (f64, f64) {
        (1.0, self.relative_amplitude)
    }
}

/// Ionization target. Argon's spin-orbit split ion leaves two photoelectron
/// channels with fixed statistical weights 2/3 and 1/3; helium has one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetModel {
    Helium {
        /// Ionization potential (eV).
        ip: f64,
    },
    Argon {
        /// Ionization potential of the 3/2 ionic channel (eV).
        ip_3half: f64,
        /// Spin-orbit splitting between the ionic channels (eV).
        so_splitting: f64,
    },
}

/// Weight of the argon 3/2 channel.
pub const ARGON_WEIGHT_3HALF: f64 = 2.0 / 3.0;
/// Weight of the argon 1/2 channel.
pub const ARGON_WEIGHT_1HALF: f64 = 1.0 / 3.0;

impl TargetModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            TargetModel::Helium { ip } => {
                if *ip <= 0.0 {
                    return Err(Error::Config(format!("helium ip must be > 0, got {ip}")));
                }
            }
            TargetModel::Argon { ip_3half, so_splitting } => {
                if *ip_3half <= 0.0 {
                    return Err(Error::Config(format!("argon ip must be > 0, got {ip_3half}")));
                }
                if *so_splitting <= 0.0 {
                    return Err(Error::Config(format!(
                        "spin-orbit splitting must be > 0, got {so_splitting}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Photoelectron channels as `(label, weight, ionization potential)`.
    pub fn channels(&self) -> Vec<(&'static str, f64, f64)> {
        match self {
            TargetModel::Helium { ip } => vec![("1s", 1.0, *ip)],
            TargetModel::Argon { ip_3half, so_splitting } => vec![
                ("3/2", ARGON_WEIGHT_3HALF, *ip_3half),
                ("1/2", ARGON_WEIGHT_1HALF, *ip_3half + *so_splitting),
            ],
        }
    }

    /// Lowest ionization threshold (eV).
    pub fn ionization_threshold(&self) -> f64 {
        self.channels()
            .iter()
            .map(|&(_, _, ip)| ip)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Ground-truth photoelectron density matrix for a target ionized by the
/// given pulse: a rank-1 projector for helium, a two-channel mixture with
/// identical envelopes shifted by the spin-orbit splitting for argon.
///
/// The grid must span at least ±3 sigma around every channel center.
pub fn model_density_matrix(
    target: &TargetModel,
    xuv: &XuvPulse,
    grid: &EnergyGrid,
) -> Result<DensityMatrix> {
    target.validate()?;
    if xuv.central_photon_energy <= target.ionization_threshold() {
        return Err(Error::Config(format!(
            "photon energy {} eV does not exceed the ionization threshold {} eV",
            xuv.central_photon_energy,
            target.ionization_threshold()
        )));
    }
    let sigma = xuv.sigma_e();
    let mut components = Vec::new();
    for (label, weight, ip) in target.channels() {
        let center = xuv.central_photon_energy - ip;
        if center - 3.0 * sigma < grid.epsilon_min() || center + 3.0 * sigma > grid.last_point() {
            return Err(Error::Config(format!(
                "grid [{:.4}, {:.4}] eV does not cover channel {label} \
                 (center {center:.4} eV, sigma {sigma:.4} eV)",
                grid.epsilon_min(),
                grid.last_point()
            )));
        }
        let psi = Wavepacket::gaussian(grid, center, sigma, xuv.gdd)?;
        components.push((weight, psi));
    }
    let rho = DensityMatrix::from_mixture(&components)?;
    rho.validate()?;
    Ok(rho)
}

/// Analytic purity of the two-channel argon model with channel intensity
/// std `sigma_e`: `5/9 + (4/9) exp(-so^2 / (4 sigma_e^2))`.
pub fn argon_purity_for_sigma(sigma_e: f64, so_splitting: f64) -> f64 {
    5.0 / 9.0 + 4.0 / 9.0 * (-so_splitting * so_splitting / (4.0 * sigma_e * sigma_e)).exp()
}

/// Invert [`argon_purity_for_sigma`]: the channel intensity std that yields
/// a given target purity. Valid for purities strictly between 5/9 and 1.
pub fn argon_sigma_for_purity(target_purity: f64, so_splitting: f64) -> Result<f64> {
    let q = (target_purity - 5.0 / 9.0) * 9.0 / 4.0;
    if q <= 0.0 || q >= 1.0 {
        return Err(Error::Config(format!(
            "target purity {target_purity} outside the reachable range (5/9, 1)"
        )));
    }
    Ok(so_splitting / (2.0 * (-q.ln()).sqrt()))
}
