//! Spectrometer response: a normalized energy-resolution kernel and its
//! application to measured profiles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-widths beyond this many Gaussian sigmas are truncated when sampling
/// a Gaussian kernel on a grid.
const GAUSSIAN_SUPPORT_SIGMAS: f64 = 4.5;

/// FWHM / sigma for a Gaussian: `2 sqrt(2 ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354820045030949;

/// Detector energy-resolution kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResponseFunction {
    /// Gaussian kernel with the given intensity FWHM (eV). `fwhm = 0` is the
    /// identity response.
    Gaussian { fwhm: f64 },
    /// Kernel samples centered on the middle entry, one per grid bin.
    /// Stored normalized to unit sum.
    Tabulated { kernel: Vec<f64> },
}

impl ResponseFunction {
    pub fn gaussian(fwhm: f64) -> Result<Self> {
        if !fwhm.is_finite() || fwhm < 0.0 {
            return Err(Error::Config(format!("response fwhm must be >= 0, got {fwhm}")));
        }
        Ok(ResponseFunction::Gaussian { fwhm })
    }

    pub fn tabulated(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.len() % 2 == 0 {
            return Err(Error::Config(
                "tabulated kernel needs an odd number of samples".into(),
            ));
        }
        if samples.iter().any(|&s| !s.is_finite() || s < 0.0) {
            return Err(Error::Config("kernel samples must be finite and nonnegative".into()));
        }
        let sum: f64 = samples.iter().sum();
        if sum <= 0.0 {
            return Err(Error::Config("kernel samples sum to zero".into()));
        }
        Ok(ResponseFunction::Tabulated {
            kernel: samples.into_iter().map(|s| s / sum).collect(),
        })
    }

    /// Identity response (single-bin kernel).
    pub fn identity() -> Self {
        ResponseFunction::Gaussian { fwhm: 0.0 }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            ResponseFunction::Gaussian { fwhm } => *fwhm == 0.0,
            ResponseFunction::Tabulated { kernel } => kernel.len() == 1,
        }
    }

    /// Sample the kernel for a grid of spacing `delta_epsilon` with
    /// `n_points` bins. Fails when the kernel support exceeds the grid span.
    pub fn kernel_on_grid(&self, delta_epsilon: f64, n_points: usize) -> Result<Vec<f64>> {
        let kernel = match self {
            ResponseFunction::Gaussian { fwhm } => {
                if *fwhm == 0.0 {
                    vec![1.0]
                } else {
                    let sigma = fwhm / FWHM_PER_SIGMA;
                    let radius = (GAUSSIAN_SUPPORT_SIGMAS * sigma / delta_epsilon).ceil() as usize;
                    let radius = radius.max(1);
                    let mut k: Vec<f64> = (-(radius as isize)..=radius as isize)
                        .map(|m| {
                            let x = m as f64 * delta_epsilon;
                            (-x * x / (2.0 * sigma * sigma)).exp()
                        })
                        .collect();
                    let sum: f64 = k.iter().sum();
                    for v in &mut k {
                        *v /= sum;
                    }
                    k
                }
            }
            ResponseFunction::Tabulated { kernel } => kernel.clone(),
        };
        if kernel.len() > n_points {
            return Err(Error::Config(format!(
                "response kernel ({} taps) wider than the grid span ({} bins)",
                kernel.len(),
                n_points
            )));
        }
        Ok(kernel)
    }
}

/// Convolve a profile with a normalized kernel. Each source bin spreads its
/// signal over the kernel taps that land inside the grid, renormalized over
/// that clipped support, so the total signal is conserved and interior bins
/// see a plain discrete convolution.
pub fn apply_response(profile: &[f64], kernel: &[f64]) -> Vec<f64> {
    convolve_conserving(profile, kernel, |acc: &mut f64, v, w| *acc += v * w)
}

/// Complex variant of [`apply_response`], used for blurring subdiagonals.
pub fn apply_response_complex(profile: &[Complex64], kernel: &[f64]) -> Vec<Complex64> {
    convolve_conserving(profile, kernel, |acc: &mut Complex64, v, w| *acc += v * w)
}

fn convolve_conserving<T>(
    profile: &[T],
    kernel: &[f64],
    mut add: impl FnMut(&mut T, T, f64),
) -> Vec<T>
where
    T: Copy + Default,
{
    let n = profile.len();
    let radius = kernel.len() / 2;
    if kernel.len() == 1 {
        return profile.to_vec();
    }
    let mut out = vec![T::default(); n];
    for (j, &value) in profile.iter().enumerate() {
        let lo = j.saturating_sub(radius);
        let hi = (j + radius).min(n - 1);
        let mut weight = 0.0;
        for i in lo..=hi {
            weight += kernel[(i + radius) - j];
        }
        for i in lo..=hi {
            add(&mut out[i], value, kernel[(i + radius) - j] / weight);
        }
    }
    out
}
