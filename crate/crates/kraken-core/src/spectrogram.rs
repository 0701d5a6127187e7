//! Synthesis of delay-resolved photoelectron spectrograms from a known
//! density matrix probed by a bichromatic field.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::grid::EnergyGrid;
use crate::model::ProbePair;
use crate::par;
use crate::response::{apply_response, ResponseFunction};

/// Photoelectron counts vs (final energy, pump-probe delay) for one probe
/// beat frequency.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub probe: ProbePair,
    /// Delay axis (fs), strictly increasing.
    pub delays: Vec<f64>,
    /// Final-energy axis (eV).
    pub final_energies: EnergyGrid,
    /// Row-major counts: `counts[d * n_energies + e]`, nonnegative.
    counts: Vec<f64>,
    pub rng_seed: Option<u64>,
    pub noise_scale: f64,
}

impl Spectrogram {
    pub fn new(
        probe: ProbePair,
        delays: Vec<f64>,
        final_energies: EnergyGrid,
        counts: Vec<f64>,
        rng_seed: Option<u64>,
        noise_scale: f64,
    ) -> Result<Self> {
        if delays.is_empty() {
            return Err(Error::Config("spectrogram needs at least one delay".into()));
        }
        if delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DataValidation("delay axis must be strictly increasing".into()));
        }
        if counts.len() != delays.len() * final_energies.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "counts block has {} values for {} delays x {} energies",
                counts.len(),
                delays.len(),
                final_energies.n_points()
            )));
        }
        if counts.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::DataValidation(
                "counts must be finite and nonnegative".into(),
            ));
        }
        Ok(Spectrogram { probe, delays, final_energies, counts, rng_seed, noise_scale })
    }

    pub fn n_delays(&self) -> usize {
        self.delays.len()
    }

    pub fn n_energies(&self) -> usize {
        self.final_energies.n_points()
    }

    pub fn count(&self, delay_idx: usize, energy_idx: usize) -> f64 {
        self.counts[delay_idx * self.n_energies() + energy_idx]
    }

    pub fn row(&self, delay_idx: usize) -> &[f64] {
        let ne = self.n_energies();
        &self.counts[delay_idx * ne..(delay_idx + 1) * ne]
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Counts for one energy bin across all delays.
    pub fn energy_column(&self, energy_idx: usize) -> Vec<f64> {
        (0..self.n_delays()).map(|d| self.count(d, energy_idx)).collect()
    }
}

/// Simulate the spectrogram of `rho` probed at the given delays.
///
/// The ideal signal at final energy `eps_f` mapping to grid bins
/// `(i, i + k)` with `k = round(beat / delta_eps)` is
///
/// ```text
/// S = w1^2 rho[i][i] + w2^2 rho[i+k][i+k]
///     + 2 w1 w2 |rho[i][i+k]| cos(dw tau + arg rho[i][i+k])
/// ```
///
/// then blurred with the response kernel along the energy axis, then given
/// multiplicative Gaussian noise `counts * (1 + noise_scale * g)` clipped at
/// zero. Deterministic for a fixed seed.
pub fn simulate_spectrogram(
    rho: &DensityMatrix,
    probe: &ProbePair,
    delays: &[f64],
    response: &ResponseFunction,
    noise_scale: f64,
    seed: u64,
) -> Result<Spectrogram> {
    simulate_impl(rho, probe, delays, response, noise_scale, seed, false)
}

/// Sequential reference implementation of [`simulate_spectrogram`].
/// Bit-identical to the parallel path.
pub fn simulate_spectrogram_seq(
    rho: &DensityMatrix,
    probe: &ProbePair,
    delays: &[f64],
    response: &ResponseFunction,
    noise_scale: f64,
    seed: u64,
) -> Result<Spectrogram> {
    simulate_impl(rho, probe, delays, response, noise_scale, seed, true)
}

fn simulate_impl(
    rho: &DensityMatrix,
    probe: &ProbePair,
    delays: &[f64],
    response: &ResponseFunction,
    noise_scale: f64,
    seed: u64,
    force_seq: bool,
) -> Result<Spectrogram> {
    if noise_scale < 0.0 {
        return Err(Error::Config(format!("noise_scale must be >= 0, got {noise_scale}")));
    }
    if delays.is_empty() {
        return Err(Error::Config("at least one delay value required".into()));
    }
    let grid = rho.grid();
    let n = grid.n_points();
    let beat = probe.beat_energy();
    let k = (beat / grid.delta_epsilon()).round() as usize;
    if k >= n {
        return Err(Error::Config(format!(
            "beat energy {beat} eV maps every eps2 below the grid: offset {k} >= {n} bins"
        )));
    }
    let n_f = n - k;
    // final-energy axis anchored to eps1 + omega1
    let final_energies = EnergyGrid::new(
        grid.epsilon_min() + probe.omega1_energy,
        grid.delta_epsilon(),
        n_f,
    )?;
    let kernel = response.kernel_on_grid(grid.delta_epsilon(), n_f)?;
    let (w1, w2) = probe.amplitudes();
    let dw = probe.beat_angular_frequency();

    let populations = rho.populations();
    let coherences = rho.subdiagonal(k)?;
    let dc: Vec<f64> = (0..n_f)
        .map(|i| w1 * w1 * populations[i] + w2 * w2 * populations[i + k])
        .collect();
    let osc: Vec<(f64, f64)> = coherences
        .iter()
        .map(|z| (2.0 * w1 * w2 * z.norm(), z.arg()))
        .collect();

    let make_row = |d: usize| -> Vec<f64> {
        let tau = delays[d];
        let ideal: Vec<f64> = if k == 0 {
            // zero beat: delay-independent population profile
            dc.iter()
                .zip(osc.iter())
                .map(|(&a, &(amp, _))| a + amp)
                .collect()
        } else {
            dc.iter()
                .zip(osc.iter())
                .map(|(&a, &(amp, phase))| a + amp * (dw * tau + phase).cos())
                .collect()
        };
        apply_response(&ideal, &kernel)
    };

    let rows: Vec<Vec<f64>> = if force_seq {
        par::map_indexed_seq(delays.len(), make_row)
    } else {
        par::map_indexed(delays.len(), make_row)
    };
    let mut counts: Vec<f64> = Vec::with_capacity(delays.len() * n_f);
    for row in rows {
        counts.extend(row);
    }

    // noise is applied in one sequential pass so the parallel and
    // sequential signal paths stay bit-identical
    if noise_scale > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in &mut counts {
            let g: f64 = StandardNormal.sample(&mut rng);
            *c = (*c * (1.0 + noise_scale * g)).max(0.0);
        }
    } else {
        for c in &mut counts {
            *c = c.max(0.0);
        }
    }

    Spectrogram::new(
        probe.clone(),
        delays.to_vec(),
        final_energies,
        counts,
        Some(seed),
        noise_scale,
    )
}

/// Uniform delay axis from `start` to at most `stop` in steps of `step` (fs).
pub fn delay_axis(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || stop <= start {
        return Err(Error::Config(format!(
            "invalid delay axis: start {start}, stop {stop}, step {step}"
        )));
    }
    let n = ((stop - start) / step).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}
