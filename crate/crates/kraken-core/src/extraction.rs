//! Recovery of per-energy beat amplitude and phase from spectrograms, and
//! assembly of the raw (pre-estimation) density matrix.
//!
//! Phase convention, fixed project-wide: the per-bin signal is modeled as
//! `S(tau) = a + b cos(dw tau) + c sin(dw tau) = a + A cos(dw tau + phi)`
//! with `A = sqrt(b^2 + c^2)` and `phi = atan2(-c, b)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::grid::EnergyGrid;
use crate::model::ProbePair;
use crate::par;
use crate::spectrogram::Spectrogram;

/// Identifier of the fit convention recorded in trace files.
pub const PHASE_CONVENTION: &str = "atan2(-c,b)";

/// Relative population floor below which a bin carries no usable amplitude
/// normalization; also defines subdiagonal coverage.
pub const DC_FLOOR_REL: f64 = 1e-3;

/// Fitted oscillation amplitude, phase and uncertainties for one beat
/// frequency, resolved over final energy.
#[derive(Debug, Clone)]
pub struct SubdiagonalTrace {
    /// Beat energy `hbar * delta_omega` (eV).
    pub beat_energy: f64,
    /// Fixed probe component energy (eV); maps final energies back to
    /// intermediate energies via `eps1 = eps_f - omega1`.
    pub omega1_energy: f64,
    pub final_energies: EnergyGrid,
    pub amplitude: Vec<f64>,
    /// Phase in `(-pi, pi]`.
    pub phase: Vec<f64>,
    pub amplitude_sigma: Vec<f64>,
    pub phase_sigma: Vec<f64>,
    /// Delay-independent term per bin.
    pub dc: Vec<f64>,
    /// False for the zero-beat trace, where amplitude and phase are absent.
    pub oscillation_defined: bool,
    /// Noise scale of the source spectrogram, carried along for the
    /// estimator's population weighting.
    pub source_noise_scale: f64,
}

impl SubdiagonalTrace {
    pub fn len(&self) -> usize {
        self.final_energies.n_points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bin carried no signal at all (flagged, not an error).
    pub fn is_zero_signal(&self, i: usize) -> bool {
        self.dc[i] == 0.0 && self.amplitude[i] == 0.0
    }

    /// Phase is meaningful only where the amplitude clears 3x its own
    /// uncertainty.
    pub fn phase_defined(&self, i: usize) -> bool {
        self.oscillation_defined
            && self.amplitude[i] > 3.0 * self.amplitude_sigma[i]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if [
            self.amplitude.len(),
            self.phase.len(),
            self.amplitude_sigma.len(),
            self.phase_sigma.len(),
            self.dc.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return Err(Error::DimensionMismatch(
                "trace arrays not congruent with the energy axis".into(),
            ));
        }
        if self.amplitude.iter().any(|&a| a < 0.0) {
            return Err(Error::DataValidation("amplitudes must be >= 0".into()));
        }
        if self.oscillation_defined {
            if self
                .amplitude_sigma
                .iter()
                .chain(self.phase_sigma.iter())
                .any(|&s| !(s >= 0.0))
            {
                return Err(Error::DataValidation("uncertainties must be >= 0".into()));
            }
            if self.phase.iter().any(|&p| !(p > -PI - 1e-12 && p <= PI + 1e-12)) {
                return Err(Error::DataValidation("phase outside (-pi, pi]".into()));
            }
        }
        Ok(())
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut p = x.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// Map a final energy to the two intermediate energies addressed by the
/// probe: `eps1 = eps_f - omega1`, `eps2 = eps_f - omega2`.
pub fn map_energies(epsilon_f: f64, probe: &ProbePair) -> (f64, f64) {
    (epsilon_f - probe.omega1_energy, epsilon_f - probe.omega2_energy)
}

/// Fit the beat oscillation in every energy bin of a spectrogram.
///
/// For a nonzero beat this is linear least squares on `{1, cos, sin}` per
/// bin with covariance-derived one-sigma uncertainties. For zero beat only
/// the DC term is fitted and amplitude/phase are flagged absent.
pub fn fit_oscillation(spec: &Spectrogram) -> Result<SubdiagonalTrace> {
    fit_impl(spec, false)
}

/// Sequential reference implementation of [`fit_oscillation`].
pub fn fit_oscillation_seq(spec: &Spectrogram) -> Result<SubdiagonalTrace> {
    fit_impl(spec, true)
}

struct BinFit {
    amplitude: f64,
    phase: f64,
    amplitude_sigma: f64,
    phase_sigma: f64,
    dc: f64,
}

fn fit_impl(spec: &Spectrogram, force_seq: bool) -> Result<SubdiagonalTrace> {
    let beat = spec.probe.beat_energy();
    let m = spec.n_delays();
    let ne = spec.n_energies();

    if beat == 0.0 {
        let mut dc = Vec::with_capacity(ne);
        for e in 0..ne {
            let col = spec.energy_column(e);
            dc.push(col.iter().sum::<f64>() / m as f64);
        }
        return Ok(SubdiagonalTrace {
            beat_energy: 0.0,
            omega1_energy: spec.probe.omega1_energy,
            final_energies: spec.final_energies.clone(),
            amplitude: vec![0.0; ne],
            phase: vec![0.0; ne],
            // absent, not zero-uncertainty
            amplitude_sigma: vec![f64::NAN; ne],
            phase_sigma: vec![f64::NAN; ne],
            dc,
            oscillation_defined: false,
            source_noise_scale: spec.noise_scale,
        });
    }

    let dw = spec.probe.beat_angular_frequency();
    let period = 2.0 * PI / dw;
    let span = spec.delays.last().unwrap() - spec.delays.first().unwrap();
    if m < 6 {
        return Err(Error::IllConditioned(format!(
            "need at least 6 delay samples for a beat fit, got {m}"
        )));
    }
    if span < period * (1.0 - 1e-9) {
        return Err(Error::IllConditioned(format!(
            "delay span {span:.2} fs shorter than one beat period {period:.2} fs"
        )));
    }

    // shared design matrix: rows [1, cos(dw tau), sin(dw tau)]
    let design: Vec<(f64, f64)> = spec
        .delays
        .iter()
        .map(|&tau| ((dw * tau).cos(), (dw * tau).sin()))
        .collect();
    let mut xtx = Matrix3::zeros();
    for &(c, s) in &design {
        let row = Vector3::new(1.0, c, s);
        xtx += row * row.transpose();
    }
    let xtx_inv = xtx.try_inverse().ok_or_else(|| {
        Error::IllConditioned("singular normal equations for the beat fit".into())
    })?;

    let fit_bin = |e: usize| -> BinFit {
        let y = spec.energy_column(e);
        if y.iter().all(|&v| v == 0.0) {
            // constant-zero bin: flagged by zeros, not an error
            return BinFit { amplitude: 0.0, phase: 0.0, amplitude_sigma: 0.0, phase_sigma: 0.0, dc: 0.0 };
        }
        let mut xty = Vector3::zeros();
        for (&(c, s), &v) in design.iter().zip(y.iter()) {
            xty += Vector3::new(1.0, c, s) * v;
        }
        let beta = xtx_inv * xty;
        let (a, b, c) = (beta[0], beta[1], beta[2]);
        let mut ssr = 0.0;
        for (&(cc, ss), &v) in design.iter().zip(y.iter()) {
            let r = v - (a + b * cc + c * ss);
            ssr += r * r;
        }
        let dof = (m - 3) as f64;
        let s2 = if dof > 0.0 { ssr / dof } else { 0.0 };
        let cov = xtx_inv * s2;

        let amp = (b * b + c * c).sqrt();
        let phase = wrap_phase((-c).atan2(b));
        let (amp_sigma, phase_sigma) = if amp > 1e-300 {
            let var_a = (b * b * cov[(1, 1)] + c * c * cov[(2, 2)] + 2.0 * b * c * cov[(1, 2)])
                / (amp * amp);
            let var_p = (c * c * cov[(1, 1)] + b * b * cov[(2, 2)] - 2.0 * b * c * cov[(1, 2)])
                / (amp * amp * amp * amp);
            (var_a.max(0.0).sqrt(), var_p.max(0.0).sqrt())
        } else {
            (cov[(1, 1)].max(cov[(2, 2)]).max(0.0).sqrt(), PI)
        };
        BinFit { amplitude: amp, phase, amplitude_sigma: amp_sigma, phase_sigma, dc: a }
    };

    let fits: Vec<BinFit> = if force_seq {
        par::map_indexed_seq(ne, fit_bin)
    } else {
        par::map_indexed(ne, fit_bin)
    };

    let trace = SubdiagonalTrace {
        beat_energy: beat,
        omega1_energy: spec.probe.omega1_energy,
        final_energies: spec.final_energies.clone(),
        amplitude: fits.iter().map(|f| f.amplitude).collect(),
        phase: fits.iter().map(|f| f.phase).collect(),
        amplitude_sigma: fits.iter().map(|f| f.amplitude_sigma).collect(),
        phase_sigma: fits.iter().map(|f| f.phase_sigma).collect(),
        dc: fits.iter().map(|f| f.dc).collect(),
        oscillation_defined: true,
        source_noise_scale: spec.noise_scale,
    };
    trace.validate()?;
    Ok(trace)
}

/// Which matrix elements were actually measured.
#[derive(Debug, Clone)]
pub struct CoverageMask {
    n: usize,
    filled: Vec<bool>,
}

impl CoverageMask {
    pub fn new(n: usize) -> Self {
        CoverageMask { n, filled: vec![false; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn covered(&self, i: usize, j: usize) -> bool {
        self.filled[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.filled[i * self.n + j] = true;
        self.filled[j * self.n + i] = true;
    }

    pub fn count(&self) -> usize {
        self.filled.iter().filter(|&&f| f).count()
    }

    /// Number of distinct upper subdiagonals with at least one covered
    /// element (the diagonal counts as offset 0).
    pub fn covered_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::new();
        for k in 0..self.n {
            if (0..self.n - k).any(|i| self.covered(i, i + k)) {
                offsets.push(k);
            }
        }
        offsets
    }
}

/// How one trace landed on the matrix.
#[derive(Debug, Clone)]
pub struct Placement {
    pub beat_energy: f64,
    /// Subdiagonal offset `k = round(beat / delta_eps)`.
    pub offset: usize,
    /// Rounding residual in grid bins.
    pub residual_bins: f64,
    /// Bins actually placed.
    pub placed: usize,
}

/// Raw assembly output: the matrix, what was measured, and how traces were
/// placed.
#[derive(Debug, Clone)]
pub struct RawAssembly {
    pub matrix: DensityMatrix,
    pub mask: CoverageMask,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone)]
pub struct AssemblyOptions {
    /// Split off-diagonal placements between the two neighboring
    /// subdiagonals when the beat does not hit an integer offset.
    pub interpolate: bool,
    /// Relative DC floor for amplitude normalization and coverage.
    pub dc_floor_rel: f64,
    /// Largest acceptable rounding residual, in bins.
    pub max_residual_bins: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { interpolate: false, dc_floor_rel: DC_FLOOR_REL, max_residual_bins: 0.5 }
    }
}

/// Assemble the raw density matrix from fitted traces.
///
/// The zero-beat trace provides the populations (diagonal). Each nonzero
/// beat maps to the subdiagonal `k = round(beat / delta_eps)`; its amplitude
/// is normalized by its own DC term and anchored to the populations via
/// `|rho[i][i+k]| = (A_i / dc_i) * (p_i + p_{i+k}) / 2`, which cancels
/// per-scan probe-power differences. Elements are mirrored to keep the
/// matrix exactly Hermitian and the trace is scaled to one. Positivity is
/// not guaranteed.
pub fn assemble_raw_dm(traces: &[SubdiagonalTrace], grid: &EnergyGrid) -> Result<RawAssembly> {
    assemble_raw_dm_with(traces, grid, &AssemblyOptions::default())
}

pub fn assemble_raw_dm_with(
    traces: &[SubdiagonalTrace],
    grid: &EnergyGrid,
    options: &AssemblyOptions,
) -> Result<RawAssembly> {
    let n = grid.n_points();
    let zero_trace = traces
        .iter()
        .find(|t| t.beat_energy == 0.0)
        .ok_or_else(|| Error::Config("assembly requires the delta-omega = 0 trace".into()))?;

    // populations from the zero-beat DC profile, mapped onto the grid
    let mut populations = vec![0.0_f64; n];
    let mut diag_covered = vec![false; n];
    for (b, dc) in zero_trace.dc.iter().enumerate() {
        let eps1 = zero_trace.final_energies.point(b) - zero_trace.omega1_energy;
        let (i, resid) = grid.nearest_index(eps1);
        if resid.abs() > options.max_residual_bins + 1e-9 {
            continue; // trace bin falls outside the grid
        }
        populations[i] = dc.max(0.0);
        diag_covered[i] = true;
    }
    let total: f64 = populations.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("zero-beat trace carries no signal".into()));
    }
    for p in &mut populations {
        *p /= total;
    }

    let mut elements = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    let mut mask = CoverageMask::new(n);
    for i in 0..n {
        if diag_covered[i] {
            elements[(i, i)] = Complex64::new(populations[i], 0.0);
            mask.set(i, i);
        }
    }

    let mut placements = Vec::new();
    let mut seen_offsets = vec![false; n];
    for trace in traces {
        if trace.beat_energy == 0.0 {
            continue;
        }
        trace.validate()?;
        let exact = trace.beat_energy / grid.delta_epsilon();
        let k = exact.round() as isize;
        let residual = exact - k as f64;
        if k < 1 || k as usize >= n {
            return Err(Error::Config(format!(
                "beat {} eV maps to offset {k}, outside the {n}-point grid",
                trace.beat_energy
            )));
        }
        if residual.abs() > options.max_residual_bins + 1e-9 {
            return Err(Error::Config(format!(
                "beat {} eV has rounding residual {residual:.3} bins (> {})",
                trace.beat_energy, options.max_residual_bins
            )));
        }
        let k = k as usize;
        if seen_offsets[k] {
            return Err(Error::Config(format!(
                "two traces map to the same subdiagonal offset {k}"
            )));
        }
        seen_offsets[k] = true;

        let dc_max = trace.dc.iter().cloned().fold(0.0, f64::max);
        let floor = options.dc_floor_rel * dc_max;
        let mut placed = 0usize;
        for b in 0..trace.len() {
            if trace.dc[b] <= floor || trace.dc[b] <= 0.0 {
                continue;
            }
            let eps1 = trace.final_energies.point(b) - trace.omega1_energy;
            let (i, resid) = grid.nearest_index(eps1);
            if resid.abs() > options.max_residual_bins + 1e-9 || i + k >= n {
                continue;
            }
            let anchor = 0.5 * (populations[i] + populations[i + k]);
            let magnitude = trace.amplitude[b] / trace.dc[b] * anchor;
            let value = Complex64::from_polar(magnitude, trace.phase[b]);
            if options.interpolate && residual.abs() > 1e-12 {
                // split between neighboring subdiagonals
                let (k2, w2) = if residual > 0.0 { (k + 1, residual) } else { (k - 1, -residual) };
                let w1 = 1.0 - w2;
                place(&mut elements, &mut mask, i, i + k, value * w1);
                if k2 >= 1 && i + k2 < n {
                    place(&mut elements, &mut mask, i, i + k2, value * w2);
                }
            } else {
                place(&mut elements, &mut mask, i, i + k, value);
            }
            placed += 1;
        }
        placements.push(Placement {
            beat_energy: trace.beat_energy,
            offset: k,
            residual_bins: residual,
            placed,
        });
    }

    // global factor for exact unit trace
    let tr: f64 = (0..n).map(|i| elements[(i, i)].re).sum();
    if tr <= 0.0 {
        return Err(Error::DegenerateInput("assembled matrix has zero trace".into()));
    }
    let scale = Complex64::new(1.0 / tr, 0.0);
    elements *= scale;

    let matrix = DensityMatrix::from_elements(grid.clone(), elements)?;
    Ok(RawAssembly { matrix, mask, placements })
}

fn place(
    elements: &mut nalgebra::DMatrix<Complex64>,
    mask: &mut CoverageMask,
    i: usize,
    j: usize,
    value: Complex64,
) {
    elements[(i, j)] += value;
    elements[(j, i)] += value.conj();
    mask.set(i, j);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{model_density_matrix, TargetModel, XuvPulse};
    use crate::response::ResponseFunction;
    use crate::spectrogram::{delay_axis, simulate_spectrogram};

    fn helium() -> (DensityMatrix, EnergyGrid) {
        let grid = EnergyGrid::new(4.795, 0.0205, 61).unwrap();
        let xuv = XuvPulse::new(30.0, 0.144, 0.0).unwrap();
        let rho = model_density_matrix(&TargetModel::Helium { ip: 24.59 }, &xuv, &grid).unwrap();
        (rho, grid)
    }

    fn synth(amp: f64, phase: f64, dc: f64, beat: f64, noise: f64, seed: u64) -> Spectrogram {
        let probe = ProbePair::with_beat(1.55, beat, 1.0).unwrap();
        let dw = probe.beat_angular_frequency();
        let delays = delay_axis(0.0, 250.0, 5.0).unwrap();
        let grid = EnergyGrid::new(6.0, 0.02, 2).unwrap();
        let mut counts = Vec::new();
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for &tau in &delays {
            for _ in 0..2 {
                let ideal = dc + amp * (dw * tau + phase).cos();
                let g: f64 = rand_distr::StandardNormal.sample(&mut rng);
                counts.push((ideal * (1.0 + noise * g)).max(0.0));
            }
        }
        Spectrogram::new(probe, delays, grid, counts, Some(seed), noise).unwrap()
    }

    #[test]
    fn noiseless_sinusoid_recovered_exactly() {
        let spec = synth(0.3, 0.7, 1.0, 0.041, 0.0, 0);
        let trace = fit_oscillation(&spec).unwrap();
        assert!((trace.amplitude[0] - 0.3).abs() < 1e-9);
        assert!((trace.phase[0] - 0.7).abs() < 1e-9);
        assert!((trace.dc[0] - 1.0).abs() < 1e-9);
        assert!(trace.amplitude_sigma[0] < 1e-9);
    }

    #[test]
    fn uncertainty_matches_monte_carlo() {
        // empirical std of A over seeded repetitions vs reported sigma
        let n_rep = 500;
        let mut amps = Vec::with_capacity(n_rep);
        let mut sigmas = Vec::with_capacity(n_rep);
        for seed in 0..n_rep as u64 {
            let spec = synth(0.3, 0.7, 1.0, 0.041, 0.02, seed);
            let trace = fit_oscillation(&spec).unwrap();
            amps.push(trace.amplitude[0]);
            sigmas.push(trace.amplitude_sigma[0]);
        }
        let mean = amps.iter().sum::<f64>() / n_rep as f64;
        let var = amps.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n_rep - 1) as f64;
        let empirical = var.sqrt();
        let reported = sigmas.iter().sum::<f64>() / n_rep as f64;
        assert!(
            (empirical - reported).abs() / empirical < 0.2,
            "empirical {empirical:.4e} vs reported {reported:.4e}"
        );
    }

    #[test]
    fn pure_dc_input_flags_phase_undefined() {
        let spec = synth(0.0, 0.0, 1.0, 0.041, 0.001, 3);
        let trace = fit_oscillation(&spec).unwrap();
        assert!(trace.amplitude[0] < 3.0 * trace.amplitude_sigma[0]);
        assert!(!trace.phase_defined(0));
    }

    #[test]
    fn zero_beat_gives_flagged_dc_only_trace() {
        let (rho, _) = helium();
        let probe = ProbePair::with_beat(1.55, 0.0, 1.0).unwrap();
        let delays = delay_axis(0.0, 100.0, 5.0).unwrap();
        let spec =
            simulate_spectrogram(&rho, &probe, &delays, &ResponseFunction::identity(), 0.0, 0)
                .unwrap();
        let trace = fit_oscillation(&spec).unwrap();
        assert!(!trace.oscillation_defined);
        assert!(trace.amplitude.iter().all(|&a| a == 0.0));
        assert!(trace.amplitude_sigma.iter().all(|s| s.is_nan()));
    }

    #[test]
    fn short_delay_span_is_ill_conditioned() {
        let probe = ProbePair::with_beat(1.55, 0.041, 1.0).unwrap();
        let grid = EnergyGrid::new(6.0, 0.02, 2).unwrap();
        let delays: Vec<f64> = (0..8).map(|i| i as f64 * 5.0).collect(); // 35 fs < 101 fs period
        let counts = vec![1.0; delays.len() * 2];
        let spec = Spectrogram::new(probe, delays, grid, counts, None, 0.0).unwrap();
        assert!(matches!(fit_oscillation(&spec), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn map_energies_arithmetic() {
        let probe = ProbePair::new(1.55, 1.55, 1.0).unwrap();
        let (e1, e2) = map_energies(6.96, &probe);
        assert!((e1 - 5.41).abs() < 1e-12);
        assert!((e2 - 5.41).abs() < 1e-12);

        let probe = ProbePair::new(1.55, 1.509, 1.0).unwrap();
        let (e1, e2) = map_energies(6.96, &probe);
        assert!((e1 - 5.41).abs() < 1e-12);
        assert!((e2 - 5.451).abs() < 1e-12);
        // separation always equals the beat energy
        assert!(((e2 - e1) - probe.beat_energy()).abs() < 1e-12);
    }

    #[test]
    fn offset_rounding_example() {
        // 41 meV beat on a 20.5 meV grid: offset 2, residual 0
        let exact: f64 = 0.041 / 0.0205;
        assert_eq!(exact.round() as usize, 2);
        assert!((exact - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_parallel_matches_sequential() {
        let (rho, _) = helium();
        let probe = ProbePair::with_beat(1.55, 0.061, 1.0).unwrap();
        let delays = delay_axis(0.0, 250.0, 5.0).unwrap();
        let spec = simulate_spectrogram(
            &rho,
            &probe,
            &delays,
            &ResponseFunction::gaussian(0.05).unwrap(),
            0.02,
            11,
        )
        .unwrap();
        let a = fit_oscillation(&spec).unwrap();
        let b = fit_oscillation_seq(&spec).unwrap();
        assert_eq!(a.amplitude, b.amplitude);
        assert_eq!(a.phase, b.phase);
    }

    fn run_traces(rho: &DensityMatrix, beats: &[f64], fwhm: f64, noise: f64) -> Vec<SubdiagonalTrace> {
        let delays = delay_axis(0.0, 250.0, 5.0).unwrap();
        let resp = if fwhm > 0.0 {
            ResponseFunction::gaussian(fwhm).unwrap()
        } else {
            ResponseFunction::identity()
        };
        beats
            .iter()
            .enumerate()
            .map(|(i, &beat)| {
                let probe = ProbePair::with_beat(1.55, beat, 1.0).unwrap();
                let spec =
                    simulate_spectrogram(rho, &probe, &delays, &resp, noise, 100 + i as u64)
                        .unwrap();
                fit_oscillation(&spec).unwrap()
            })
            .collect()
    }

    const BEATS: [f64; 7] = [0.0, 0.041, 0.061, 0.080, 0.098, 0.117, 0.134];

    #[test]
    fn noiseless_assembly_matches_ground_truth_on_mask() {
        let (rho, grid) = helium();
        let traces = run_traces(&rho, &BEATS, 0.0, 0.0);
        let asm = assemble_raw_dm(&traces, &grid).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..grid.n_points() {
            for j in 0..grid.n_points() {
                if asm.mask.covered(i, j) {
                    num += (asm.matrix.element(i, j) - rho.element(i, j)).norm_sqr();
                    den += rho.element(i, j).norm_sqr();
                }
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel < 1e-3, "relative Frobenius error on mask: {rel:.3e}");
    }

    #[test]
    fn zero_beat_only_yields_diagonal_unit_trace() {
        let (rho, grid) = helium();
        let traces = run_traces(&rho, &[0.0], 0.0, 0.0);
        let asm = assemble_raw_dm(&traces, &grid).unwrap();
        let tr = asm.matrix.trace();
        assert!((tr.re - 1.0).abs() < 1e-12);
        for i in 0..grid.n_points() {
            for j in 0..grid.n_points() {
                if i != j {
                    assert_eq!(asm.matrix.element(i, j), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn missing_zero_beat_is_config_error() {
        let (rho, grid) = helium();
        let traces = run_traces(&rho, &[0.041], 0.0, 0.0);
        let err = assemble_raw_dm(&traces, &grid).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("delta-omega = 0"));
    }

    #[test]
    fn assembled_matrix_exactly_hermitian_with_unit_trace() {
        let (rho, grid) = helium();
        let traces = run_traces(&rho, &BEATS, 0.04, 0.02);
        let asm = assemble_raw_dm(&traces, &grid).unwrap();
        assert_eq!(asm.matrix.hermiticity_deviation(), 0.0);
        assert!((asm.matrix.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_traces_decrease_with_beat() {
        let (rho, _) = helium();
        let traces = run_traces(&rho, &BEATS[1..], 0.0, 0.0);
        let peaks: Vec<f64> = traces
            .iter()
            .map(|t| t.amplitude.iter().cloned().fold(0.0, f64::max))
            .collect();
        for w in peaks.windows(2) {
            assert!(w[1] < w[0], "amplitudes should decrease with beat: {peaks:?}");
        }
    }

    #[test]
    fn coverage_mask_offsets_match_beat_list() {
        let (rho, grid) = helium();
        let traces = run_traces(&rho, &BEATS, 0.0, 0.0);
        let asm = assemble_raw_dm(&traces, &grid).unwrap();
        let expected: Vec<usize> = BEATS
            .iter()
            .map(|b| (b / grid.delta_epsilon()).round() as usize)
            .collect();
        assert_eq!(asm.mask.covered_offsets(), expected);
        assert_eq!(asm.placements.len(), BEATS.len() - 1);
    }

    #[test]
    fn raw_assembled_argon_matrix_is_indefinite_on_noisy_data() {
        let grid = EnergyGrid::new(13.4, 0.0205, 75).unwrap();
        let xuv = XuvPulse::new(30.0, 0.144, 0.0).unwrap();
        let rho = model_density_matrix(
            &TargetModel::Argon { ip_3half: 15.76, so_splitting: 0.177 },
            &xuv,
            &grid,
        )
        .unwrap();
        let traces = run_traces(&rho, &BEATS, 0.08, 0.05);
        let asm = assemble_raw_dm(&traces, &grid).unwrap();
        let min_eig = crate::density::min_eigenvalue(&asm.matrix).unwrap();
        assert!(min_eig < 0.0, "expected an indefinite raw matrix, min eig {min_eig:.3e}");
    }
}
