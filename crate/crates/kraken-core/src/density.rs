//! Discretized continuous-variable quantum states: wavepackets and density
//! matrices on an energy grid.
//!
//! The discretized density matrix is treated as a plain matrix normalized to
//! unit trace (the grid spacing is folded into the normalization). A
//! continuous-density reading would carry an extra `1/delta_epsilon` per
//! axis; none of the metrics here use it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::grid::EnergyGrid;
use crate::tol::Tolerances;

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// A single-channel photoelectron wavefunction sampled on an energy grid,
/// normalized so that `sum |a_i|^2 = 1`.
#[derive(Debug, Clone)]
pub struct Wavepacket {
    grid: EnergyGrid,
    amplitudes: DVector<Complex64>,
}

impl Wavepacket {
    /// Wrap amplitudes that are already unit-norm.
    pub fn new(grid: EnergyGrid, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "wavepacket has {} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        let w = Wavepacket { grid, amplitudes };
        let dev = (w.norm_sq() - 1.0).abs();
        let tol = Tolerances::default().unit_norm_abs;
        if dev > tol {
            return Err(Error::DataValidation(format!(
                "wavepacket norm deviates from 1 by {dev:.3e} (tolerance {tol:.1e})"
            )));
        }
        Ok(w)
    }

    /// Normalize arbitrary amplitudes to unit norm.
    pub fn normalized(grid: EnergyGrid, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "wavepacket has {} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        let nsq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if nsq <= 0.0 || !nsq.is_finite() {
            return Err(Error::DegenerateInput(
                "cannot normalize a zero or non-finite wavepacket".into(),
            ));
        }
        let scale = Complex64::new(1.0 / nsq.sqrt(), 0.0);
        Ok(Wavepacket { grid, amplitudes: amplitudes * scale })
    }

    /// Gaussian wavepacket with the given center and intensity standard
    /// deviation `sigma_e` (eV), with a quadratic spectral phase
    /// `exp(i * (gdd/2) * ((eps - center)/hbar)^2)`, `gdd` in fs².
    pub fn gaussian(grid: &EnergyGrid, center: f64, sigma_e: f64, gdd: f64) -> Result<Self> {
        if sigma_e <= 0.0 {
            return Err(Error::Config(format!("sigma_e must be > 0, got {sigma_e}")));
        }
        let amplitudes = DVector::from_iterator(
            grid.n_points(),
            grid.points().map(|e| {
                let d = e - center;
                // amplitude envelope = sqrt of a Gaussian intensity profile
                let mag = (-d * d / (4.0 * sigma_e * sigma_e)).exp();
                let phase = 0.5 * gdd * (d / HBAR_EV_FS).powi(2);
                Complex64::from_polar(mag, phase)
            }),
        );
        Wavepacket::normalized(grid.clone(), amplitudes)
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Overlap `<self|other>`.
    pub fn overlap(&self, other: &Wavepacket) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("wavepacket grids differ".into()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Discretized density matrix `rho(eps1, eps2)` on an energy grid.
///
/// Construction checks structure only (square, finite). Full physical
/// validity (Hermiticity, unit trace, positivity) is checked by
/// [`DensityMatrix::validate`]; raw assembled matrices may legitimately
/// fail the positivity part.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    grid: EnergyGrid,
    elements: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_elements(grid: EnergyGrid, elements: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.n_points();
        if elements.nrows() != n || elements.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "elements are {}x{} for a grid of {} points",
                elements.nrows(),
                elements.ncols(),
                n
            )));
        }
        if elements.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DataValidation(
                "density matrix contains non-finite entries".into(),
            ));
        }
        Ok(DensityMatrix { grid, elements })
    }

    /// Rank-1 projector `|psi><psi|` from a unit-norm wavepacket.
    pub fn from_pure(psi: &Wavepacket) -> Self {
        let n = psi.grid.n_points();
        let mut elements = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                elements[(i, j)] = psi.amplitudes[i] * psi.amplitudes[j].conj();
            }
        }
        DensityMatrix { grid: psi.grid.clone(), elements }
    }

    /// Statistical mixture `sum_k w_k |psi_k><psi_k|`; weights must sum to 1.
    pub fn from_mixture(components: &[(f64, Wavepacket)]) -> Result<Self> {
        let (w0, psi0) = components
            .first()
            .ok_or_else(|| Error::Config("mixture needs at least one component".into()))?;
        let grid = psi0.grid.clone();
        let wsum: f64 = components.iter().map(|(w, _)| w).sum();
        if (wsum - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!(
                "mixture weights sum to {wsum}, expected 1"
            )));
        }
        if *w0 < 0.0 {
            return Err(Error::Config("mixture weights must be nonnegative".into()));
        }
        let n = grid.n_points();
        let mut elements = DMatrix::zeros(n, n);
        for (w, psi) in components {
            if psi.grid != grid {
                return Err(Error::GridMismatch("mixture components on different grids".into()));
            }
            if *w < 0.0 {
                return Err(Error::Config("mixture weights must be nonnegative".into()));
            }
            for i in 0..n {
                for j in 0..n {
                    elements[(i, j)] += psi.amplitudes[i] * psi.amplitudes[j].conj() * *w;
                }
            }
        }
        DensityMatrix::from_elements(grid, elements)
    }

    /// `I / n` on the given grid.
    pub fn maximally_mixed(grid: EnergyGrid) -> Self {
        let n = grid.n_points();
        let elements =
            DMatrix::from_diagonal_element(n, n, Complex64::new(1.0 / n as f64, 0.0));
        DensityMatrix { grid, elements }
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n_points()
    }

    pub fn elements(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.elements[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.diagonal().iter().sum()
    }

    /// Real diagonal (populations).
    pub fn populations(&self) -> Vec<f64> {
        self.elements.diagonal().iter().map(|z| z.re).collect()
    }

    /// Upper subdiagonal at offset `k`: entries `rho[i][i + k]`.
    pub fn subdiagonal(&self, k: usize) -> Result<Vec<Complex64>> {
        let n = self.n();
        if k >= n {
            return Err(Error::DimensionMismatch(format!(
                "subdiagonal offset {k} outside a {n}x{n} matrix"
            )));
        }
        Ok((0..n - k).map(|i| self.elements[(i, i + k)]).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.elements.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|rho[i][j] - conj(rho[j][i])|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.elements[(i, j)] - self.elements[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Check all density-matrix invariants: Hermiticity, unit trace and
    /// positivity within the given tolerances.
    pub fn validate_with(&self, tol: &Tolerances) -> Result<()> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let herm = self.hermiticity_deviation();
        if herm > tol.hermiticity_rel * scale {
            return Err(Error::Numerical(format!(
                "hermiticity deviation {herm:.3e} exceeds {:.1e} * max|rho| = {:.3e}",
                tol.hermiticity_rel,
                tol.hermiticity_rel * scale
            )));
        }
        let tr = self.trace();
        let tr_dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_dev > tol.trace_abs {
            return Err(Error::Numerical(format!(
                "trace deviates from 1 by {tr_dev:.3e} (tolerance {:.1e})",
                tol.trace_abs
            )));
        }
        let lam_min = min_eigenvalue(self)?;
        if lam_min < -tol.psd_min_eig {
            return Err(Error::Numerical(format!(
                "smallest eigenvalue {lam_min:.3e} below -{:.1e}",
                tol.psd_min_eig
            )));
        }
        Ok(())
    }

    /// [`DensityMatrix::validate_with`] using the default tolerances.
    pub fn validate(&self) -> Result<()> {
        self.validate_with(&Tolerances::default())
    }
}

/// Hermitian part `(rho + rho^dagger) / 2`.
pub fn hermitize(rho: &DensityMatrix) -> DensityMatrix {
    let h = (&rho.elements + rho.elements.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix { grid: rho.grid.clone(), elements: h }
}

/// Smallest eigenvalue of the hermitized matrix.
pub fn min_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    let h = hermitize(rho);
    let e = eigen::eigh(&h.elements)?;
    Ok(e.values[0])
}

/// Project onto the physical set: clip negative eigenvalues to zero, rebuild
/// and renormalize the trace to one. The input must be Hermitian within
/// `hermitize_max_rel`; it is symmetrized before decomposition.
pub fn project_psd(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let tol = Tolerances::default();
    let scale = rho.max_abs().max(f64::MIN_POSITIVE);
    let herm = rho.hermiticity_deviation();
    if herm > tol.hermitize_max_rel * scale {
        return Err(Error::DataValidation(format!(
            "input too far from Hermitian to symmetrize: deviation {herm:.3e} vs {:.3e}",
            tol.hermitize_max_rel * scale
        )));
    }
    let h = hermitize(rho);
    let e = eigen::eigh(&h.elements)?;
    let clipped: Vec<f64> = e.values.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput(
            "matrix is zero after clipping negative eigenvalues".into(),
        ));
    }
    let n = rho.n();
    let mut rebuilt = DMatrix::<Complex64>::zeros(n, n);
    for (k, &l) in clipped.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let v = e.vectors.column(k);
        let w = l / total;
        for i in 0..n {
            for j in 0..n {
                rebuilt[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    // force exact Hermitian symmetry against accumulation noise
    for i in 0..n {
        rebuilt[(i, i)] = Complex64::new(rebuilt[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (rebuilt[(i, j)] + rebuilt[(j, i)].conj()) * 0.5;
            rebuilt[(i, j)] = avg;
            rebuilt[(j, i)] = avg.conj();
        }
    }
    let out = DensityMatrix { grid: rho.grid.clone(), elements: rebuilt };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> EnergyGrid {
        EnergyGrid::new(0.0, 0.1, n).unwrap()
    }

    fn basis_wavepacket(n: usize, k: usize) -> Wavepacket {
        let mut a = DVector::zeros(n);
        a[k] = Complex64::new(1.0, 0.0);
        Wavepacket::new(grid(n), a).unwrap()
    }

    #[test]
    fn pure_state_is_valid() {
        let psi = Wavepacket::gaussian(&grid(32), 1.6, 0.3, 0.0).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        rho.validate().unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wavepacket_norm_enforced() {
        let mut a = DVector::zeros(4);
        a[0] = Complex64::new(2.0, 0.0);
        assert!(Wavepacket::new(grid(4), a.clone()).is_err());
        let w = Wavepacket::normalized(grid(4), a).unwrap();
        assert!((w.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitize_fixes_hermitian_input() {
        let psi = Wavepacket::gaussian(&grid(8), 0.4, 0.2, 1.5).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let h = hermitize(&rho);
        assert!((&h.elements - &rho.elements).norm() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_of_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(grid(5));
        let l = min_eigenvalue(&rho).unwrap();
        assert!((l - 0.2).abs() < 1e-12);
    }

    #[test]
    fn project_psd_clips_and_renormalizes() {
        // diag(0.75, 0.35, -0.10) -> diag(0.75, 0.35, 0) / 1.10
        let g = grid(3);
        let el = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.75, 0.0),
            Complex64::new(0.35, 0.0),
            Complex64::new(-0.10, 0.0),
        ]));
        let raw = DensityMatrix::from_elements(g, el).unwrap();
        let p = project_psd(&raw).unwrap();
        assert!((p.element(0, 0).re - 0.75 / 1.10).abs() < 1e-12);
        assert!((p.element(1, 1).re - 0.35 / 1.10).abs() < 1e-12);
        assert!(p.element(2, 2).re.abs() < 1e-12);
    }

    #[test]
    fn project_psd_is_fixed_point_on_psd_input() {
        let psi_a = basis_wavepacket(4, 0);
        let psi_b = basis_wavepacket(4, 2);
        let rho = DensityMatrix::from_mixture(&[(0.5, psi_a), (0.5, psi_b)]).unwrap();
        let p = project_psd(&rho).unwrap();
        assert!((p.elements() - rho.elements()).norm() < 1e-10);
    }

    #[test]
    fn project_psd_rejects_all_negative() {
        let g = grid(2);
        let el = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(-0.5, 0.0),
            Complex64::new(-0.5, 0.0),
        ]));
        let raw = DensityMatrix::from_elements(g, el).unwrap();
        assert!(matches!(project_psd(&raw), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn project_psd_stays_near_small_perturbation() {
        // random Hermitian perturbation of a pure state at scale 1e-3
        let g = grid(6);
        let psi = Wavepacket::gaussian(&g, 0.25, 0.12, 0.0).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let mut el = rho.elements().clone();
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..6 {
            for j in i..6 {
                let d = Complex64::new(next() * 1e-3, if i == j { 0.0 } else { next() * 1e-3 });
                el[(i, j)] += d;
                if i != j {
                    el[(j, i)] = el[(i, j)].conj();
                } else {
                    el[(i, i)] = Complex64::new(el[(i, i)].re, 0.0);
                }
            }
        }
        let tr: Complex64 = el.diagonal().iter().sum();
        el /= tr;
        let perturbed = DensityMatrix::from_elements(g, el).unwrap();
        let projected = project_psd(&perturbed).unwrap();
        let dist = (projected.elements() - perturbed.elements()).norm();
        assert!(dist < 1e-2, "projection moved matrix by {dist}");
    }

    #[test]
    fn project_psd_idempotent() {
        let g = grid(5);
        let mut el = DMatrix::<Complex64>::zeros(5, 5);
        for i in 0..5 {
            el[(i, i)] = Complex64::new(0.2, 0.0);
            if i + 1 < 5 {
                el[(i, i + 1)] = Complex64::new(0.19, 0.05);
                el[(i + 1, i)] = el[(i, i + 1)].conj();
            }
        }
        let raw = DensityMatrix::from_elements(g, el).unwrap();
        let p1 = project_psd(&raw).unwrap();
        let p2 = project_psd(&p1).unwrap();
        assert!((p1.elements() - p2.elements()).norm() < 1e-10);
    }
}
