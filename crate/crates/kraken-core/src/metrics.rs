//! State metrics: purity, concurrence and amplitude fidelity.

use nalgebra::DMatrix;

use crate::density::DensityMatrix;
use crate::eigen;
use crate::error::{Error, Result};

/// Purity `tr(rho^2)`, computed as `sum |rho[i][j]|^2` (equal for Hermitian
/// matrices). Clamped to `[0, 1]`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let s: f64 = rho.elements().iter().map(|z| z.norm_sqr()).sum();
    s.clamp(0.0, 1.0)
}

/// Concurrence of the two-level partner system, `sqrt(2 (1 - tr(rho^2)))`.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    (2.0 * (1.0 - purity(rho))).max(0.0).sqrt()
}

/// Uhlmann fidelity between the elementwise-modulus matrices of two states:
/// `tr sqrt(sqrt(r_b) r_a sqrt(r_b))` with `r = |rho|`.
///
/// Each modulus matrix is renormalized to unit trace and eigen-clipped
/// (negative eigenvalues set to zero, then renormalized again) before the
/// nested square roots; the elementwise modulus of a physical state can be
/// indefinite and the clip keeps the result real. Clamped to `[0, 1]`.
pub fn fidelity_amplitude(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<f64> {
    if rho_a.grid() != rho_b.grid() {
        return Err(Error::GridMismatch(
            "fidelity requires both states on the same grid".into(),
        ));
    }
    let ra = clipped_modulus_matrix(rho_a)?;
    let rb = clipped_modulus_matrix(rho_b)?;
    let sqrt_b = eigen::sqrt_psd_real(&rb)?;
    let inner = &sqrt_b * ra * &sqrt_b;
    // symmetrize against rounding before the outer root
    let inner = (&inner + inner.transpose()) * 0.5;
    let e = eigen::eigh_real(&inner)?;
    let f: f64 = e.values.iter().map(|&l| if l > 0.0 { l.sqrt() } else { 0.0 }).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `|rho|` elementwise, renormalized to unit trace, eigenvalues clipped at
/// zero, renormalized again.
fn clipped_modulus_matrix(rho: &DensityMatrix) -> Result<DMatrix<f64>> {
    let n = rho.n();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = rho.element(i, j).norm();
        }
    }
    let tr = r.trace();
    if tr <= 0.0 {
        return Err(Error::DegenerateInput("modulus matrix has zero trace".into()));
    }
    r /= tr;
    let e = eigen::eigh_real(&r)?;
    let clipped: Vec<f64> = e.values.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput(
            "modulus matrix is zero after eigenvalue clipping".into(),
        ));
    }
    let mut rebuilt = DMatrix::zeros(n, n);
    for (k, &l) in clipped.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let v = e.vectors.column(k);
        let w = l / total;
        for i in 0..n {
            for j in 0..n {
                rebuilt[(i, j)] += v[i] * v[j] * w;
            }
        }
    }
    Ok(rebuilt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Wavepacket;
    use crate::grid::EnergyGrid;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn grid(n: usize) -> EnergyGrid {
        EnergyGrid::new(0.0, 0.05, n).unwrap()
    }

    fn basis(n: usize, k: usize) -> Wavepacket {
        let mut a = DVector::zeros(n);
        a[k] = Complex64::new(1.0, 0.0);
        Wavepacket::new(grid(n), a).unwrap()
    }

    #[test]
    fn purity_of_pure_state_is_one() {
        let psi = Wavepacket::gaussian(&grid(24), 0.6, 0.15, 2.0).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        assert!((purity(&rho) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn purity_of_maximally_mixed_4x4() {
        let rho = DensityMatrix::maximally_mixed(grid(4));
        assert!((purity(&rho) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn purity_of_orthogonal_two_component_mixture() {
        // (1/3)|a><a| + (2/3)|b><b| with <a|b> = 0 gives 1/9 + 4/9 = 5/9
        let rho = DensityMatrix::from_mixture(&[
            (1.0 / 3.0, basis(6, 1)),
            (2.0 / 3.0, basis(6, 4)),
        ])
        .unwrap();
        assert!((purity(&rho) - 5.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn purity_matches_explicit_matrix_product() {
        let rho = DensityMatrix::from_mixture(&[
            (0.3, Wavepacket::gaussian(&grid(16), 0.3, 0.1, 0.0).unwrap()),
            (0.7, Wavepacket::gaussian(&grid(16), 0.5, 0.12, 1.0).unwrap()),
        ])
        .unwrap();
        let prod = rho.elements() * rho.elements();
        let tr: Complex64 = prod.diagonal().iter().sum();
        assert!((purity(&rho) - tr.re).abs() < 1e-10);
    }

    #[test]
    fn concurrence_of_pure_state_is_zero() {
        let psi = Wavepacket::gaussian(&grid(12), 0.3, 0.1, 0.0).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        assert!(concurrence(&rho) < 1e-6);
    }

    #[test]
    fn concurrence_values_for_known_purities() {
        // C = sqrt(2 (1 - gamma))
        let c61 = (2.0f64 * (1.0 - 0.61)).sqrt();
        assert!((c61 - 0.883).abs() < 1e-3);
        let c65 = (2.0f64 * (1.0 - 0.65)).sqrt();
        assert!((c65 - 0.837).abs() < 1e-3);
    }

    #[test]
    fn self_fidelity_is_one() {
        let rho = DensityMatrix::from_mixture(&[
            (0.4, Wavepacket::gaussian(&grid(12), 0.25, 0.08, 0.0).unwrap()),
            (0.6, Wavepacket::gaussian(&grid(12), 0.35, 0.08, 0.0).unwrap()),
        ])
        .unwrap();
        let f = fidelity_amplitude(&rho, &rho).unwrap();
        assert!((f - 1.0).abs() < 1e-8);
    }

    #[test]
    fn orthogonal_projectors_have_zero_fidelity() {
        let a = DensityMatrix::from_pure(&basis(8, 1));
        let b = DensityMatrix::from_pure(&basis(8, 5));
        let f = fidelity_amplitude(&a, &b).unwrap();
        assert!(f.abs() < 1e-8);
    }

    #[test]
    fn fidelity_rejects_grid_mismatch() {
        let a = DensityMatrix::maximally_mixed(grid(4));
        let b = DensityMatrix::maximally_mixed(EnergyGrid::new(0.0, 0.06, 4).unwrap());
        assert!(matches!(fidelity_amplitude(&a, &b), Err(Error::GridMismatch(_))));
    }
}
