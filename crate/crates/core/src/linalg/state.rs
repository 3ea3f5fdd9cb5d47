use num_complex::Complex64;

use super::eigen::{hermitian_eig, sqrt_psd, trace_norm, HermitianEigen, DEFAULT_TOL};
use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// A validated density operator: Hermitian, unit trace and positive semi-definite within `tol`.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    tol: f64,
}

impl PartialEq for DensityOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tol(matrix, DEFAULT_TOL)
    }

    pub fn with_tol(matrix: CMatrix, tol: f64) -> Result<Self> {
        if !(tol >= 0.0) {
            return Err(Error::OutOfRange { name: "tol", value: tol, allowed: "tol >= 0" });
        }
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let dev = matrix.hermitian_deviation();
        if dev > tol * matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:.3e} is negative")));
        }
        Ok(Self { matrix, tol })
    }

    /// Wraps a matrix known to be a state (e.g. the output of a channel); only symmetrizes it.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix: matrix.hermitian_part(), tol: DEFAULT_TOL }
    }

    /// `|ψ⟩⟨ψ|` for a nonzero vector, normalized.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("pure state vector has zero or non-finite norm".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::new_unchecked(CMatrix::outer(&v)))
    }

    /// Maximally mixed state `π_d = I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self::new_unchecked(CMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    /// `Φ_RA` with `|Φ⟩ = d^{-1/2} Σ_j |j⟩_R|j⟩_A`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        let amp = 1.0 / (d as f64).sqrt();
        for j in 0..d {
            v[j * d + j] = Complex64::new(amp, 0.0);
        }
        Self::new_unchecked(CMatrix::outer(&v))
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        if probs.iter().any(|&p| !(p >= -DEFAULT_TOL) || !p.is_finite()) {
            return Err(Error::InvalidState("diagonal entries must be nonnegative".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidState(format!("diagonal entries sum to {s}, not 1")));
        }
        Ok(Self::new_unchecked(CMatrix::diag_real(probs)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eig(&self) -> HermitianEigen {
        hermitian_eig(&self.matrix).expect("density operator is Hermitian")
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().values
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self::new_unchecked(self.matrix.kron(&other.matrix))
    }

    /// Unitary (or isometric) conjugation `U ρ U†`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityOperator> {
        if u.cols() != self.dim() {
            return Err(Error::DimensionMismatch { context: "conjugation", expected: self.dim(), found: u.cols() });
        }
        Ok(Self::new_unchecked(self.matrix.conjugate_by(u)))
    }

    /// Convex combination `Σ_i w_i ρ_i`.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<DensityOperator> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Invalid("mixture needs one weight per state".into()));
        }
        let d = states[0].dim();
        let mut acc = CMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch { context: "mixture", expected: d, found: s.dim() });
            }
            acc = &acc + &s.matrix.scale_real(*w);
        }
        DensityOperator::new(acc)
    }
}

/// Uhlmann fidelity `‖√ρ √σ‖₁²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { context: "fidelity", expected: rho.dim(), found: sigma.dim() });
    }
    let sr = sqrt_psd(rho.matrix())?;
    let inner = sigma.matrix().conjugate_by(&sr);
    let root = sqrt_psd(&inner.hermitian_part())?;
    let f = root.trace().re.powi(2);
    Ok(f.clamp(0.0, 1.0))
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { context: "trace distance", expected: rho.dim(), found: sigma.dim() });
    }
    Ok(0.5 * trace_norm(&(rho.matrix() - sigma.matrix()))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, Keep};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation_rejects_bad_states() {
        assert!(DensityOperator::new(CMatrix::diag_real(&[0.6, 0.6])).is_err());
        assert!(DensityOperator::new(CMatrix::diag_real(&[1.2, -0.2])).is_err());
        assert!(DensityOperator::new(CMatrix::diag_real(&[0.3, 0.7])).is_ok());
    }

    #[test]
    fn maximally_entangled_reduces_to_maximally_mixed() {
        let phi = DensityOperator::maximally_entangled(3);
        let r = partial_trace(phi.matrix(), (3, 3), Keep::First).unwrap();
        assert!(r.max_abs_diff(DensityOperator::maximally_mixed(3).matrix()) < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random::density(3, 3, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);

        let zero = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let one = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-14);

        let a = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let b = DensityOperator::diagonal(&[0.4, 0.6]).unwrap();
        let oracle = (0.28f64.sqrt() + 0.18f64.sqrt()).powi(2);
        assert!((fidelity(&a, &b).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = DensityOperator::maximally_mixed(2);
        let b = DensityOperator::maximally_mixed(3);
        assert!(fidelity(&a, &b).is_err());
    }
}
