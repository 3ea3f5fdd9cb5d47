use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, partial_trace_multi, CMatrix, DensityOperator};

/// `−Σ λ log₂ λ` over the positive entries of a spectrum.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    let h: f64 = values.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum();
    h.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Entropy of a (possibly sub-normalized) PSD matrix, such as a marginal.
pub fn matrix_entropy(m: &CMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&hermitian_eig(m)?.values))
}

fn marginal_entropy(rho: &DensityOperator, dims: &[usize], keep: &[usize]) -> Result<f64> {
    if keep.len() == dims.len() {
        return Ok(entropy(rho));
    }
    matrix_entropy(&partial_trace_multi(rho.matrix(), dims, keep)?)
}

/// `H(A|B) = H(AB) − H(B)` for a state on `A ⊗ B`.
pub fn conditional_entropy(rho: &DensityOperator, dims: (usize, usize)) -> Result<f64> {
    let d = [dims.0, dims.1];
    Ok(marginal_entropy(rho, &d, &[0, 1])? - marginal_entropy(rho, &d, &[1])?)
}

/// `I(A;B) = H(A) + H(B) − H(AB)`.
pub fn mutual_information(rho: &DensityOperator, dims: (usize, usize)) -> Result<f64> {
    let d = [dims.0, dims.1];
    let i = marginal_entropy(rho, &d, &[0])? + marginal_entropy(rho, &d, &[1])? - entropy(rho);
    Ok(i.max(0.0))
}

/// `I(A;B|C) = H(AC) + H(BC) − H(ABC) − H(C)` for a state on `A ⊗ B ⊗ C`.
pub fn conditional_mutual_information(rho: &DensityOperator, dims: [usize; 3]) -> Result<f64> {
    let i = marginal_entropy(rho, &dims, &[0, 2])? + marginal_entropy(rho, &dims, &[1, 2])?
        - entropy(rho)
        - marginal_entropy(rho, &dims, &[2])?;
    Ok(i.max(0.0))
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of_spectrum(&[p, 1.0 - p])
}

/// `g(y) = (y+1) log₂(y+1) − y log₂ y`, the entropy of a thermal state with mean photon number `y`.
pub fn g(y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::OutOfRange { name: "y", value: y, allowed: "finite y >= 0" });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    Ok((y + 1.0) * (y + 1.0).log2() - y * y.log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn entropy_examples() {
        assert!((entropy(&DensityOperator::maximally_mixed(8)) - 3.0).abs() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        assert!(entropy(&random::pure_state(5, &mut rng)) < 1e-10);
    }

    #[test]
    fn thermal_fock_sum_matches_g() {
        let nb: f64 = 1.0;
        let probs: Vec<f64> = (0..200).map(|n| (nb / (nb + 1.0)).powi(n) / (nb + 1.0)).collect();
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let h = entropy_of_spectrum(&probs);
        assert!((h - g(1.0).unwrap()).abs() < 1e-6);
        assert!((g(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(g(-1.0).is_err());
    }

    #[test]
    fn bell_state_information() {
        let phi = DensityOperator::maximally_entangled(2);
        assert!((mutual_information(&phi, (2, 2)).unwrap() - 2.0).abs() < 1e-12);
        assert!((conditional_entropy(&phi, (2, 2)).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cmi_of_product_with_conditioning_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let ab = random::density(4, 4, &mut rng);
        let c = random::density(2, 2, &mut rng);
        let abc = ab.tensor(&c);
        let cmi = conditional_mutual_information(&abc, [2, 2, 2]).unwrap();
        assert!((cmi - mutual_information(&ab, (2, 2)).unwrap()).abs() < 1e-10);
    }
}
