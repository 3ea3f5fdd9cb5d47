use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityOperator};

use super::entropy::entropy;

/// Classical–quantum ensemble `{p(x), θ^x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CqEnsemble {
    probs: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl CqEnsemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        if probs.len() != states.len() || states.is_empty() {
            return Err(Error::Invalid("ensemble needs one probability per state".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidState("ensemble probabilities must be nonnegative".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("ensemble probabilities sum to {s}, not 1")));
        }
        let d = states[0].dim();
        if let Some(bad) = states.iter().find(|t| t.dim() != d) {
            return Err(Error::DimensionMismatch { context: "ensemble states", expected: d, found: bad.dim() });
        }
        Ok(Self { probs, states })
    }

    pub fn uniform(states: Vec<DensityOperator>) -> Result<Self> {
        let n = states.len().max(1);
        Self::new(vec![1.0 / n as f64; states.len()], states)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `θ̄ = Σ_x p(x) θ^x`.
    pub fn average(&self) -> DensityOperator {
        average_state(&self.probs, &self.states)
    }

    /// Block-diagonal cq state `θ_XE = Σ_x p(x)|x⟩⟨x| ⊗ θ^x`.
    pub fn cq_state(&self) -> DensityOperator {
        let d = self.dim();
        let mut m = CMatrix::zeros(self.len() * d, self.len() * d);
        for (x, (p, t)) in self.probs.iter().zip(&self.states).enumerate() {
            for i in 0..d {
                for j in 0..d {
                    m[(x * d + i, x * d + j)] = t.matrix()[(i, j)] * *p;
                }
            }
        }
        DensityOperator::new_unchecked(m)
    }
}

pub(crate) fn average_state(probs: &[f64], states: &[DensityOperator]) -> DensityOperator {
    let d = states[0].dim();
    let mut acc = CMatrix::zeros(d, d);
    for (p, t) in probs.iter().zip(states) {
        if *p != 0.0 {
            acc = &acc + &t.matrix().scale_real(*p);
        }
    }
    DensityOperator::new_unchecked(acc)
}

/// Holevo information `H(Σ_x p θ^x) − Σ_x p H(θ^x)` in bits.
pub fn holevo_information(ens: &CqEnsemble) -> f64 {
    let avg = entropy(&ens.average());
    let mean: f64 = ens.probs.iter().zip(&ens.states).map(|(p, t)| if *p > 0.0 { p * entropy(t) } else { 0.0 }).sum();
    (avg - mean).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::MemoryCell;
    use crate::divergences::relative_entropy;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn holevo_examples() {
        let basis: Vec<DensityOperator> = (0..4)
            .map(|i| DensityOperator::diagonal(&(0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>()).unwrap())
            .collect();
        assert!((holevo_information(&CqEnsemble::uniform(basis).unwrap()) - 2.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let t = random::density(3, 3, &mut rng);
        assert!(holevo_information(&CqEnsemble::uniform(vec![t.clone(), t.clone(), t]).unwrap()) < 1e-12);

        let chois = MemoryCell::erasure(2, 0.25).unwrap().choi_states();
        assert!((holevo_information(&CqEnsemble::uniform(chois).unwrap()) - 1.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_probabilities() {
        let t = DensityOperator::maximally_mixed(2);
        assert!(CqEnsemble::new(vec![0.6, 0.6], vec![t.clone(), t.clone()]).is_err());
        assert!(CqEnsemble::new(vec![1.0], vec![t.clone(), t]).is_err());
    }

    #[test]
    fn holevo_is_the_infimum_over_sigma() {
        // D(θ_XE‖θ_X⊗σ) over a grid of diagonal-plus-coherence qubit σ never drops below the Holevo value
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let states = vec![random::density(2, 2, &mut rng), random::density(2, 2, &mut rng)];
        let ens = CqEnsemble::new(vec![0.3, 0.7], states).unwrap();
        let chi = holevo_information(&ens);
        let px = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let at_avg = relative_entropy(&ens.cq_state(), &px.tensor(&ens.average())).unwrap().value;
        assert!((at_avg - chi).abs() < 1e-9);
        let mut best = f64::INFINITY;
        for i in 1..40 {
            for j in -10..=10 {
                let a = i as f64 / 40.0;
                let c = 0.5 * (a * (1.0 - a)).sqrt() * j as f64 / 10.0;
                let s = CMatrix::from_real(2, 2, &[a, c, c, 1.0 - a]).unwrap();
                if let Ok(sigma) = DensityOperator::new(s) {
                    best = best.min(relative_entropy(&ens.cq_state(), &px.tensor(&sigma)).unwrap().value);
                }
            }
        }
        assert!(best >= chi - 1e-9);
    }
}
