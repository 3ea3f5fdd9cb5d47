use crate::divergences::{entropy, CqEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{log2_psd, DensityOperator};

/// Result of a Holevo-capacity maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    /// Holevo information at the returned distribution (a certified lower bound), bits/use.
    pub value: f64,
    /// `max_x D(θ^x‖θ̄) − value`; the optimum lies in `[value, value + gap]`.
    pub gap: f64,
    pub optimizer: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every iteration.
    pub history: Vec<f64>,
    /// `D(θ^x‖θ̄)` at the returned distribution.
    pub divergences: Vec<f64>,
}

/// `D(θ^x‖θ̄_p)` for every state, computed with one decomposition of `θ̄`.
pub(crate) fn divergences_to_average(states: &[DensityOperator], probs: &[f64], entropies: &[f64]) -> Result<(Vec<f64>, DensityOperator)> {
    let avg = crate::divergences::average_state(probs, states);
    let log_avg = log2_psd(avg.matrix())?;
    let d = states
        .iter()
        .zip(entropies)
        .map(|(t, h)| (-h - t.matrix().trace_product(&log_avg).re).max(0.0))
        .collect();
    Ok((d, avg))
}

/// Blahut–Arimoto iteration for `max_p I(X;E)` over a finite family of states.
///
/// Starts from the uniform distribution and applies `p'(x) ∝ p(x) 2^{D(θ^x‖θ̄_p)}` until
/// `max_x D(θ^x‖θ̄_p) − I_p ≤ tol`. Hitting `max_iter` returns the partial result with its gap.
pub fn blahut_arimoto(states: &[DensityOperator], tol: f64, max_iter: usize) -> Result<CapacityReport> {
    if states.is_empty() {
        return Err(Error::Invalid("Blahut-Arimoto needs at least one state".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange { name: "tol", value: tol, allowed: "tol > 0" });
    }
    // validates common dimension
    CqEnsemble::uniform(states.to_vec())?;
    let n = states.len();
    let entropies: Vec<f64> = states.iter().map(entropy).collect();
    let mut p = vec![1.0 / n as f64; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (d, _) = divergences_to_average(states, &p, &entropies)?;
        let value: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gap = (upper - value).max(0.0);
        history.push(value);
        if gap <= tol || iterations >= max_iter {
            return Ok(CapacityReport {
                value,
                gap,
                optimizer: p,
                iterations,
                converged: gap <= tol,
                history,
                divergences: d,
            });
        }
        // shift by the maximum to keep the exponentials bounded
        let w: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a * (b - upper).exp2()).collect();
        let s: f64 = w.iter().sum();
        p = w.into_iter().map(|x| x / s).collect();
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{KrausChannel, MemoryCell};
    use crate::capacity::ea_capacity_from_choi;

    #[test]
    fn orthogonal_pair() {
        let a = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
        let r = blahut_arimoto(&[a, b], 1e-10, 1000).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.optimizer[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn covariant_cells() {
        let r = blahut_arimoto(&MemoryCell::erasure(2, 0.25).unwrap().choi_states(), 1e-9, 10_000).unwrap();
        assert!((r.value - 1.5).abs() < 1e-6);

        let r = blahut_arimoto(&MemoryCell::depolarizing(2, 0.3).unwrap().choi_states(), 1e-9, 10_000).unwrap();
        let ea = ea_capacity_from_choi(&KrausChannel::depolarizing(2, 0.3).unwrap()).unwrap();
        assert!((r.value - ea).abs() < 1e-6);
    }

    #[test]
    fn objective_is_monotone_and_certified() {
        let states = vec![
            DensityOperator::diagonal(&[0.9, 0.1]).unwrap(),
            DensityOperator::diagonal(&[0.2, 0.8]).unwrap(),
            DensityOperator::diagonal(&[0.5, 0.5]).unwrap(),
        ];
        let r = blahut_arimoto(&states, 1e-10, 100_000).unwrap();
        assert!(r.converged && r.gap <= 1e-10);
        for w in r.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-14);
        }
        // the useless middle state gets (almost) no weight
        assert!(r.optimizer[2] < 1e-3);
    }

    #[test]
    fn partial_result_when_iterations_run_out() {
        let states = vec![
            DensityOperator::diagonal(&[0.9, 0.1]).unwrap(),
            DensityOperator::diagonal(&[0.3, 0.7]).unwrap(),
        ];
        let r = blahut_arimoto(&states, 1e-15, 2).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
        assert!(r.gap > 0.0);
    }
}
