use rayon::prelude::*;

use crate::capacity::{blahut_arimoto, CapacityReport};
use crate::divergences::{holevo_information, CqEnsemble};
use crate::error::{check_range, Error, Result};
use crate::linalg::DensityOperator;

use super::covariance::{gaussian_fidelity_1mode, tmsv_through_thermal, two_mode_squeezer, CovarianceMatrix};

/// Largest admissible truncation error `1 − Tr θ_K`.
pub const TRUNCATION_TOL: f64 = 1e-9;
const MAX_CUTOFF: usize = 20_000;

/// `N^k / (N+1)^{k+1}` for `k < cutoff`, without renormalization.
pub fn thermal_fock_probabilities(n_b: f64, cutoff: usize) -> Result<Vec<f64>> {
    check_range("N_B", n_b, 0.0, f64::INFINITY, "N_B >= 0")?;
    if cutoff == 0 {
        return Err(Error::OutOfRange { name: "cutoff", value: 0.0, allowed: "cutoff >= 1" });
    }
    let ratio = n_b / (n_b + 1.0);
    let mut p = Vec::with_capacity(cutoff);
    let mut w = 1.0 / (n_b + 1.0);
    for _ in 0..cutoff {
        p.push(w);
        w *= ratio;
    }
    Ok(p)
}

/// Smallest cutoff `K` with tail mass `(N/(N+1))^K ≤ tol`.
pub fn fock_cutoff_for(n_b: f64, tol: f64) -> Result<usize> {
    check_range("N_B", n_b, 0.0, f64::INFINITY, "N_B >= 0")?;
    if n_b == 0.0 {
        return Ok(1);
    }
    let k = (tol.ln() / (n_b / (n_b + 1.0)).ln()).ceil().max(1.0);
    if k > MAX_CUTOFF as f64 {
        return Err(Error::Guard(format!("N_B = {n_b} needs a Fock cutoff above {MAX_CUTOFF}")));
    }
    Ok(k as usize)
}

/// Thermal state truncated to `cutoff` Fock levels and renormalized.
///
/// Fails when the discarded tail mass exceeds [`TRUNCATION_TOL`].
pub fn thermal_state_fock(n_b: f64, cutoff: usize) -> Result<DensityOperator> {
    let p = thermal_fock_probabilities(n_b, cutoff)?;
    let mass: f64 = p.iter().sum();
    if mass < 1.0 - TRUNCATION_TOL {
        return Err(Error::Domain(format!("cutoff {cutoff} keeps only {mass:.12} of the thermal state with N_B = {n_b}")));
    }
    DensityOperator::diagonal(&p.iter().map(|x| x / mass).collect::<Vec<_>>())
}

/// Finite family of thermal environment states `θ(x)` with prior `p_X`, on a common Fock cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    probs: Vec<f64>,
    photon_numbers: Vec<f64>,
    cutoff: usize,
}

impl ThermalEnsemble {
    pub fn new(probs: Vec<f64>, photon_numbers: Vec<f64>, cutoff: usize) -> Result<Self> {
        if photon_numbers.is_empty() || probs.len() != photon_numbers.len() {
            return Err(Error::DimensionMismatch { context: "thermal ensemble", expected: photon_numbers.len(), found: probs.len() });
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState("p_X must be a probability vector".into()));
        }
        for &x in &photon_numbers {
            let mass: f64 = thermal_fock_probabilities(x, cutoff)?.iter().sum();
            if mass < 1.0 - TRUNCATION_TOL {
                return Err(Error::Domain(format!("cutoff {cutoff} too small for x = {x} (kept mass {mass:.12})")));
            }
        }
        Ok(ThermalEnsemble { probs, photon_numbers, cutoff })
    }

    /// Uses the smallest cutoff meeting the truncation criterion for every member.
    pub fn with_auto_cutoff(probs: Vec<f64>, photon_numbers: Vec<f64>) -> Result<Self> {
        let cutoff = photon_numbers
            .iter()
            .map(|&x| fock_cutoff_for(x, TRUNCATION_TOL))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(1);
        Self::new(probs, photon_numbers, cutoff)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn photon_numbers(&self) -> &[f64] {
        &self.photon_numbers
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn states(&self) -> Result<Vec<DensityOperator>> {
        self.photon_numbers.par_iter().map(|&x| thermal_state_fock(x, self.cutoff)).collect()
    }

    /// `H(θ̄) − Σ_x p(x) H(θ^x)` at the ensemble's own prior.
    pub fn holevo(&self) -> Result<f64> {
        Ok(holevo_information(&CqEnsemble::new(self.probs.clone(), self.states()?)?))
    }
}

/// `max_p [H(θ̄) − Σ_x p(x) H(θ^x)]` over the ensemble's labels; the prior in `ens` is ignored.
///
/// The transmissivity of the cell does not enter: the value depends on the environment states only.
pub fn thermal_cell_capacity(ens: &ThermalEnsemble, tol: f64) -> Result<CapacityReport> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange { name: "tol", value: tol, allowed: "tol > 0" });
    }
    blahut_arimoto(&ens.states()?, tol, 1_000_000)
}

/// Fidelity between the first mode of `S^η(N_S) V S^η(N_S)ᵀ` and the thermal state `θ(x)`.
pub fn squeezed_environment_fidelity(eta: f64, n_s: f64, x: f64) -> Result<f64> {
    let v = tmsv_through_thermal(eta, n_s, x)?.transform(&two_mode_squeezer(eta, n_s)?)?;
    gaussian_fidelity_1mode(&v.reduced(&[0])?, &CovarianceMatrix::thermal(&[x])?)
}
