//! Gaussian covariance-matrix tools and the thermal memory cell.
//!
//! Covariance matrices use `(q_1, …, q_m, p_1, …, p_m)` ordering and the convention vacuum `= ½ I`.

mod covariance;
mod thermal;

pub use covariance::{
    gaussian_entropy, gaussian_fidelity_1mode, squeezed_residuals, squeezer_gammas, symplectic_eigenvalues,
    symplectic_form, tmsv_through_thermal, two_mode_squeezer, CovarianceMatrix, SqueezedResiduals, SymplecticMatrix,
};
pub use thermal::{
    fock_cutoff_for, squeezed_environment_fidelity, thermal_cell_capacity, thermal_fock_probabilities,
    thermal_state_fock, ThermalEnsemble, TRUNCATION_TOL,
};
