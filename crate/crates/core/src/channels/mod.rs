//! Channels in Kraus form, Choi states, the Heisenberg–Weyl group, covariance checks,
//! teleportation simulation and memory cells.

mod cell;
mod kraus;
mod teleport;
mod weyl;

pub use cell::{hhlw_kraus, EnvParamCell, MemoryCell};
pub use kraus::{apply_from_choi, convex_combination, KrausChannel, COMPLETENESS_TOL};
pub use teleport::{
    bell_vector, erasure_corrections, teleportation_interaction, teleportation_simulate, weyl_corrections,
};
pub use weyl::{
    check_covariance, heisenberg_weyl, hermitian_basis, x_shift, z_phase, CovarianceCheck, GroupRepresentation,
};
