//! Dense complex linear algebra: matrices, Hermitian spectral decomposition,
//! spectral functions, partial traces and state-level distances.
//!
//! Everything here is a pure function of its inputs. Logarithms are base 2.

mod eigen;
mod matrix;
mod state;

pub use eigen::{
    hermitian_eig, hermitian_eig_tol, log2_psd, partial_trace, partial_trace_multi, power_psd, spectral_function,
    spectral_weights, sqrt_psd, support_projector, trace_norm, HermitianEigen, Keep, ZeroPolicy, DEFAULT_TOL,
    SUPPORT_REL_TOL,
};
pub use matrix::{basis_vector, kron_all, sum_matrices, CMatrix};
pub use state::{fidelity, trace_distance, DensityOperator};

pub(crate) use matrix::{ONE, ZERO};
