//! Entropies and divergences in bits: von Neumann entropy, relative entropy and its variance,
//! sandwiched Rényi divergences, hypothesis-testing divergence, Holevo information and the
//! standard normal helpers used by second-order bounds.

mod entropy;
mod holevo;
mod hypothesis;
mod normal;
mod relative;

pub use entropy::{
    binary_entropy, conditional_entropy, conditional_mutual_information, entropy, entropy_of_spectrum, g,
    matrix_entropy, mutual_information,
};
pub use holevo::{holevo_information, CqEnsemble};
pub use hypothesis::{classical_hypothesis_testing, hypothesis_testing, iid_classical_hypothesis_testing};
pub use normal::{std_normal_cdf, std_normal_inverse};
pub use relative::{
    relative_entropy, relative_entropy_variance, sandwiched_renyi, DivergenceResult, SUPPORT_LEAK_TOL,
};

pub(crate) use holevo::average_state;
