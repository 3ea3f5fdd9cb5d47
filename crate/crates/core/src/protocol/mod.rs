//! Reading-protocol simulation: codebooks, measurements, adaptive and non-adaptive strategies,
//! the zero-error example and the reduction of adaptive protocols on environment-parametrized cells.

mod codebook;
mod environment;
mod simulate;
mod zero_error;

pub use codebook::{pgm, Codebook, Povm};
pub use environment::{induced_environment_povm, MAX_ENV_DIM, MAX_ENV_ROUNDS};
pub use simulate::{
    adaptive_final_state, nonadaptive_outputs, simulate_adaptive, simulate_nonadaptive, subsystem_permutation,
    AdaptiveStrategy, Decoder, ProtocolOutcome,
};
pub use zero_error::{
    certificate_for_pair, hhlw_adaptive_strategy, hhlw_codebook, hhlw_p_operator, hhlw_pair_operator,
    nonadaptive_impossibility_certificate, ImpossibilityCertificate,
};
