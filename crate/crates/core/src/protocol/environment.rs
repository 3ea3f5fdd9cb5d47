use crate::channels::EnvParamCell;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, CMatrix, Keep};

use super::codebook::Povm;
use super::simulate::AdaptiveStrategy;

/// Largest number of rounds accepted by [`induced_environment_povm`].
pub const MAX_ENV_ROUNDS: usize = 3;
/// Largest total dimension of `E^n`.
pub const MAX_ENV_DIM: usize = 4096;

/// POVM `{Γ^{m̂}}` on `E^n` with `Tr{Γ^{m̂} ⊗_i θ^{x_i}}` equal to the probability that the
/// strategy outputs `m̂` on codeword `x^n`.
///
/// Each final element is pulled back through the rounds in the Heisenberg picture: the interaction
/// `F: A ⊗ E → B` exposes one environment factor per round and the adaptors act on `R ⊗ B`.
/// Finally `Γ = Tr_{R₁A₁}[(ρ_{R₁A₁} ⊗ I) Y]`.
pub fn induced_environment_povm(cell: &EnvParamCell, strat: &AdaptiveStrategy, n: usize) -> Result<Povm> {
    if n == 0 || n > MAX_ENV_ROUNDS {
        return Err(Error::Guard(format!("rounds n = {n} outside 1..={MAX_ENV_ROUNDS}")));
    }
    if strat.rounds() != n {
        return Err(Error::DimensionMismatch { context: "strategy rounds", expected: n, found: strat.rounds() });
    }
    if cell.in_dim() != strat.a_dim() || cell.out_dim() != strat.b_dim() {
        return Err(Error::DimensionMismatch { context: "cell vs strategy dimensions", expected: strat.a_dim(), found: cell.in_dim() });
    }
    let e = cell.env_dim();
    let env_total = e.checked_pow(n as u32).filter(|&t| t <= MAX_ENV_DIM);
    let env_total = env_total.ok_or_else(|| Error::Guard(format!("environment dimension {e}^{n} exceeds {MAX_ENV_DIM}")))?;
    let f = cell.interaction();
    let (a, b) = (strat.a_dim(), strat.b_dim());
    let r = strat.r_dims();
    let mut elements = Vec::with_capacity(strat.final_povm().len());
    for lambda in strat.final_povm().elements() {
        // operator on [R_i, B_i, E_{i+1}..E_n]
        let mut y = lambda.kron(&CMatrix::identity(1));
        for i in (0..n).rev() {
            let rest = e.pow((n - 1 - i) as u32);
            y = f.adjoint_on_subsystem(&y, &[r[i], b, rest], 1)?;
            // now on [R_i, A_i, E_i, E_{i+1}..E_n]
            if i > 0 {
                let ad = &strat.adaptors()[i - 1];
                y = ad.adjoint_on_subsystem(&y, &[r[i] * a, e * rest], 0)?;
            }
        }
        let rho = strat.initial().matrix().kron(&CMatrix::identity(env_total));
        let gamma = partial_trace(&rho.matmul(&y), (r[0] * a, env_total), Keep::Second)?;
        elements.push(gamma.hermitian_part());
    }
    Povm::new(elements)
}
