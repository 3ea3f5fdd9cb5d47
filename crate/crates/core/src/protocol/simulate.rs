use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::{KrausChannel, MemoryCell};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityOperator};

use super::codebook::{pgm, Codebook, Povm};

/// Transmitter state, interleaved adaptors `R_i B_i → R_{i+1} A_{i+1}` and a final measurement on `R_n B_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveStrategy {
    initial: DensityOperator,
    r_dims: Vec<usize>,
    a_dim: usize,
    b_dim: usize,
    adaptors: Vec<KrausChannel>,
    final_povm: Povm,
}

impl AdaptiveStrategy {
    /// `r_dims[i]` is the dimension of `R_{i+1}`; its length fixes the number of rounds.
    pub fn new(
        initial: DensityOperator,
        r_dims: Vec<usize>,
        a_dim: usize,
        b_dim: usize,
        adaptors: Vec<KrausChannel>,
        final_povm: Povm,
    ) -> Result<Self> {
        let n = r_dims.len();
        if n == 0 {
            return Err(Error::Invalid("a strategy needs at least one round".into()));
        }
        if adaptors.len() != n - 1 {
            return Err(Error::DimensionMismatch { context: "number of adaptors", expected: n - 1, found: adaptors.len() });
        }
        if initial.dim() != r_dims[0] * a_dim {
            return Err(Error::DimensionMismatch { context: "initial state R1 A1", expected: r_dims[0] * a_dim, found: initial.dim() });
        }
        for (i, ad) in adaptors.iter().enumerate() {
            if ad.in_dim() != r_dims[i] * b_dim {
                return Err(Error::DimensionMismatch { context: "adaptor input R_i B_i", expected: r_dims[i] * b_dim, found: ad.in_dim() });
            }
            if ad.out_dim() != r_dims[i + 1] * a_dim {
                return Err(Error::DimensionMismatch {
                    context: "adaptor output R_{i+1} A_{i+1}",
                    expected: r_dims[i + 1] * a_dim,
                    found: ad.out_dim(),
                });
            }
        }
        if final_povm.dim() != r_dims[n - 1] * b_dim {
            return Err(Error::DimensionMismatch { context: "final POVM on R_n B_n", expected: r_dims[n - 1] * b_dim, found: final_povm.dim() });
        }
        Ok(AdaptiveStrategy { initial, r_dims, a_dim, b_dim, adaptors, final_povm })
    }

    /// The adaptive form of a non-adaptive protocol: the unused inputs `A_2 … A_n` and the
    /// outputs already produced are buffered in the reference system and permuted into place.
    pub fn from_nonadaptive(
        transmitter: &DensityOperator,
        r_dim: usize,
        a_dim: usize,
        b_dim: usize,
        n: usize,
        final_povm: Povm,
    ) -> Result<Self> {
        let expected = r_dim * a_dim.pow(n as u32);
        if n == 0 || transmitter.dim() != expected {
            return Err(Error::DimensionMismatch { context: "transmitter R A^n", expected, found: transmitter.dim() });
        }
        // [R, A1, A2..An] → [R, A2..An, A1]
        let mut dims = vec![r_dim];
        dims.extend(std::iter::repeat_n(a_dim, n));
        let mut perm: Vec<usize> = vec![0];
        perm.extend(2..=n);
        perm.push(1);
        let u = subsystem_permutation(&dims, &perm);
        let initial = DensityOperator::new_unchecked(transmitter.matrix().conjugate_by(&u));
        let mut adaptors = Vec::with_capacity(n.saturating_sub(1));
        let mut r_dims = Vec::with_capacity(n);
        for i in 1..=n {
            // R_i = [R, B_1..B_{i-1}, A_{i+1}..A_n]
            r_dims.push(r_dim * b_dim.pow(i as u32 - 1) * a_dim.pow((n - i) as u32));
        }
        for i in 1..n {
            // [R, B_1..B_{i-1}, A_{i+1}..A_n, B_i] → [R, B_1..B_i, A_{i+2}..A_n, A_{i+1}]
            let mut dims = vec![r_dim];
            dims.extend(std::iter::repeat_n(b_dim, i - 1));
            dims.extend(std::iter::repeat_n(a_dim, n - i));
            dims.push(b_dim);
            let last = dims.len() - 1;
            let mut perm: Vec<usize> = (0..i).collect();
            perm.push(last);
            perm.extend(i + 1..last);
            perm.push(i);
            adaptors.push(KrausChannel::isometry(subsystem_permutation(&dims, &perm))?);
        }
        Self::new(initial, r_dims, a_dim, b_dim, adaptors, final_povm)
    }

    pub fn rounds(&self) -> usize {
        self.r_dims.len()
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn r_dims(&self) -> &[usize] {
        &self.r_dims
    }

    pub fn a_dim(&self) -> usize {
        self.a_dim
    }

    pub fn b_dim(&self) -> usize {
        self.b_dim
    }

    pub fn adaptors(&self) -> &[KrausChannel] {
        &self.adaptors
    }

    pub fn final_povm(&self) -> &Povm {
        &self.final_povm
    }
}

/// Unitary sending `|i_0 … i_{k-1}⟩` to `|i_{perm[0]} … i_{perm[k-1]}⟩`.
pub fn subsystem_permutation(dims: &[usize], perm: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut u = CMatrix::zeros(total, total);
    let mut digits = vec![0; dims.len()];
    for idx in 0..total {
        let mut r = idx;
        for (k, &d) in dims.iter().enumerate().rev() {
            digits[k] = r % d;
            r /= d;
        }
        let out = perm.iter().zip(&out_dims).fold(0, |acc, (&p, &d)| acc * d + digits[p]);
        u[(out, idx)] = Complex64::new(1.0, 0.0);
    }
    u
}

/// Per-message outcome statistics of a reading protocol with uniformly distributed messages.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    /// `outcome_probs[m][m̂]` = probability of decoding `m̂` when `m` was stored.
    pub outcome_probs: Vec<Vec<f64>>,
    pub per_message: Vec<f64>,
    /// Average success probability over uniform messages.
    pub p_succ: f64,
    /// Smallest per-message success probability.
    pub worst_case: f64,
}

impl ProtocolOutcome {
    fn from_probs(outcome_probs: Vec<Vec<f64>>) -> Self {
        let per_message: Vec<f64> = outcome_probs.iter().enumerate().map(|(m, p)| p[m]).collect();
        let p_succ = per_message.iter().sum::<f64>() / per_message.len() as f64;
        let worst_case = per_message.iter().cloned().fold(f64::INFINITY, f64::min);
        ProtocolOutcome { outcome_probs, per_message, p_succ, worst_case }
    }
}

fn check_cell(cell: &MemoryCell, code: &Codebook) -> Result<()> {
    if let Some(w) = code.words().iter().find(|w| w.iter().any(|&x| x >= cell.len())) {
        return Err(Error::Invalid(format!("codeword {w:?} uses labels outside the cell")));
    }
    Ok(())
}

/// State on `R_n B_n` just before the final measurement, for one codeword.
pub fn adaptive_final_state(cell: &MemoryCell, word: &[usize], strat: &AdaptiveStrategy) -> Result<CMatrix> {
    if word.len() != strat.rounds() {
        return Err(Error::DimensionMismatch { context: "codeword length vs rounds", expected: strat.rounds(), found: word.len() });
    }
    if cell.in_dim() != strat.a_dim || cell.out_dim() != strat.b_dim {
        return Err(Error::DimensionMismatch { context: "cell input dimension", expected: strat.a_dim, found: cell.in_dim() });
    }
    let mut state = strat.initial.matrix().clone();
    for (i, &x) in word.iter().enumerate() {
        state = cell.channel(x)?.apply_on_subsystem(&state, &[strat.r_dims[i], strat.a_dim], 1)?;
        if let Some(ad) = strat.adaptors.get(i) {
            state = ad.apply_operator(&state)?;
        }
    }
    Ok(state)
}

/// Runs an adaptive strategy on every codeword and decodes outcome `m̂` as message `m̂`.
pub fn simulate_adaptive(cell: &MemoryCell, code: &Codebook, strat: &AdaptiveStrategy) -> Result<ProtocolOutcome> {
    check_cell(cell, code)?;
    if strat.final_povm.len() != code.message_count() {
        return Err(Error::DimensionMismatch {
            context: "final POVM outcomes vs messages",
            expected: code.message_count(),
            found: strat.final_povm.len(),
        });
    }
    let probs = code
        .words()
        .par_iter()
        .map(|w| strat.final_povm.probabilities(&adaptive_final_state(cell, w, strat)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolOutcome::from_probs(probs))
}

/// Decoder of a non-adaptive protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoder {
    Povm(Povm),
    /// Pretty-good measurement for the uniform ensemble of output states.
    Pgm,
}

/// `(id_R ⊗ N^{x_1} ⊗ … ⊗ N^{x_n})(ρ_{R A^n})` for each codeword.
pub fn nonadaptive_outputs(cell: &MemoryCell, code: &Codebook, transmitter: &DensityOperator) -> Result<Vec<DensityOperator>> {
    check_cell(cell, code)?;
    let n = code.n();
    let a = cell.in_dim();
    let an = a.pow(n as u32);
    if !transmitter.dim().is_multiple_of(an) {
        return Err(Error::DimensionMismatch { context: "transmitter R A^n", expected: an, found: transmitter.dim() });
    }
    let r = transmitter.dim() / an;
    code.words()
        .par_iter()
        .map(|w| {
            let mut dims = vec![r];
            dims.extend(std::iter::repeat_n(a, n));
            let mut m = transmitter.matrix().clone();
            for (i, &x) in w.iter().enumerate() {
                m = cell.channel(x)?.apply_on_subsystem(&m, &dims, i + 1)?;
                dims[i + 1] = cell.out_dim();
            }
            Ok(DensityOperator::new_unchecked(m.hermitian_part()))
        })
        .collect()
}

pub fn simulate_nonadaptive(
    cell: &MemoryCell,
    code: &Codebook,
    transmitter: &DensityOperator,
    decoder: &Decoder,
) -> Result<ProtocolOutcome> {
    let outputs = nonadaptive_outputs(cell, code, transmitter)?;
    let k = outputs.len();
    let built;
    let povm = match decoder {
        Decoder::Povm(p) => p,
        Decoder::Pgm => {
            built = pgm(&outputs, &vec![1.0 / k as f64; k])?;
            &built
        }
    };
    if povm.len() != k {
        return Err(Error::DimensionMismatch { context: "decoder outcomes vs messages", expected: k, found: povm.len() });
    }
    let probs = outputs.iter().map(|s| povm.probabilities(s.matrix())).collect::<Result<Vec<_>>>()?;
    Ok(ProtocolOutcome::from_probs(probs))
}
