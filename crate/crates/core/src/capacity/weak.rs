use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::MemoryCell;
use crate::divergences::{average_state, entropy, entropy_of_spectrum};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, CMatrix, DensityOperator, Keep};

const PURITY_TOL: f64 = 1e-9;
/// Largest reference dimension explored by [`search_adaptive`].
pub const MAX_SEARCH_R_DIM: usize = 4;

fn check_probs(p: &[f64], k: usize) -> Result<()> {
    if p.len() != k {
        return Err(Error::DimensionMismatch { context: "distribution over cell labels", expected: k, found: p.len() });
    }
    if p.iter().any(|&x| !(x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("p_X must be a probability vector".into()));
    }
    Ok(())
}

/// `(id_R ⊗ N^x)(ρ_RA)` for each label, with `R` of dimension `r_dim`.
fn outputs(cell: &MemoryCell, inputs: &[&DensityOperator], r_dim: usize) -> Result<Vec<DensityOperator>> {
    let d_a = cell.in_dim();
    cell.channels()
        .iter()
        .zip(inputs)
        .map(|(ch, rho)| {
            let m = ch.apply_on_subsystem(rho.matrix(), &[r_dim, d_a], 1)?;
            Ok(DensityOperator::new_unchecked(m.hermitian_part()))
        })
        .collect()
}

fn reduced_entropy(m: &CMatrix, dims: (usize, usize), keep: Keep) -> Result<f64> {
    let r = partial_trace(m, dims, keep)?;
    let e = crate::linalg::hermitian_eig(&r.hermitian_part())?;
    Ok(entropy_of_spectrum(&e.values))
}

/// `I(XR;B)_τ` for `τ = Σ_x p(x)|x⟩⟨x| ⊗ (id_R ⊗ N^x)(φ_RA)` with a pure `φ_RA`, `dim R = dim A`.
pub fn weak_converse_nonadaptive(cell: &MemoryCell, p: &[f64], phi: &DensityOperator) -> Result<f64> {
    check_probs(p, cell.len())?;
    let d_a = cell.in_dim();
    if phi.dim() != d_a * d_a {
        return Err(Error::DimensionMismatch { context: "phi_RA", expected: d_a * d_a, found: phi.dim() });
    }
    if (1.0 - phi.purity()).abs() > PURITY_TOL {
        return Err(Error::InvalidState(format!("phi_RA must be pure (purity {})", phi.purity())));
    }
    let inputs: Vec<&DensityOperator> = vec![phi; cell.len()];
    let omegas = outputs(cell, &inputs, d_a)?;
    let d_b = cell.out_dim();
    // I(XR;B) = H(R)_φ + H(B)_ω̄ − Σ_x p(x) H(RB)_{ω^x}
    let h_r = reduced_entropy(phi.matrix(), (d_a, d_a), Keep::First)?;
    let avg = average_state(p, &omegas);
    let h_b = reduced_entropy(avg.matrix(), (d_a, d_b), Keep::Second)?;
    let h_rb: f64 = p.iter().zip(&omegas).map(|(px, w)| px * entropy(w)).sum();
    Ok(h_r + h_b - h_rb)
}

/// `I(X;B|R)_ω − I(X;A|R)_ρ` for `ρ_XRA = Σ_x p(x)|x⟩⟨x| ⊗ ρ^x_RA` and `ω^x = (id_R ⊗ N^x)(ρ^x_RA)`.
///
/// The dimension of `R` is inferred from the conditionals.
pub fn weak_converse_adaptive(cell: &MemoryCell, p: &[f64], conditionals: &[DensityOperator]) -> Result<f64> {
    check_probs(p, cell.len())?;
    if conditionals.len() != cell.len() {
        return Err(Error::DimensionMismatch {
            context: "conditional states",
            expected: cell.len(),
            found: conditionals.len(),
        });
    }
    let d_a = cell.in_dim();
    let dim = conditionals[0].dim();
    if !dim.is_multiple_of(d_a) || conditionals.iter().any(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch { context: "rho^x_RA", expected: d_a, found: dim });
    }
    let r_dim = dim / d_a;
    let inputs: Vec<&DensityOperator> = conditionals.iter().collect();
    let omegas = outputs(cell, &inputs, r_dim)?;
    let b = conditional_holevo(p, &omegas, (r_dim, cell.out_dim()))?;
    let a = conditional_holevo(p, conditionals, (r_dim, d_a))?;
    Ok(b - a)
}

/// `I(X;S|R) = Σ p H(R)_x + H(RS)_avg − Σ p H(RS)_x − H(R)_avg` for a cq state over `R ⊗ S`.
fn conditional_holevo(p: &[f64], states: &[DensityOperator], dims: (usize, usize)) -> Result<f64> {
    let avg = average_state(p, states);
    let mut total = entropy(&avg) - reduced_entropy(avg.matrix(), dims, Keep::First)?;
    for (px, s) in p.iter().zip(states) {
        if *px > 0.0 {
            total += px * (reduced_entropy(s.matrix(), dims, Keep::First)? - entropy(s));
        }
    }
    Ok(total)
}

/// Best value found by a heuristic search, with the arguments that produced it.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub value: f64,
    pub p: Vec<f64>,
    /// One input per label; all equal for the non-adaptive search.
    pub inputs: Vec<DensityOperator>,
    pub evaluations: usize,
}

/// Random-restart hill climb for the non-adaptive bound over `p_X` and pure `φ_RA`.
///
/// Gives a lower estimate of the supremum, with no optimality guarantee.
pub fn search_nonadaptive(cell: &MemoryCell, restarts: usize, steps: usize, seed: u64) -> Result<SearchResult> {
    let d_a = cell.in_dim();
    let k = cell.len();
    let eval = |x: &[f64]| -> Result<(f64, Vec<f64>, Vec<DensityOperator>)> {
        let p = softmax(&x[..k]);
        let phi = pure_from(&x[k..]);
        let v = weak_converse_nonadaptive(cell, &p, &phi)?;
        Ok((v, p, vec![phi; k]))
    };
    hill_climb(k + 2 * d_a * d_a, restarts, steps, seed, eval)
}

/// Random-restart hill climb for the adaptive bound over `p_X` and pure conditionals on `R ⊗ A`.
///
/// Explores `dim R = r_dim ≤ 4` only, so the result is a lower estimate of the supremum.
pub fn search_adaptive(cell: &MemoryCell, r_dim: usize, restarts: usize, steps: usize, seed: u64) -> Result<SearchResult> {
    if r_dim == 0 || r_dim > MAX_SEARCH_R_DIM {
        return Err(Error::OutOfRange { name: "r_dim", value: r_dim as f64, allowed: "1 <= r_dim <= 4" });
    }
    let k = cell.len();
    let m = 2 * r_dim * cell.in_dim();
    let eval = |x: &[f64]| -> Result<(f64, Vec<f64>, Vec<DensityOperator>)> {
        let p = softmax(&x[..k]);
        let cond: Vec<DensityOperator> = (0..k).map(|i| pure_from(&x[k + i * m..k + (i + 1) * m])).collect();
        let v = weak_converse_adaptive(cell, &p, &cond)?;
        Ok((v, p, cond))
    };
    hill_climb(k + k * m, restarts, steps, seed, eval)
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn pure_from(x: &[f64]) -> DensityOperator {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let psi: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1]) / norm).collect();
    DensityOperator::new_unchecked(CMatrix::outer(&psi))
}

type Evaluated = (f64, Vec<f64>, Vec<DensityOperator>);

fn hill_climb(
    dim: usize,
    restarts: usize,
    steps: usize,
    seed: u64,
    eval: impl Fn(&[f64]) -> Result<Evaluated>,
) -> Result<SearchResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Evaluated> = None;
    let mut evaluations = 0;
    for _ in 0..restarts.max(1) {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut cur = eval(&x)?;
        evaluations += 1;
        let mut step = 0.5;
        for _ in 0..steps {
            let y: Vec<f64> = x.iter().map(|v| v + step * rng.sample::<f64, _>(StandardNormal)).collect();
            let cand = eval(&y)?;
            evaluations += 1;
            if cand.0 > cur.0 {
                x = y;
                cur = cand;
                step = (step * 1.5).min(2.0);
            } else {
                step = (step * 0.9).max(1e-4);
            }
        }
        if best.as_ref().is_none_or(|b| cur.0 > b.0) {
            best = Some(cur);
        }
    }
    let (value, p, inputs) = best.expect("at least one restart");
    Ok(SearchResult { value, p, inputs, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::KrausChannel;
    use crate::random;

    fn phi(d: usize) -> DensityOperator {
        DensityOperator::maximally_entangled(d)
    }

    #[test]
    fn identical_channels_carry_no_label_information() {
        let cell = MemoryCell::new(vec!["a".into(), "b".into()], vec![KrausChannel::identity(2), KrausChannel::identity(2)])
            .unwrap();
        // I(XR;B) = I(R;B) here: 2 for Φ, and the X part contributes nothing
        let v = weak_converse_nonadaptive(&cell, &[0.5, 0.5], &phi(2)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let single = MemoryCell::new(vec!["a".into()], vec![KrausChannel::identity(2)]).unwrap();
        assert!((weak_converse_nonadaptive(&single, &[1.0], &phi(2)).unwrap() - v).abs() < 1e-9);
    }

    #[test]
    fn noiseless_erasure_cell_reads_two_bits() {
        let cell = MemoryCell::erasure(2, 0.0).unwrap();
        let v = weak_converse_nonadaptive(&cell, &[0.25; 4], &phi(2)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fully_erased_cell() {
        let cell = MemoryCell::erasure(2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random::pure_state(4, &mut rng);
        let v = weak_converse_nonadaptive(&cell, &[0.25; 4], &psi).unwrap();
        // output is |e⟩ regardless of x, so only I(R;B) = 0 remains
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn mixed_input_rejected() {
        let cell = MemoryCell::erasure(2, 0.5).unwrap();
        let mixed = DensityOperator::maximally_mixed(4);
        assert!(weak_converse_nonadaptive(&cell, &[0.25; 4], &mixed).is_err());
        assert!(weak_converse_nonadaptive(&cell, &[0.5, 0.5], &phi(2)).is_err());
    }

    #[test]
    fn adaptive_with_fixed_input_matches_holevo_of_outputs() {
        let cell = MemoryCell::erasure(2, 0.5).unwrap();
        let cond = vec![phi(2); 4];
        let v = weak_converse_adaptive(&cell, &[0.25; 4], &cond).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_singleton_is_zero() {
        let cell = MemoryCell::new(vec!["a".into()], vec![KrausChannel::depolarizing(2, 0.2).unwrap()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::density(6, 3, &mut rng);
        assert!(weak_converse_adaptive(&cell, &[1.0], &[rho]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn adaptive_x_independent_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let chans: Vec<KrausChannel> = (0..3).map(|_| random::channel(2, 2, 2, &mut rng)).collect();
            let cell = MemoryCell::new(vec!["a".into(), "b".into(), "c".into()], chans).unwrap();
            let rho = random::density(6, 2, &mut rng);
            let p = random::probability_vector(3, &mut rng);
            let v = weak_converse_adaptive(&cell, &p, &[rho.clone(), rho.clone(), rho]).unwrap();
            assert!(v >= -1e-10);
        }
    }

    #[test]
    fn adaptive_dimension_checks() {
        let cell = MemoryCell::erasure(2, 0.5).unwrap();
        let bad = vec![DensityOperator::maximally_mixed(3); 4];
        assert!(weak_converse_adaptive(&cell, &[0.25; 4], &bad).is_err());
        assert!(weak_converse_adaptive(&cell, &[0.25; 4], &[phi(2)]).is_err());
    }

    #[test]
    fn searches_are_seeded_and_bounded() {
        let cell = MemoryCell::erasure(2, 0.5).unwrap();
        let a = search_nonadaptive(&cell, 2, 60, 11).unwrap();
        let b = search_nonadaptive(&cell, 2, 60, 11).unwrap();
        assert_eq!(a.value, b.value);
        // I(XR;B) never exceeds 2 log₂ d + ... ; here the sup is the EA value 2(1−q) = 1
        assert!(a.value <= 1.0 + 1e-9);
        assert!(a.value > 0.5);
        let c = search_adaptive(&cell, 2, 1, 40, 3).unwrap();
        assert!(c.value.is_finite());
        assert!(search_adaptive(&cell, 5, 1, 1, 0).is_err());
    }
}
