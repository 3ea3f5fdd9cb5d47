use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, DensityOperator};

const PSD_TOL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-9;

/// Codewords `x^n(m)` stored as label indices into a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    words: Vec<Vec<usize>>,
}

impl Codebook {
    pub fn new(words: Vec<Vec<usize>>, label_count: usize) -> Result<Self> {
        let n = words.first().map(Vec::len).ok_or_else(|| Error::Invalid("codebook has no messages".into()))?;
        if n == 0 {
            return Err(Error::Invalid("codewords must have length >= 1".into()));
        }
        for w in &words {
            if w.len() != n {
                return Err(Error::DimensionMismatch { context: "codeword length", expected: n, found: w.len() });
            }
            if let Some(&x) = w.iter().find(|&&x| x >= label_count) {
                return Err(Error::Invalid(format!("label index {x} outside a cell of {label_count} labels")));
            }
        }
        Ok(Codebook { n, words })
    }

    /// Builds a codebook from label strings, resolving them against `labels`.
    pub fn from_labels(words: &[Vec<String>], labels: &[String]) -> Result<Self> {
        let idx = words
            .iter()
            .map(|w| {
                w.iter()
                    .map(|s| labels.iter().position(|l| l == s).ok_or_else(|| Error::Invalid(format!("unknown label `{s}`"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(idx, labels.len())
    }

    /// Every word of length `n` over `label_count` labels, in lexicographic order.
    pub fn all_words(label_count: usize, n: usize) -> Result<Self> {
        let total = label_count.checked_pow(n as u32).filter(|&t| t <= 1 << 20);
        let total = total.ok_or_else(|| Error::Guard(format!("{label_count}^{n} codewords")))?;
        let words = (0..total)
            .map(|mut k| {
                let mut w = vec![0; n];
                for slot in w.iter_mut().rev() {
                    *slot = k % label_count;
                    k /= label_count;
                }
                w
            })
            .collect();
        Self::new(words, label_count)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn message_count(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn word(&self, m: usize) -> &[usize] {
        &self.words[m]
    }
}

/// A measurement with one PSD element per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let d = elements.first().map(CMatrix::rows).ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut sum = CMatrix::zeros(d, d);
        for (k, e) in elements.iter().enumerate() {
            if e.rows() != d || e.cols() != d {
                return Err(Error::DimensionMismatch { context: "POVM element", expected: d, found: e.rows() });
            }
            let dev = e.hermitian_deviation();
            if dev > PSD_TOL {
                return Err(Error::InvalidPovm(format!("element {k} is not Hermitian ({dev:.2e})")));
            }
            let min = hermitian_eig(&e.hermitian_part())?.values[0];
            if min < -PSD_TOL {
                return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {min:.3e}")));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(d));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:.3e}")));
        }
        Ok(Povm { elements })
    }

    /// Projective measurement in the standard basis of `C^d`.
    pub fn computational_basis(d: usize) -> Self {
        Povm { elements: (0..d).map(|i| CMatrix::unit(d, i, i)).collect() }
    }

    /// The single-outcome measurement `{I}`.
    pub fn trivial(d: usize) -> Self {
        Povm { elements: vec![CMatrix::identity(d)] }
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Tr{Λ_k ρ}` for every outcome, clamped to `[0, 1]`.
    pub fn probabilities(&self, rho: &CMatrix) -> Result<Vec<f64>> {
        if rho.rows() != self.dim() {
            return Err(Error::DimensionMismatch { context: "measured state", expected: self.dim(), found: rho.rows() });
        }
        Ok(self.elements.iter().map(|e| e.trace_product(rho).re.clamp(0.0, 1.0)).collect())
    }
}

/// Pretty-good measurement `Λ_m = S^{-1/2} p_m σ_m S^{-1/2}` with `S = Σ p_m σ_m`;
/// the kernel of `S` is shared uniformly among outcomes.
pub fn pgm(states: &[DensityOperator], priors: &[f64]) -> Result<Povm> {
    if states.is_empty() || states.len() != priors.len() {
        return Err(Error::DimensionMismatch { context: "PGM priors", expected: states.len(), found: priors.len() });
    }
    let d = states[0].dim();
    let mut s = CMatrix::zeros(d, d);
    for (st, p) in states.iter().zip(priors) {
        s = &s + &st.matrix().scale_real(*p);
    }
    let eig = hermitian_eig(&s)?;
    let thr = eig.zero_threshold();
    let inv_sqrt = eig.reconstruct_with(&eig.values.iter().map(|&l| if l > thr { 1.0 / l.sqrt() } else { 0.0 }).collect::<Vec<_>>());
    let kernel = eig.reconstruct_with(&eig.values.iter().map(|&l| if l > thr { 0.0 } else { 1.0 }).collect::<Vec<_>>());
    let share = kernel.scale_real(1.0 / states.len() as f64);
    let elements = states
        .iter()
        .zip(priors)
        .map(|(st, p)| (&st.matrix().scale_real(*p).conjugate_by(&inv_sqrt) + &share).hermitian_part())
        .collect();
    Povm::new(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn codebook_validation() {
        assert!(Codebook::new(vec![vec![0, 1], vec![1]], 2).is_err());
        assert!(Codebook::new(vec![vec![0, 2]], 2).is_err());
        assert!(Codebook::new(vec![], 2).is_err());
        let labels = vec!["a".to_string(), "b".to_string()];
        let c = Codebook::from_labels(&[vec!["a".into(), "b".into()]], &labels).unwrap();
        assert_eq!(c.word(0), &[0, 1]);
        assert!(Codebook::from_labels(&[vec!["z".into()]], &labels).is_err());
        let all = Codebook::all_words(3, 2).unwrap();
        assert_eq!(all.message_count(), 9);
        assert_eq!(all.word(5), &[1, 2]);
    }

    #[test]
    fn povm_validation() {
        assert!(Povm::new(vec![CMatrix::unit(2, 0, 0)]).is_err());
        assert!(Povm::new(vec![CMatrix::diag_real(&[1.5, 1.0]), CMatrix::diag_real(&[-0.5, 0.0])]).is_err());
        assert!(Povm::new(vec![CMatrix::unit(2, 0, 1), CMatrix::unit(2, 1, 0)]).is_err());
        let p = Povm::computational_basis(3);
        let probs = p.probabilities(DensityOperator::maximally_mixed(3).matrix()).unwrap();
        assert!(probs.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn pgm_is_complete_and_beats_guessing() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in 2..5 {
            let states: Vec<DensityOperator> = (0..k).map(|_| random::density(3, 1, &mut rng)).collect();
            let priors = random::probability_vector(k, &mut rng);
            let m = pgm(&states, &priors).unwrap();
            let ps: f64 = states.iter().zip(&priors).zip(m.elements()).map(|((s, p), e)| p * e.trace_product(s.matrix()).re).sum();
            // Cauchy–Schwarz on B_m = S^{-1/4} p_m σ_m S^{-1/4} gives Σ‖B_m‖₂² ≥ Tr S / k
            assert!(ps >= 1.0 / k as f64 - 1e-12);
        }
    }

    #[test]
    fn pgm_identical_states() {
        let s = DensityOperator::diagonal(&[0.5, 0.5, 0.0]).unwrap();
        let m = pgm(&[s.clone(), s.clone()], &[0.5, 0.5]).unwrap();
        for e in m.elements() {
            assert!((e.trace_product(s.matrix()).re - 0.5).abs() < 1e-12);
        }
    }
}
