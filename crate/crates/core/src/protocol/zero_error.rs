use num_complex::Complex64;

use crate::channels::{hhlw_kraus, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, DensityOperator};

use super::codebook::{Codebook, Povm};
use super::simulate::AdaptiveStrategy;

/// Two-call adaptive strategy that reads the two-channel cell without error.
///
/// Round 1 feeds `|00⟩`; channel 1 returns `|0⟩` and channel 2 returns `|+⟩`. The adaptor
/// feeds `|1⟩ ⊗ b₁` to the second call, which maps `|10⟩ → |0⟩` under channel 1 and
/// `|1+⟩ → |1⟩` under channel 2, so a standard-basis measurement decides the message.
pub fn hhlw_adaptive_strategy() -> AdaptiveStrategy {
    let initial = DensityOperator::diagonal(&[1.0, 0.0, 0.0, 0.0]).expect("basis state");
    let v = CMatrix::from_fn(4, 2, |row, b| if row == 2 + b { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    let adaptor = KrausChannel::isometry(v).expect("isometry");
    AdaptiveStrategy::new(initial, vec![1, 1], 4, 2, vec![adaptor], Povm::computational_basis(2)).expect("consistent dimensions")
}

/// Messages `1 ↦ (1, 1)` and `2 ↦ (2, 2)` for the two-call strategy.
pub fn hhlw_codebook() -> Codebook {
    Codebook::new(vec![vec![0, 0], vec![1, 1]], 2).expect("valid codebook")
}

/// Coefficient table `α^{1,2}_{j,k}` (1-based indices in the comments).
fn alpha_12() -> [[f64; 5]; 5] {
    let s2 = std::f64::consts::SQRT_2;
    let mut a = [[0.0; 5]; 5];
    a[0][0] = s2; // α_{1,1}
    a[1][1] = s2; // α_{2,2}
    a[2][4] = 1.0; // α_{3,5}
    a[3][2] = 1.0; // α_{4,3}
    a[3][3] = -2.0 * s2; // α_{4,4}
    a
}

/// `Σ_{j,k} α^{x,y}_{j,k} (A^y_j)† A^x_k` for labels `x, y ∈ {0, 1}`.
///
/// For `x ≠ y` the table is applied as printed to `(x, y) = (1, 2)` and conjugate-transposed for
/// `(2, 1)`, so both orders give the same Hermitian operator; `x = y` uses `α = δ`.
pub fn hhlw_pair_operator(x: usize, y: usize) -> Result<CMatrix> {
    if x > 1 || y > 1 {
        return Err(Error::Invalid(format!("labels ({x}, {y}) outside the two-channel cell")));
    }
    let k = hhlw_kraus();
    let mut out = CMatrix::zeros(4, 4);
    let table = alpha_12();
    for j in 0..5 {
        for l in 0..5 {
            let coef = match (x, y) {
                _ if x == y => {
                    if j == l {
                        1.0
                    } else {
                        0.0
                    }
                }
                (0, 1) => table[j][l],
                _ => table[l][j],
            };
            if coef != 0.0 {
                out = &out + &k[y][j].adjoint().matmul(&k[x][l]).scale_real(coef);
            }
        }
    }
    Ok(out)
}

/// `P = |00⟩⟨00| + |01⟩⟨01| + |11⟩⟨11| + |1−⟩⟨1−|`.
pub fn hhlw_p_operator() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |v: f64| Complex64::new(v, 0.0);
    let minus = [c(0.0), c(0.0), c(h), c(-h)];
    &CMatrix::diag_real(&[1.0, 1.0, 0.0, 1.0]) + &CMatrix::outer(&minus)
}

/// Smallest eigenvalue of `I_R ⊗ P^{x_1,y_1} ⊗ … ⊗ P^{x_n,y_n}` over codeword pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpossibilityCertificate {
    pub n: usize,
    pub min_eigenvalue: f64,
    /// Pair `(x^n, y^n)` attaining the minimum.
    pub worst_pair: (Vec<usize>, Vec<usize>),
    /// Largest deviation of the mismatch operators from `P`.
    pub p_deviation: f64,
    /// True when the minimum is positive, so no state perfectly separates any pair of codewords.
    pub certified: bool,
}

/// Spectrum of the Hermitian operator `hhlw_pair_operator(x, y)`.
fn pair_spectrum(x: usize, y: usize) -> Result<Vec<f64>> {
    Ok(hermitian_eig(&hhlw_pair_operator(x, y)?.hermitian_part())?.values)
}

/// Minimum eigenvalue of the tensor product over positions, from the factor spectra.
fn product_min(spectra: &[&[f64]]) -> f64 {
    // the extreme products are reached by choosing an extreme eigenvalue per factor
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    for s in spectra {
        let (a, b) = (s[0], s[s.len() - 1]);
        let cands = [lo * a, lo * b, hi * a, hi * b];
        lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
        hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    }
    lo
}

/// Minimum eigenvalue for one codeword pair.
pub fn certificate_for_pair(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::DimensionMismatch { context: "codeword pair", expected: x.len(), found: y.len() });
    }
    let spectra = x.iter().zip(y).map(|(&a, &b)| pair_spectrum(a, b)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[f64]> = spectra.iter().map(Vec::as_slice).collect();
    Ok(product_min(&refs))
}

/// Checks positivity over every pair `x^n ≠ y^n` of words over the two-channel cell.
pub fn nonadaptive_impossibility_certificate(n: usize) -> Result<ImpossibilityCertificate> {
    if n == 0 || n > 16 {
        return Err(Error::OutOfRange { name: "n", value: n as f64, allowed: "1 <= n <= 16" });
    }
    let p = hhlw_p_operator();
    let p_deviation = hhlw_pair_operator(0, 1)?.max_abs_diff(&p).max(hhlw_pair_operator(1, 0)?.max_abs_diff(&p));
    let spectra: Vec<Vec<Vec<f64>>> =
        (0..2).map(|a| (0..2).map(|b| pair_spectrum(a, b)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    let bits = |w: usize| (0..n).map(|i| (w >> (n - 1 - i)) & 1).collect::<Vec<usize>>();
    let mut best: Option<(f64, usize, usize)> = None;
    for wx in 0..1usize << n {
        for wy in 0..1usize << n {
            if wx == wy {
                continue;
            }
            let (x, y) = (bits(wx), bits(wy));
            let refs: Vec<&[f64]> = x.iter().zip(&y).map(|(&a, &b)| spectra[a][b].as_slice()).collect();
            let v = product_min(&refs);
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, wx, wy));
            }
        }
    }
    let (min_eigenvalue, wx, wy) = best.expect("n >= 1 gives distinct pairs");
    Ok(ImpossibilityCertificate {
        n,
        min_eigenvalue,
        worst_pair: (bits(wx), bits(wy)),
        p_deviation,
        certified: min_eigenvalue > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::MemoryCell;
    use crate::linalg::kron_all;
    use crate::protocol::simulate::{adaptive_final_state, simulate_adaptive};

    const GAP: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn adaptive_strategy_is_perfect() {
        let cell = MemoryCell::hhlw();
        let strat = hhlw_adaptive_strategy();
        let out = simulate_adaptive(&cell, &hhlw_codebook(), &strat).unwrap();
        assert!((out.p_succ - 1.0).abs() < 1e-12);
        let s1 = adaptive_final_state(&cell, &[0, 0], &strat).unwrap();
        let s2 = adaptive_final_state(&cell, &[1, 1], &strat).unwrap();
        assert!(s1.approx_eq(&CMatrix::unit(2, 0, 0), 1e-12));
        assert!(s2.approx_eq(&CMatrix::unit(2, 1, 1), 1e-12));
    }

    #[test]
    fn mismatch_operator_is_p() {
        let p = hhlw_p_operator();
        assert!(hhlw_pair_operator(0, 1).unwrap().approx_eq(&p, 1e-12));
        assert!(hhlw_pair_operator(1, 0).unwrap().approx_eq(&p, 1e-12));
        for x in 0..2 {
            assert!(hhlw_pair_operator(x, x).unwrap().approx_eq(&CMatrix::identity(4), 1e-12));
        }
    }

    #[test]
    fn certificate_values() {
        let c1 = nonadaptive_impossibility_certificate(1).unwrap();
        assert!((c1.min_eigenvalue - GAP).abs() < 1e-12);
        let c2 = nonadaptive_impossibility_certificate(2).unwrap();
        assert!((c2.min_eigenvalue - GAP * GAP).abs() < 1e-12);
        let c3 = nonadaptive_impossibility_certificate(3).unwrap();
        assert!(c3.certified && c3.p_deviation < 1e-12);
        let v = certificate_for_pair(&[0, 0, 1], &[1, 0, 0]).unwrap();
        assert!((v - GAP * GAP).abs() < 1e-12);
    }

    #[test]
    fn product_spectrum_matches_full_operator() {
        // direct eigen-decomposition of P ⊗ I ⊗ P
        let p = hhlw_p_operator();
        let full = kron_all([&p, &CMatrix::identity(4), &p]);
        let min = hermitian_eig(&full).unwrap().values[0];
        assert!((min - certificate_for_pair(&[0, 1, 1], &[1, 1, 0]).unwrap()).abs() < 1e-12);
    }
}
