//! Covariance matrices in `(q_1, …, q_m, p_1, …, p_m)` ordering with vacuum `= ½ I`.

use num_complex::Complex64;

use crate::divergences::g;
use crate::error::{check_range, Error, Result};
use crate::linalg::{hermitian_eig, sqrt_psd, CMatrix};

const SYMMETRY_TOL: f64 = 1e-12;
const UNCERTAINTY_TOL: f64 = 1e-9;
const SYMPLECTIC_TOL: f64 = 1e-10;

fn real_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    out
}

fn real_transpose(a: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|idx| a[(idx % n) * n + idx / n]).collect()
}

fn to_complex(a: &[f64], n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| Complex64::new(a[i * n + j], 0.0))
}

/// Standard symplectic form `Ω = [[0, I_m], [−I_m, 0]]` as a row-major `2m × 2m` array.
pub fn symplectic_form(modes: usize) -> Vec<f64> {
    let n = 2 * modes;
    let mut o = vec![0.0; n * n];
    for k in 0..modes {
        o[k * n + modes + k] = 1.0;
        o[(modes + k) * n + k] = -1.0;
    }
    o
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    entries: Vec<f64>,
}

impl CovarianceMatrix {
    /// Validates symmetry and the uncertainty relation `V + (i/2)Ω ≥ 0`.
    pub fn new(modes: usize, entries: Vec<f64>) -> Result<Self> {
        let n = 2 * modes;
        if modes == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch { context: "covariance entries", expected: n * n, found: entries.len() });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("covariance matrix has non-finite entries".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (entries[i * n + j] - entries[j * n + i]).abs() > SYMMETRY_TOL * (1.0 + entries[i * n + j].abs()) {
                    return Err(Error::InvalidState("covariance matrix is not symmetric".into()));
                }
            }
        }
        let v = CovarianceMatrix { modes, entries };
        let omega = symplectic_form(modes);
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(v.entries[i * n + j], 0.5 * omega[i * n + j]));
        let min = hermitian_eig(&m)?.values[0];
        if min < -UNCERTAINTY_TOL * (1.0 + v.max_entry()) {
            return Err(Error::InvalidState(format!("uncertainty relation violated (eigenvalue {min:.3e})")));
        }
        Ok(v)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::thermal(&vec![0.0; modes]).expect("vacuum is valid")
    }

    /// Product of thermal states with mean photon numbers `n_k`: `V = ⊕ (n_k + ½) I₂`.
    pub fn thermal(photon_numbers: &[f64]) -> Result<Self> {
        let m = photon_numbers.len();
        let n = 2 * m;
        let mut e = vec![0.0; n * n];
        for (k, &nb) in photon_numbers.iter().enumerate() {
            check_range("N_B", nb, 0.0, f64::INFINITY, "N_B >= 0")?;
            e[k * n + k] = nb + 0.5;
            e[(m + k) * n + m + k] = nb + 0.5;
        }
        Self::new(m, e)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * 2 * self.modes + j]
    }

    fn max_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `S V Sᵀ`.
    pub fn transform(&self, s: &SymplecticMatrix) -> Result<CovarianceMatrix> {
        if s.modes != self.modes {
            return Err(Error::DimensionMismatch { context: "symplectic transform", expected: self.modes, found: s.modes });
        }
        let n = 2 * self.modes;
        let sv = real_mul(&s.entries, &self.entries, n);
        let mut out = real_mul(&sv, &real_transpose(&s.entries, n), n);
        // restore exact symmetry lost to rounding
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (out[i * n + j] + out[j * n + i]);
                out[i * n + j] = avg;
                out[j * n + i] = avg;
            }
        }
        CovarianceMatrix::new(self.modes, out)
    }

    /// Covariance matrix of the listed modes.
    pub fn reduced(&self, keep: &[usize]) -> Result<CovarianceMatrix> {
        if keep.is_empty() || keep.iter().any(|&k| k >= self.modes) {
            return Err(Error::Invalid(format!("mode selection {keep:?} out of range")));
        }
        let m = self.modes;
        let idx: Vec<usize> = keep.iter().copied().chain(keep.iter().map(|k| k + m)).collect();
        let entries = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        CovarianceMatrix::new(keep.len(), entries)
    }

    pub fn determinant_1mode(&self) -> Result<f64> {
        if self.modes != 1 {
            return Err(Error::DimensionMismatch { context: "single-mode covariance", expected: 1, found: self.modes });
        }
        Ok(self.entries[0] * self.entries[3] - self.entries[1] * self.entries[2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    modes: usize,
    entries: Vec<f64>,
}

impl SymplecticMatrix {
    /// Validates `S Ω Sᵀ = Ω` within `1e-10`.
    pub fn new(modes: usize, entries: Vec<f64>) -> Result<Self> {
        let n = 2 * modes;
        if modes == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch { context: "symplectic entries", expected: n * n, found: entries.len() });
        }
        let s = SymplecticMatrix { modes, entries };
        let dev = s.symplectic_deviation();
        if !(dev <= SYMPLECTIC_TOL) {
            return Err(Error::Invalid(format!("matrix is not symplectic (deviation {dev:.3e})")));
        }
        Ok(s)
    }

    /// Largest entry of `|S Ω Sᵀ − Ω|`.
    pub fn symplectic_deviation(&self) -> f64 {
        let n = 2 * self.modes;
        let omega = symplectic_form(self.modes);
        let sos = real_mul(&real_mul(&self.entries, &omega, n), &real_transpose(&self.entries, n), n);
        sos.iter().zip(&omega).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

fn two_mode(a: f64, b: f64, c: f64) -> Vec<f64> {
    // modes (1, 2), ordering (q1, q2, p1, p2)
    vec![a, c, 0.0, 0.0, c, b, 0.0, 0.0, 0.0, 0.0, a, -c, 0.0, 0.0, -c, b]
}

/// Covariance matrix of a two-mode squeezed vacuum with mean photon number `N_S` after its second
/// share passes through a beamsplitter of transmissivity `η` mixing in a thermal state with mean `x`.
///
/// Mode 1 carries `a = ηN_S + (1−η)x + ½`, mode 2 carries `b = N_S + ½`, and the correlation is
/// `c = √(ηN_S(N_S+1))`.
pub fn tmsv_through_thermal(eta: f64, n_s: f64, x: f64) -> Result<CovarianceMatrix> {
    check_range("eta", eta, 0.0, 1.0, "0 <= eta <= 1")?;
    check_range("N_S", n_s, 0.0, f64::INFINITY, "N_S >= 0")?;
    check_range("x", x, 0.0, f64::INFINITY, "x >= 0")?;
    let a = eta * n_s + (1.0 - eta) * x + 0.5;
    let b = n_s + 0.5;
    let c = (eta * n_s * (n_s + 1.0)).sqrt();
    CovarianceMatrix::new(2, two_mode(a, b, c))
}

/// `(γ₊, γ₋)` with `γ₊ = √((1+N_S)/(1+(1−η)N_S))`, `γ₋ = √(ηN_S/(1+(1−η)N_S))`.
pub fn squeezer_gammas(eta: f64, n_s: f64) -> Result<(f64, f64)> {
    check_range("eta", eta, 0.0, 1.0, "0 <= eta <= 1")?;
    check_range("N_S", n_s, 0.0, f64::INFINITY, "N_S >= 0")?;
    let den = 1.0 + (1.0 - eta) * n_s;
    Ok((((1.0 + n_s) / den).sqrt(), (eta * n_s / den).sqrt()))
}

/// Two-mode squeezer `S^η(N_S)` with blocks `[[γ₊, −γ₋], [−γ₋, γ₊]]` on positions and
/// `[[γ₊, γ₋], [γ₋, γ₊]]` on momenta.
pub fn two_mode_squeezer(eta: f64, n_s: f64) -> Result<SymplecticMatrix> {
    let (gp, gm) = squeezer_gammas(eta, n_s)?;
    SymplecticMatrix::new(2, vec![gp, -gm, 0.0, 0.0, -gm, gp, 0.0, 0.0, 0.0, 0.0, gp, gm, 0.0, 0.0, gm, gp])
}

/// Deviations of the squeezed covariance entries from their large-`N_S` limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedResiduals {
    pub a_s: f64,
    pub b_s: f64,
    pub c_s: f64,
    /// `a_s − (x + ½)`.
    pub a_residual: f64,
    /// `b_s − ((1−η)N_S + ηx + ½)`.
    pub b_residual: f64,
    /// `|c_s| − √η x`.
    pub c_residual: f64,
}

/// Entries of `S^η(N_S) V S^η(N_S)ᵀ` for `V = tmsv_through_thermal(η, N_S, x)`.
pub fn squeezed_residuals(eta: f64, n_s: f64, x: f64) -> Result<SqueezedResiduals> {
    let v = tmsv_through_thermal(eta, n_s, x)?.transform(&two_mode_squeezer(eta, n_s)?)?;
    let (a_s, b_s, c_s) = (v.get(0, 0), v.get(1, 1), v.get(0, 1));
    Ok(SqueezedResiduals {
        a_s,
        b_s,
        c_s,
        a_residual: a_s - (x + 0.5),
        b_residual: b_s - ((1.0 - eta) * n_s + eta * x + 0.5),
        c_residual: c_s.abs() - eta.sqrt() * x,
    })
}

/// Symplectic eigenvalues in ascending order.
///
/// The spectrum of `iΩV` equals that of the Hermitian matrix `i V^{1/2} Ω V^{1/2}`, which is `{±ν_k}`.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = 2 * v.modes;
    let root = sqrt_psd(&to_complex(&v.entries, n))?;
    let omega = to_complex(&symplectic_form(v.modes), n).scale(Complex64::new(0.0, 1.0));
    let h = root.matmul(&omega).matmul(&root).hermitian_part();
    let vals = hermitian_eig(&h)?.values;
    // the upper half are the positive members of the ± pairs
    Ok(vals[v.modes..].to_vec())
}

/// von Neumann entropy `Σ_k g(ν_k − ½)` in bits.
pub fn gaussian_entropy(v: &CovarianceMatrix) -> Result<f64> {
    symplectic_eigenvalues(v)?
        .into_iter()
        .map(|nu| {
            if nu < 0.5 - UNCERTAINTY_TOL {
                return Err(Error::InvalidState(format!("symplectic eigenvalue {nu} below 1/2")));
            }
            g((nu - 0.5).max(0.0))
        })
        .sum()
}

/// Fidelity `(Tr|√ρ₁√ρ₂|)²` of two zero-mean single-mode Gaussian states:
/// `1 / (√(Δ + Λ) − √Λ)` with `Δ = det(V₁ + V₂)` and `Λ = 4(det V₁ − ¼)(det V₂ − ¼)`.
pub fn gaussian_fidelity_1mode(v1: &CovarianceMatrix, v2: &CovarianceMatrix) -> Result<f64> {
    let d1 = v1.determinant_1mode()?;
    let d2 = v2.determinant_1mode()?;
    let s: Vec<f64> = v1.entries.iter().zip(&v2.entries).map(|(a, b)| a + b).collect();
    let delta = s[0] * s[3] - s[1] * s[2];
    let lambda = (4.0 * (d1 - 0.25) * (d2 - 0.25)).max(0.0);
    Ok((1.0 / ((delta + lambda).sqrt() - lambda.sqrt())).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tmsv_entries() {
        let v = tmsv_through_thermal(1.0, 1.0, 3.0).unwrap();
        assert!((v.get(0, 0) - 1.5).abs() < 1e-15 && (v.get(1, 1) - 1.5).abs() < 1e-15);
        assert!((v.get(0, 1) - 2f64.sqrt()).abs() < 1e-15);
        let v = tmsv_through_thermal(0.0, 2.0, 0.7).unwrap();
        assert!((v.get(0, 0) - 1.2).abs() < 1e-15 && (v.get(1, 1) - 2.5).abs() < 1e-15 && v.get(0, 1) == 0.0);
        assert!(tmsv_through_thermal(1.5, 1.0, 0.0).is_err());
        assert!(tmsv_through_thermal(0.5, -1.0, 0.0).is_err());
    }

    #[test]
    fn pure_tmsv_spectrum() {
        for n_s in [0.0, 0.3, 1.0, 7.0] {
            let nu = symplectic_eigenvalues(&tmsv_through_thermal(1.0, n_s, 0.4).unwrap()).unwrap();
            assert!(nu.iter().all(|v| (v - 0.5).abs() < 1e-9), "{nu:?}");
        }
    }

    #[test]
    fn symplectic_eigenvalues_match_determinant_oracle() {
        // two-mode invariants: ν₁²ν₂² = det V and ν₁² + ν₂² = det A + det B + 2 det C
        let v = tmsv_through_thermal(0.6, 2.0, 1.3).unwrap();
        let nu = symplectic_eigenvalues(&v).unwrap();
        let (a, b, c) = (v.get(0, 0), v.get(1, 1), v.get(0, 1));
        let det_v = (a * b - c * c).powi(2);
        let sigma = a * a + b * b - 2.0 * c * c;
        assert!(((nu[0] * nu[1]).powi(2) - det_v).abs() < 1e-9);
        assert!((nu[0] * nu[0] + nu[1] * nu[1] - sigma).abs() < 1e-9);
    }

    #[test]
    fn squeezer_examples() {
        let s = two_mode_squeezer(0.3, 0.0).unwrap();
        let id: Vec<f64> = (0..16).map(|i| if i % 5 == 0 { 1.0 } else { 0.0 }).collect();
        assert_eq!(s.entries(), id.as_slice());
        let (gp, gm) = squeezer_gammas(0.5, 10.0).unwrap();
        assert!((gp - (11.0f64 / 6.0).sqrt()).abs() < 1e-15 && (gm - (5.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert!(two_mode_squeezer(0.5, 10.0).unwrap().symplectic_deviation() < 1e-12);
        assert!(SymplecticMatrix::new(1, vec![2.0, 0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn squeezed_entries_approach_limits() {
        let r = squeezed_residuals(0.7, 1e4, 1.0).unwrap();
        assert!(r.a_residual.abs() <= 10.0 / 1e4);
        // residuals shrink like 1/N_S
        let mut last = f64::INFINITY;
        for n_s in [1e1, 1e2, 1e3, 1e4] {
            let r = squeezed_residuals(0.7, n_s, 1.0).unwrap();
            let worst = r.a_residual.abs().max(r.b_residual.abs()).max(r.c_residual.abs());
            assert!(worst * n_s < 10.0);
            assert!(worst < last);
            last = worst;
        }
    }

    #[test]
    fn entropy_examples() {
        assert!(gaussian_entropy(&CovarianceMatrix::vacuum(2)).unwrap().abs() < 1e-9);
        for nb in [0.0, 0.5, 1.0, 3.0] {
            let h = gaussian_entropy(&CovarianceMatrix::thermal(&[nb]).unwrap()).unwrap();
            assert!((h - g(nb).unwrap()).abs() < 1e-10);
        }
        assert!(gaussian_entropy(&tmsv_through_thermal(1.0, 1.0, 0.0).unwrap()).unwrap().abs() < 1e-8);
    }

    #[test]
    fn uncertainty_is_enforced() {
        assert!(CovarianceMatrix::new(1, vec![0.4, 0.0, 0.0, 0.4]).is_err());
        assert!(CovarianceMatrix::new(1, vec![1.0, 0.2, 0.3, 1.0]).is_err());
        // a squeezed vacuum is fine
        assert!(CovarianceMatrix::new(1, vec![0.25, 0.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn fidelity_closed_forms() {
        let t = |n: f64| CovarianceMatrix::thermal(&[n]).unwrap();
        assert!((gaussian_fidelity_1mode(&t(1.3), &t(1.3)).unwrap() - 1.0).abs() < 1e-12);
        // ⟨0|θ(N)|0⟩ = 1/(N+1)
        assert!((gaussian_fidelity_1mode(&t(0.0), &t(2.0)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // |⟨0|S(r)|0⟩|² = 1/cosh r
        let r: f64 = 0.8;
        let sq = CovarianceMatrix::new(1, vec![0.5 * (-2.0 * r).exp(), 0.0, 0.0, 0.5 * (2.0 * r).exp()]).unwrap();
        assert!((gaussian_fidelity_1mode(&t(0.0), &sq).unwrap() - 1.0 / r.cosh()).abs() < 1e-12);
        assert!(gaussian_fidelity_1mode(&CovarianceMatrix::vacuum(2), &t(0.0)).is_err());
    }

    #[test]
    fn reduced_modes() {
        let v = tmsv_through_thermal(0.5, 2.0, 1.0).unwrap();
        let r = v.reduced(&[1]).unwrap();
        assert_eq!(r.entries(), &[2.5, 0.0, 0.0, 2.5]);
    }
}
