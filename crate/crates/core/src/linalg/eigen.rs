use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};
use crate::error::{Error, Result};

/// Default tolerance used when validating Hermiticity, traces and positivity.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues whose magnitude is below this fraction of the spectral radius count as zero.
pub const SUPPORT_REL_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 80;

/// Spectral decomposition `M = Q diag(values) Q†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Absolute threshold below which an eigenvalue is treated as zero.
    pub fn zero_threshold(&self) -> f64 {
        SUPPORT_REL_TOL * self.spectral_radius().max(f64::MIN_POSITIVE)
    }

    /// `Σ_k w_k |v_k⟩⟨v_k|` for per-eigenvalue weights.
    pub fn reconstruct_with(&self, weights: &[f64]) -> CMatrix {
        let n = self.dim();
        let q = &self.vectors;
        let mut out = CMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let qi = q[(i, k)] * w;
                if qi == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += qi * q[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(&self.values)
    }
}

/// Hermitian eigendecomposition with the default tolerance.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    hermitian_eig_tol(m, DEFAULT_TOL)
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized to `(M + M†)/2` when its Hermitian deviation is within
/// `tol · max(1, max|M_ij|)`; larger deviations are rejected.
pub fn hermitian_eig_tol(m: &CMatrix, tol: f64) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let dev = m.hermitian_deviation();
    if dev > tol * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = m.rows();
    if m.is_diagonal() {
        return Ok(diagonal_eig(m));
    }

    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = f64::EPSILON * scale;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE || r <= 1e-3 * target / n as f64 {
                    continue;
                }
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, pairs[k].1)]);
    Ok(HermitianEigen { values, vectors })
}

fn diagonal_eig(m: &CMatrix) -> HermitianEigen {
    let n = m.rows();
    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &(_, i)) in pairs.iter().enumerate() {
        vectors[(i, k)] = Complex64::new(1.0, 0.0);
    }
    HermitianEigen { values: pairs.iter().map(|p| p.0).collect(), vectors }
}

/// Zeroes `a[p][q]` with `A ← J† A J`, `V ← V J`.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let r = apq.norm();
    let phase = apq / r; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let pc = phase.conj();
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = -pc * s;
    let j_qq = pc * c;

    // columns: A ← A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    // rows: A ← J† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

/// How eigenvalues within the zero threshold are treated by [`spectral_function`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroPolicy {
    /// Zero eigenvalues map to zero: the function acts on the support only.
    Support,
    /// The function is evaluated on zero eigenvalues too; a non-finite value is an error.
    Strict,
}

/// `Q f(Λ) Q†` for Hermitian `M = Q Λ Q†`.
pub fn spectral_function(m: &CMatrix, f: impl Fn(f64) -> f64, policy: ZeroPolicy) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let weights = spectral_weights(&eig, &f, policy)?;
    Ok(eig.reconstruct_with(&weights))
}

/// Applies `f` to the eigenvalues of an already decomposed matrix.
pub fn spectral_weights(eig: &HermitianEigen, f: impl Fn(f64) -> f64, policy: ZeroPolicy) -> Result<Vec<f64>> {
    let thr = eig.zero_threshold();
    eig.values
        .iter()
        .map(|&lam| {
            if lam.abs() <= thr {
                match policy {
                    ZeroPolicy::Support => Ok(0.0),
                    ZeroPolicy::Strict => {
                        let y = f(0.0);
                        if y.is_finite() {
                            Ok(y)
                        } else {
                            Err(Error::Domain(format!("function undefined at zero eigenvalue (value {y})")))
                        }
                    }
                }
            } else {
                let y = f(lam);
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(Error::Domain(format!("function undefined at eigenvalue {lam:.6e}")))
                }
            }
        })
        .collect()
}

/// Base-2 matrix logarithm on the support of a PSD matrix.
pub fn log2_psd(m: &CMatrix) -> Result<CMatrix> {
    spectral_function(m, f64::log2, ZeroPolicy::Support)
}

/// `M^p` on the support of a PSD matrix (negative powers act as pseudo-inverse powers).
pub fn power_psd(m: &CMatrix, p: f64) -> Result<CMatrix> {
    spectral_function(m, |x| x.powf(p), ZeroPolicy::Support)
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues are clamped.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let w: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(eig.reconstruct_with(&w))
}

/// Orthogonal projector onto the eigenspaces with eigenvalue above the zero threshold.
pub fn support_projector(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let thr = eig.zero_threshold();
    let w: Vec<f64> = eig.values.iter().map(|&l| if l > thr { 1.0 } else { 0.0 }).collect();
    Ok(eig.reconstruct_with(&w))
}

/// Trace norm `Tr√(M†M)`.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if m.is_square() && m.hermitian_deviation() <= 1e-12 * m.max_abs().max(1.0) {
        let eig = hermitian_eig(m)?;
        return Ok(eig.values.iter().map(|l| l.abs()).sum());
    }
    let g = m.adjoint().matmul(m);
    let eig = hermitian_eig(&g)?;
    Ok(eig.values.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

/// Which factor of a bipartite space to keep in [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Partial trace of an operator on `A ⊗ B`.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), keep: Keep) -> Result<CMatrix> {
    let keep_idx = match keep {
        Keep::First => 0,
        Keep::Second => 1,
    };
    partial_trace_multi(m, &[dims.0, dims.1], &[keep_idx])
}

/// Partial trace over every subsystem not listed in `keep` (kept in their original order).
pub fn partial_trace_multi(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() != total {
        return Err(Error::DimensionMismatch { context: "partial trace", expected: total, found: m.rows() });
    }
    if keep.iter().any(|&k| k >= dims.len()) || keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("partial trace: kept subsystems must be distinct, sorted and in range".into()));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kn: usize = kdims.iter().product();
    let tn: usize = tdims.iter().product();

    // strides of each subsystem in the full index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offset = |sub: &[usize], sub_dims: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for k in (0..sub.len()).rev() {
            off += (idx % sub_dims[k]) * strides[sub[k]];
            idx /= sub_dims[k];
        }
        off
    };
    let koff: Vec<usize> = (0..kn).map(|a| offset(keep, &kdims, a)).collect();
    let toff: Vec<usize> = (0..tn).map(|t| offset(&traced, &tdims, t)).collect();

    let mut out = CMatrix::zeros(kn, kn);
    for a in 0..kn {
        for b in 0..kn {
            let mut acc = ZERO;
            for &t in &toff {
                acc += m[(koff[a] + t, koff[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}
