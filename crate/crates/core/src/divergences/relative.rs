use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, spectral_weights, CMatrix, DensityOperator, HermitianEigen, ZeroPolicy};

/// Mass of `ρ` outside `supp(σ)` above which the support condition is considered violated.
pub const SUPPORT_LEAK_TOL: f64 = 1e-10;

/// A divergence value in bits, possibly `+∞`, with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceResult {
    pub value: f64,
    /// Whether `supp(ρ) ⊆ supp(σ)` held, as judged by [`SUPPORT_LEAK_TOL`].
    pub support_ok: bool,
    /// Search iterations used (hypothesis testing only).
    pub iterations: usize,
    /// Upper minus lower certified value, when a dual certificate is available.
    pub gap: Option<f64>,
}

impl DivergenceResult {
    pub fn finite(value: f64) -> Self {
        Self { value, support_ok: true, iterations: 0, gap: None }
    }

    pub fn infinite(support_ok: bool) -> Self {
        Self { value: f64::INFINITY, support_ok, iterations: 0, gap: None }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

fn check_dims(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { context: "divergence arguments", expected: rho.dim(), found: sigma.dim() });
    }
    Ok(())
}

/// `⟨v_k|ρ|v_k⟩` for every eigenvector of `σ`.
fn diag_in_basis(rho: &CMatrix, eig: &HermitianEigen) -> Vec<f64> {
    let q = &eig.vectors;
    let n = eig.dim();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                let mut row = num_complex::Complex64::new(0.0, 0.0);
                for j in 0..n {
                    row += rho[(i, j)] * q[(j, k)];
                }
                acc += (q[(i, k)].conj() * row).re;
            }
            acc
        })
        .collect()
}

/// `Tr(ρ P_ker σ)` together with the decomposition of `σ`.
fn support_leak(rho: &DensityOperator, sigma_eig: &HermitianEigen) -> f64 {
    let thr = sigma_eig.zero_threshold();
    let diag = diag_in_basis(rho.matrix(), sigma_eig);
    sigma_eig.values.iter().zip(&diag).filter(|(l, _)| **l <= thr).map(|(_, d)| *d).sum::<f64>().max(0.0)
}

/// Umegaki relative entropy `D(ρ‖σ) = Tr ρ(log₂ρ − log₂σ)`, `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DivergenceResult> {
    check_dims(rho, sigma)?;
    let se = sigma.eig();
    if support_leak(rho, &se) > SUPPORT_LEAK_TOL {
        return Ok(DivergenceResult::infinite(false));
    }
    let neg_h: f64 = rho.eigenvalues().iter().filter(|&&l| l > 0.0).map(|&l| l * l.log2()).sum();
    let thr = se.zero_threshold();
    let diag = diag_in_basis(rho.matrix(), &se);
    let cross: f64 = se.values.iter().zip(&diag).filter(|(l, _)| **l > thr).map(|(l, d)| d * l.log2()).sum();
    Ok(DivergenceResult::finite((neg_h - cross).max(0.0)))
}

/// Log-ratio operator `log₂ρ − log₂σ` with both logarithms taken on their supports.
fn log_ratio(rho: &DensityOperator, sigma: &DensityOperator) -> Result<CMatrix> {
    let re = rho.eig();
    let se = sigma.eig();
    let lr = re.reconstruct_with(&spectral_weights(&re, f64::log2, ZeroPolicy::Support)?);
    let ls = se.reconstruct_with(&spectral_weights(&se, f64::log2, ZeroPolicy::Support)?);
    Ok(&lr - &ls)
}

/// Relative entropy variance `V(ρ‖σ) = Tr ρ(log₂ρ − log₂σ − D)²`.
pub fn relative_entropy_variance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let d = relative_entropy(rho, sigma)?;
    if !d.is_finite() {
        return Err(Error::SupportViolation("relative entropy variance needs supp(rho) within supp(sigma)".into()));
    }
    let n = rho.dim();
    let m = &log_ratio(rho, sigma)? - &CMatrix::identity(n).scale_real(d.value);
    let rm = rho.matrix().matmul(&m);
    Ok(rm.trace_product(&m).re.max(0.0))
}

/// Sandwiched Rényi divergence `D̃_α(ρ‖σ) = (α−1)⁻¹ log₂ Tr(σ^β ρ σ^β)^α`, `β = (1−α)/(2α)`.
///
/// At `α = 1` this is the relative entropy.
pub fn sandwiched_renyi(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<DivergenceResult> {
    check_dims(rho, sigma)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("sandwiched Renyi order must be positive and finite, got {alpha}")));
    }
    if alpha == 1.0 {
        return relative_entropy(rho, sigma);
    }
    let se = sigma.eig();
    let leak = support_leak(rho, &se);
    if alpha > 1.0 && leak > SUPPORT_LEAK_TOL {
        return Ok(DivergenceResult::infinite(false));
    }
    let q = sandwiched_trace(rho.matrix(), &se, alpha)?;
    if q <= 0.0 {
        return Ok(DivergenceResult::infinite(leak <= SUPPORT_LEAK_TOL));
    }
    let mut r = DivergenceResult::finite(q.log2() / (alpha - 1.0));
    r.support_ok = leak <= SUPPORT_LEAK_TOL;
    Ok(r)
}

/// `Tr(σ^β X σ^β)^α` for PSD `X` and a decomposed `σ`.
pub(crate) fn sandwiched_trace(x: &CMatrix, sigma_eig: &HermitianEigen, alpha: f64) -> Result<f64> {
    let beta = (1.0 - alpha) / (2.0 * alpha);
    let sb = sigma_eig.reconstruct_with(&spectral_weights(sigma_eig, |l| l.powf(beta), ZeroPolicy::Support)?);
    let inner = x.conjugate_by(&sb);
    let e = hermitian_eig(&inner.hermitian_part())?;
    let thr = e.zero_threshold();
    Ok(e.values.iter().filter(|&&l| l > thr).map(|l| l.powf(alpha)).sum())
}
