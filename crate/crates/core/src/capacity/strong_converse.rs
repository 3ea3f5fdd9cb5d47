use rayon::prelude::*;

use crate::channels::EnvParamCell;
use crate::divergences::average_state;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, spectral_weights, CMatrix, DensityOperator, HermitianEigen, ZeroPolicy};

const INNER_TOL: f64 = 1e-8;
const INNER_MAX_ITER: usize = 500;
const OUTER_MAX_ITER: usize = 400;
const OUTER_GAP_TOL: f64 = 1e-9;

/// `{1 + 2^{-k} : k = 1..10} ∪ {2, 4, 8, 16, 64}`, with 64 standing in for `α → ∞`.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (1..=10).map(|k| 1.0 + (-(k as f64)).exp2()).collect();
    g.extend([2.0, 4.0, 8.0, 16.0, 64.0]);
    g.sort_by(f64::total_cmp);
    g
}

/// `Ĩ_α = max_p min_σ D̃_α(θ_XE ‖ θ_X ⊗ σ)` for one order `α > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenyiInformation {
    pub alpha: f64,
    /// Value at the returned distribution and its (approximately) optimal `σ`.
    pub value: f64,
    /// Certified upper bound `(α−1)⁻¹ log₂ max_x Q_x(σ)`.
    pub upper: f64,
    pub optimizer: Vec<f64>,
    pub iterations: usize,
}

/// Per-order contribution to the strong-converse exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPoint {
    pub alpha: f64,
    /// Upper bound on `Ĩ_α` used in the exponent.
    pub renyi_information: f64,
    pub renyi_information_value: f64,
    /// `(1 − 1/α)(R − Ĩ_α)`.
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongConverseReport {
    pub rate: f64,
    pub n: usize,
    pub points: Vec<AlphaPoint>,
    /// `max_α (1 − 1/α)(R − Ĩ_α)` over the grid.
    pub exponent: f64,
    pub best_alpha: f64,
    /// `min(1, 2^{−n · exponent})`.
    pub p_succ_bound: f64,
    /// True when the exponent is not positive, so the bound says nothing.
    pub vacuous: bool,
}

pub fn strong_converse_bound(cell: &EnvParamCell, n: usize, rate: f64, grid: &[f64]) -> Result<StrongConverseReport> {
    strong_converse_bound_states(cell.env_states(), n, rate, grid)
}

/// Strong-converse success-probability bound for explicit environment states.
pub fn strong_converse_bound_states(
    states: &[DensityOperator],
    n: usize,
    rate: f64,
    grid: &[f64],
) -> Result<StrongConverseReport> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::OutOfRange { name: "rate", value: rate, allowed: "finite rate >= 0" });
    }
    if grid.is_empty() {
        return Err(Error::Invalid("alpha grid is empty".into()));
    }
    if let Some(&a) = grid.iter().find(|&&a| !(a > 1.0) || !a.is_finite()) {
        return Err(Error::OutOfRange { name: "alpha", value: a, allowed: "1 < alpha < inf" });
    }
    let infos = grid
        .par_iter()
        .map(|&a| renyi_information(states, a))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<AlphaPoint> = infos
        .iter()
        .map(|r| AlphaPoint {
            alpha: r.alpha,
            renyi_information: r.upper,
            renyi_information_value: r.value,
            term: (1.0 - 1.0 / r.alpha) * (rate - r.upper),
        })
        .collect();
    let best = points
        .iter()
        .max_by(|a, b| a.term.total_cmp(&b.term))
        .expect("grid is nonempty");
    let exponent = best.term;
    let p_succ_bound = if exponent > 0.0 { (-(n as f64) * exponent).exp2().min(1.0) } else { 1.0 };
    Ok(StrongConverseReport {
        rate,
        n,
        best_alpha: best.alpha,
        exponent,
        p_succ_bound,
        vacuous: exponent <= 0.0,
        points,
    })
}

/// Maximizes the concave, 1-homogeneous `G(p) = min_σ Σ_x p_x Q_x(σ)` by exponentiated gradient;
/// the gradient is `Q_x(σ*)` at the inner minimizer.
pub fn renyi_information(states: &[DensityOperator], alpha: f64) -> Result<RenyiInformation> {
    if states.is_empty() {
        return Err(Error::Invalid("no environment states".into()));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::OutOfRange { name: "alpha", value: alpha, allowed: "1 < alpha < inf" });
    }
    let k = states.len();
    let to_bits = |g: f64| g.log2() / (alpha - 1.0);
    let mut p = vec![1.0 / k as f64; k];
    let mut inner = minimize_sigma(states, &p, alpha, None)?;
    let mut g = dot(&p, &inner.q);
    let mut best_upper = to_bits(max(&inner.q));
    let mut eta = 1.0;
    let mut iterations = 0;
    while iterations < OUTER_MAX_ITER && best_upper - to_bits(g) > OUTER_GAP_TOL {
        iterations += 1;
        let mut accepted = false;
        while eta > 1e-8 {
            let w: Vec<f64> = p.iter().zip(&inner.q).map(|(pi, qi)| pi * (eta * (qi / g - 1.0)).exp()).collect();
            let s: f64 = w.iter().sum();
            let cand: Vec<f64> = w.into_iter().map(|x| x / s).collect();
            let cand_inner = minimize_sigma(states, &cand, alpha, Some(&inner.sigma))?;
            let cand_g = dot(&cand, &cand_inner.q);
            best_upper = best_upper.min(to_bits(max(&cand_inner.q)));
            if cand_g >= g * (1.0 + 1e-15) {
                p = cand;
                inner = cand_inner;
                g = cand_g;
                eta = (eta * 1.5).min(64.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let value = to_bits(g);
    Ok(RenyiInformation { alpha, value, upper: best_upper.max(value), optimizer: p, iterations })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

struct Inner {
    sigma: CMatrix,
    /// `Q_x(σ) = Tr(σ^β θ^x σ^β)^α`.
    q: Vec<f64>,
}

/// Approximately minimizes `Σ_x p_x Q_x(σ)` over states `σ`.
///
/// Diagonal inputs use the closed form `σ_i ∝ (Σ_x p_x (θ^x_i)^α)^{1/α}`. Otherwise the update
/// `σ ← (σ^{(α−1)/2} T σ^{(α−1)/2})^{1/α}`, `T = Σ_x p_x (σ^β θ^x σ^β)^α`, is iterated with a
/// monotone safeguard; its fixed points satisfy `σ ∝ T`.
fn minimize_sigma(states: &[DensityOperator], p: &[f64], alpha: f64, warm: Option<&CMatrix>) -> Result<Inner> {
    if states.iter().all(|t| t.matrix().is_diagonal()) {
        return Ok(diagonal_minimizer(states, p, alpha));
    }
    let mut sigma = match warm {
        Some(s) => s.clone(),
        None => average_state(p, states).into_matrix(),
    };
    let (mut t, mut q) = sandwich_terms(states, p, alpha, &sigma)?;
    let mut f = dot(p, &q);
    for _ in 0..INNER_MAX_ITER {
        let se = hermitian_eig(&sigma)?;
        let half = power(&se, (alpha - 1.0) / 2.0)?;
        let next = matrix_power(&t.conjugate_by(&half), 1.0 / alpha)?;
        let next = next.scale_real(1.0 / next.trace().re);
        let mut step = 1.0;
        let mut improved = None;
        while step > 1e-4 {
            let cand = if step == 1.0 { next.clone() } else { &sigma.scale_real(1.0 - step) + &next.scale_real(step) };
            let (ct, cq) = sandwich_terms(states, p, alpha, &cand)?;
            let cf = dot(p, &cq);
            if cf <= f {
                improved = Some((cand, ct, cq, cf));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, ct, cq, cf)) = improved else { break };
        let change = cand.max_abs_diff(&sigma);
        sigma = cand;
        t = ct;
        q = cq;
        f = cf;
        if change < INNER_TOL {
            break;
        }
    }
    Ok(Inner { sigma, q })
}

fn diagonal_minimizer(states: &[DensityOperator], p: &[f64], alpha: f64) -> Inner {
    let d = states[0].dim();
    let diag: Vec<Vec<f64>> = states.iter().map(|t| t.matrix().diagonal().iter().map(|z| z.re.max(0.0)).collect()).collect();
    let s: Vec<f64> = (0..d)
        .map(|i| p.iter().zip(&diag).map(|(px, t)| px * t[i].powf(alpha)).sum::<f64>().powf(1.0 / alpha))
        .collect();
    let total: f64 = s.iter().sum();
    let s: Vec<f64> = s.into_iter().map(|x| x / total).collect();
    let q = diag
        .iter()
        .map(|t| {
            (0..d)
                .filter(|&i| t[i] > 0.0)
                .map(|i| if s[i] > 0.0 { t[i].powf(alpha) * s[i].powf(1.0 - alpha) } else { f64::INFINITY })
                .sum()
        })
        .collect();
    Inner { sigma: CMatrix::diag_real(&s), q }
}

/// `T = Σ_x p_x (σ^β θ^x σ^β)^α` and every `Q_x = Tr(σ^β θ^x σ^β)^α`.
fn sandwich_terms(states: &[DensityOperator], p: &[f64], alpha: f64, sigma: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let beta = (1.0 - alpha) / (2.0 * alpha);
    let se = hermitian_eig(sigma)?;
    let sb = power(&se, beta)?;
    let proj = power(&se, 0.0)?;
    let d = sigma.rows();
    let mut t = CMatrix::zeros(d, d);
    let mut q = Vec::with_capacity(states.len());
    for (px, theta) in p.iter().zip(states) {
        // mass outside supp σ makes Q_x infinite
        let inside = theta.matrix().trace_product(&proj).re;
        if inside < 1.0 - 1e-10 {
            q.push(f64::INFINITY);
            continue;
        }
        let e = hermitian_eig(&theta.matrix().conjugate_by(&sb).hermitian_part())?;
        let w = spectral_weights(&e, |l| l.max(0.0).powf(alpha), ZeroPolicy::Support)?;
        q.push(w.iter().sum());
        if *px > 0.0 {
            t = &t + &e.reconstruct_with(&w).scale_real(*px);
        }
    }
    Ok((t, q))
}

fn power(e: &HermitianEigen, p: f64) -> Result<CMatrix> {
    let w = spectral_weights(e, |l| if l > 0.0 { l.powf(p) } else { 0.0 }, ZeroPolicy::Support)?;
    Ok(e.reconstruct_with(&w))
}

fn matrix_power(m: &CMatrix, p: f64) -> Result<CMatrix> {
    power(&hermitian_eig(&m.hermitian_part())?, p)
}
