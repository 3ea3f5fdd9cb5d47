use std::cmp::Ordering;

use statrs::function::gamma::ln_gamma;

use crate::error::{check_range, Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, DensityOperator, HermitianEigen};

use super::relative::{DivergenceResult, SUPPORT_LEAK_TOL};

const MAX_BISECTIONS: usize = 200;
const MAX_TYPES: usize = 5_000_000;

struct Split {
    rho_pos: f64,
    rho_zero: f64,
    sigma_pos: f64,
    sigma_zero: f64,
}

/// `Tr P ρ` and `Tr P σ` for the positive and near-zero eigenspaces of `ρ − tσ`.
fn split(rho: &CMatrix, sigma: &CMatrix, t: f64, window: f64) -> Result<Split> {
    let m = rho - &sigma.scale_real(t);
    let e = hermitian_eig(&m)?;
    let mut s = Split { rho_pos: 0.0, rho_zero: 0.0, sigma_pos: 0.0, sigma_zero: 0.0 };
    for (k, &lam) in e.values.iter().enumerate() {
        if lam < -window {
            continue;
        }
        let v = e.vector(k);
        let r = expectation(rho, &v);
        let q = expectation(sigma, &v);
        if lam > window {
            s.rho_pos += r;
            s.sigma_pos += q;
        } else {
            s.rho_zero += r;
            s.sigma_zero += q;
        }
    }
    Ok(s)
}

fn expectation(m: &CMatrix, v: &[num_complex::Complex64]) -> f64 {
    let mv = m.mat_vec(v);
    v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
}

fn kernel_mass(rho: &CMatrix, sigma_eig: &HermitianEigen) -> f64 {
    let thr = sigma_eig.zero_threshold();
    (0..sigma_eig.dim())
        .filter(|&k| sigma_eig.values[k] <= thr)
        .map(|k| expectation(rho, &sigma_eig.vector(k)))
        .sum::<f64>()
        .max(0.0)
}

/// `D_h^ε(ρ‖σ) = −log₂ min{Tr Λσ : 0 ≤ Λ ≤ I, Tr Λρ ≥ 1−ε}` via the quantum Neyman–Pearson test.
///
/// The threshold `t` of `ρ − tσ` is located by bisection; the boundary eigenspace receives a
/// fractional weight so that `Tr Λρ = 1 − ε` exactly. The result's `gap` holds the distance to the
/// dual bound `μ(1−ε) − Tr(μρ − σ)₊` evaluated at `μ = 1/t`.
pub fn hypothesis_testing(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<DivergenceResult> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { context: "hypothesis testing", expected: rho.dim(), found: sigma.dim() });
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::OutOfRange { name: "eps", value: eps, allowed: "0 <= eps < 1" });
    }
    if rho.matrix() == sigma.matrix() {
        return Ok(DivergenceResult::finite(-(1.0 - eps).log2()));
    }
    let (r, s) = (rho.matrix(), sigma.matrix());
    let se = sigma.eig();
    let leak = kernel_mass(r, &se);
    let support_ok = leak <= SUPPORT_LEAK_TOL;
    if leak >= 1.0 - eps {
        return Ok(DivergenceResult::infinite(support_ok));
    }
    if eps == 0.0 {
        let re = rho.eig();
        let thr = re.zero_threshold();
        let beta: f64 = (0..re.dim()).filter(|&k| re.values[k] > thr).map(|k| expectation(s, &re.vector(k))).sum();
        return Ok(if beta > 0.0 {
            DivergenceResult { value: -beta.log2(), support_ok, iterations: 0, gap: None }
        } else {
            DivergenceResult::infinite(support_ok)
        });
    }

    let target = 1.0 - eps;
    let norm_r = rho.eig().spectral_radius();
    let norm_s = se.spectral_radius();
    let delta = |t: f64| 1e-12 * norm_r.max(t * norm_s);
    let f = |t: f64| -> Result<f64> { Ok(split(r, s, t, delta(t))?.rho_pos) };

    // f(lo) > 1−ε ≥ f(hi)
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut iterations = 0;
    while f(hi)? > target {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if !hi.is_finite() || iterations > 2000 {
            return Err(Error::Domain("hypothesis testing threshold search did not bracket".into()));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let window = delta(hi).max(4.0 * (hi - lo) * norm_s);
    let sp = split(r, s, hi, window)?;
    let c = if sp.rho_zero > 0.0 { ((target - sp.rho_pos) / sp.rho_zero).clamp(0.0, 1.0) } else { 0.0 };
    let beta = sp.sigma_pos + c * sp.sigma_zero;
    if !(beta > 0.0) {
        return Ok(DivergenceResult { value: f64::INFINITY, support_ok, iterations, gap: None });
    }
    let value = -beta.log2();

    let mu = 1.0 / hi;
    let pos_part = {
        let m = &r.scale_real(mu) - s;
        hermitian_eig(&m)?.values.iter().filter(|&&l| l > 0.0).sum::<f64>()
    };
    let dual = mu * target - pos_part;
    let gap = if dual > 0.0 { Some((-dual.log2() - value).max(0.0)) } else { None };
    Ok(DivergenceResult { value, support_ok, iterations, gap })
}

/// Classical `D_h^ε(p‖q)`: the exact linear-program optimum via a Neyman–Pearson ordering of outcomes.
pub fn classical_hypothesis_testing(p: &[f64], q: &[f64], eps: f64) -> Result<DivergenceResult> {
    check_distributions(p, q)?;
    check_range("eps", eps, 0.0, 1.0 - f64::EPSILON, "0 <= eps < 1")?;
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    order.sort_by(|&a, &b| ratio_cmp(p[b], q[b], p[a], q[a]));
    let items: Vec<(f64, f64)> = order.iter().map(|&i| (p[i].ln(), q[i].ln())).collect();
    Ok(greedy_log(&items, eps))
}

/// Orders `pa/qa` against `pb/qb` without dividing by zero.
fn ratio_cmp(pa: f64, qa: f64, pb: f64, qb: f64) -> Ordering {
    (pa * qb).partial_cmp(&(pb * qa)).unwrap_or(Ordering::Equal)
}

/// Greedy Neyman–Pearson accumulation over items `(ln P, ln Q)` sorted by decreasing likelihood ratio.
fn greedy_log(items: &[(f64, f64)], eps: f64) -> DivergenceResult {
    let target = 1.0 - eps;
    let mut acc_p = 0.0;
    let mut log_beta = f64::NEG_INFINITY;
    for &(lp, lq) in items {
        let need = target - acc_p;
        if need <= 0.0 {
            break;
        }
        let pm = lp.exp();
        if pm <= 0.0 {
            continue;
        }
        let frac = (need / pm).min(1.0);
        if lq > f64::NEG_INFINITY {
            log_beta = log_add(log_beta, frac.ln() + lq);
        }
        acc_p += frac * pm;
    }
    if log_beta == f64::NEG_INFINITY {
        DivergenceResult::infinite(false)
    } else {
        DivergenceResult::finite(-log_beta / std::f64::consts::LN_2)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn check_distributions(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::DimensionMismatch { context: "classical distributions", expected: p.len(), found: q.len() });
    }
    for v in [p, q] {
        if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidState("probabilities must be finite and nonnegative".into()));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("probabilities sum to {s}, not 1")));
        }
    }
    Ok(())
}

/// Exact `D_h^ε(p^{⊗n}‖q^{⊗n})` for iid classical distributions.
///
/// Letters are grouped by log-likelihood ratio; the test is built over types of the groups,
/// whose masses are multinomial and evaluated in the log domain.
pub fn iid_classical_hypothesis_testing(p: &[f64], q: &[f64], n: usize, eps: f64) -> Result<DivergenceResult> {
    check_distributions(p, q)?;
    check_range("eps", eps, 0.0, 1.0 - f64::EPSILON, "0 <= eps < 1")?;
    if n == 0 {
        return Err(Error::OutOfRange { name: "n", value: 0.0, allowed: "n >= 1" });
    }

    // groups: (llr, P mass, Q mass)
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for i in (0..p.len()).filter(|&i| p[i] > 0.0) {
        let llr = if q[i] > 0.0 { (p[i] / q[i]).ln() } else { f64::INFINITY };
        match groups.iter_mut().find(|g| same_llr(g.0, llr)) {
            Some(g) => {
                g.1 += p[i];
                g.2 += q[i];
            }
            None => groups.push((llr, p[i], q[i])),
        }
    }
    let k = groups.len();
    let count = type_count(n, k);
    if count > MAX_TYPES as f64 {
        return Err(Error::Guard(format!("{count:.0} types exceed the enumeration limit")));
    }

    let ln_nfact = ln_gamma(n as f64 + 1.0);
    let mut items: Vec<(f64, f64, f64)> = Vec::with_capacity(count as usize);
    let mut counts = vec![0usize; k];
    enumerate_types(n, 0, &mut counts, &mut |c| {
        let mut coef = ln_nfact;
        let mut lp = 0.0;
        let mut lq = 0.0;
        let mut llr = 0.0;
        for (j, &cj) in c.iter().enumerate() {
            if cj == 0 {
                continue;
            }
            let (g_llr, gp, gq) = groups[j];
            coef -= ln_gamma(cj as f64 + 1.0);
            lp += cj as f64 * gp.ln();
            lq += if gq > 0.0 { cj as f64 * gq.ln() } else { f64::NEG_INFINITY };
            llr += cj as f64 * g_llr;
        }
        items.push((llr, coef + lp, coef + lq));
    });
    items.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let pairs: Vec<(f64, f64)> = items.into_iter().map(|(_, lp, lq)| (lp, lq)).collect();
    Ok(greedy_log(&pairs, eps))
}

fn same_llr(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn type_count(n: usize, k: usize) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    (ln_gamma((n + k) as f64) - ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64)).exp().round()
}

fn enumerate_types(remaining: usize, idx: usize, counts: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if idx + 1 == counts.len() {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[idx] = c;
        enumerate_types(remaining - c, idx + 1, counts, visit);
    }
}
