use crate::channels::EnvParamCell;
use crate::divergences::{relative_entropy_variance, std_normal_inverse, CqEnsemble};
use crate::error::{Error, Result};
use crate::linalg::DensityOperator;

use super::blahut::blahut_arimoto;

const BA_TOL: f64 = 1e-10;
const BA_MAX_ITER: usize = 200_000;
/// Largest number of near-optimal labels for which the optimal face is enumerated.
const MAX_FACE_LABELS: usize = 8;
/// The `O(log n / n)` remainder is left symbolic.
pub const THIRD_ORDER_NOTE: &str = "O(log n / n) remainder not evaluated";

/// Second-order (dispersion) upper bound on the rate of an environment-parametrized cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderReport {
    pub capacity_term: f64,
    pub capacity_gap: f64,
    /// `V_ε`: the minimum (`ε ≤ ½`) or maximum (`ε > ½`) variance over the optimal distributions found.
    pub variance: f64,
    pub variance_min: f64,
    pub variance_max: f64,
    /// Distinct capacity-achieving distributions found on the optimal face.
    pub optimizers: Vec<Vec<f64>>,
    /// False when the optimal face was too large to enumerate and only the iterative optimizer was used.
    pub face_enumerated: bool,
    pub n: usize,
    pub eps: f64,
    pub phi_inv: f64,
    /// `capacity_term + √(V_ε/n) Φ⁻¹(ε)`; the `O(log n / n)` remainder is not included.
    pub bound: f64,
    pub third_order_note: &'static str,
}

impl SecondOrderReport {
    pub fn optimizer_unique(&self) -> bool {
        self.optimizers.len() <= 1
    }
}

pub fn second_order_bound(cell: &EnvParamCell, n: usize, eps: f64) -> Result<SecondOrderReport> {
    second_order_bound_states(cell.env_states(), n, eps)
}

/// Same as [`second_order_bound`] for an explicit list of environment states.
pub fn second_order_bound_states(states: &[DensityOperator], n: usize, eps: f64) -> Result<SecondOrderReport> {
    if n == 0 {
        return Err(Error::OutOfRange { name: "n", value: 0.0, allowed: "n >= 1" });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange { name: "eps", value: eps, allowed: "0 < eps < 1" });
    }
    let ba = blahut_arimoto(states, BA_TOL, BA_MAX_ITER)?;
    let face_tol = (100.0 * ba.gap).max(1e-7);
    let top = ba.divergences.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let active: Vec<usize> = (0..states.len()).filter(|&x| ba.divergences[x] >= top - face_tol).collect();

    let face_enumerated = active.len() <= MAX_FACE_LABELS;
    let mut optimizers: Vec<Vec<f64>> = Vec::new();
    if face_enumerated {
        // V is linear in p on the optimal face, so its extremes sit at vertices
        let avg = crate::divergences::average_state(&ba.optimizer, states);
        for p in face_vertices(states, &active, &avg) {
            if !optimizers.iter().any(|q| max_diff(q, &p) < 1e-6) {
                optimizers.push(p);
            }
        }
    }
    if optimizers.is_empty() {
        optimizers.push(ba.optimizer.clone());
    }

    let variances = optimizers.iter().map(|p| cq_variance(states, p)).collect::<Result<Vec<_>>>()?;
    let variance_min = variances.iter().cloned().fold(f64::INFINITY, f64::min);
    let variance_max = variances.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let variance = if eps <= 0.5 { variance_min } else { variance_max };
    let phi_inv = std_normal_inverse(eps)?;
    let bound = ba.value + (variance / n as f64).sqrt() * phi_inv;
    Ok(SecondOrderReport {
        capacity_term: ba.value,
        capacity_gap: ba.gap,
        variance,
        variance_min,
        variance_max,
        optimizers,
        face_enumerated,
        n,
        eps,
        phi_inv,
        bound,
        third_order_note: THIRD_ORDER_NOTE,
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `V(θ_XE ‖ θ_X ⊗ θ_E)` for the distribution `p`.
fn cq_variance(states: &[DensityOperator], p: &[f64]) -> Result<f64> {
    let ens = CqEnsemble::new(p.to_vec(), states.to_vec())?;
    let px = DensityOperator::diagonal(p)?;
    relative_entropy_variance(&ens.cq_state(), &px.tensor(&ens.average()))
}

/// Vertices of `{p ≥ 0 : Σ_{x∈active} p_x θ^x = θ̄, Σ p_x = 1}`.
///
/// Every vertex is supported on a subset whose states are linearly independent; each subset is
/// solved by least squares and kept when the residual is negligible and the solution is nonnegative.
fn face_vertices(states: &[DensityOperator], active: &[usize], avg: &DensityOperator) -> Vec<Vec<f64>> {
    let vectorize = |m: &DensityOperator| -> Vec<f64> {
        let mut v: Vec<f64> = m.matrix().as_slice().iter().flat_map(|z| [z.re, z.im]).collect();
        v.push(1.0);
        v
    };
    let target = vectorize(avg);
    let columns: Vec<Vec<f64>> = active.iter().map(|&x| vectorize(&states[x])).collect();
    let k = active.len();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << k) {
        let subset: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
        let cols: Vec<&[f64]> = subset.iter().map(|&i| columns[i].as_slice()).collect();
        let Some((coef, residual)) = least_squares(&cols, &target) else { continue };
        if residual > 1e-6 || coef.iter().any(|&c| c < -1e-9) {
            continue;
        }
        let mut p = vec![0.0; states.len()];
        for (&i, &c) in subset.iter().zip(&coef) {
            p[active[i]] = c.max(0.0);
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        out.push(p);
    }
    out
}

/// Least squares `min ‖A c − b‖` by modified Gram–Schmidt; `None` if `A` is rank deficient.
fn least_squares(cols: &[&[f64]], b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = cols.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut v = cols[j].to_vec();
        let norm0 = dot(&v, &v).sqrt();
        for i in 0..j {
            let c = dot(&q[i], &v);
            r[i][j] = c;
            v.iter_mut().zip(&q[i]).for_each(|(a, b)| *a -= c * b);
        }
        let nv = dot(&v, &v).sqrt();
        if nv <= 1e-10 * norm0.max(1e-300) {
            return None;
        }
        r[j][j] = nv;
        q.push(v.into_iter().map(|a| a / nv).collect());
    }
    let qb: Vec<f64> = q.iter().map(|qi| dot(qi, b)).collect();
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|j| r[i][j] * c[j]).sum();
        c[i] = (qb[i] - s) / r[i][i];
    }
    let mut res = b.to_vec();
    for (col, ci) in cols.iter().zip(&c) {
        res.iter_mut().zip(col.iter()).for_each(|(a, b)| *a -= ci * b);
    }
    Some((c, dot(&res, &res).sqrt()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::binary_entropy;

    fn classical_cell() -> Vec<DensityOperator> {
        vec![DensityOperator::diagonal(&[0.9, 0.1]).unwrap(), DensityOperator::diagonal(&[0.1, 0.9]).unwrap()]
    }

    #[test]
    fn identical_states_give_zero() {
        let t = DensityOperator::diagonal(&[0.6, 0.4]).unwrap();
        let r = second_order_bound_states(&[t.clone(), t], 100, 0.1).unwrap();
        assert!(r.capacity_term.abs() < 1e-12);
        assert!(r.variance.abs() < 1e-12);
        assert!(r.bound.abs() < 1e-9);
        // every distribution is optimal here
        assert!(!r.optimizer_unique());
    }

    #[test]
    fn classical_dispersion() {
        let r = second_order_bound_states(&classical_cell(), 1000, 0.05).unwrap();
        let c = 1.0 - binary_entropy(0.1);
        let v = 0.09 * 9f64.log2().powi(2);
        assert!((r.capacity_term - c).abs() < 1e-9);
        assert!((r.variance - v).abs() < 1e-8);
        let expected = c + (v / 1000.0).sqrt() * std_normal_inverse(0.05).unwrap();
        assert!((r.bound - expected).abs() < 1e-8);
        assert!(r.optimizer_unique());
    }

    #[test]
    fn median_error_gives_capacity() {
        let r = second_order_bound_states(&classical_cell(), 10, 0.5).unwrap();
        assert_eq!(r.bound, r.capacity_term);
    }

    #[test]
    fn converges_to_capacity() {
        // the gap is exactly √(V/n)|Φ⁻¹(ε)|: ≈1.56e-3 at n = 10⁶, ε = 0.05
        let v = 0.09 * 9f64.log2().powi(2);
        for n in [1_000_000usize, 100_000_000] {
            let r = second_order_bound_states(&classical_cell(), n, 0.05).unwrap();
            let gap = r.capacity_term - r.bound;
            assert!((gap - (v / n as f64).sqrt() * 1.6448536269514722).abs() < 1e-9);
        }
        let r = second_order_bound_states(&classical_cell(), 1_000_000, 0.2).unwrap();
        assert!((r.bound - r.capacity_term).abs() < 1e-3);
    }

    #[test]
    fn degenerate_face_is_detected() {
        // both the Z-basis pair and the X-basis pair average to π
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| num_complex::Complex64::new(x, 0.0);
        let states = vec![
            DensityOperator::diagonal(&[1.0, 0.0]).unwrap(),
            DensityOperator::diagonal(&[0.0, 1.0]).unwrap(),
            DensityOperator::pure(&[c(h), c(h)]).unwrap(),
            DensityOperator::pure(&[c(h), c(-h)]).unwrap(),
        ];
        let r = second_order_bound_states(&states, 100, 0.1).unwrap();
        assert!((r.capacity_term - 1.0).abs() < 1e-8);
        assert!(!r.optimizer_unique());
        assert!(r.optimizers.iter().any(|p| (p[0] - 0.5).abs() < 1e-6 && p[2] < 1e-6));
        assert!(r.optimizers.iter().any(|p| (p[2] - 0.5).abs() < 1e-6 && p[0] < 1e-6));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(second_order_bound_states(&classical_cell(), 0, 0.1).is_err());
        assert!(second_order_bound_states(&classical_cell(), 10, 1.0).is_err());
    }
}
