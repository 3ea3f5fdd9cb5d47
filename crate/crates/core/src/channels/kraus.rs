use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::linalg::{kron_all, partial_trace, CMatrix, DensityOperator, Keep, ZERO};

use super::weyl::heisenberg_weyl;

/// Tolerance on `‖Σ_j A_j†A_j − I‖_max` accepted at construction.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// A quantum channel given by Kraus operators `A_j : H_in → H_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, ops: Vec<CMatrix>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidChannel("dimensions must be positive".into()));
        }
        if ops.is_empty() {
            return Err(Error::InvalidChannel("channel needs at least one Kraus operator".into()));
        }
        for (j, a) in ops.iter().enumerate() {
            if a.rows() != out_dim || a.cols() != in_dim {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {j} is {}x{}, expected {out_dim}x{in_dim}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        let ch = Self { in_dim, out_dim, ops };
        let dev = ch.completeness_deviation();
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!("Kraus operators are not complete (deviation {dev:.3e})")));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self { in_dim: d, out_dim: d, ops: vec![CMatrix::identity(d)] }
    }

    /// Unitary or isometric channel `V (·) V†`.
    pub fn isometry(v: CMatrix) -> Result<Self> {
        Self::new(v.cols(), v.rows(), vec![v])
    }

    /// Erasure channel `ρ ↦ (1−q)ρ ⊕ q|e⟩⟨e|` with the flag `|e⟩ = |d⟩` in a `d+1` dimensional output.
    pub fn erasure(d: usize, q: f64) -> Result<Self> {
        check_range("q", q, 0.0, 1.0, "0 <= q <= 1")?;
        check_dim(d)?;
        let mut ops = Vec::new();
        if q < 1.0 {
            let keep = (1.0 - q).sqrt();
            ops.push(CMatrix::from_fn(d + 1, d, |i, j| if i == j { Complex64::new(keep, 0.0) } else { ZERO }));
        }
        if q > 0.0 {
            let flag = q.sqrt();
            for j in 0..d {
                let mut a = CMatrix::zeros(d + 1, d);
                a[(d, j)] = Complex64::new(flag, 0.0);
                ops.push(a);
            }
        }
        Self::new(d, d + 1, ops)
    }

    /// Depolarizing channel `ρ ↦ (1−q)ρ + q π` written with Heisenberg–Weyl Kraus operators.
    pub fn depolarizing(d: usize, q: f64) -> Result<Self> {
        check_range("q", q, 0.0, 1.0, "0 <= q <= 1")?;
        check_dim(d)?;
        let d2 = (d * d) as f64;
        let weyl = heisenberg_weyl(d)?;
        let mut ops = Vec::with_capacity(d * d);
        for (w, s) in weyl.into_iter().enumerate() {
            let weight = if w == 0 { 1.0 - q + q / d2 } else { q / d2 };
            if weight > 0.0 {
                ops.push(s.scale_real(weight.sqrt()));
            }
        }
        Self::new(d, d, ops)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `max_ij |(Σ_j A_j†A_j − I)_ij|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.in_dim, self.in_dim);
        for a in &self.ops {
            acc = &acc + &a.adjoint().matmul(a);
        }
        acc.max_abs_diff(&CMatrix::identity(self.in_dim))
    }

    /// Linear action on an arbitrary operator on the input space.
    pub fn apply_operator(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.rows() != self.in_dim || m.cols() != self.in_dim {
            return Err(Error::DimensionMismatch { context: "channel input", expected: self.in_dim, found: m.rows() });
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for a in &self.ops {
            out = &out + &m.conjugate_by(a);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::new_unchecked(self.apply_operator(rho.matrix())?))
    }

    /// Heisenberg-picture (adjoint) map `Y ↦ Σ_j A_j† Y A_j`, from output to input operators.
    pub fn adjoint_apply(&self, y: &CMatrix) -> Result<CMatrix> {
        if y.rows() != self.out_dim || y.cols() != self.out_dim {
            return Err(Error::DimensionMismatch { context: "adjoint channel input", expected: self.out_dim, found: y.rows() });
        }
        let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
        for a in &self.ops {
            out = &out + &a.adjoint().matmul(y).matmul(a);
        }
        Ok(out)
    }

    /// Choi state `(id_R ⊗ N)(Φ_RA)` on `R ⊗ B`.
    pub fn choi(&self) -> DensityOperator {
        let d = self.in_dim;
        let db = self.out_dim;
        let mut j = CMatrix::zeros(d * db, d * db);
        for a in &self.ops {
            // (I ⊗ A)|Φ⟩ has amplitude A[b, r]/√d at index (r, b)
            let v: Vec<Complex64> = (0..d * db)
                .map(|idx| a[(idx % db, idx / db)] / (d as f64).sqrt())
                .collect();
            j = &j + &CMatrix::outer(&v);
        }
        DensityOperator::new_unchecked(j)
    }

    /// Sequential composition `next ∘ self`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if next.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch { context: "channel composition", expected: self.out_dim, found: next.in_dim });
        }
        let ops = next
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b.matmul(a)))
            .collect();
        Ok(KrausChannel { in_dim: self.in_dim, out_dim: next.out_dim, ops })
    }

    /// Parallel composition `self ⊗ other`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let ops = self
            .ops
            .iter()
            .flat_map(|a| other.ops.iter().map(move |b| a.kron(b)))
            .collect();
        KrausChannel { in_dim: self.in_dim * other.in_dim, out_dim: self.out_dim * other.out_dim, ops }
    }

    /// Applies the channel to subsystem `index` of an operator on `⊗_k H_{dims[k]}`.
    ///
    /// The output operator lives on the same factors with `dims[index]` replaced by `out_dim`.
    pub fn apply_on_subsystem(&self, m: &CMatrix, dims: &[usize], index: usize) -> Result<CMatrix> {
        let (left, right) = split_dims(m, dims, index, self.in_dim)?;
        let il = CMatrix::identity(left);
        let ir = CMatrix::identity(right);
        let dout = left * self.out_dim * right;
        let mut out = CMatrix::zeros(dout, dout);
        for a in &self.ops {
            let big = kron_all([&il, a, &ir]);
            out = &out + &m.conjugate_by(&big);
        }
        Ok(out)
    }

    /// Adjoint map on subsystem `index`; `dims[index]` must equal `out_dim`.
    pub fn adjoint_on_subsystem(&self, m: &CMatrix, dims: &[usize], index: usize) -> Result<CMatrix> {
        let (left, right) = split_dims(m, dims, index, self.out_dim)?;
        let il = CMatrix::identity(left);
        let ir = CMatrix::identity(right);
        let din = left * self.in_dim * right;
        let mut out = CMatrix::zeros(din, din);
        for a in &self.ops {
            let big = kron_all([&il, a, &ir]);
            out = &out + &big.adjoint().matmul(m).matmul(&big);
        }
        Ok(out)
    }

    /// Conjugates the input by `u`: the channel `N ∘ U(·)U†`.
    pub fn precompose_unitary(&self, u: &CMatrix) -> Result<KrausChannel> {
        if u.rows() != self.in_dim || u.cols() != self.in_dim {
            return Err(Error::DimensionMismatch { context: "input unitary", expected: self.in_dim, found: u.rows() });
        }
        KrausChannel::new(self.in_dim, self.out_dim, self.ops.iter().map(|a| a.matmul(u)).collect())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::OutOfRange { name: "d", value: d as f64, allowed: "d >= 2" });
    }
    Ok(())
}

fn split_dims(m: &CMatrix, dims: &[usize], index: usize, expected: usize) -> Result<(usize, usize)> {
    if index >= dims.len() {
        return Err(Error::Invalid(format!("subsystem index {index} out of range")));
    }
    if dims[index] != expected {
        return Err(Error::DimensionMismatch { context: "subsystem dimension", expected, found: dims[index] });
    }
    let total: usize = dims.iter().product();
    if m.rows() != total || m.cols() != total {
        return Err(Error::DimensionMismatch { context: "multipartite operator", expected: total, found: m.rows() });
    }
    Ok((dims[..index].iter().product(), dims[index + 1..].iter().product()))
}

/// Channel action reconstructed from its Choi state: `N(ρ) = d · Tr_R[(ρᵀ ⊗ I_B) J]`.
pub fn apply_from_choi(choi: &DensityOperator, in_dim: usize, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != in_dim || !choi.dim().is_multiple_of(in_dim) {
        return Err(Error::DimensionMismatch { context: "Choi application", expected: in_dim, found: rho.dim() });
    }
    let out_dim = choi.dim() / in_dim;
    let lhs = rho.matrix().transpose().kron(&CMatrix::identity(out_dim));
    let prod = lhs.matmul(choi.matrix());
    let b = partial_trace(&prod, (in_dim, out_dim), Keep::Second)?;
    Ok(DensityOperator::new_unchecked(b.scale_real(in_dim as f64)))
}

/// `Σ_i w_i N_i` as a channel, for weights summing to one.
pub fn convex_combination(weights: &[f64], channels: &[KrausChannel]) -> Result<KrausChannel> {
    let first = channels.first().ok_or_else(|| Error::InvalidChannel("empty mixture".into()))?;
    let mut ops = Vec::new();
    for (w, ch) in weights.iter().zip(channels) {
        if ch.in_dim != first.in_dim || ch.out_dim != first.out_dim {
            return Err(Error::InvalidChannel("mixture of channels with different dimensions".into()));
        }
        if *w > 0.0 {
            ops.extend(ch.ops.iter().map(|a| a.scale_real(w.sqrt())));
        }
    }
    KrausChannel::new(first.in_dim, first.out_dim, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{trace_distance, hermitian_eig};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_depolarization_gives_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = KrausChannel::depolarizing(2, 1.0).unwrap();
        let out = ch.apply(&random::density(2, 2, &mut rng)).unwrap();
        assert!(out.matrix().max_abs_diff(DensityOperator::maximally_mixed(2).matrix()) < 1e-14);
    }

    #[test]
    fn erasure_block_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::density(2, 2, &mut rng);
        let q = 0.3;
        let out = KrausChannel::erasure(2, q).unwrap().apply(&rho).unwrap();
        let mut expected = rho.matrix().scale_real(1.0 - q).direct_sum(&CMatrix::zeros(1, 1));
        expected[(2, 2)] = Complex64::new(q, 0.0);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn apply_matches_choi_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let ch = random::channel(3, 2, 3, &mut rng);
            let rho = random::density(3, 3, &mut rng);
            let direct = ch.apply(&rho).unwrap();
            let via = apply_from_choi(&ch.choi(), 3, &rho).unwrap();
            assert!(direct.matrix().max_abs_diff(via.matrix()) < 1e-11);
            assert!((direct.matrix().trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn choi_examples() {
        let id = KrausChannel::identity(2).choi();
        assert!(id.matrix().max_abs_diff(DensityOperator::maximally_entangled(2).matrix()) < 1e-15);

        let q = 0.4;
        let e = hermitian_eig(KrausChannel::erasure(2, q).unwrap().choi().matrix()).unwrap();
        let mut expected = vec![0.0, 0.0, 0.0, q / 2.0, q / 2.0, 1.0 - q];
        expected.sort_by(f64::total_cmp);
        for (a, b) in e.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }

        for d in [2usize, 3] {
            let q = 0.35;
            let e = hermitian_eig(KrausChannel::depolarizing(d, q).unwrap().choi().matrix()).unwrap();
            let d2 = (d * d) as f64;
            let big = 1.0 - q + q / d2;
            assert!((e.values[d * d - 1] - big).abs() < 1e-12);
            for v in &e.values[..d * d - 1] {
                assert!((v - q / d2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn choi_marginal_is_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = random::channel(3, 4, 2, &mut rng);
        let r = partial_trace(ch.choi().matrix(), (3, 4), Keep::First).unwrap();
        assert!(r.max_abs_diff(DensityOperator::maximally_mixed(3).matrix()) < 1e-10);
    }

    #[test]
    fn rejects_incomplete_kraus_and_bad_parameters() {
        let half = CMatrix::identity(2).scale_real(0.5);
        assert!(matches!(KrausChannel::new(2, 2, vec![half]), Err(Error::InvalidChannel(_))));
        assert!(matches!(KrausChannel::erasure(2, 1.5), Err(Error::OutOfRange { name: "q", .. })));
        assert!(matches!(KrausChannel::depolarizing(1, 0.5), Err(Error::OutOfRange { name: "d", .. })));
    }

    #[test]
    fn subsystem_application_matches_tensor_with_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ch = random::channel(2, 3, 2, &mut rng);
        let rho = random::density(4, 4, &mut rng);
        let direct = KrausChannel::identity(2).tensor(&ch).apply(&rho).unwrap();
        let sub = ch.apply_on_subsystem(rho.matrix(), &[2, 2], 1).unwrap();
        assert!(direct.matrix().max_abs_diff(&sub) < 1e-13);

        // duality: Tr[Y N(X)] = Tr[N†(Y) X]
        let y = random::hermitian(6, &mut rng);
        let lhs = y.trace_product(&sub);
        let rhs = ch.adjoint_on_subsystem(&y, &[2, 3], 1).unwrap().trace_product(rho.matrix());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn composition_agrees_with_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random::channel(2, 3, 2, &mut rng);
        let b = random::channel(3, 2, 2, &mut rng);
        let rho = random::density(2, 2, &mut rng);
        let seq = b.apply(&a.apply(&rho).unwrap()).unwrap();
        let comp = a.then(&b).unwrap().apply(&rho).unwrap();
        assert!(trace_distance(&seq, &comp).unwrap() < 1e-12);
    }
}
