use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, CMatrix, DensityOperator};

use super::kraus::KrausChannel;
use super::teleport::teleportation_interaction;
use super::weyl::{hermitian_basis, GroupRepresentation};

/// A finite family of channels `{N^x}` sharing input and output dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryCell {
    labels: Vec<String>,
    channels: Vec<KrausChannel>,
}

impl MemoryCell {
    pub fn new(labels: Vec<String>, channels: Vec<KrausChannel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidChannel("memory cell must contain at least one channel".into()));
        }
        if labels.len() != channels.len() {
            return Err(Error::Invalid(format!("{} labels for {} channels", labels.len(), channels.len())));
        }
        let (din, dout) = (channels[0].in_dim(), channels[0].out_dim());
        for ch in &channels {
            if ch.in_dim() != din || ch.out_dim() != dout {
                return Err(Error::DimensionMismatch { context: "memory cell member", expected: din, found: ch.in_dim() });
            }
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::Invalid("memory cell labels must be distinct".into()));
        }
        Ok(Self { labels, channels })
    }

    /// Orbit `{N ∘ U_g}` of a base channel under the input representation.
    pub fn covariant_orbit(base: &KrausChannel, rep: &GroupRepresentation) -> Result<Self> {
        let channels = rep.in_unitaries().iter().map(|u| base.precompose_unitary(u)).collect::<Result<Vec<_>>>()?;
        Self::new(rep.elements().to_vec(), channels)
    }

    /// Heisenberg–Weyl orbit of the qudit erasure channel.
    pub fn erasure(d: usize, q: f64) -> Result<Self> {
        Self::covariant_orbit(&KrausChannel::erasure(d, q)?, &GroupRepresentation::heisenberg_weyl(d)?)
    }

    /// Heisenberg–Weyl orbit of the qudit depolarizing channel.
    pub fn depolarizing(d: usize, q: f64) -> Result<Self> {
        Self::covariant_orbit(&KrausChannel::depolarizing(d, q)?, &GroupRepresentation::heisenberg_weyl(d)?)
    }

    /// The two-qubit-to-qubit pair that is perfectly distinguishable with two adaptive calls
    /// but never with parallel ones.
    pub fn hhlw() -> Self {
        let [a, b] = hhlw_kraus();
        let ch1 = KrausChannel::new(4, 2, a.to_vec()).expect("first hhlw channel is complete");
        let ch2 = KrausChannel::new(4, 2, b.to_vec()).expect("second hhlw channel is complete");
        Self { labels: vec!["1".into(), "2".into()], channels: vec![ch1, ch2] }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn channels(&self) -> &[KrausChannel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn in_dim(&self) -> usize {
        self.channels[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.channels[0].out_dim()
    }

    pub fn channel(&self, x: usize) -> Result<&KrausChannel> {
        self.channels.get(x).ok_or_else(|| Error::Invalid(format!("cell has no channel with index {x}")))
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Choi states of every member, in label order.
    pub fn choi_states(&self) -> Vec<DensityOperator> {
        self.channels.iter().map(KrausChannel::choi).collect()
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `|u⟩⟨v|` for a qubit ket `u` and a two-qubit bra `v`, both given as real amplitudes.
fn op(u: [f64; 2], v: [f64; 4], scale: f64) -> CMatrix {
    CMatrix::from_fn(2, 4, |i, j| c(scale * u[i] * v[j]))
}

/// Kraus operators `A^1_1..A^1_5` and `A^2_1..A^2_5` of the two hhlw channels.
pub fn hhlw_kraus() -> [[CMatrix; 5]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let k0 = [1.0, 0.0];
    let k1 = [0.0, 1.0];
    let plus = [h, h];
    let b00 = [1.0, 0.0, 0.0, 0.0];
    let b01 = [0.0, 1.0, 0.0, 0.0];
    let b10 = [0.0, 0.0, 1.0, 0.0];
    let b11 = [0.0, 0.0, 0.0, 1.0];
    let b1p = [0.0, 0.0, h, h];
    let b1m = [0.0, 0.0, h, -h];
    [
        [op(k0, b00, 1.0), op(k0, b01, 1.0), op(k0, b10, 1.0), op(k0, b11, h), op(k1, b11, h)],
        [op(plus, b00, 1.0), op(plus, b01, 1.0), op(k1, b1p, 1.0), op(k0, b1m, h), op(k1, b1m, h)],
    ]
}

/// A cell whose members are `E^x(ρ) = F(ρ ⊗ θ^x)` for one interaction `F: A ⊗ E → B`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvParamCell {
    labels: Vec<String>,
    env_states: Vec<DensityOperator>,
    interaction: KrausChannel,
    in_dim: usize,
}

impl EnvParamCell {
    pub fn new(
        labels: Vec<String>,
        env_states: Vec<DensityOperator>,
        interaction: KrausChannel,
        in_dim: usize,
    ) -> Result<Self> {
        if env_states.is_empty() || labels.len() != env_states.len() {
            return Err(Error::Invalid("environment cell needs one state per label".into()));
        }
        let de = env_states[0].dim();
        if env_states.iter().any(|t| t.dim() != de) {
            return Err(Error::Invalid("environment states have different dimensions".into()));
        }
        if interaction.in_dim() != in_dim * de {
            return Err(Error::DimensionMismatch {
                context: "interaction input (A ⊗ E)",
                expected: in_dim * de,
                found: interaction.in_dim(),
            });
        }
        Ok(Self { labels, env_states, interaction, in_dim })
    }

    /// Teleportation form of a Heisenberg–Weyl covariant cell: `θ^x` is the Choi state of `N^x`
    /// and `F` is the Bell measurement plus corrections.
    pub fn teleportation(cell: &MemoryCell, corrections: &[CMatrix]) -> Result<Self> {
        let d = cell.in_dim();
        let f = teleportation_interaction(d, corrections)?;
        if f.out_dim() != cell.out_dim() {
            return Err(Error::DimensionMismatch { context: "correction dimension", expected: cell.out_dim(), found: f.out_dim() });
        }
        let env = Self::new(cell.labels.clone(), cell.choi_states(), f, d)?;
        let dev = env.consistency_deviation(cell)?;
        if dev > 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "cell is not reproduced by teleportation with these corrections (deviation {dev:.3e})"
            )));
        }
        Ok(env)
    }

    /// Replacement form `F(ρ ⊗ θ) = Tr(ρ) θ`: the reader only ever sees the environment state.
    pub fn replacement(labels: Vec<String>, env_states: Vec<DensityOperator>, in_dim: usize) -> Result<Self> {
        let de = env_states.first().map(DensityOperator::dim).ok_or_else(|| Error::Invalid("no environment states".into()))?;
        let mut ops = Vec::with_capacity(in_dim);
        for a in 0..in_dim {
            // ⟨a|_A ⊗ I_E
            ops.push(CMatrix::from_fn(de, in_dim * de, |e, idx| if idx == a * de + e { c(1.0) } else { c(0.0) }));
        }
        let f = KrausChannel::new(in_dim * de, de, ops)?;
        Self::new(labels, env_states, f, in_dim)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn env_states(&self) -> &[DensityOperator] {
        &self.env_states
    }

    pub fn interaction(&self) -> &KrausChannel {
        &self.interaction
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_states[0].dim()
    }

    pub fn out_dim(&self) -> usize {
        self.interaction.out_dim()
    }

    pub fn len(&self) -> usize {
        self.env_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.env_states.is_empty()
    }

    /// Kraus form of `E^x`: `√λ_k F_j (I_A ⊗ |e_k⟩)` over the eigen-decomposition of `θ^x`.
    pub fn channel(&self, x: usize) -> Result<KrausChannel> {
        let theta = self.env_states.get(x).ok_or_else(|| Error::Invalid(format!("no environment state {x}")))?;
        let (da, de) = (self.in_dim, self.env_dim());
        let eig = theta.eig();
        let cut = eig.zero_threshold();
        let mut ops = Vec::new();
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam <= cut {
                continue;
            }
            let e = eig.vector(k);
            let embed = CMatrix::from_fn(da * de, da, |idx, a| if idx / de == a { e[idx % de] * lam.sqrt() } else { c(0.0) });
            for f in self.interaction.kraus_ops() {
                ops.push(f.matmul(&embed));
            }
        }
        KrausChannel::new(da, self.out_dim(), ops)
    }

    pub fn induced_cell(&self) -> Result<MemoryCell> {
        let channels = (0..self.len()).map(|x| self.channel(x)).collect::<Result<Vec<_>>>()?;
        MemoryCell::new(self.labels.clone(), channels)
    }

    /// Largest `‖F(X ⊗ θ^x) − N^x(X)‖₁` over a Hermitian operator basis `X` and all labels.
    pub fn consistency_deviation(&self, cell: &MemoryCell) -> Result<f64> {
        if cell.len() != self.len() || cell.in_dim() != self.in_dim || cell.out_dim() != self.out_dim() {
            return Err(Error::DimensionMismatch { context: "cell consistency", expected: self.len(), found: cell.len() });
        }
        let mut worst: f64 = 0.0;
        for x in hermitian_basis(self.in_dim) {
            for (theta, ch) in self.env_states.iter().zip(cell.channels()) {
                let lhs = self.interaction.apply_operator(&x.kron(theta.matrix()))?;
                let rhs = ch.apply_operator(&x)?;
                worst = worst.max(trace_norm(&(&lhs - &rhs))?);
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{erasure_corrections, weyl_corrections};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn erasure_cell_shape() {
        let cell = MemoryCell::erasure(2, 0.5).unwrap();
        assert_eq!(cell.len(), 4);
        assert_eq!((cell.in_dim(), cell.out_dim()), (2, 3));
        assert!(MemoryCell::erasure(2, -0.1).is_err());
    }

    #[test]
    fn hhlw_cell_is_complete() {
        let cell = MemoryCell::hhlw();
        assert_eq!(cell.len(), 2);
        for ch in cell.channels() {
            assert_eq!(ch.kraus_ops().len(), 5);
            assert_eq!((ch.in_dim(), ch.out_dim()), (4, 2));
            assert!(ch.completeness_deviation() < 1e-12);
        }
    }

    #[test]
    fn identity_orbit_gives_unitary_channels() {
        let rep = GroupRepresentation::heisenberg_weyl(2).unwrap();
        let cell = MemoryCell::covariant_orbit(&KrausChannel::identity(2), &rep).unwrap();
        assert_eq!(cell.len(), 4);
        for ch in cell.channels() {
            assert_eq!(ch.kraus_ops().len(), 1);
        }
    }

    #[test]
    fn orbit_choi_states_are_reference_rotations() {
        // choi(N ∘ U) = (U^T ⊗ I) choi(N) (U^T ⊗ I)†
        let base = KrausChannel::depolarizing(3, 0.3).unwrap();
        let rep = GroupRepresentation::heisenberg_weyl(3).unwrap();
        let cell = MemoryCell::covariant_orbit(&base, &rep).unwrap();
        let j = base.choi();
        for (u, ch) in rep.in_unitaries().iter().zip(cell.channels()) {
            let rot = u.transpose().kron(&CMatrix::identity(3));
            assert!(ch.choi().matrix().max_abs_diff(&j.matrix().conjugate_by(&rot)) < 1e-10);
        }
    }

    #[test]
    fn teleportation_forms_are_consistent() {
        let er = MemoryCell::erasure(2, 0.3).unwrap();
        let env = EnvParamCell::teleportation(&er, &erasure_corrections(2).unwrap()).unwrap();
        assert!(env.consistency_deviation(&er).unwrap() < 1e-9);
        let induced = env.induced_cell().unwrap();
        assert!(env.consistency_deviation(&induced).unwrap() < 1e-9);

        let dep = MemoryCell::depolarizing(2, 0.6).unwrap();
        assert!(EnvParamCell::teleportation(&dep, &weyl_corrections(2).unwrap()).is_ok());
        // wrong corrections for a non-covariant cell are rejected
        assert!(EnvParamCell::teleportation(&MemoryCell::hhlw(), &weyl_corrections(4).unwrap()).is_err());
    }

    #[test]
    fn replacement_cell_outputs_environment() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let thetas = vec![random::density(3, 2, &mut rng), random::density(3, 3, &mut rng)];
        let env = EnvParamCell::replacement(vec!["a".into(), "b".into()], thetas.clone(), 2).unwrap();
        let rho = random::density(2, 2, &mut rng);
        for (x, theta) in thetas.iter().enumerate() {
            let out = env.channel(x).unwrap().apply(&rho).unwrap();
            assert!(out.matrix().max_abs_diff(theta.matrix()) < 1e-12);
        }
        let induced = env.induced_cell().unwrap();
        assert!(env.consistency_deviation(&induced).unwrap() < 1e-9);
    }
}
