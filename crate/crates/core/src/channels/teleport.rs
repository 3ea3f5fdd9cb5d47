use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityOperator};

use super::kraus::KrausChannel;
use super::weyl::heisenberg_weyl;

/// Bell vector `(σ^w ⊗ I)|Φ⟩` on `A ⊗ R`.
pub fn bell_vector(d: usize, w: usize) -> Result<Vec<Complex64>> {
    let ops = heisenberg_weyl(d)?;
    let s = ops.get(w).ok_or_else(|| Error::Invalid(format!("Bell index {w} out of range")))?;
    let amp = 1.0 / (d as f64).sqrt();
    Ok((0..d * d).map(|idx| s[(idx / d, idx % d)] * amp).collect())
}

/// Corrections `σ^w` that undo the Bell outcome `w` for a qudit output.
pub fn weyl_corrections(d: usize) -> Result<Vec<CMatrix>> {
    heisenberg_weyl(d)
}

/// Corrections `σ^w ⊕ 1` for the erasure output space.
pub fn erasure_corrections(d: usize) -> Result<Vec<CMatrix>> {
    Ok(heisenberg_weyl(d)?.iter().map(|s| s.direct_sum(&CMatrix::identity(1))).collect())
}

/// The LOCC map `A ⊗ R ⊗ B → B`: Bell measurement on `A R` followed by the correction `V_w` on `B`.
///
/// Kraus operators are `V_w (⟨Φ^w|_{AR} ⊗ I_B)`.
pub fn teleportation_interaction(d: usize, corrections: &[CMatrix]) -> Result<KrausChannel> {
    if corrections.len() != d * d {
        return Err(Error::Invalid(format!(
            "teleportation needs {} corrections (one per Bell outcome), got {}",
            d * d,
            corrections.len()
        )));
    }
    let db = corrections[0].rows();
    let mut ops = Vec::with_capacity(d * d);
    for (w, v) in corrections.iter().enumerate() {
        if v.rows() != db || v.cols() != db {
            return Err(Error::DimensionMismatch { context: "correction unitary", expected: db, found: v.rows() });
        }
        let bell = bell_vector(d, w)?;
        ops.push(CMatrix::from_fn(db, d * d * db, |bo, idx| {
            let (ar, b) = (idx / db, idx % db);
            v[(bo, b)] * bell[ar].conj()
        }));
    }
    KrausChannel::new(d * d * db, db, ops)
}

/// Runs the teleportation protocol on `ρ_A ⊗ ω_RB`.
pub fn teleportation_simulate(
    resource: &DensityOperator,
    rho: &DensityOperator,
    corrections: &[CMatrix],
) -> Result<DensityOperator> {
    let d = rho.dim();
    let db = corrections.first().map(|v| v.rows()).unwrap_or(0);
    if resource.dim() != d * db {
        return Err(Error::DimensionMismatch { context: "teleportation resource", expected: d * db, found: resource.dim() });
    }
    teleportation_interaction(d, corrections)?.apply(&rho.tensor(resource))
}
