use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, CMatrix, ONE};

use super::kraus::KrausChannel;

const UNITARY_TOL: f64 = 1e-10;
const ONE_DESIGN_TOL: f64 = 1e-8;

/// Cyclic shift `X(k)|j⟩ = |j ⊕ k⟩`.
pub fn x_shift(d: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == (j + k) % d { ONE } else { Complex64::new(0.0, 0.0) })
}

/// Phase operator `Z(l)|j⟩ = e^{2πi lj/d}|j⟩`.
pub fn z_phase(d: usize, l: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, 2.0 * PI * ((l * j) % d) as f64 / d as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Heisenberg–Weyl operators `σ(k,l) = X(k)Z(l)`, stored at index `w = k + d·l`.
pub fn heisenberg_weyl(d: usize) -> Result<Vec<CMatrix>> {
    if d < 2 {
        return Err(Error::OutOfRange { name: "d", value: d as f64, allowed: "d >= 2" });
    }
    let mut out = Vec::with_capacity(d * d);
    for l in 0..d {
        for k in 0..d {
            out.push(x_shift(d, k).matmul(&z_phase(d, l)));
        }
    }
    Ok(out)
}

/// Unitary representation of a finite group on the input and output spaces of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRepresentation {
    elements: Vec<String>,
    in_unitaries: Vec<CMatrix>,
    out_unitaries: Vec<CMatrix>,
}

impl GroupRepresentation {
    pub fn new(elements: Vec<String>, in_unitaries: Vec<CMatrix>, out_unitaries: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() || elements.len() != in_unitaries.len() || elements.len() != out_unitaries.len() {
            return Err(Error::Invalid("representation needs one input and one output unitary per element".into()));
        }
        for u in in_unitaries.iter().chain(&out_unitaries) {
            check_unitary(u)?;
        }
        let (din, dout) = (in_unitaries[0].rows(), out_unitaries[0].rows());
        if in_unitaries.iter().any(|u| u.rows() != din) || out_unitaries.iter().any(|u| u.rows() != dout) {
            return Err(Error::Invalid("representation matrices have inconsistent dimensions".into()));
        }
        Ok(Self { elements, in_unitaries, out_unitaries })
    }

    /// Heisenberg–Weyl group acting identically on input and output.
    pub fn heisenberg_weyl(d: usize) -> Result<Self> {
        let ops = heisenberg_weyl(d)?;
        Self::new(weyl_labels(d), ops.clone(), ops)
    }

    /// Heisenberg–Weyl group with output action `σ^w ⊕ 1`, fixing the erasure flag.
    pub fn heisenberg_weyl_erasure(d: usize) -> Result<Self> {
        let ops = heisenberg_weyl(d)?;
        let out = ops.iter().map(|s| s.direct_sum(&CMatrix::identity(1))).collect();
        Self::new(weyl_labels(d), ops, out)
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn in_dim(&self) -> usize {
        self.in_unitaries[0].rows()
    }

    pub fn out_dim(&self) -> usize {
        self.out_unitaries[0].rows()
    }

    pub fn in_unitaries(&self) -> &[CMatrix] {
        &self.in_unitaries
    }

    pub fn out_unitaries(&self) -> &[CMatrix] {
        &self.out_unitaries
    }

    /// Largest deviation of the input twirl `(1/|G|)Σ_g U_g E U_g†` from `Tr(E) π`, over matrix units `E`.
    pub fn one_design_deviation(&self) -> f64 {
        let d = self.in_dim();
        let n = self.len() as f64;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let e = CMatrix::unit(d, i, j);
                let mut avg = CMatrix::zeros(d, d);
                for u in &self.in_unitaries {
                    avg = &avg + &e.conjugate_by(u);
                }
                let avg = avg.scale_real(1.0 / n);
                let target = if i == j { CMatrix::identity(d).scale_real(1.0 / d as f64) } else { CMatrix::zeros(d, d) };
                worst = worst.max(avg.max_abs_diff(&target));
            }
        }
        worst
    }

    pub fn is_one_design(&self) -> bool {
        self.one_design_deviation() <= ONE_DESIGN_TOL
    }
}

fn weyl_labels(d: usize) -> Vec<String> {
    (0..d * d).map(|w| w.to_string()).collect()
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotSquare { rows: u.rows(), cols: u.cols() });
    }
    let dev = u.adjoint().matmul(u).max_abs_diff(&CMatrix::identity(u.rows()));
    if dev > UNITARY_TOL {
        return Err(Error::Invalid(format!("matrix is not unitary (deviation {dev:.3e})")));
    }
    Ok(())
}

/// Outcome of a covariance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceCheck {
    pub covariant: bool,
    /// Largest trace-norm deviation `‖N(U X U†) − V N(X) V†‖₁` seen.
    pub max_deviation: f64,
}

/// Hermitian operator basis of `d × d` matrices: diagonal units plus symmetrized off-diagonal pairs.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(CMatrix::unit(d, i, i));
        for j in (i + 1)..d {
            let e = CMatrix::unit(d, i, j);
            let et = CMatrix::unit(d, j, i);
            out.push(&e + &et);
            out.push((&e - &et).scale(Complex64::new(0.0, 1.0)));
        }
    }
    out
}

/// Verifies `N(U_g X U_g†) = V_g N(X) V_g†` for every group element and every basis operator `X`.
pub fn check_covariance(ch: &KrausChannel, rep: &GroupRepresentation, tol: f64) -> Result<CovarianceCheck> {
    if rep.in_dim() != ch.in_dim() || rep.out_dim() != ch.out_dim() {
        return Err(Error::DimensionMismatch {
            context: "representation vs channel",
            expected: ch.in_dim(),
            found: rep.in_dim(),
        });
    }
    let mut worst: f64 = 0.0;
    for x in hermitian_basis(ch.in_dim()) {
        let nx = ch.apply_operator(&x)?;
        for (u, v) in rep.in_unitaries.iter().zip(&rep.out_unitaries) {
            let lhs = ch.apply_operator(&x.conjugate_by(u))?;
            let rhs = nx.conjugate_by(v);
            worst = worst.max(trace_norm(&(&lhs - &rhs))?);
        }
    }
    Ok(CovarianceCheck { covariant: worst <= tol, max_deviation: worst })
}
