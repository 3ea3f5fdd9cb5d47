use crate::channels::KrausChannel;
use crate::divergences::{g, mutual_information};
use crate::error::{check_range, Result};

/// Entanglement-assisted capacity `I(R;B)` of the Choi state `(id ⊗ N)(Φ)`.
///
/// For a jointly covariant cell built from `N` this is the reading capacity of the cell.
pub fn ea_capacity_from_choi(ch: &KrausChannel) -> Result<f64> {
    mutual_information(&ch.choi(), (ch.in_dim(), ch.out_dim()))
}

/// `2(1−q) log₂ d`: reading capacity of the qudit erasure cell.
pub fn erasure_cell_capacity(d: usize, q: f64) -> Result<f64> {
    check_range("q", q, 0.0, 1.0, "0 <= q <= 1")?;
    Ok(2.0 * (1.0 - q) * (d as f64).log2())
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `2 log₂ d + λ₀ log₂ λ₀ + (d²−1) λ₁ log₂ λ₁` with `λ₀ = 1−q+q/d²`, `λ₁ = q/d²`,
/// the EA capacity of the depolarizing channel from its Choi spectrum.
pub fn depolarizing_cell_capacity(d: usize, q: f64) -> Result<f64> {
    check_range("q", q, 0.0, 1.0, "0 <= q <= 1")?;
    let d2 = (d * d) as f64;
    let l0 = 1.0 - q + q / d2;
    let l1 = q / d2;
    Ok(2.0 * (d as f64).log2() + xlog2x(l0) + (d2 - 1.0) * xlog2x(l1))
}

/// `log₂ d + (1−q+q/d) log₂(1−q+q/d) + (d−1)(q/d) log₂(q/d)`.
///
/// This closed form is commonly quoted for the depolarizing cell but disagrees with
/// [`depolarizing_cell_capacity`] (e.g. it gives `log₂ d` instead of `2 log₂ d` at `q = 0`);
/// it is kept for side-by-side reporting only.
pub fn depolarizing_quoted_formula(d: usize, q: f64) -> Result<f64> {
    check_range("q", q, 0.0, 1.0, "0 <= q <= 1")?;
    let df = d as f64;
    let a = 1.0 - q + q / df;
    Ok(df.log2() + xlog2x(a) + (df - 1.0) * xlog2x(q / df))
}

/// `2 g(N_S)`: energy-constrained upper bound for the pure-loss (beamsplitter) cell.
pub fn bosonic_energy_bound(n_s: f64) -> Result<f64> {
    Ok(2.0 * g(n_s)?)
}
