//! Seeded generators for random matrices, states and channels.
//!
//! Used by the heuristic optimizers (random restarts) and by the property tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::linalg::{CMatrix, DensityOperator, ZERO};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    ginibre(d, d, rng).hermitian_part()
}

/// Haar-random unit vector.
pub fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| gaussian_complex(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator {
    DensityOperator::pure(&unit_vector(d, rng)).expect("nonzero vector")
}

/// Random density matrix `GG†/Tr(GG†)` with `G` of shape `d × rank`.
pub fn density_matrix<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    m.scale_real(1.0 / tr).hermitian_part()
}

pub fn density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityOperator {
    DensityOperator::new(density_matrix(d, rank, rng)).expect("random density matrix is valid")
}

/// Random `rows × cols` isometry (`cols ≤ rows`) from Gram–Schmidt on a Ginibre matrix.
pub fn isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let g = ginibre(rows, cols, rng);
    let mut q = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        let mut v: Vec<Complex64> = (0..rows).map(|i| g[(i, j)]).collect();
        // two passes of modified Gram–Schmidt for stability
        for _ in 0..2 {
            for k in 0..j {
                let mut dot = ZERO;
                for i in 0..rows {
                    dot += q[(i, k)].conj() * v[i];
                }
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi -= dot * q[(i, k)];
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            q[(i, j)] = v[i] / n;
        }
    }
    q
}

pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    isometry(d, d, rng)
}

/// Random channel with `kraus_count` Kraus operators, sliced from a random Stinespring isometry.
pub fn channel<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, kraus_count: usize, rng: &mut R) -> KrausChannel {
    let k = kraus_count.max(1).max(in_dim.div_ceil(out_dim));
    let v = isometry(out_dim * k, in_dim, rng);
    let ops = (0..k)
        .map(|j| CMatrix::from_fn(out_dim, in_dim, |r, c| v[(j * out_dim + r, c)]))
        .collect();
    KrausChannel::new(in_dim, out_dim, ops).expect("Stinespring slices are complete")
}

/// Random point of the probability simplex.
pub fn probability_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}
