//! The practical kBMF/kBMF+ pipeline: k-means++ with Lloyd iterations on the
//! rows, centers snapped to their nearest data rows, then either one-hot
//! assignment (kBMF) or an exact per-row re-solve (kBMF+).

use rand::Rng;

use crate::binmat::{BinMatrix, LossSpec, Semiring};
use crate::clustering::{kmeans_pp_lloyd, WeightedRows};
use crate::{Error, Result};

use super::{solve_u_given_v, write_row_bits, Factorization, DEFAULT_K_CAP};

const LLOYD_ITERS: usize = 50;

/// Clusters the rows, snaps each center to its nearest row of `a` (ties to
/// the lowest row index) and returns the snapped `V` plus the one-hot
/// assignment of every row to its nearest snapped center.
fn cluster_and_snap(
    a: &BinMatrix,
    k: usize,
    rng: &mut impl Rng,
) -> Result<(BinMatrix, Vec<usize>)> {
    let x = WeightedRows::unit(a.clone());
    let (centers, _) = kmeans_pp_lloyd(&x, k, LLOYD_ITERS, rng)?;

    let mut v = BinMatrix::zeros(k, a.n_cols());
    for (c, center) in centers.centers.iter().enumerate() {
        let mut best = (0usize, f64::INFINITY);
        for i in 0..a.n_rows() {
            let d: f64 = (0..a.n_cols())
                .map(|j| (a.get(i, j) as u8 as f64 - center[j]).powi(2))
                .sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        v.copy_row_from(c, a, best.0);
    }

    // One-hot assignment to the nearest snapped center (Hamming distance on
    // binary rows; ties to the lowest center index).
    let mut assignment = Vec::with_capacity(a.n_rows());
    for i in 0..a.n_rows() {
        let mut best = (0usize, u32::MAX);
        for c in 0..k {
            let d = crate::binmat::hamming(a.row_words(i), v.row_words(c));
            if d < best.1 {
                best = (c, d);
            }
        }
        assignment.push(best.0);
    }
    Ok((v, assignment))
}

/// kBMF: snapped k-means centers as `V`, one-hot nearest-center rows as `U`.
pub fn kbmf(a: &BinMatrix, k: usize, semiring: Semiring, rng: &mut impl Rng) -> Result<Factorization> {
    let (v, assignment) = cluster_and_snap(a, k, rng)?;
    let mut u = BinMatrix::zeros(a.n_rows(), k);
    for (i, &c) in assignment.iter().enumerate() {
        write_row_bits(&mut u, i, 0, k, 1u64 << c);
    }
    Factorization::new(a, u, v, semiring, LossSpec::Frobenius, k, "kbmf")
}

/// kBMF+: the same `V` as [`kbmf`] for the same RNG, but `U` re-solved
/// exactly at `2^k` per row, so its loss never exceeds kBMF's.
pub fn kbmf_plus(
    a: &BinMatrix,
    k: usize,
    semiring: Semiring,
    rng: &mut impl Rng,
) -> Result<Factorization> {
    if k > DEFAULT_K_CAP {
        return Err(Error::TooLarge(format!("k={k} exceeds cap {DEFAULT_K_CAP}")));
    }
    let (v, _) = cluster_and_snap(a, k, rng)?;
    let (u, _) = solve_u_given_v(a, &v, LossSpec::Frobenius, semiring)?;
    Factorization::new(a, u, v, semiring, LossSpec::Frobenius, k, "kbmf+")
}

/// kBMF+ with `V` computed on a weighted coreset instead of the full data:
/// weighted clustering of the coreset rows, centers snapped to coreset rows
/// (which are rows of the original data), then the exact `U` solve against
/// the full matrix.
pub fn kbmf_plus_on_coreset(
    a: &BinMatrix,
    coreset: &WeightedRows,
    k: usize,
    semiring: Semiring,
    rng: &mut impl Rng,
) -> Result<Factorization> {
    if k > DEFAULT_K_CAP {
        return Err(Error::TooLarge(format!("k={k} exceeds cap {DEFAULT_K_CAP}")));
    }
    if coreset.n_rows() == 0 {
        return Err(Error::param("empty coreset"));
    }
    let k_eff = k.min(coreset.n_rows());
    let (centers, _) = kmeans_pp_lloyd(coreset, k_eff, LLOYD_ITERS, rng)?;
    let mut v = BinMatrix::zeros(k, a.n_cols());
    for (c, center) in centers.centers.iter().enumerate() {
        let mut best = (0usize, f64::INFINITY);
        for i in 0..coreset.n_rows() {
            let d: f64 = (0..coreset.n_cols())
                .map(|j| (coreset.rows.get(i, j) as u8 as f64 - center[j]).powi(2))
                .sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        v.copy_row_from(c, &coreset.rows, best.0);
    }
    let (u, _) = solve_u_given_v(a, &v, LossSpec::Frobenius, semiring)?;
    Factorization::new(a, u, v, semiring, LossSpec::Frobenius, k, "kbmf+/coreset")
}
