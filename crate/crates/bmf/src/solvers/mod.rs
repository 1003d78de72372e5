//! Factorization algorithms: exact conditional solves, a brute-force oracle,
//! the kBMF/kBMF+ pipeline, and the bicriteria coreset solvers for
//! Frobenius, GF(2) and L_p losses.
//!
//! All `2^k` enumerations share one row-solve engine. For binary products
//! the candidate predictions are a bit-packed table and scoring is a Hamming
//! popcount; for the integer product with (weighted) Frobenius loss the score
//! is `‖uV‖² − 2⟨a, uV⟩` evaluated with per-row subset sums so a row costs
//! `O(k·words + 2^k)` instead of `O(2^k·d)`. Ties always resolve to the
//! candidate with the smallest little-endian bit value, which keeps every
//! solver deterministic.

use std::io::Write;
use std::path::Path;

use crate::binmat::{self, BinMatrix, LossSpec, Semiring};
use crate::{Error, Result};

mod frobenius;
mod gf2;
mod kbmf;
mod lp;

pub use frobenius::{
    frobenius_coreset_solver, frobenius_coreset_solver_with, FrobeniusConfig, FrobeniusMode,
};
pub(crate) use frobenius::solve_v_on_coreset;
pub use gf2::{gf2_bicriteria_solver, gf2_bicriteria_solver_with, gf2_rank_k_l0, Gf2Config};
pub use kbmf::{kbmf, kbmf_plus, kbmf_plus_on_coreset};
pub use lp::{lp_bicriteria_solver, lp_bicriteria_solver_with, LpConfig};

/// Hard cap on the inner dimension of the `2^k` enumeration loops.
pub const DEFAULT_K_CAP: usize = 20;

/// Guard for the global brute-force oracle: `2^{k·d}` candidate `V` matrices.
pub const BRUTE_FORCE_BITS_CAP: usize = 24;

/// The output of every solver.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub u: BinMatrix,
    pub v: BinMatrix,
    pub semiring: Semiring,
    pub loss_spec: LossSpec,
    pub achieved_loss: f64,
    /// The requested rank.
    pub k_nominal: usize,
    /// The realized inner dimension (≥ `k_nominal` for bicriteria outputs).
    pub k_actual: usize,
    /// Which pipeline produced the factors (recorded in `meta.tsv`).
    pub method: String,
}

impl Factorization {
    /// Assembles a factorization, recomputing the achieved loss from scratch.
    pub fn new(
        a: &BinMatrix,
        u: BinMatrix,
        v: BinMatrix,
        semiring: Semiring,
        loss_spec: LossSpec,
        k_nominal: usize,
        method: impl Into<String>,
    ) -> Result<Self> {
        if u.n_cols() != v.n_rows() {
            return Err(Error::dim("factor inner dimensions differ"));
        }
        let prod = binmat::product(&u, &v, semiring)?;
        let achieved_loss = binmat::loss(a, &prod, loss_spec)?;
        Ok(Factorization {
            k_actual: u.n_cols(),
            u,
            v,
            semiring,
            loss_spec,
            achieved_loss,
            k_nominal,
            method: method.into(),
        })
    }

    /// Checks the self-consistency invariant: the stored loss equals a fresh
    /// recomputation of `loss(A, U·V)`.
    pub fn verify(&self, a: &BinMatrix) -> Result<()> {
        let prod = binmat::product(&self.u, &self.v, self.semiring)?;
        let fresh = binmat::loss(a, &prod, self.loss_spec)?;
        if fresh != self.achieved_loss {
            return Err(Error::InvalidParameter(format!(
                "achieved loss {} does not recompute ({fresh})",
                self.achieved_loss
            )));
        }
        if self.k_actual != self.u.n_cols() || self.k_actual != self.v.n_rows() {
            return Err(Error::dim("k_actual disagrees with factor shapes"));
        }
        Ok(())
    }

    /// Writes `U.csv`, `V.csv` and `meta.tsv` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, seed: u64) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.u.to_csv_file(dir.join("U.csv"))?;
        self.v.to_csv_file(dir.join("V.csv"))?;
        let mut meta = std::fs::File::create(dir.join("meta.tsv"))?;
        writeln!(meta, "semiring\t{}", self.semiring.name())?;
        writeln!(meta, "loss\t{}", self.loss_spec.name())?;
        writeln!(meta, "k_nominal\t{}", self.k_nominal)?;
        writeln!(meta, "k_actual\t{}", self.k_actual)?;
        writeln!(meta, "achieved_loss\t{}", self.achieved_loss)?;
        writeln!(meta, "seed\t{seed}")?;
        writeln!(meta, "method\t{}", self.method)?;
        Ok(())
    }
}

/// Assignment of weighted rows (or columns) to geometric weight classes:
/// group `j` holds weight `w` with `(1+ε)^j ≤ w < (1+ε)^{j+1}`.
#[derive(Clone, Debug)]
pub struct GroupPartition {
    pub base: f64,
    /// Group level per input row.
    pub level_of: Vec<usize>,
    /// Nonempty groups in ascending level order: (level, member indices).
    pub groups: Vec<(usize, Vec<usize>)>,
}

pub fn partition_by_weight(weights: &[u64], epsilon: f64) -> GroupPartition {
    let base = 1.0 + epsilon;
    let log_base = base.ln();
    let mut level_of = Vec::with_capacity(weights.len());
    let mut by_level: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, &w) in weights.iter().enumerate() {
        debug_assert!(w >= 1);
        let level = ((w as f64).ln() / log_base + 1e-9).floor() as usize;
        level_of.push(level);
        by_level.entry(level).or_default().push(i);
    }
    GroupPartition {
        base,
        level_of,
        groups: by_level.into_iter().collect(),
    }
}

// ---------------------------------------------------------------------------
// Row-solve engine
// ---------------------------------------------------------------------------

enum Predictor {
    /// Bit-packed candidate predictions for Boolean/GF2 products.
    Bin(BinMatrix),
    /// Frobenius/integer fast path: per-candidate (weighted) squared norms.
    IntFro(Vec<f64>),
    /// Generic integer path: flattened candidate prediction rows.
    IntRows(Vec<u8>),
}

pub(crate) struct RowSolver<'a> {
    v: &'a BinMatrix,
    spec: LossSpec,
    coord_weights: Option<&'a [f64]>,
    predictor: Predictor,
}

impl<'a> RowSolver<'a> {
    pub(crate) fn new(
        v: &'a BinMatrix,
        spec: LossSpec,
        semiring: Semiring,
        coord_weights: Option<&'a [f64]>,
        k_cap: usize,
    ) -> Result<Self> {
        spec.validate()?;
        let k = v.n_rows();
        if k > k_cap {
            return Err(Error::TooLarge(format!("k={k} exceeds cap {k_cap}")));
        }
        if let Some(w) = coord_weights {
            if w.len() != v.n_cols() {
                return Err(Error::dim("coordinate weight count != columns"));
            }
        }
        let predictor = match semiring {
            Semiring::Boolean | Semiring::Gf2 => Predictor::Bin(candidate_bin_table(v, semiring)),
            Semiring::Integer => {
                let frobenius_like = matches!(spec, LossSpec::Frobenius)
                    || matches!(spec, LossSpec::Lp(p) if p == 2.0);
                if frobenius_like {
                    Predictor::IntFro(frobenius_sq_norms(v, coord_weights))
                } else {
                    let cells = (1usize << k) * v.n_cols();
                    if cells > (1 << 26) {
                        return Err(Error::TooLarge(format!(
                            "2^k·d = {cells} prediction table too large for the generic loss path"
                        )));
                    }
                    Predictor::IntRows(candidate_int_rows(v))
                }
            }
        };
        Ok(RowSolver { v, spec, coord_weights, predictor })
    }

    fn n_candidates(&self) -> usize {
        1usize << self.v.n_rows()
    }

    /// Returns the candidate bits minimizing the loss against `a_words`, and
    /// that loss; ties go to the smallest candidate value.
    pub(crate) fn best_row(&self, a_words: &[u64], scratch: &mut Vec<f64>) -> (u64, f64) {
        match &self.predictor {
            Predictor::Bin(table) => {
                let mut best = (0u64, f64::INFINITY);
                for u in 0..self.n_candidates() {
                    let loss = match self.coord_weights {
                        None => binmat::hamming(a_words, table.row_words(u)) as f64,
                        Some(w) => weighted_hamming(a_words, table.row_words(u), w),
                    };
                    if loss < best.1 {
                        best = (u as u64, loss);
                    }
                }
                best
            }
            Predictor::IntFro(sq) => {
                let k = self.v.n_rows();
                // g_l = <a, V_l> (weighted); subset sums give <a, uV> for all u.
                let mut g = [0.0f64; 64];
                for (l, gl) in g.iter_mut().enumerate().take(k) {
                    *gl = match self.coord_weights {
                        None => binmat::popcount_and(a_words, self.v.row_words(l)) as f64,
                        Some(w) => weighted_and(a_words, self.v.row_words(l), w),
                    };
                }
                let norm_a = match self.coord_weights {
                    None => a_words.iter().map(|w| w.count_ones() as f64).sum::<f64>(),
                    Some(w) => {
                        let mut acc = 0.0;
                        for (wi, &word) in a_words.iter().enumerate() {
                            let mut bits = word;
                            while bits != 0 {
                                acc += w[wi * 64 + bits.trailing_zeros() as usize];
                                bits &= bits - 1;
                            }
                        }
                        acc
                    }
                };
                scratch.clear();
                scratch.resize(self.n_candidates(), 0.0);
                let mut best = (0u64, sq[0]);
                for u in 1..self.n_candidates() {
                    let parent = u & (u - 1);
                    let s = scratch[parent] + g[u.trailing_zeros() as usize];
                    scratch[u] = s;
                    let score = sq[u] - 2.0 * s;
                    if score < best.1 {
                        best = (u as u64, score);
                    }
                }
                (best.0, best.1 + norm_a)
            }
            Predictor::IntRows(rows) => {
                let d = self.v.n_cols();
                let mut best = (0u64, f64::INFINITY);
                for u in 0..self.n_candidates() {
                    let pred = &rows[u * d..(u + 1) * d];
                    let mut loss = 0.0;
                    for (j, &p) in pred.iter().enumerate() {
                        let aj = ((a_words[j / 64] >> (j % 64)) & 1) as f64;
                        let term = self.spec.pow(aj - p as f64);
                        loss += self.coord_weights.map_or(term, |w| w[j] * term);
                    }
                    if loss < best.1 {
                        best = (u as u64, loss);
                    }
                }
                best
            }
        }
    }
}

fn weighted_hamming(a: &[u64], b: &[u64], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (wi, (&x, &y)) in a.iter().zip(b).enumerate() {
        let mut bits = x ^ y;
        while bits != 0 {
            acc += w[wi * 64 + bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
    }
    acc
}

fn weighted_and(a: &[u64], b: &[u64], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (wi, (&x, &y)) in a.iter().zip(b).enumerate() {
        let mut bits = x & y;
        while bits != 0 {
            acc += w[wi * 64 + bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
    }
    acc
}

/// Predictions `u·V` for all `u ∈ {0,1}^k` under a binary semiring, built
/// incrementally: row `u` = row `u & (u-1)` combined with one row of `V`.
fn candidate_bin_table(v: &BinMatrix, semiring: Semiring) -> BinMatrix {
    let k = v.n_rows();
    let mut table = BinMatrix::zeros(1 << k, v.n_cols());
    for u in 1..(1usize << k) {
        let parent = u & (u - 1);
        let low = u.trailing_zeros() as usize;
        for j in 0..v.n_cols() {
            let parent_bit = table.get(parent, j);
            let v_bit = v.get(low, j);
            let bit = match semiring {
                Semiring::Boolean => parent_bit | v_bit,
                Semiring::Gf2 => parent_bit ^ v_bit,
                Semiring::Integer => unreachable!(),
            };
            if bit {
                table.set(u, j, true);
            }
        }
    }
    table
}

fn candidate_int_rows(v: &BinMatrix) -> Vec<u8> {
    let k = v.n_rows();
    let d = v.n_cols();
    let mut rows = vec![0u8; (1 << k) * d];
    for u in 1..(1usize << k) {
        let parent = u & (u - 1);
        let low = u.trailing_zeros() as usize;
        let (head, tail) = rows.split_at_mut(u * d);
        let parent_row = &head[parent * d..parent * d + d];
        let row = &mut tail[..d];
        for j in 0..d {
            row[j] = parent_row[j] + v.get(low, j) as u8;
        }
    }
    rows
}

/// (Weighted) squared norms `‖uV‖²` for all candidates, walked in Gray-code
/// order so each step updates only the entries of one `V` row.
fn frobenius_sq_norms(v: &BinMatrix, coord_weights: Option<&[f64]>) -> Vec<f64> {
    let k = v.n_rows();
    let d = v.n_cols();
    let mut sq = vec![0.0f64; 1 << k];
    let mut cur = vec![0.0f64; d];
    let mut cur_sq = 0.0;
    let mut prev_gray = 0usize;
    for i in 1..(1usize << k) {
        let gray = i ^ (i >> 1);
        let flipped = (gray ^ prev_gray).trailing_zeros() as usize;
        let add = gray & (1 << flipped) != 0;
        let words = v.row_words(flipped);
        for (wi, &word) in words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let j = wi * 64 + bits.trailing_zeros() as usize;
                let wj = coord_weights.map_or(1.0, |w| w[j]);
                if add {
                    cur_sq += wj * (2.0 * cur[j] + 1.0);
                    cur[j] += 1.0;
                } else {
                    cur[j] -= 1.0;
                    cur_sq -= wj * (2.0 * cur[j] + 1.0);
                }
                bits &= bits - 1;
            }
        }
        sq[gray] = cur_sq;
        prev_gray = gray;
    }
    sq
}

pub(crate) fn write_row_bits(m: &mut BinMatrix, row: usize, offset: usize, k: usize, bits: u64) {
    for l in 0..k {
        if (bits >> l) & 1 == 1 {
            m.set(row, offset + l, true);
        }
    }
}

// ---------------------------------------------------------------------------
// Conditional solves
// ---------------------------------------------------------------------------

/// Optimal `U` for a fixed `V`: each row of `U` independently minimizes the
/// row loss over all `2^k` binary vectors. Row weights scale each row's
/// contribution to the reported loss (the per-row argmin is unaffected).
pub fn solve_u_given_v(
    a: &BinMatrix,
    v: &BinMatrix,
    spec: LossSpec,
    semiring: Semiring,
) -> Result<(BinMatrix, f64)> {
    solve_u_given_v_weighted(a, None, v, spec, semiring)
}

pub fn solve_u_given_v_weighted(
    a: &BinMatrix,
    row_weights: Option<&[u64]>,
    v: &BinMatrix,
    spec: LossSpec,
    semiring: Semiring,
) -> Result<(BinMatrix, f64)> {
    if a.n_cols() != v.n_cols() {
        return Err(Error::dim("A and V column counts differ"));
    }
    let solver = RowSolver::new(v, spec, semiring, None, DEFAULT_K_CAP)?;
    let k = v.n_rows();
    let mut u = BinMatrix::zeros(a.n_rows(), k);
    let mut total = 0.0;
    let mut scratch = Vec::new();
    for i in 0..a.n_rows() {
        let (bits, loss) = solver.best_row(a.row_words(i), &mut scratch);
        write_row_bits(&mut u, i, 0, k, bits);
        total += row_weights.map_or(1.0, |w| w[i] as f64) * loss;
    }
    Ok((u, total))
}

/// Optimal `V` for a fixed `U`: each column solved independently. Implemented
/// as the row solve of the transposed system; row weights of `A` become
/// coordinate weights there.
pub fn solve_v_given_u(
    a: &BinMatrix,
    u: &BinMatrix,
    spec: LossSpec,
    semiring: Semiring,
) -> Result<(BinMatrix, f64)> {
    solve_v_given_u_weighted(a, None, u, spec, semiring)
}

pub fn solve_v_given_u_weighted(
    a: &BinMatrix,
    row_weights: Option<&[u64]>,
    u: &BinMatrix,
    spec: LossSpec,
    semiring: Semiring,
) -> Result<(BinMatrix, f64)> {
    if a.n_rows() != u.n_rows() {
        return Err(Error::dim("A and U row counts differ"));
    }
    let at = a.transpose();
    let ut = u.transpose();
    let weights: Option<Vec<f64>> = row_weights.map(|w| w.iter().map(|&x| x as f64).collect());
    let solver = RowSolver::new(&ut, spec, semiring, weights.as_deref(), DEFAULT_K_CAP)?;
    let k = u.n_cols();
    let mut vt = BinMatrix::zeros(a.n_cols(), k);
    let mut total = 0.0;
    let mut scratch = Vec::new();
    for j in 0..a.n_cols() {
        let (bits, loss) = solver.best_row(at.row_words(j), &mut scratch);
        write_row_bits(&mut vt, j, 0, k, bits);
        total += loss;
    }
    Ok((vt.transpose(), total))
}

/// Optimal block-structured `U` for factors `V^{(1)}..V^{(ℓ)}`: each row picks
/// one block `j` and one `u ∈ {0,1}^k`, minimizing the row loss; the result
/// row is `u` placed in block `j` of a width-`ℓk` row. Ties resolve to the
/// smallest `(j, u)`.
pub fn solve_u_blockwise(
    a: &BinMatrix,
    v_list: &[BinMatrix],
    spec: LossSpec,
    semiring: Semiring,
) -> Result<(BinMatrix, Vec<usize>, f64)> {
    solve_u_blockwise_weighted(a, v_list, spec, semiring, None)
}

pub fn solve_u_blockwise_weighted(
    a: &BinMatrix,
    v_list: &[BinMatrix],
    spec: LossSpec,
    semiring: Semiring,
    coord_weights: Option<&[f64]>,
) -> Result<(BinMatrix, Vec<usize>, f64)> {
    if v_list.is_empty() {
        return Err(Error::param("blockwise solve needs at least one factor"));
    }
    let k = v_list[0].n_rows();
    for v in v_list {
        if v.n_rows() != k || v.n_cols() != a.n_cols() {
            return Err(Error::dim("all V blocks must be k x d"));
        }
    }
    let solvers: Vec<RowSolver> = v_list
        .iter()
        .map(|v| RowSolver::new(v, spec, semiring, coord_weights, DEFAULT_K_CAP))
        .collect::<Result<_>>()?;
    let ell = v_list.len();
    let mut u = BinMatrix::zeros(a.n_rows(), ell * k);
    let mut blocks = Vec::with_capacity(a.n_rows());
    let mut total = 0.0;
    let mut scratch = Vec::new();
    for i in 0..a.n_rows() {
        let mut best: (usize, u64, f64) = (0, 0, f64::INFINITY);
        for (j, solver) in solvers.iter().enumerate() {
            let (bits, loss) = solver.best_row(a.row_words(i), &mut scratch);
            if loss < best.2 {
                best = (j, bits, loss);
            }
        }
        write_row_bits(&mut u, i, best.0 * k, k, best.1);
        blocks.push(best.0);
        total += best.2;
    }
    Ok((u, blocks, total))
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Global optimum by enumerating every `V ∈ {0,1}^{k×d}` and solving `U`
/// exactly row-wise. Guarded by [`BRUTE_FORCE_BITS_CAP`].
pub fn brute_force_bmf(
    a: &BinMatrix,
    k: usize,
    spec: LossSpec,
    semiring: Semiring,
) -> Result<Factorization> {
    let d = a.n_cols();
    let bits = k * d;
    if bits > BRUTE_FORCE_BITS_CAP {
        return Err(Error::TooLarge(format!(
            "brute force needs 2^{bits} candidates (cap 2^{BRUTE_FORCE_BITS_CAP})"
        )));
    }
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    use rayon::prelude::*;
    let total = 1u64 << bits;
    // Reduce over (loss, candidate index); the index keeps ties deterministic.
    let best = (0..total)
        .into_par_iter()
        .map(|vbits| {
            let v = BinMatrix::from_fn(k, d, |l, j| (vbits >> (l * d + j)) & 1 == 1);
            let (_, loss) = solve_u_given_v(a, &v, spec, semiring).expect("guarded size");
            (loss, vbits)
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |x, y| {
                if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }
            },
        );
    let v = BinMatrix::from_fn(k, d, |l, j| (best.1 >> (l * d + j)) & 1 == 1);
    let (u, _) = solve_u_given_v(a, &v, spec, semiring)?;
    Factorization::new(a, u, v, semiring, spec, k, "brute-force")
}

/// Column-wise exact solve on a sketched (real-valued) system: finds the
/// binary `V` minimizing `‖SU·V − SA‖` column by column, enumerating all
/// `2^k` candidates per column. Used by the guess-enumeration and sampled
/// sketch paths, where `su` is `m×k` and `sa` is `m×d` with small `m`.
pub(crate) fn solve_v_sketched(
    su: &nalgebra::DMatrix<f64>,
    sa: &nalgebra::DMatrix<f64>,
    spec: LossSpec,
) -> (BinMatrix, f64) {
    let (m, k) = (su.nrows(), su.ncols());
    let d = sa.ncols();
    debug_assert_eq!(m, sa.nrows());
    // candidate predictions, built incrementally over the subset lattice
    let n_cand = 1usize << k;
    let mut preds = vec![0.0f64; n_cand * m];
    for u in 1..n_cand {
        let parent = u & (u - 1);
        let low = u.trailing_zeros() as usize;
        for r in 0..m {
            preds[u * m + r] = preds[parent * m + r] + su[(r, low)];
        }
    }
    let mut v = BinMatrix::zeros(k, d);
    let mut total = 0.0;
    for j in 0..d {
        let mut best = (0usize, f64::INFINITY);
        for u in 0..n_cand {
            let mut loss = 0.0;
            for r in 0..m {
                loss += spec.pow(preds[u * m + r] - sa[(r, j)]);
            }
            if loss < best.1 {
                best = (u, loss);
            }
        }
        for l in 0..k {
            if (best.0 >> l) & 1 == 1 {
                v.set(l, j, true);
            }
        }
        total += best.1;
    }
    (v, total)
}

/// Exact alternating minimization from a starting `V`; the loss sequence is
/// non-increasing and the best pair seen is returned.
pub fn alternate_from(
    a: &BinMatrix,
    v0: BinMatrix,
    spec: LossSpec,
    semiring: Semiring,
    max_rounds: usize,
) -> Result<(BinMatrix, BinMatrix, f64)> {
    let mut v = v0;
    let (mut u, mut best) = solve_u_given_v(a, &v, spec, semiring)?;
    loop {
        let mut improved = false;
        for _ in 0..max_rounds {
            let (v2, loss_v) = solve_v_given_u(a, &u, spec, semiring)?;
            debug_assert!(loss_v <= best + 1e-9);
            let (u2, loss_u) = solve_u_given_v(a, &v2, spec, semiring)?;
            debug_assert!(loss_u <= loss_v + 1e-9);
            if loss_u + 1e-12 < best {
                best = loss_u;
                u = u2;
                v = v2;
                improved = true;
            } else {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok((u, v, best))
}

#[cfg(test)]
mod tests;
