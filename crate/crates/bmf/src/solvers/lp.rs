//! Bicriteria low-rank approximation with entrywise L_p loss: row and column
//! coresets, double geometric grouping, a rank-k solve per part, and
//! block-structured reassembly.
//!
//! On binary points the `L_p^p` distance between rows equals the squared
//! Euclidean distance for every `p`, so the same sensitivity-sampling
//! construction serves as the discrete-metric coreset here.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::binmat::{BinMatrix, LossSpec, Semiring};
use crate::clustering::{coreset_target, sensitivity_sample_indices, WeightedRows};
use crate::sketch::{bin_to_real, l0_affine_sketch};
use crate::{Error, Result};

use super::{
    brute_force_bmf, partition_by_weight, solve_u_blockwise, solve_u_blockwise_weighted,
    solve_u_given_v, solve_v_sketched, Factorization,
};

#[derive(Clone, Debug)]
pub struct LpConfig {
    pub row_coreset_target: Option<usize>,
    pub col_coreset_target: Option<usize>,
    /// Parts with `k·(part columns)` at most this use the brute-force solver.
    pub part_brute_cap: usize,
    /// Alternation rounds for the sketched per-part solver.
    pub sketch_iters: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            row_coreset_target: None,
            col_coreset_target: None,
            // one step below the global oracle guard keeps worst-case parts
            // around a million candidates
            part_brute_cap: 20,
            sketch_iters: 3,
        }
    }
}

pub fn lp_bicriteria_solver(
    a: &BinMatrix,
    k: usize,
    p: f64,
    epsilon: f64,
    seed: u64,
) -> Result<Factorization> {
    lp_bicriteria_solver_with(a, k, p, epsilon, &LpConfig::default(), seed)
}

/// Row coreset of `A`, column coreset of it, parts `G^{(i,j)}` by row and
/// column weight classes, a rank-k L_p solve per part, then `V'` via the
/// blockwise solve transposed against the row coreset (which still has every
/// original column) and a final blockwise `U'` against `A`.
pub fn lp_bicriteria_solver_with(
    a: &BinMatrix,
    k: usize,
    p: f64,
    epsilon: f64,
    cfg: &LpConfig,
    seed: u64,
) -> Result<Factorization> {
    LossSpec::Lp(p).validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let epsilon = epsilon.min(0.999_999);
    let spec = LossSpec::Lp(p);
    let n = a.n_rows();
    let k_cluster = (1usize << k.min(30)).min(n);

    // Row coreset of A.
    let mut rng_coreset = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, crate::seed::role::CORESET, 0));
    let row_target = cfg.row_coreset_target.unwrap_or_else(|| coreset_target(k_cluster, epsilon));
    let (row_idx, row_weights) = sensitivity_sample_indices(
        &WeightedRows::unit(a.clone()),
        k_cluster,
        epsilon,
        row_target,
        &mut rng_coreset,
    )?;
    let c_rows = a.select_rows(&row_idx);
    let dedup = WeightedRows::new(c_rows, row_weights)?.dedup();

    // Column coreset of the row coreset: columns are clustered as vectors of
    // the duplicated matrix, so the row weights shape the column metric.
    let col_target = cfg
        .col_coreset_target
        .unwrap_or_else(|| coreset_target(k_cluster.min(dedup.n_cols()), epsilon));
    let (col_idx, col_weights) = sensitivity_sample_indices(
        &WeightedRows::unit(dedup.expand().transpose()),
        k_cluster.min(dedup.n_cols().max(1)),
        epsilon,
        col_target,
        &mut rng_coreset,
    )?;

    let row_groups = partition_by_weight(&dedup.weights, epsilon);
    let col_groups = partition_by_weight(&col_weights, epsilon);

    // Solve each part G^{(i,j)} and pad its U into the coreset's row space.
    let mut rng_solve = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, crate::seed::role::SOLVE, 0));
    let t = dedup.n_rows();
    let mut u_blocks: Vec<BinMatrix> = Vec::new();
    for (_, row_members) in &row_groups.groups {
        for (_, col_members) in &col_groups.groups {
            let part_cols: Vec<usize> = col_members.iter().map(|&c| col_idx[c]).collect();
            let part = dedup.rows.select_rows(row_members).select_cols(&part_cols);
            let u_part = solve_part(&part, k, p, epsilon, cfg, &mut rng_solve)?;
            let mut padded = BinMatrix::zeros(t, k);
            for (r, &row) in row_members.iter().enumerate() {
                padded.copy_row_from(row, &u_part, r);
            }
            u_blocks.push(padded);
        }
    }

    // V' by the blockwise solve on the transposed system: each original
    // column of the row coreset picks one part's U block and one binary
    // combination, weighted by the coreset row weights.
    let ut_blocks: Vec<BinMatrix> = u_blocks.iter().map(|u| u.transpose()).collect();
    let ct = dedup.rows.transpose();
    let wreal: Vec<f64> = dedup.weights.iter().map(|&w| w as f64).collect();
    let (vt, _, _) = solve_u_blockwise_weighted(&ct, &ut_blocks, spec, Semiring::Integer, Some(&wreal))?;
    let v = vt.transpose();

    // Final U' against the original matrix, keeping the block contract.
    let ell = u_blocks.len();
    let v_blocks: Vec<BinMatrix> = (0..ell)
        .map(|b| {
            let rows: Vec<usize> = (b * k..(b + 1) * k).collect();
            v.select_rows(&rows)
        })
        .collect();
    let (u, _, _) = solve_u_blockwise(a, &v_blocks, spec, Semiring::Integer)?;
    Factorization::new(a, u, v, Semiring::Integer, spec, k, "lp-bicriteria")
}

/// Rank-k L_p solve for one part: brute force when tiny, otherwise
/// alternation whose V-step runs on an L0-sampled subsystem.
fn solve_part(
    part: &BinMatrix,
    k: usize,
    p: f64,
    epsilon: f64,
    cfg: &LpConfig,
    rng: &mut impl Rng,
) -> Result<BinMatrix> {
    let spec = LossSpec::Lp(p);
    if part.n_rows() == 0 {
        return Ok(BinMatrix::zeros(0, k));
    }
    if k * part.n_cols() <= cfg.part_brute_cap {
        let f = brute_force_bmf(part, k, spec, Semiring::Integer)?;
        return Ok(f.u);
    }

    // Sketched alternation: exact U rows, sketched V columns.
    let mut v = BinMatrix::from_fn(k, part.n_cols(), |_, _| rng.gen_bool(0.5));
    let mut best: Option<(f64, BinMatrix)> = None;
    for _ in 0..cfg.sketch_iters.max(1) {
        let (u, loss) = solve_u_given_v(part, &v, spec, Semiring::Integer)?;
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, u.clone()));
        }
        let sk = l0_affine_sketch(&u, part, epsilon, p, rng)?;
        if sk.is_empty() {
            break;
        }
        let su = sk.apply_real(&bin_to_real(&u));
        let sa = sk.apply_binary(part);
        let (v_next, _) = solve_v_sketched(&su, &sa, spec);
        v = v_next;
    }
    let (u, loss) = solve_u_given_v(part, &v, spec, Semiring::Integer)?;
    if best.as_ref().is_none_or(|(b, _)| loss < *b) {
        best = Some((loss, u));
    }
    Ok(best.expect("at least one round").1)
}

