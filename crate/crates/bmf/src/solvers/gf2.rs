//! Bicriteria low-rank approximation over GF(2): coreset, geometric grouping
//! of rows by weight, a rank-k L0 solver per group, and a block-structured
//! final `U` against the original matrix.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::binmat::{BinMatrix, LossSpec, Semiring};
use crate::clustering::{coreset_target, sensitivity_coreset_with_target, WeightedRows};
use crate::{Error, Result};

use super::{
    alternate_from, brute_force_bmf, partition_by_weight, solve_u_blockwise, Factorization,
    BRUTE_FORCE_BITS_CAP,
};

#[derive(Clone, Debug)]
pub struct Gf2Config {
    pub coreset_target: Option<usize>,
    /// Random restarts of the alternating fallback solver.
    pub restarts: usize,
    pub alt_rounds: usize,
}

impl Default for Gf2Config {
    fn default() -> Self {
        Gf2Config { coreset_target: None, restarts: 10, alt_rounds: 20 }
    }
}

/// Rank-k entrywise-L0 approximation over GF(2).
///
/// The cited subroutine's interface is honored with a substitute: exact
/// enumeration over all `V ∈ {0,1}^{k×d}` while `k·d` stays within the
/// brute-force cap, otherwise alternating exact GF(2) solves from random
/// starts, keeping the best of `restarts` runs.
pub fn gf2_rank_k_l0(
    g: &BinMatrix,
    k: usize,
    cfg: &Gf2Config,
    rng: &mut impl Rng,
) -> Result<(BinMatrix, BinMatrix, f64)> {
    if k * g.n_cols() <= BRUTE_FORCE_BITS_CAP {
        let f = brute_force_bmf(g, k, LossSpec::L0, Semiring::Gf2)?;
        return Ok((f.u, f.v, f.achieved_loss));
    }
    let mut best: Option<(f64, BinMatrix, BinMatrix)> = None;
    for _ in 0..cfg.restarts.max(1) {
        let v0 = BinMatrix::from_fn(k, g.n_cols(), |_, _| rng.gen_bool(0.5));
        let (u, v, loss) = alternate_from(g, v0, LossSpec::L0, Semiring::Gf2, cfg.alt_rounds)?;
        if best.as_ref().is_none_or(|(b, _, _)| loss < *b) {
            best = Some((loss, u, v));
        }
    }
    let (loss, u, v) = best.expect("restarts >= 1");
    Ok((u, v, loss))
}

pub fn gf2_bicriteria_solver(
    a: &BinMatrix,
    k: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Factorization> {
    gf2_bicriteria_solver_with(a, k, epsilon, &Gf2Config::default(), seed)
}

/// Coreset for `2^k`-means, rows grouped by weight into `[(1+ε)^j, (1+ε)^{j+1})`
/// classes, a rank-k GF(2) solve per group, stacked `V` blocks, and a final
/// blockwise `U` on the original matrix. `k_actual` is `k` times the number
/// of nonempty groups.
pub fn gf2_bicriteria_solver_with(
    a: &BinMatrix,
    k: usize,
    epsilon: f64,
    cfg: &Gf2Config,
    seed: u64,
) -> Result<Factorization> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let epsilon = epsilon.min(0.999_999);
    let n = a.n_rows();
    let k_cluster = (1usize << k.min(30)).min(n);
    let target = cfg.coreset_target.unwrap_or_else(|| coreset_target(k_cluster, epsilon));
    let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, crate::seed::role::CORESET, 0));
    let coreset =
        sensitivity_coreset_with_target(&WeightedRows::unit(a.clone()), k_cluster, epsilon, target, &mut rng)?;
    let dedup = coreset.dedup();

    let partition = partition_by_weight(&dedup.weights, epsilon);
    let mut rng_solve = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, crate::seed::role::SOLVE, 0));
    let mut v_blocks: Vec<BinMatrix> = Vec::new();
    for (_, members) in &partition.groups {
        let group = dedup.rows.select_rows(members);
        let (_, v_g, _) = gf2_rank_k_l0(&group, k, cfg, &mut rng_solve)?;
        v_blocks.push(v_g);
    }

    let (u, _, _) = solve_u_blockwise(a, &v_blocks, LossSpec::L0, Semiring::Gf2)?;
    let v = BinMatrix::vstack(&v_blocks.iter().collect::<Vec<_>>())?;
    Factorization::new(a, u, v, Semiring::Gf2, LossSpec::L0, k, "gf2-bicriteria")
}
