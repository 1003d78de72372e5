//! The Frobenius (1+ε) pipeline: strong coreset for 2^k-means, a sketched
//! solve for `V` on the duplicated matrix, and a final exact row solve for
//! `U` against the original matrix.
//!
//! Two modes are provided. `GuessEnumeration` follows the enumeration
//! scheme literally — every m-subset of the coreset's distinct rows, every
//! power-of-two weight vector up to `N²`, and every scaled binary pattern for
//! the sketched `SU` — and is gated to toy parameters. `SketchSampled`
//! replaces the guess loop by leverage-score sampling of the realized `U`
//! iterate and alternates; the correct guess of the enumeration always
//! contains the realized sketch, so this is a practical surrogate without
//! the certified guarantee. The mode is recorded in the output metadata.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::binmat::{BinMatrix, LossSpec, Semiring};
use crate::clustering::{
    coreset_target, kmeans_pp_lloyd, sensitivity_coreset_with_target, WeightedRows,
};
use crate::seed::role;
use crate::sketch::{bin_to_real, leverage_scores_weighted, RowSketch};
use crate::{derive_seed, Error, Result};

use super::{
    solve_u_given_v, solve_u_given_v_weighted, solve_v_sketched, Factorization, DEFAULT_K_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrobeniusMode {
    /// Full guess enumeration over sketched systems (toy parameters only).
    GuessEnumeration,
    /// Leverage-score sampling of the realized `U` iterate, alternated.
    SketchSampled,
}

impl FrobeniusMode {
    pub fn name(&self) -> &'static str {
        match self {
            FrobeniusMode::GuessEnumeration => "guess-enumeration",
            FrobeniusMode::SketchSampled => "sketch-sampled",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrobeniusConfig {
    /// Coreset size target; default is the `2^k`-means formula value.
    pub coreset_target: Option<usize>,
    /// Sketch height m; default `⌈k·ln(max(k,2))/ε²⌉`.
    pub sketch_rows: Option<usize>,
    /// Guess mode requires at most this many distinct coreset rows.
    pub guess_distinct_cap: usize,
    /// Guess mode caps the sketch height here.
    pub guess_sketch_cap: usize,
    /// Alternation rounds in sampled mode.
    pub sampled_iters: usize,
    /// Independent k-means++ initializations in sampled mode.
    pub sampled_restarts: usize,
}

impl Default for FrobeniusConfig {
    fn default() -> Self {
        FrobeniusConfig {
            coreset_target: None,
            sketch_rows: None,
            guess_distinct_cap: 8,
            guess_sketch_cap: 3,
            sampled_iters: 5,
            sampled_restarts: 3,
        }
    }
}

fn default_sketch_rows(k: usize, epsilon: f64) -> usize {
    ((k.max(1) as f64) * (k.max(2) as f64).ln() / (epsilon * epsilon)).ceil() as usize
}

/// Builds the `2^k`-means coreset used by this pipeline (cluster count capped
/// at `n`).
pub(crate) fn build_coreset(
    a: &BinMatrix,
    k: usize,
    epsilon: f64,
    cfg: &FrobeniusConfig,
    rng: &mut impl Rng,
) -> Result<WeightedRows> {
    let n = a.n_rows();
    let k_cluster = (1usize << k.min(30)).min(n);
    let target = cfg.coreset_target.unwrap_or_else(|| coreset_target(k_cluster, epsilon));
    sensitivity_coreset_with_target(&WeightedRows::unit(a.clone()), k_cluster, epsilon, target, rng)
}

/// Solves for `V` on a weighted coreset (the duplicated matrix, kept in
/// weighted form). Shared by the offline, streaming and distributed drivers.
pub(crate) fn solve_v_on_coreset(
    coreset: &WeightedRows,
    k: usize,
    epsilon: f64,
    mode: FrobeniusMode,
    cfg: &FrobeniusConfig,
    rng: &mut impl Rng,
) -> Result<BinMatrix> {
    if k > DEFAULT_K_CAP {
        return Err(Error::TooLarge(format!("k={k} exceeds cap {DEFAULT_K_CAP}")));
    }
    let dedup = coreset.dedup();
    match mode {
        FrobeniusMode::GuessEnumeration => guess_enumeration_v(&dedup, k, epsilon, cfg),
        FrobeniusMode::SketchSampled => sampled_v(&dedup, k, epsilon, cfg, rng),
    }
}

/// `(1+ε)`-style solver for the Frobenius/integer objective, default config.
pub fn frobenius_coreset_solver(
    a: &BinMatrix,
    k: usize,
    epsilon: f64,
    mode: FrobeniusMode,
    seed: u64,
) -> Result<Factorization> {
    frobenius_coreset_solver_with(a, k, epsilon, mode, &FrobeniusConfig::default(), seed)
}

/// Coreset → sketched `V` solve on the duplicated matrix → exact `U` against
/// the original matrix. The seed is split into independent streams for the
/// coreset and solve stages so that the streaming/distributed drivers can
/// replay this pipeline exactly in their degenerate configurations.
pub fn frobenius_coreset_solver_with(
    a: &BinMatrix,
    k: usize,
    epsilon: f64,
    mode: FrobeniusMode,
    cfg: &FrobeniusConfig,
    seed: u64,
) -> Result<Factorization> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let epsilon = epsilon.min(0.999_999);
    let mut rng_coreset = ChaCha8Rng::seed_from_u64(derive_seed(seed, role::CORESET, 0));
    let coreset = build_coreset(a, k, epsilon, cfg, &mut rng_coreset)?;
    let mut rng_solve = ChaCha8Rng::seed_from_u64(derive_seed(seed, role::SOLVE, 0));
    let v = solve_v_on_coreset(&coreset, k, epsilon, mode, cfg, &mut rng_solve)?;
    let (u, _) = solve_u_given_v(a, &v, LossSpec::Frobenius, Semiring::Integer)?;
    Factorization::new(
        a,
        u,
        v,
        Semiring::Integer,
        LossSpec::Frobenius,
        k,
        format!("frobenius/{}", mode.name()),
    )
}

fn subsets_of_size(t: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, t: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..t {
            cur.push(i);
            rec(i + 1, t, m, cur, out);
            cur.pop();
        }
    }
    rec(0, t, m, &mut cur, &mut out);
    out
}

/// Enumerates every guess of `(T, D, SU*)`: row subsets of the distinct
/// coreset rows, per-row power-of-two weights up to `N²`, and scaled binary
/// sketch rows for `U*`. Each guess contributes its column-wise optimal `V`;
/// candidates are then ranked by the exact weighted loss on the coreset.
fn guess_enumeration_v(
    dedup: &WeightedRows,
    k: usize,
    epsilon: f64,
    cfg: &FrobeniusConfig,
) -> Result<BinMatrix> {
    let t = dedup.n_rows();
    if t == 0 {
        return Err(Error::param("empty coreset"));
    }
    if t > cfg.guess_distinct_cap {
        return Err(Error::TooLarge(format!(
            "guess enumeration allows at most {} distinct rows, coreset has {t}",
            cfg.guess_distinct_cap
        )));
    }
    let m = cfg
        .sketch_rows
        .unwrap_or_else(|| default_sketch_rows(k, epsilon))
        .min(cfg.guess_sketch_cap)
        .min(t)
        .max(1);
    if m * k >= 32 {
        return Err(Error::TooLarge(format!(
            "guess enumeration needs 2^{} sketched-factor patterns",
            m * k
        )));
    }

    let total_weight = dedup.total_weight();
    // power-of-two weight grid 1, 2, 4, ..., up to N²
    let n2 = (total_weight as f64).powi(2);
    let mut weight_grid: Vec<f64> = Vec::new();
    let mut w = 1.0f64;
    while w <= n2 {
        weight_grid.push(w);
        w *= 2.0;
    }
    let g = weight_grid.len();
    let subsets = subsets_of_size(t, m);
    let n_scale = g.pow(m as u32) as u64;
    let n_su = 1u64 << (m * k);

    let rows_real = bin_to_real(&dedup.rows);
    // Collect the distinct candidate V matrices over all guesses.
    let candidates: std::collections::BTreeSet<Vec<u64>> = subsets
        .par_iter()
        .map(|subset| {
            let mut local = std::collections::BTreeSet::new();
            let mut sa_base = DMatrix::zeros(m, dedup.n_cols());
            for (r, &src) in subset.iter().enumerate() {
                sa_base.set_row(r, &rows_real.row(src));
            }
            for scale_idx in 0..n_scale {
                // decode per-row scale factors sqrt(w_r / m)
                let mut scales = vec![0.0f64; m];
                let mut rest = scale_idx;
                for s in scales.iter_mut() {
                    *s = (weight_grid[(rest % g as u64) as usize] / m as f64).sqrt();
                    rest /= g as u64;
                }
                let mut sa = sa_base.clone();
                for r in 0..m {
                    for j in 0..dedup.n_cols() {
                        sa[(r, j)] *= scales[r];
                    }
                }
                for su_bits in 0..n_su {
                    let su = DMatrix::from_fn(m, k, |r, l| {
                        if (su_bits >> (r * k + l)) & 1 == 1 {
                            scales[r]
                        } else {
                            0.0
                        }
                    });
                    let (v, _) = solve_v_sketched(&su, &sa, LossSpec::Frobenius);
                    let key: Vec<u64> =
                        (0..k).flat_map(|l| v.row_words(l).to_vec()).collect();
                    local.insert(key);
                }
            }
            local
        })
        .reduce(std::collections::BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });

    // Re-solve U on the weighted coreset for every candidate and keep the
    // best; BTreeSet iteration order makes ties deterministic.
    let mut best: Option<(f64, BinMatrix)> = None;
    for key in candidates {
        let v = v_from_key(&key, k, dedup.n_cols());
        let (_, loss) = solve_u_given_v_weighted(
            &dedup.rows,
            Some(&dedup.weights),
            &v,
            LossSpec::Frobenius,
            Semiring::Integer,
        )?;
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, v));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

fn v_from_key(key: &[u64], k: usize, d: usize) -> BinMatrix {
    let words = d.div_ceil(64).max(1);
    BinMatrix::from_fn(k, d, |l, j| (key[l * words + j / 64] >> (j % 64)) & 1 == 1)
}

/// Practical surrogate: alternate an exact `U` solve on the weighted coreset
/// with a `V` solve on a system sampled by the leverage scores of the
/// realized `U`. Runs from a few initializations (exhaustive k-subsets of
/// the distinct rows when that sweep is small, k-means++ snaps otherwise)
/// and keeps the best pair seen by exact coreset loss.
fn sampled_v(
    dedup: &WeightedRows,
    k: usize,
    epsilon: f64,
    cfg: &FrobeniusConfig,
    rng: &mut impl Rng,
) -> Result<BinMatrix> {
    let m = cfg.sketch_rows.unwrap_or_else(|| default_sketch_rows(k, epsilon)).max(1);
    let mut best: Option<(f64, BinMatrix)> = None;
    let consider = |v: &BinMatrix, best: &mut Option<(f64, BinMatrix)>| -> Result<f64> {
        let (_, loss) = solve_u_given_v_weighted(
            &dedup.rows,
            Some(&dedup.weights),
            v,
            LossSpec::Frobenius,
            Semiring::Integer,
        )?;
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            *best = Some((loss, v.clone()));
        }
        Ok(loss)
    };

    // Deterministic sweep over k-subsets of the distinct rows when feasible.
    let t = dedup.n_rows();
    if binomial(t, k.min(t)) <= 64 {
        for subset in subsets_of_size(t, k.min(t)) {
            let mut v = BinMatrix::zeros(k, dedup.n_cols());
            for (slot, &row) in subset.iter().enumerate() {
                v.copy_row_from(slot, &dedup.rows, row);
            }
            consider(&v, &mut best)?;
        }
    }

    for _ in 0..cfg.sampled_restarts.max(1) {
        // kBMF-style initialization on the weighted rows: cluster, snap.
        let k_init = k.min(t);
        let (centers, _) = kmeans_pp_lloyd(dedup, k_init, 10, rng)?;
        let mut v = BinMatrix::zeros(k, dedup.n_cols());
        for (c, center) in centers.centers.iter().enumerate() {
            let mut nearest = (0usize, f64::INFINITY);
            for i in 0..t {
                let d: f64 = (0..dedup.n_cols())
                    .map(|j| (dedup.rows.get(i, j) as u8 as f64 - center[j]).powi(2))
                    .sum();
                if d < nearest.1 {
                    nearest = (i, d);
                }
            }
            v.copy_row_from(c, &dedup.rows, nearest.0);
        }

        for _ in 0..cfg.sampled_iters {
            consider(&v, &mut best)?;
            let (u, _) = solve_u_given_v_weighted(
                &dedup.rows,
                Some(&dedup.weights),
                &v,
                LossSpec::Frobenius,
                Semiring::Integer,
            )?;
            // Leverage mass of the duplicated U rows, from distinct rows.
            let u_real = bin_to_real(&u);
            let lev = leverage_scores_weighted(&u_real, &dedup.weights);
            let sk = sample_by_mass(&lev.scores, m, rng)?;
            let su = sk.apply_real(&u_real);
            let sa = sk.apply_binary(&dedup.rows);
            let (v_next, _) = solve_v_sketched(&su, &sa, LossSpec::Frobenius);
            v = v_next;
        }
        consider(&v, &mut best)?;
    }
    Ok(best.expect("at least one init").1)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > 1 << 40 {
            return acc;
        }
    }
    acc
}

/// Samples `m` rows proportionally to the given nonnegative masses, scaling
/// by `1/√(m·q_j)`; falls back to uniform if every mass is zero.
fn sample_by_mass(mass: &[f64], m: usize, rng: &mut impl Rng) -> Result<RowSketch> {
    let total: f64 = mass.iter().sum();
    let probs: Vec<f64> = if total > 0.0 {
        mass.iter().map(|&x| x / total).collect()
    } else {
        vec![1.0 / mass.len() as f64; mass.len()]
    };
    let dist = rand::distributions::WeightedIndex::new(&probs)
        .map_err(|e| Error::param(e.to_string()))?;
    use rand::distributions::Distribution;
    let mut indices = Vec::with_capacity(m);
    let mut scales = Vec::with_capacity(m);
    for _ in 0..m {
        let j = dist.sample(rng);
        indices.push(j);
        scales.push(1.0 / (m as f64 * probs[j]).sqrt());
    }
    Ok(RowSketch { indices, scales, nominal_rows: m })
}
