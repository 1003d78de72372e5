//! k-means machinery (cost, k-means++ seeding, Lloyd iterations) and weighted
//! coreset constructions, including the streaming merge-and-reduce wrapper.
//!
//! Coresets carry positive integer weights so that they can be expanded into
//! a duplicated matrix. The sensitivity construction uses cost-based
//! importance scores from a bicriteria k-means++ solution; the accuracy
//! guarantee is inherited from the cited offline constructions and is checked
//! empirically by the test suite.

use std::io::{BufRead, BufReader, Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::binmat::BinMatrix;
use crate::{Error, Result};

/// Binary rows with positive integer weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedRows {
    pub rows: BinMatrix,
    pub weights: Vec<u64>,
}

impl WeightedRows {
    pub fn new(rows: BinMatrix, weights: Vec<u64>) -> Result<Self> {
        if weights.len() != rows.n_rows() {
            return Err(Error::dim("weights must match row count"));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::param("weights must be positive"));
        }
        Ok(WeightedRows { rows, weights })
    }

    /// Wraps a plain matrix with unit weights.
    pub fn unit(rows: BinMatrix) -> Self {
        let weights = vec![1; rows.n_rows()];
        WeightedRows { rows, weights }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.n_cols()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    /// Materializes the duplicated matrix: row `i` repeated `weights[i]` times.
    pub fn expand(&self) -> BinMatrix {
        let mut indices = Vec::with_capacity(self.total_weight() as usize);
        for (i, &w) in self.weights.iter().enumerate() {
            indices.extend(std::iter::repeat(i).take(w as usize));
        }
        self.rows.select_rows(&indices)
    }

    /// Merges duplicate rows, summing their weights. First-occurrence order.
    pub fn dedup(&self) -> WeightedRows {
        let (uniq, _, map) = crate::binmat::distinct_rows(&self.rows);
        let mut weights = vec![0u64; uniq.n_rows()];
        for (i, &u) in map.iter().enumerate() {
            weights[u] += self.weights[i];
        }
        WeightedRows { rows: uniq, weights }
    }

    /// Concatenates several weighted row sets (columns must match).
    pub fn concat(parts: &[&WeightedRows]) -> Result<WeightedRows> {
        let mats: Vec<&BinMatrix> = parts.iter().map(|p| &p.rows).collect();
        let rows = BinMatrix::vstack(&mats)?;
        let weights = parts.iter().flat_map(|p| p.weights.iter().copied()).collect();
        Ok(WeightedRows { rows, weights })
    }

    /// TSV serialization: weight column, then the binary entries.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.n_rows() {
            let mut fields = vec![self.weights[i].to_string()];
            fields.extend((0..self.n_cols()).map(|j| if self.rows.get(i, j) { "1".into() } else { "0".to_string() }));
            writeln!(w, "{}", fields.join("\t"))?;
        }
        Ok(())
    }

    pub fn read_tsv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut weights = Vec::new();
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split('\t');
            let w: u64 = it
                .next()
                .unwrap()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad weight", lineno + 1)))?;
            let row: Vec<u8> = it
                .map(|tok| match tok {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Parse(format!("line {}: entry {other:?}", lineno + 1))),
                })
                .collect::<Result<_>>()?;
            weights.push(w);
            rows.push(row);
        }
        WeightedRows::new(BinMatrix::from_rows(&rows)?, weights)
    }
}

/// A set of k real-valued centers.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterSet {
    pub centers: Vec<Vec<f64>>,
}

impl CenterSet {
    pub fn k(&self) -> usize {
        self.centers.len()
    }
}

/// Squared Euclidean distance from a bit-packed binary row to a real center.
/// Uses `‖b − c‖² = ‖c‖² + Σ_{j: b_j = 1} (1 − 2 c_j)`.
#[inline]
fn dist2_to_center(row_words: &[u64], center: &[f64], center_sq: f64) -> f64 {
    let mut acc = center_sq;
    for (wi, &word) in row_words.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let j = wi * 64 + bits.trailing_zeros() as usize;
            acc += 1.0 - 2.0 * center[j];
            bits &= bits - 1;
        }
    }
    acc.max(0.0)
}

fn center_sq_norms(s: &CenterSet) -> Vec<f64> {
    s.centers.iter().map(|c| c.iter().map(|x| x * x).sum()).collect()
}

fn nearest_center(row_words: &[u64], s: &CenterSet, sq: &[f64]) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (c, center) in s.centers.iter().enumerate() {
        let d = dist2_to_center(row_words, center, sq[c]);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Weighted k-means cost: `Σ_i w_i · min_c ‖x_i − c‖²`.
pub fn kmeans_cost(x: &WeightedRows, s: &CenterSet) -> Result<f64> {
    if s.centers.is_empty() {
        return Err(Error::param("empty center set"));
    }
    if s.centers.iter().any(|c| c.len() != x.n_cols()) {
        return Err(Error::dim("center dimension mismatch"));
    }
    let sq = center_sq_norms(s);
    let mut total = 0.0;
    for i in 0..x.n_rows() {
        let (_, d) = nearest_center(x.rows.row_words(i), s, &sq);
        total += x.weights[i] as f64 * d;
    }
    Ok(total)
}

/// Lloyd's algorithm with weighted k-means++ seeding.
///
/// Ties in assignment go to the lowest center index; an empty cluster is
/// re-seeded from the point with the largest cost contribution. The cost
/// sequence is non-increasing (checked each iteration), and the run stops at
/// `max_iters` or when the assignment no longer changes.
pub fn kmeans_pp_lloyd(
    x: &WeightedRows,
    k: usize,
    max_iters: usize,
    rng: &mut impl Rng,
) -> Result<(CenterSet, Vec<usize>)> {
    let n = x.n_rows();
    if k == 0 || k > n {
        return Err(Error::param(format!("k={k} out of range for {n} rows")));
    }
    let mut centers = seed_pp(x, k, rng);

    let mut assignment = vec![0usize; n];
    let mut prev_cost = f64::INFINITY;
    for _ in 0..max_iters {
        let sq = center_sq_norms(&centers);
        let mut changed = false;
        let mut cost = 0.0;
        let mut contrib = vec![0.0f64; n];
        for i in 0..n {
            let (c, d) = nearest_center(x.rows.row_words(i), &centers, &sq);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
            contrib[i] = x.weights[i] as f64 * d;
            cost += contrib[i];
        }
        debug_assert!(cost <= prev_cost + 1e-6 * (1.0 + prev_cost.abs().min(1e12)));
        prev_cost = cost;
        if !changed {
            break;
        }

        // Weighted means per cluster.
        let d = x.n_cols();
        let mut sums = vec![vec![0.0f64; d]; k];
        let mut mass = vec![0.0f64; k];
        for i in 0..n {
            let c = assignment[i];
            let w = x.weights[i] as f64;
            mass[c] += w;
            for j in 0..d {
                if x.rows.get(i, j) {
                    sums[c][j] += w;
                }
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                for j in 0..d {
                    centers.centers[c][j] = sums[c][j] / mass[c];
                }
            } else {
                // Re-seed from the max-contribution point, lowest index on ties.
                let mut best = 0;
                for i in 1..n {
                    if contrib[i] > contrib[best] {
                        best = i;
                    }
                }
                centers.centers[c] = x.rows.row_to_vec(best).iter().map(|&b| b as f64).collect();
            }
        }
    }
    // Final assignment against the returned centers.
    let sq = center_sq_norms(&centers);
    for i in 0..n {
        assignment[i] = nearest_center(x.rows.row_words(i), &centers, &sq).0;
    }
    Ok((centers, assignment))
}

fn seed_pp(x: &WeightedRows, k: usize, rng: &mut impl Rng) -> CenterSet {
    let n = x.n_rows();
    let wdist = WeightedIndex::new(x.weights.iter().map(|&w| w as f64)).expect("positive weights");
    let first = wdist.sample(rng);
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = {
        let c: Vec<f64> = x.rows.row_to_vec(first).iter().map(|&b| b as f64).collect();
        let sq: f64 = c.iter().map(|v| v * v).sum();
        (0..n).map(|i| dist2_to_center(x.rows.row_words(i), &c, sq)).collect()
    };
    while chosen.len() < k {
        let scores: Vec<f64> = (0..n).map(|i| x.weights[i] as f64 * d2[i]).collect();
        let next = if scores.iter().sum::<f64>() > 0.0 {
            WeightedIndex::new(&scores).unwrap().sample(rng)
        } else {
            // All mass already covered (fewer distinct rows than k).
            wdist.sample(rng)
        };
        chosen.push(next);
        let c: Vec<f64> = x.rows.row_to_vec(next).iter().map(|&b| b as f64).collect();
        let sq: f64 = c.iter().map(|v| v * v).sum();
        for i in 0..n {
            let d = dist2_to_center(x.rows.row_words(i), &c, sq);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    CenterSet {
        centers: chosen
            .iter()
            .map(|&i| x.rows.row_to_vec(i).iter().map(|&b| b as f64).collect())
            .collect(),
    }
}

/// Default coreset size target `k³·ln²(k)/ε⁴` with all constants set to one.
pub fn coreset_target(k: usize, epsilon: f64) -> usize {
    let k = k.max(2) as f64;
    let t = k.powi(3) * k.ln().powi(2) / epsilon.powi(4);
    t.ceil().min(1e12) as usize
}

/// Strong-coreset construction via sensitivity sampling with the default size
/// target for the given `k` and `epsilon` (capped at `n`).
pub fn sensitivity_coreset(
    x: &WeightedRows,
    k: usize,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<WeightedRows> {
    sensitivity_coreset_with_target(x, k, epsilon, coreset_target(k, epsilon), rng)
}

/// Sensitivity sampling with an explicit size target.
///
/// Importance scores come from a bicriteria k-means++ solution; each sampled
/// point gets the integer-rounded inverse-probability weight (minimum 1).
/// Inputs that already fit in the target are returned unchanged without
/// consuming randomness, so degenerate streaming/distributed configurations
/// replay the offline path exactly.
pub fn sensitivity_coreset_with_target(
    x: &WeightedRows,
    k: usize,
    epsilon: f64,
    target: usize,
    rng: &mut impl Rng,
) -> Result<WeightedRows> {
    let (indices, weights) = sensitivity_sample_indices(x, k, epsilon, target, rng)?;
    WeightedRows::new(x.rows.select_rows(&indices), weights)
}

/// Index-level form of [`sensitivity_coreset_with_target`]: returns the
/// sampled row indices of `x` (ascending, duplicates merged) and their
/// integer weights.
pub fn sensitivity_sample_indices(
    x: &WeightedRows,
    k: usize,
    epsilon: f64,
    target: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, Vec<u64>)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("epsilon={epsilon} must be in (0,1)")));
    }
    if target == 0 {
        return Err(Error::param("coreset target must be positive"));
    }
    let n = x.n_rows();
    if n <= target {
        return Ok(((0..n).collect(), x.weights.clone()));
    }

    // Combine duplicate rows; `first_at[u]` is the original index of the
    // first occurrence of unique row `u`.
    let (uniq, _, map) = crate::binmat::distinct_rows(&x.rows);
    let mut first_at = vec![usize::MAX; uniq.n_rows()];
    let mut combined = vec![0u64; uniq.n_rows()];
    for (i, &u) in map.iter().enumerate() {
        if first_at[u] == usize::MAX {
            first_at[u] = i;
        }
        combined[u] += x.weights[i];
    }
    let dedup = WeightedRows { rows: uniq, weights: combined };
    if dedup.n_rows() <= target {
        return Ok((first_at, dedup.weights));
    }

    let k_eff = k.min(dedup.n_rows()).max(1);
    let (centers, assignment) = kmeans_pp_lloyd(&dedup, k_eff, 2, rng)?;
    let sq = center_sq_norms(&centers);
    let nd = dedup.n_rows();
    let mut cost_i = vec![0.0f64; nd];
    let mut cluster_mass = vec![0.0f64; k_eff];
    for i in 0..nd {
        let d = dist2_to_center(dedup.rows.row_words(i), &centers.centers[assignment[i]], sq[assignment[i]]);
        cost_i[i] = dedup.weights[i] as f64 * d;
        cluster_mass[assignment[i]] += dedup.weights[i] as f64;
    }
    let total_cost: f64 = cost_i.iter().sum();
    let total_weight = dedup.total_weight() as f64;

    let probs: Vec<f64> = (0..nd)
        .map(|i| {
            if total_cost > 0.0 {
                0.5 * (cost_i[i] / total_cost)
                    + 0.5 * (dedup.weights[i] as f64 / (k_eff as f64 * cluster_mass[assignment[i]]))
            } else {
                dedup.weights[i] as f64 / total_weight
            }
        })
        .collect();

    let (dedup_idx, weights) = sample_indices(&dedup, &probs, target, rng)?;
    Ok((dedup_idx.into_iter().map(|u| first_at[u]).collect(), weights))
}

/// Lightweight coreset: importance sampling proportional to
/// `1/(2n) + d²(x, mean)/(2·Σ d²)`, with inverse-probability integer weights.
pub fn lightweight_coreset(x: &WeightedRows, m: usize, rng: &mut impl Rng) -> Result<WeightedRows> {
    if m == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    let n = x.n_rows();
    if m > n {
        return Ok(x.clone());
    }
    let d = x.n_cols();
    let total_weight = x.total_weight() as f64;
    let mut mean = vec![0.0f64; d];
    for i in 0..n {
        let w = x.weights[i] as f64;
        for j in 0..d {
            if x.rows.get(i, j) {
                mean[j] += w;
            }
        }
    }
    for v in &mut mean {
        *v /= total_weight;
    }
    let mean_sq: f64 = mean.iter().map(|v| v * v).sum();
    let d2: Vec<f64> = (0..n)
        .map(|i| dist2_to_center(x.rows.row_words(i), &mean, mean_sq))
        .collect();
    let total_spread: f64 = (0..n).map(|i| x.weights[i] as f64 * d2[i]).sum();
    let probs: Vec<f64> = (0..n)
        .map(|i| {
            let w = x.weights[i] as f64;
            if total_spread > 0.0 {
                0.5 * w / total_weight + 0.5 * w * d2[i] / total_spread
            } else {
                w / total_weight
            }
        })
        .collect();
    sample_weighted(x, &probs, m, rng)
}

/// Draws `m` i.i.d. samples from `probs` and returns the distinct sampled
/// indices with weights `round(count·w_i/(m·p_i))`, clamped to at least 1.
fn sample_indices(
    x: &WeightedRows,
    probs: &[f64],
    m: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, Vec<u64>)> {
    let dist = WeightedIndex::new(probs)
        .map_err(|e| Error::param(format!("bad sampling distribution: {e}")))?;
    let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for _ in 0..m {
        *counts.entry(dist.sample(rng)).or_insert(0) += 1;
    }
    let total_p: f64 = probs.iter().sum();
    let indices: Vec<usize> = counts.keys().copied().collect();
    let weights: Vec<u64> = counts
        .iter()
        .map(|(&i, &c)| {
            let p = probs[i] / total_p;
            let w = (c as f64) * (x.weights[i] as f64) / (m as f64 * p);
            (w.round() as u64).max(1)
        })
        .collect();
    Ok((indices, weights))
}

fn sample_weighted(
    x: &WeightedRows,
    probs: &[f64],
    m: usize,
    rng: &mut impl Rng,
) -> Result<WeightedRows> {
    let (indices, weights) = sample_indices(x, probs, m, rng)?;
    WeightedRows::new(x.rows.select_rows(&indices), weights)
}

/// Space accounting for [`merge_reduce_stream`].
#[derive(Clone, Copy, Debug, Default)]
pub struct MergeReduceStats {
    /// Largest number of rows held at any point (buffer plus tree nodes).
    pub peak_rows: usize,
    pub rows_seen: usize,
}

/// One-pass streaming coreset via merge-and-reduce.
///
/// Rows are buffered in blocks of `block`; full blocks become level-0 tree
/// nodes and two nodes of equal level are merged and reduced (sensitivity
/// sampling back to `block` rows) into the next level. Every reduction uses
/// the tightened accuracy `ε' = ε / (⌈log₂(n/block)⌉ + 1)`. The result is the
/// concatenation of all surviving nodes; peak memory is `O(block · log n)`
/// rows.
///
/// `n_total` is the announced stream length, used only to set `ε'`.
pub fn merge_reduce_stream<I>(
    rows: I,
    n_cols: usize,
    n_total: usize,
    k: usize,
    epsilon: f64,
    block: usize,
    rng: &mut impl Rng,
) -> Result<(WeightedRows, MergeReduceStats)>
where
    I: IntoIterator<Item = Vec<u8>>,
{
    if block == 0 {
        return Err(Error::param("block size must be positive"));
    }
    let levels = if n_total <= block {
        1
    } else {
        (n_total as f64 / block as f64).log2().ceil() as usize + 1
    };
    let eps_node = epsilon / levels as f64;

    let mut stats = MergeReduceStats::default();
    // tree[level] holds at most one pending coreset per level
    let mut tree: Vec<Option<WeightedRows>> = Vec::new();
    let mut buffer: Vec<Vec<u8>> = Vec::new();

    // `extra` covers rows held outside the tree: the arrival buffer, or a
    // merged pair mid-reduction.
    let mut track_peak = |extra: usize, tree: &[Option<WeightedRows>], stats: &mut MergeReduceStats| {
        let held: usize = extra + tree.iter().flatten().map(|c| c.n_rows()).sum::<usize>();
        stats.peak_rows = stats.peak_rows.max(held);
    };

    for row in rows {
        if row.len() != n_cols {
            return Err(Error::dim(format!(
                "stream row has {} entries, expected {n_cols}",
                row.len()
            )));
        }
        buffer.push(row);
        stats.rows_seen += 1;
        track_peak(buffer.len(), &tree, &mut stats);
        if buffer.len() == block {
            let leaf = WeightedRows::unit(BinMatrix::from_rows(&buffer)?);
            buffer.clear();
            push_node(&mut tree, leaf, k, eps_node, block, rng, &mut stats, &mut track_peak)?;
        }
    }
    if !buffer.is_empty() {
        let leaf = WeightedRows::unit(BinMatrix::from_rows(&buffer)?);
        buffer.clear();
        push_node(&mut tree, leaf, k, eps_node, block, rng, &mut stats, &mut track_peak)?;
    }

    let pending: Vec<&WeightedRows> = tree.iter().flatten().collect();
    let merged = if pending.is_empty() {
        WeightedRows::unit(BinMatrix::zeros(0, n_cols))
    } else {
        WeightedRows::concat(&pending)?
    };
    Ok((merged, stats))
}

#[allow(clippy::too_many_arguments)]
fn push_node(
    tree: &mut Vec<Option<WeightedRows>>,
    node: WeightedRows,
    k: usize,
    eps_node: f64,
    block: usize,
    rng: &mut impl Rng,
    stats: &mut MergeReduceStats,
    track_peak: &mut impl FnMut(usize, &[Option<WeightedRows>], &mut MergeReduceStats),
) -> Result<()> {
    let mut carry = node;
    let mut level = 0;
    loop {
        if tree.len() <= level {
            tree.push(None);
        }
        match tree[level].take() {
            None => {
                tree[level] = Some(carry);
                break;
            }
            Some(existing) => {
                let merged = WeightedRows::concat(&[&existing, &carry])?;
                track_peak(merged.n_rows(), tree, stats);
                carry = sensitivity_coreset_with_target(&merged, k, eps_node, block, rng)?;
                level += 1;
            }
        }
    }
    track_peak(0, tree, stats);
    Ok(())
}
