//! Leverage-score computation, the sampling-and-rescaling sketch operator,
//! and the L0 nonzero-row sampler.
//!
//! A sketch is stored as its D·T decomposition: the list of sampled source
//! rows and one positive scale per sampled row. Sampling is i.i.d. with
//! replacement. All estimators here are unbiased by construction; the
//! embedding quality is checked statistically in tests, not certified per
//! draw.

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::binmat::{BinMatrix, IntMatrix};
use crate::{Error, Result};

/// Row leverage scores `ℓ_i = a_i (AᵀA)⁺ a_iᵀ`, each in `[0,1]`, summing to the
/// column rank of the matrix.
#[derive(Clone, Debug)]
pub struct LeverageScores {
    pub scores: Vec<f64>,
}

impl LeverageScores {
    pub fn sum(&self) -> f64 {
        self.scores.iter().sum()
    }
}

/// Leverage scores via a thin SVD (`ℓ_i = ‖U_i‖²` over the nonzero spectrum),
/// which handles rank deficiency without forming a pseudoinverse explicitly.
pub fn leverage_scores(a: &DMatrix<f64>) -> LeverageScores {
    let n = a.nrows();
    if n == 0 || a.ncols() == 0 {
        return LeverageScores { scores: vec![0.0; n] };
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = smax * (a.nrows().max(a.ncols()) as f64) * f64::EPSILON;
    let scores = (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (j, &sv) in svd.singular_values.iter().enumerate() {
                if sv > tol {
                    s += u[(i, j)] * u[(i, j)];
                }
            }
            s.min(1.0)
        })
        .collect();
    LeverageScores { scores }
}

pub fn leverage_scores_binary(a: &BinMatrix) -> LeverageScores {
    leverage_scores(&bin_to_real(a))
}

/// Leverage mass of weighted rows: score `i` is `w_i` times the per-copy
/// leverage score in the matrix where row `i` is duplicated `w_i` times.
/// Computed by scaling each distinct row by `√w_i`.
pub fn leverage_scores_weighted(a: &DMatrix<f64>, weights: &[u64]) -> LeverageScores {
    let mut scaled = a.clone();
    for i in 0..a.nrows() {
        let s = (weights[i] as f64).sqrt();
        for j in 0..a.ncols() {
            scaled[(i, j)] *= s;
        }
    }
    let mut lev = leverage_scores(&scaled);
    // entries may exceed 1 here: they are group masses, not single-row scores
    for (v, &w) in lev.scores.iter_mut().zip(weights) {
        *v = v.min(w as f64);
    }
    lev
}

pub fn bin_to_real(a: &BinMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.n_rows(), a.n_cols(), |i, j| a.get(i, j) as u8 as f64)
}

/// A sampling-and-rescaling operator: sketch row `j` is
/// `scales[j] · (source row indices[j])`.
///
/// `nominal_rows` is the declared sketch height `m`; the L0 sampler may draw
/// zero-padding slots, which are omitted from `indices` since they contribute
/// an identically-zero row for every input.
#[derive(Clone, Debug)]
pub struct RowSketch {
    pub indices: Vec<usize>,
    pub scales: Vec<f64>,
    pub nominal_rows: usize,
}

impl RowSketch {
    /// Identity-like sketch containing every row once with unit scale.
    pub fn all_rows(n: usize) -> Self {
        RowSketch {
            indices: (0..n).collect(),
            scales: vec![1.0; n],
            nominal_rows: n,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn apply_real(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.len(), m.ncols());
        for (r, (&i, &s)) in self.indices.iter().zip(&self.scales).enumerate() {
            for j in 0..m.ncols() {
                out[(r, j)] = s * m[(i, j)];
            }
        }
        out
    }

    pub fn apply_binary(&self, m: &BinMatrix) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.len(), m.n_cols());
        for (r, (&i, &s)) in self.indices.iter().zip(&self.scales).enumerate() {
            for j in 0..m.n_cols() {
                if m.get(i, j) {
                    out[(r, j)] = s;
                }
            }
        }
        out
    }

    /// `‖S·M‖_p^p` for an integer matrix, i.e. `Σ_j scales[j]^p · ‖M_{T_j}‖_p^p`.
    pub fn lp_norm_int(&self, m: &IntMatrix, p: f64) -> f64 {
        let spec = crate::binmat::LossSpec::Lp(p);
        self.indices
            .iter()
            .zip(&self.scales)
            .map(|(&i, &s)| {
                let row_norm: f64 = m.row(i).iter().map(|&e| spec.pow(e as f64)).sum();
                s.powf(p) * row_norm
            })
            .sum()
    }
}

/// Probability floor: rows whose boosted score falls below `1/n²` are never
/// sampled, matching the weight grid used by the guess-enumeration solver.
fn apply_floor(raw: &mut [f64]) {
    let n = raw.len() as f64;
    let floor = 1.0 / (n * n);
    for v in raw.iter_mut() {
        if *v < floor {
            *v = 0.0;
        }
    }
}

/// Draws an `m`-row leverage-score sampling sketch.
///
/// Each sketch row independently selects source row `j` with probability
/// proportional to `min(1, boost · ℓ_j)` and is rescaled by `1/√(m·p_j)`
/// where `p_j` is the realized selection probability. `boost` stands for the
/// `C·log k/ε²` factor (C defaults to 1 at the call sites).
pub fn leverage_sample(
    scores: &LeverageScores,
    m: usize,
    boost: f64,
    rng: &mut impl Rng,
) -> Result<RowSketch> {
    if m == 0 {
        return Err(Error::param("sketch must have at least one row"));
    }
    let mut raw: Vec<f64> = scores.scores.iter().map(|&l| (boost * l).min(1.0)).collect();
    apply_floor(&mut raw);
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::param("all leverage scores are zero"));
    }
    let dist = WeightedIndex::new(&raw).map_err(|e| Error::param(e.to_string()))?;
    let mut indices = Vec::with_capacity(m);
    let mut scales = Vec::with_capacity(m);
    for _ in 0..m {
        let j = dist.sample(rng);
        let p = raw[j] / total;
        indices.push(j);
        scales.push(1.0 / (m as f64 * p).sqrt());
    }
    Ok(RowSketch { indices, scales, nominal_rows: m })
}

/// Helper for the standard boost factor `c · ln(max(k,2)) / ε²`.
pub fn leverage_boost(k: usize, epsilon: f64, c: f64) -> f64 {
    c * (k.max(2) as f64).ln() / (epsilon * epsilon)
}

/// Unbiased estimate of `‖M‖_p^p` by sampling random nonzero rows.
///
/// The nonzero-row count is padded up to the next power of two `2^i`; each
/// draw picks a uniform slot, returning `2^i · ‖row‖_p^p` for real slots and
/// 0 for padding slots, and the mean over `draws` is returned.
pub fn l0_row_estimate(m: &IntMatrix, p: f64, draws: usize, rng: &mut impl Rng) -> f64 {
    let spec = crate::binmat::LossSpec::Lp(p);
    let nonzero: Vec<usize> = (0..m.n_rows)
        .filter(|&i| m.row(i).iter().any(|&e| e != 0))
        .collect();
    if nonzero.is_empty() || draws == 0 {
        return 0.0;
    }
    let pow2 = nonzero.len().next_power_of_two();
    let row_norms: Vec<f64> = nonzero
        .iter()
        .map(|&i| m.row(i).iter().map(|&e| spec.pow(e as f64)).sum())
        .collect();
    let mut acc = 0.0;
    for _ in 0..draws {
        let slot = rng.gen_range(0..pow2);
        if slot < nonzero.len() {
            acc += pow2 as f64 * row_norms[slot];
        }
    }
    acc / draws as f64
}

/// Sketch height `⌈k^{p+1} · log₂(max(r,2)) / ε²⌉` used by [`l0_affine_sketch`].
pub fn l0_sketch_rows(k: usize, r: usize, epsilon: f64, p: f64) -> usize {
    let m = (k.max(1) as f64).powf(p + 1.0) * (r.max(2) as f64).log2() / (epsilon * epsilon);
    m.ceil().max(1.0) as usize
}

/// L0 sampling sketch for residuals `Acand·X − B` over all binary `X`.
///
/// Rows where both `acand` and `b` are zero are zero in every residual, so
/// sampling is restricted to the complement, padded up to a power of two.
/// Scales are `(2^i/m)^{1/p}` so that `‖S·R‖_p^p` is the mean of the
/// unbiased row estimators. When the sketch height reaches `n` the exact
/// all-rows sketch is returned.
pub fn l0_affine_sketch(
    acand: &BinMatrix,
    b: &BinMatrix,
    epsilon: f64,
    p: f64,
    rng: &mut impl Rng,
) -> Result<RowSketch> {
    if acand.n_rows() != b.n_rows() {
        return Err(Error::dim("row counts differ"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("epsilon={epsilon} must be in (0,1)")));
    }
    let n = acand.n_rows();
    let m = l0_sketch_rows(acand.n_cols(), b.n_cols(), epsilon, p);
    if n <= m {
        return Ok(RowSketch::all_rows(n));
    }
    let support: Vec<usize> = (0..n)
        .filter(|&i| {
            acand.row_words(i).iter().any(|&w| w != 0) || b.row_words(i).iter().any(|&w| w != 0)
        })
        .collect();
    if support.is_empty() {
        return Ok(RowSketch { indices: vec![], scales: vec![], nominal_rows: m });
    }
    let pow2 = support.len().next_power_of_two();
    let scale = (pow2 as f64 / m as f64).powf(1.0 / p);
    let mut indices = Vec::new();
    let mut scales = Vec::new();
    for _ in 0..m {
        let slot = rng.gen_range(0..pow2);
        if slot < support.len() {
            indices.push(support[slot]);
            scales.push(scale);
        }
    }
    Ok(RowSketch { indices, scales, nominal_rows: m })
}
