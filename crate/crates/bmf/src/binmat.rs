//! Bit-packed binary matrices, the three semiring products, and entrywise
//! loss functions.
//!
//! Rows are packed into `u64` words so that the inner-product kernels used by
//! the `2^k` enumeration loops reduce to AND/XOR plus popcount. Loss values
//! are always the *power* form (squared Frobenius, p-th power `L_p`), which is
//! an exact integer for binary/integer inputs; roots are taken only at the
//! reporting layer.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::{Error, Result};

const WORD_BITS: usize = 64;

/// A dense binary matrix with bit-packed rows.
///
/// Invariants: every entry is 0 or 1 by construction, and padding bits beyond
/// `n_cols` in the last word of each row are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinMatrix {
    n_rows: usize,
    n_cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BinMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        let words_per_row = n_cols.div_ceil(WORD_BITS).max(1);
        BinMatrix {
            n_rows,
            n_cols,
            words_per_row,
            bits: vec![0; n_rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from dense 0/1 entries, one inner slice per row.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::dim(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    r.len()
                )));
            }
        }
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &e) in r.iter().enumerate() {
                match e {
                    0 => {}
                    1 => m.set(i, j, true),
                    other => {
                        return Err(Error::param(format!(
                            "entry ({i},{j}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        let w = self.bits[i * self.words_per_row + j / WORD_BITS];
        (w >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        let w = &mut self.bits[i * self.words_per_row + j / WORD_BITS];
        if value {
            *w |= 1u64 << (j % WORD_BITS);
        } else {
            *w &= !(1u64 << (j % WORD_BITS));
        }
    }

    /// The packed words of row `i`.
    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn row_to_vec(&self, i: usize) -> Vec<u8> {
        (0..self.n_cols).map(|j| self.get(i, j) as u8).collect()
    }

    pub fn rows_as_vecs(&self) -> Vec<Vec<u8>> {
        (0..self.n_rows).map(|i| self.row_to_vec(i)).collect()
    }

    /// Copies row `src` of `other` into row `dst` of `self`.
    pub fn copy_row_from(&mut self, dst: usize, other: &BinMatrix, src: usize) {
        debug_assert_eq!(self.n_cols, other.n_cols);
        let start = dst * self.words_per_row;
        self.bits[start..start + self.words_per_row].copy_from_slice(other.row_words(src));
    }

    pub fn transpose(&self) -> BinMatrix {
        let mut t = BinMatrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Stacks matrices vertically. All inputs must share `n_cols`.
    pub fn vstack(parts: &[&BinMatrix]) -> Result<BinMatrix> {
        let n_cols = parts.first().map_or(0, |m| m.n_cols);
        if parts.iter().any(|m| m.n_cols != n_cols) {
            return Err(Error::dim("vstack requires equal column counts"));
        }
        let n_rows = parts.iter().map(|m| m.n_rows).sum();
        let mut out = BinMatrix::zeros(n_rows, n_cols);
        let mut r = 0;
        for m in parts {
            for i in 0..m.n_rows {
                out.copy_row_from(r, m, i);
                r += 1;
            }
        }
        Ok(out)
    }

    /// Selects the given rows (duplicates allowed) into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> BinMatrix {
        let mut out = BinMatrix::zeros(indices.len(), self.n_cols);
        for (r, &i) in indices.iter().enumerate() {
            out.copy_row_from(r, self, i);
        }
        out
    }

    /// Selects the given columns into a new matrix.
    pub fn select_cols(&self, indices: &[usize]) -> BinMatrix {
        let mut out = BinMatrix::zeros(self.n_rows, indices.len());
        for i in 0..self.n_rows {
            for (c, &j) in indices.iter().enumerate() {
                if self.get(i, j) {
                    out.set(i, c, true);
                }
            }
        }
        out
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Rank over GF(2), by row elimination on a scratch copy.
    pub fn gf2_rank(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = (0..self.n_rows).map(|i| self.row_words(i).to_vec()).collect();
        let mut rank = 0;
        for col in 0..self.n_cols {
            let word = col / WORD_BITS;
            let mask = 1u64 << (col % WORD_BITS);
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][word] & mask != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[word] & mask != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.n_rows {
            let line: Vec<&str> = (0..self.n_cols)
                .map(|j| if self.get(i, j) { "1" } else { "0" })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads the 0/1 CSV format: one row per line, comma-separated entries,
    /// lines starting with '#' skipped.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let row: Vec<u8> = trimmed
                .split(',')
                .map(|tok| match tok.trim() {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Parse(format!(
                        "line {}: entry {other:?} is not 0/1",
                        lineno + 1
                    ))),
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(f)
    }
}

impl fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinMatrix {}x{}", self.n_rows, self.n_cols)?;
        for i in 0..self.n_rows.min(16) {
            let row: String = (0..self.n_cols)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        if self.n_rows > 16 {
            writeln!(f, "  ...")?;
        }
        Ok(())
    }
}

/// A small-integer matrix; the type of `U·V` over the integer semiring
/// (entries in `0..=k` where `k = U.n_cols`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<u32>,
}

impl IntMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        IntMatrix {
            n_rows,
            n_cols,
            entries: vec![0; n_rows * n_cols],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.entries[i * self.n_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.entries[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn from_bin(b: &BinMatrix) -> Self {
        let mut m = Self::zeros(b.n_rows(), b.n_cols());
        for i in 0..b.n_rows() {
            for j in 0..b.n_cols() {
                if b.get(i, j) {
                    m.set(i, j, 1);
                }
            }
        }
        m
    }
}

/// The accumulate/multiply structure used by the matrix product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semiring {
    /// Standard integer product; entries of `U·V` lie in `0..=k`.
    Integer,
    /// OR over AND terms.
    Boolean,
    /// XOR over AND terms (arithmetic modulo two).
    Gf2,
}

impl Semiring {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "integer" | "int" => Ok(Semiring::Integer),
            "boolean" | "bool" | "or" => Ok(Semiring::Boolean),
            "gf2" | "f2" | "xor" => Ok(Semiring::Gf2),
            other => Err(Error::param(format!("unknown semiring {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Semiring::Integer => "integer",
            Semiring::Boolean => "boolean",
            Semiring::Gf2 => "gf2",
        }
    }
}

/// Entrywise loss selector. Values are always the power form: `Frobenius`
/// reports the *squared* Frobenius norm and `Lp(p)` the p-th power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossSpec {
    Frobenius,
    Lp(f64),
    L0,
}

impl LossSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frobenius" | "fro" | "f" => Ok(LossSpec::Frobenius),
            "l0" => Ok(LossSpec::L0),
            other => {
                if let Some(p) = other.strip_prefix("l") {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::param(format!("unknown loss {s:?}")))?;
                    LossSpec::Lp(p).validate()?;
                    Ok(LossSpec::Lp(p))
                } else {
                    Err(Error::param(format!("unknown loss {s:?}")))
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let LossSpec::Lp(p) = self {
            if !p.is_finite() || *p < 1.0 {
                return Err(Error::param(format!("p must be >= 1, got {p}")));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            LossSpec::Frobenius => "frobenius".into(),
            LossSpec::Lp(p) => format!("l{p}"),
            LossSpec::L0 => "l0".into(),
        }
    }

    /// `|diff|^p` for this loss, exact for the small integers that arise here.
    #[inline]
    pub fn pow(&self, diff: f64) -> f64 {
        let a = diff.abs();
        match self {
            LossSpec::Frobenius => a * a,
            LossSpec::L0 => {
                if a != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LossSpec::Lp(p) => {
                if p.fract() == 0.0 && *p <= 32.0 {
                    a.powi(*p as i32)
                } else {
                    a.powf(*p)
                }
            }
        }
    }

    /// Root reported at the presentation layer: `sqrt` for Frobenius and
    /// `L_0` counts (Frobenius-norm parity on binary differences), `x^(1/p)`
    /// for `L_p`.
    pub fn root(&self, power_value: f64) -> f64 {
        match self {
            LossSpec::Frobenius | LossSpec::L0 => power_value.sqrt(),
            LossSpec::Lp(p) => power_value.powf(1.0 / p),
        }
    }
}

/// Result of [`product`]: binary for Boolean/GF(2), small-integer otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum ProductMatrix {
    Int(IntMatrix),
    Bin(BinMatrix),
}

impl ProductMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            ProductMatrix::Int(m) => (m.n_rows, m.n_cols),
            ProductMatrix::Bin(m) => (m.n_rows(), m.n_cols()),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        match self {
            ProductMatrix::Int(m) => m.get(i, j),
            ProductMatrix::Bin(m) => m.get(i, j) as u32,
        }
    }
}

/// Semiring matrix product. Entry `(i,j)` is the semiring inner product of
/// row `i` of `u` and column `j` of `v`; since factors are binary, all three
/// cases reduce to the popcount of the AND of packed words.
pub fn product(u: &BinMatrix, v: &BinMatrix, semiring: Semiring) -> Result<ProductMatrix> {
    if u.n_cols() != v.n_rows() {
        return Err(Error::dim(format!(
            "product: U is {}x{} but V is {}x{}",
            u.n_rows(),
            u.n_cols(),
            v.n_rows(),
            v.n_cols()
        )));
    }
    let vt = v.transpose();
    let (n, d) = (u.n_rows(), v.n_cols());
    match semiring {
        Semiring::Integer => {
            let mut out = IntMatrix::zeros(n, d);
            for i in 0..n {
                let uw = u.row_words(i);
                for j in 0..d {
                    out.set(i, j, popcount_and(uw, vt.row_words(j)));
                }
            }
            Ok(ProductMatrix::Int(out))
        }
        Semiring::Boolean => {
            let mut out = BinMatrix::zeros(n, d);
            for i in 0..n {
                let uw = u.row_words(i);
                for j in 0..d {
                    if popcount_and(uw, vt.row_words(j)) > 0 {
                        out.set(i, j, true);
                    }
                }
            }
            Ok(ProductMatrix::Bin(out))
        }
        Semiring::Gf2 => {
            let mut out = BinMatrix::zeros(n, d);
            for i in 0..n {
                let uw = u.row_words(i);
                for j in 0..d {
                    if popcount_and(uw, vt.row_words(j)) & 1 == 1 {
                        out.set(i, j, true);
                    }
                }
            }
            Ok(ProductMatrix::Bin(out))
        }
    }
}

#[inline]
pub(crate) fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

#[inline]
pub(crate) fn hamming(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Entrywise loss between a binary matrix and a product matrix, in power form
/// (`Σ |A_ij − M_ij|^p`). For a binary `M` every spec coincides with the
/// mismatch count.
pub fn loss(a: &BinMatrix, m: &ProductMatrix, spec: LossSpec) -> Result<f64> {
    loss_weighted(a, m, spec, None)
}

/// Like [`loss`] but with an optional positive weight per row of `a`.
pub fn loss_weighted(
    a: &BinMatrix,
    m: &ProductMatrix,
    spec: LossSpec,
    row_weights: Option<&[u64]>,
) -> Result<f64> {
    spec.validate()?;
    if m.shape() != (a.n_rows(), a.n_cols()) {
        return Err(Error::dim(format!(
            "loss: A is {}x{} but M is {:?}",
            a.n_rows(),
            a.n_cols(),
            m.shape()
        )));
    }
    if let Some(w) = row_weights {
        if w.len() != a.n_rows() {
            return Err(Error::dim("loss: weight count != row count"));
        }
    }
    let mut total = 0.0;
    for i in 0..a.n_rows() {
        let w = row_weights.map_or(1.0, |w| w[i] as f64);
        let row_loss = match m {
            // Binary product: the differences are 0/1, so every loss spec is
            // the Hamming distance.
            ProductMatrix::Bin(b) => hamming(a.row_words(i), b.row_words(i)) as f64,
            ProductMatrix::Int(im) => {
                let mut acc = 0.0;
                for j in 0..a.n_cols() {
                    let diff = a.get(i, j) as u8 as f64 - im.get(i, j) as f64;
                    acc += spec.pow(diff);
                }
                acc
            }
        };
        total += w * row_loss;
    }
    Ok(total)
}

/// Deduplicates rows. Returns the unique rows in first-occurrence order, the
/// multiplicity of each unique row, and for each original row the index of
/// its unique representative.
pub fn distinct_rows(a: &BinMatrix) -> (BinMatrix, Vec<u64>, Vec<usize>) {
    use std::collections::HashMap;
    let mut first: HashMap<&[u64], usize> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut multiplicity: Vec<u64> = Vec::new();
    let mut index_map = Vec::with_capacity(a.n_rows());
    for i in 0..a.n_rows() {
        let key = a.row_words(i);
        if let Some(&u) = first.get(key) {
            multiplicity[u] += 1;
            index_map.push(u);
        } else {
            let u = order.len();
            first.insert(key, u);
            order.push(i);
            multiplicity.push(1);
            index_map.push(u);
        }
    }
    (a.select_rows(&order), multiplicity, index_map)
}
