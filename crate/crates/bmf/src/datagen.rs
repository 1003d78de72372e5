//! Synthetic dataset generators (dense Bernoulli, planted low-rank over
//! GF(2), and the noisy variant) plus a thresholding loader for numeric CSV
//! data. All generators are bit-reproducible from their spec and seed.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binmat::{product, BinMatrix, ProductMatrix, Semiring};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Bernoulli,
    LowRank,
    Noisy,
}

impl SynthKind {
    pub fn name(&self) -> &'static str {
        match self {
            SynthKind::Bernoulli => "bernoulli",
            SynthKind::LowRank => "lowrank",
            SynthKind::Noisy => "noisy",
        }
    }
}

/// Parameters of one synthetic dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n: usize,
    pub d: usize,
    /// Entry density (Bernoulli) or factor density (low-rank/noisy).
    pub p: f64,
    /// True rank for the low-rank and noisy kinds.
    pub r: usize,
    /// Bit-flip probability for the noisy kind.
    pub p_e: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::param(format!("density p={} must be in (0,1)", self.p)));
        }
        if !(0.0..1.0).contains(&self.p_e) {
            return Err(Error::param(format!(
                "flip probability p_e={} must be in [0,1)",
                self.p_e
            )));
        }
        if matches!(self.kind, SynthKind::LowRank | SynthKind::Noisy) && self.r > self.n.min(self.d)
        {
            return Err(Error::param(format!("rank r={} exceeds min(n,d)", self.r)));
        }
        if self.n == 0 || self.d == 0 {
            return Err(Error::param("n and d must be positive"));
        }
        Ok(())
    }

    /// `kind:n:d:p[:r[:pe]]`, e.g. `lowrank:250:50:0.5:5` or
    /// `noisy:250:50:0.5:10:0.01`.
    pub fn parse(text: &str, seed: u64) -> Result<SynthSpec> {
        let fields: Vec<&str> = text.split(':').collect();
        if fields.len() < 4 {
            return Err(Error::param(format!(
                "synth spec {text:?}: expected kind:n:d:p[:r[:pe]]"
            )));
        }
        let kind = match fields[0] {
            "bernoulli" | "full" => SynthKind::Bernoulli,
            "lowrank" | "lr" => SynthKind::LowRank,
            "noisy" => SynthKind::Noisy,
            other => return Err(Error::param(format!("unknown synth kind {other:?}"))),
        };
        let parse_num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::param(format!("synth spec: bad {what} {s:?}")))
        };
        let spec = SynthSpec {
            kind,
            n: parse_num(fields[1], "n")? as usize,
            d: parse_num(fields[2], "d")? as usize,
            p: parse_num(fields[3], "p")?,
            r: if fields.len() > 4 { parse_num(fields[4], "r")? as usize } else { 0 },
            p_e: if fields.len() > 5 { parse_num(fields[5], "pe")? } else { 0.0 },
            seed,
        };
        if matches!(kind, SynthKind::LowRank | SynthKind::Noisy) && spec.r == 0 {
            return Err(Error::param("synth spec: lowrank/noisy need a rank field"));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> SynthSpec {
        SynthSpec { seed, ..self.clone() }
    }

    /// Short form used in table rows and file names.
    pub fn label(&self) -> String {
        match self.kind {
            SynthKind::Bernoulli => format!("bernoulli:{}:{}:{}", self.n, self.d, self.p),
            SynthKind::LowRank => format!("lowrank:{}:{}:{}:{}", self.n, self.d, self.p, self.r),
            SynthKind::Noisy => {
                format!("noisy:{}:{}:{}:{}:{}", self.n, self.d, self.p, self.r, self.p_e)
            }
        }
    }

    /// One-line TSV manifest for reproducibility.
    pub fn write_manifest<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "kind\tn\td\tp\tr\tpe\tseed\n{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.kind.name(),
            self.n,
            self.d,
            self.p,
            self.r,
            self.p_e,
            self.seed
        )?;
        Ok(())
    }

    pub fn read_manifest<R: Read>(r: R) -> Result<SynthSpec> {
        let reader = BufReader::new(r);
        let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
        if lines.len() < 2 {
            return Err(Error::Parse("manifest needs a header and a value line".into()));
        }
        let vals: Vec<&str> = lines[1].split('\t').collect();
        if vals.len() != 7 {
            return Err(Error::Parse("manifest value line needs 7 fields".into()));
        }
        let seed: u64 = vals[6].parse().map_err(|_| Error::Parse("bad seed".into()))?;
        SynthSpec::parse(
            &format!("{}:{}:{}:{}:{}:{}", vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]),
            seed,
        )
    }

    pub fn generate(&self) -> Result<BinMatrix> {
        match self.kind {
            SynthKind::Bernoulli => gen_bernoulli(self),
            SynthKind::LowRank => gen_lowrank(self).map(|(a, _, _)| a),
            SynthKind::Noisy => gen_noisy(self),
        }
    }
}

/// I.i.d. Bernoulli(p) entries.
pub fn gen_bernoulli(spec: &SynthSpec) -> Result<BinMatrix> {
    spec.validate()?;
    let p = spec.p.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(BinMatrix::from_fn(spec.n, spec.d, |_, _| rng.gen_bool(p)))
}

/// Planted low-rank instance: Bernoulli(p) factors multiplied over GF(2).
/// Returns the product together with the witness factors.
pub fn gen_lowrank(spec: &SynthSpec) -> Result<(BinMatrix, BinMatrix, BinMatrix)> {
    spec.validate()?;
    let p = spec.p.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u0 = BinMatrix::from_fn(spec.n, spec.r, |_, _| rng.gen_bool(p));
    let v0 = BinMatrix::from_fn(spec.r, spec.d, |_, _| rng.gen_bool(p));
    let a = match product(&u0, &v0, Semiring::Gf2)? {
        ProductMatrix::Bin(b) => b,
        _ => unreachable!(),
    };
    Ok((a, u0, v0))
}

/// Low-rank instance with independent bit flips at rate `p_e`.
pub fn gen_noisy(spec: &SynthSpec) -> Result<BinMatrix> {
    let (clean, _, _) = gen_lowrank(spec)?;
    // flips drawn from a stream derived past the factor draws
    let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(spec.seed, 0x6e6f_6973_65, 0));
    let mut a = clean;
    for i in 0..spec.n {
        for j in 0..spec.d {
            if rng.gen_bool(spec.p_e) {
                let cur = a.get(i, j);
                a.set(i, j, !cur);
            }
        }
    }
    Ok(a)
}

/// Loads a rectangular numeric CSV ('#' comment lines allowed) and binarizes
/// it: entry = 1 iff value ≥ threshold. Binary inputs pass through unchanged
/// for any threshold in (0, 1].
pub fn load_binarized_csv(path: impl AsRef<Path>, threshold: f64) -> Result<BinMatrix> {
    let f = std::fs::File::open(path)?;
    binarize_csv(f, threshold)
}

pub fn binarize_csv<R: Read>(r: R, threshold: f64) -> Result<BinMatrix> {
    let reader = BufReader::new(r);
    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row: Vec<u8> = trimmed
            .split(',')
            .map(|tok| {
                let v: f64 = tok.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: non-numeric cell {tok:?}", lineno + 1))
                })?;
                Ok((v >= threshold) as u8)
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse(format!(
                    "line {}: ragged row ({} cells, expected {w})",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    BinMatrix::from_rows(&rows)
}
