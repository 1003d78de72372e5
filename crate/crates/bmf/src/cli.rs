//! Command-line front end: dataset generation, factorization runs, benchmark
//! tables, and the coreset-size study. All tables are TSV with fixed headers;
//! every run writes a manifest from which it can be reproduced bit for bit.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::binmat::{BinMatrix, LossSpec, Semiring};
use crate::clustering::{lightweight_coreset, sensitivity_coreset_with_target, WeightedRows};
use crate::datagen::{gen_lowrank, SynthKind, SynthSpec};
use crate::solvers::{
    brute_force_bmf, frobenius_coreset_solver_with, gf2_bicriteria_solver_with, kbmf, kbmf_plus,
    kbmf_plus_on_coreset, lp_bicriteria_solver_with, Factorization, FrobeniusConfig,
    FrobeniusMode, Gf2Config, LpConfig,
};
use crate::{derive_seed, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "bmf", about = "Binary matrix factorization toolkit", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset (matrix CSV plus manifest).
    Generate(GenerateArgs),
    /// Run one factorization and write U.csv/V.csv/meta.tsv.
    Factorize(FactorizeArgs),
    /// Run a datasets x algorithms x k benchmark grid.
    Bench(BenchArgs),
    /// Error-vs-coreset-size study for kBMF+.
    CoresetStudy(CoresetStudyArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Synthetic spec kind:n:d:p[:r[:pe]] (kinds: bernoulli|lowrank|noisy).
    #[arg(long)]
    synth: String,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct FactorizeArgs {
    /// Input matrix CSV (0/1 entries; use --threshold for numeric data).
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,
    /// Synthetic spec kind:n:d:p[:r[:pe]] instead of an input file.
    #[arg(long)]
    synth: Option<String>,
    /// Binarization threshold for numeric CSV input (entry = 1 iff >= t).
    #[arg(long)]
    threshold: Option<f64>,
    /// Algorithm: kbmf|kbmf-plus|frobenius|gf2|lp|brute.
    #[arg(long)]
    alg: String,
    #[arg(long)]
    k: usize,
    /// Accuracy parameter for the coreset solvers.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// p for the L_p loss (defaults to 1 for lp, Frobenius for brute).
    #[arg(long)]
    p_norm: Option<f64>,
    /// integer|boolean|gf2 (defaults to the algorithm's natural semiring).
    #[arg(long)]
    semiring: Option<String>,
    /// Frobenius solver mode: sampled|guess.
    #[arg(long, default_value = "sampled")]
    mode: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for U.csv/V.csv/meta.tsv/manifest.tsv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Synthetic specs (repeat or comma-separate).
    #[arg(long, value_delimiter = ',')]
    synth: Vec<String>,
    /// Input CSVs to include as datasets.
    #[arg(long)]
    input: Vec<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Algorithms, comma-separated.
    #[arg(long, value_delimiter = ',')]
    alg: Vec<String>,
    /// Rank values, comma-separated.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    p_norm: Option<f64>,
    #[arg(long)]
    semiring: Option<String>,
    #[arg(long, default_value = "sampled")]
    mode: String,
    /// Repetitions per cell (synthetic datasets are regenerated per rep).
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output TSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// TSV of externally published results to merge by (dataset, k).
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoresetStudyArgs {
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,
    #[arg(long)]
    synth: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    semiring: Option<String>,
    /// Relative coreset sizes r (coreset has ceil(r*n) rows).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<f64>,
    /// Coresets sampled per size.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Algorithm selector with its loss/semiring compatibility rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Kbmf,
    KbmfPlus,
    Frobenius,
    Gf2,
    Lp,
    Brute,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kbmf" => Ok(Algorithm::Kbmf),
            "kbmf-plus" | "kbmf+" | "kbmfplus" => Ok(Algorithm::KbmfPlus),
            "frobenius" => Ok(Algorithm::Frobenius),
            "gf2" => Ok(Algorithm::Gf2),
            "lp" => Ok(Algorithm::Lp),
            "brute" => Ok(Algorithm::Brute),
            other => Err(Error::param(format!("unknown algorithm {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Kbmf => "kbmf",
            Algorithm::KbmfPlus => "kbmf-plus",
            Algorithm::Frobenius => "frobenius",
            Algorithm::Gf2 => "gf2",
            Algorithm::Lp => "lp",
            Algorithm::Brute => "brute",
        }
    }

    /// Resolves the requested semiring against the algorithm's constraints.
    pub fn resolve_semiring(&self, requested: Option<Semiring>) -> Result<Semiring> {
        match self {
            Algorithm::Gf2 => match requested {
                None | Some(Semiring::Gf2) => Ok(Semiring::Gf2),
                Some(other) => Err(Error::param(format!(
                    "gf2 solver requires the gf2 semiring, not {}",
                    other.name()
                ))),
            },
            Algorithm::Frobenius | Algorithm::Lp => match requested {
                None | Some(Semiring::Integer) => Ok(Semiring::Integer),
                Some(other) => Err(Error::param(format!(
                    "{} solver requires the integer semiring, not {}",
                    self.name(),
                    other.name()
                ))),
            },
            _ => Ok(requested.unwrap_or(Semiring::Integer)),
        }
    }
}

/// A fully resolved run request.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub alg: Algorithm,
    pub k: usize,
    pub eps: f64,
    /// p for the L_p paths; `None` means L_p defaults to 1 and brute force
    /// to the Frobenius loss.
    pub p: Option<f64>,
    pub semiring: Semiring,
    pub mode: FrobeniusMode,
    pub seed: u64,
}

impl RunConfig {
    pub fn execute(&self, a: &BinMatrix) -> Result<Factorization> {
        match self.alg {
            Algorithm::Kbmf => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                kbmf(a, self.k, self.semiring, &mut rng)
            }
            Algorithm::KbmfPlus => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                kbmf_plus(a, self.k, self.semiring, &mut rng)
            }
            Algorithm::Frobenius => frobenius_coreset_solver_with(
                a,
                self.k,
                self.eps,
                self.mode,
                &FrobeniusConfig::default(),
                self.seed,
            ),
            Algorithm::Gf2 => {
                gf2_bicriteria_solver_with(a, self.k, self.eps, &Gf2Config::default(), self.seed)
            }
            Algorithm::Lp => lp_bicriteria_solver_with(
                a,
                self.k,
                self.p.unwrap_or(1.0),
                self.eps,
                &LpConfig::default(),
                self.seed,
            ),
            Algorithm::Brute => {
                let spec = match self.p {
                    None => LossSpec::Frobenius,
                    Some(p) if p == 2.0 => LossSpec::Frobenius,
                    Some(p) => LossSpec::Lp(p),
                };
                brute_force_bmf(a, self.k, spec, self.semiring)
            }
        }
    }
}

fn parse_mode(s: &str) -> Result<FrobeniusMode> {
    match s.to_ascii_lowercase().as_str() {
        "sampled" | "sketch-sampled" => Ok(FrobeniusMode::SketchSampled),
        "guess" | "guess-enumeration" => Ok(FrobeniusMode::GuessEnumeration),
        other => Err(Error::param(format!("unknown mode {other:?}"))),
    }
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("BMF_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

/// The loss root reported in tables: Frobenius-norm parity with the counts.
fn report_error(f: &Factorization) -> f64 {
    f.loss_spec.root(f.achieved_loss)
}

fn load_dataset(
    input: Option<&Path>,
    synth: Option<&str>,
    threshold: Option<f64>,
    seed: u64,
) -> Result<(String, BinMatrix)> {
    match (input, synth) {
        (Some(path), None) => {
            let a = match threshold {
                Some(t) => crate::datagen::load_binarized_csv(path, t)?,
                None => BinMatrix::from_csv_file(path)?,
            };
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok((label, a))
        }
        (None, Some(spec_text)) => {
            let spec = SynthSpec::parse(spec_text, seed)?;
            Ok((spec.label(), spec.generate()?))
        }
        _ => Err(Error::param("exactly one of --input/--synth is required")),
    }
}

fn write_manifest(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    for (key, value) in entries {
        writeln!(f, "{key}\t{value}")?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let spec = SynthSpec::parse(&args.synth, seed)?;
    std::fs::create_dir_all(&args.out)?;
    let a = spec.generate()?;
    a.to_csv_file(args.out.join("A.csv"))?;
    if matches!(spec.kind, SynthKind::LowRank) {
        let (_, u0, v0) = gen_lowrank(&spec)?;
        u0.to_csv_file(args.out.join("U0.csv"))?;
        v0.to_csv_file(args.out.join("V0.csv"))?;
    }
    let f = std::fs::File::create(args.out.join("manifest.tsv"))?;
    spec.write_manifest(f)?;
    println!("wrote {} ({} x {})", args.out.display(), a.n_rows(), a.n_cols());
    Ok(())
}

fn cmd_factorize(args: &FactorizeArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let alg = Algorithm::parse(&args.alg)?;
    let semiring =
        alg.resolve_semiring(args.semiring.as_deref().map(Semiring::parse).transpose()?)?;
    let cfg = RunConfig {
        alg,
        k: args.k,
        eps: args.eps,
        p: args.p_norm,
        semiring,
        mode: parse_mode(&args.mode)?,
        seed,
    };
    let (label, a) =
        load_dataset(args.input.as_deref(), args.synth.as_deref(), args.threshold, seed)?;

    let start = Instant::now();
    let fact = cfg.execute(&a)?;
    let time_ms = start.elapsed().as_secs_f64() * 1e3;

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        fact.save(dir, seed)?;
        write_manifest(
            &dir.join("manifest.tsv"),
            &[
                ("command", "factorize".into()),
                ("dataset", label.clone()),
                ("alg", alg.name().into()),
                ("k", args.k.to_string()),
                ("eps", args.eps.to_string()),
                ("p_norm", args.p_norm.map_or("default".into(), |p| p.to_string())),
                ("semiring", semiring.name().into()),
                ("mode", args.mode.clone()),
                ("seed", seed.to_string()),
            ],
        )?;
    }
    println!("dataset\talg\tk\terror\ttime_ms");
    println!(
        "{label}\t{}\t{}\t{:.4}\t{:.3}",
        alg.name(),
        args.k,
        report_error(&fact),
        time_ms
    );
    Ok(())
}

/// Seed used for repetition `rep` of a bench cell; exposed so aggregation
/// can be replicated exactly in tests.
pub fn bench_rep_seed(
    master: u64,
    dataset_idx: usize,
    k: usize,
    alg_idx: usize,
    reps: usize,
    rep: usize,
) -> u64 {
    derive_seed(
        master,
        0xbe5c ^ (dataset_idx as u64).wrapping_mul(1009) ^ (k as u64) << 20,
        (alg_idx * reps + rep) as u64,
    )
}

/// Seed for the synthetic dataset regenerated on repetition `rep`.
pub fn bench_data_seed(master: u64, dataset_idx: usize, rep: usize) -> u64 {
    derive_seed(master, 0xda7a ^ dataset_idx as u64, rep as u64)
}

enum BenchDataset {
    /// Regenerated with a fresh seed on every repetition.
    Synth(String),
    File(String, BinMatrix),
}

impl BenchDataset {
    fn label(&self) -> String {
        match self {
            BenchDataset::Synth(text) => text.clone(),
            BenchDataset::File(label, _) => label.clone(),
        }
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<String> {
    let seed = resolve_seed(args.seed);
    if args.alg.is_empty() || args.k.is_empty() {
        return Err(Error::param("bench needs --alg and --k"));
    }
    if args.synth.is_empty() && args.input.is_empty() {
        return Err(Error::param("bench needs at least one --synth or --input dataset"));
    }
    let algs: Vec<Algorithm> =
        args.alg.iter().map(|s| Algorithm::parse(s)).collect::<Result<_>>()?;
    let mode = parse_mode(&args.mode)?;
    let requested_semiring = args.semiring.as_deref().map(Semiring::parse).transpose()?;
    for alg in &algs {
        alg.resolve_semiring(requested_semiring)?;
    }

    let mut datasets: Vec<BenchDataset> = Vec::new();
    for s in &args.synth {
        SynthSpec::parse(s, 0)?; // validate before spawning work
        datasets.push(BenchDataset::Synth(s.clone()));
    }
    for path in &args.input {
        let (label, a) = load_dataset(Some(path), None, args.threshold, seed)?;
        datasets.push(BenchDataset::File(label, a));
    }

    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for dataset_idx in 0..datasets.len() {
        for &k in &args.k {
            for alg_idx in 0..algs.len() {
                cells.push((dataset_idx, k, alg_idx));
            }
        }
    }

    let reps = args.reps.max(1);
    // Cells run in a worker pool; assembly below is keyed, so the table is
    // independent of completion order.
    let results: std::collections::BTreeMap<(usize, usize, usize), (String, String)> = cells
        .par_iter()
        .map(|&(dataset_idx, k, alg_idx)| {
            let alg = algs[alg_idx];
            let mut errors = Vec::new();
            let mut times = Vec::new();
            for rep in 0..reps {
                let rep_seed = bench_rep_seed(seed, dataset_idx, k, alg_idx, reps, rep);
                let data = match &datasets[dataset_idx] {
                    BenchDataset::Synth(text) => {
                        let data_seed = bench_data_seed(seed, dataset_idx, rep);
                        match SynthSpec::parse(text, data_seed).and_then(|s| s.generate()) {
                            Ok(a) => a,
                            Err(_) => continue,
                        }
                    }
                    BenchDataset::File(_, a) => a.clone(),
                };
                let run = RunConfig {
                    alg,
                    k,
                    eps: args.eps,
                    p: args.p_norm,
                    semiring: alg.resolve_semiring(requested_semiring).expect("validated"),
                    mode,
                    seed: rep_seed,
                };
                let start = Instant::now();
                if let Ok(f) = run.execute(&data) {
                    errors.push(report_error(&f));
                    times.push(start.elapsed().as_secs_f64() * 1e3);
                }
                // failed repetitions surface as NA cells
            }
            let err_value = if errors.is_empty() {
                "NA".to_string()
            } else {
                format!("{:.4}", errors.iter().sum::<f64>() / errors.len() as f64)
            };
            // warm-start excluded from timing when enough repetitions ran
            let timing: &[f64] = if times.len() > 3 { &times[1..] } else { &times };
            let time_value = if timing.is_empty() {
                "NA".to_string()
            } else {
                format!("{:.3}", timing.iter().sum::<f64>() / timing.len() as f64)
            };
            ((dataset_idx, k, alg_idx), (err_value, time_value))
        })
        .collect();

    let baseline = match &args.baseline {
        Some(path) => Some(read_baseline(path)?),
        None => None,
    };

    let mut table = String::new();
    table.push_str("dataset\tk");
    for alg in &algs {
        table.push_str(&format!("\terr_{}", alg.name()));
    }
    for alg in &algs {
        table.push_str(&format!("\tms_{}", alg.name()));
    }
    if let Some((cols, _)) = &baseline {
        for c in cols {
            table.push_str(&format!("\t{c}"));
        }
    }
    table.push('\n');
    for (dataset_idx, dataset) in datasets.iter().enumerate() {
        for &k in &args.k {
            table.push_str(&format!("{}\t{k}", dataset.label()));
            for alg_idx in 0..algs.len() {
                table.push_str(&format!("\t{}", results[&(dataset_idx, k, alg_idx)].0));
            }
            for alg_idx in 0..algs.len() {
                table.push_str(&format!("\t{}", results[&(dataset_idx, k, alg_idx)].1));
            }
            if let Some((cols, rows)) = &baseline {
                match rows.get(&(dataset.label(), k)) {
                    Some(vals) => {
                        for v in vals {
                            table.push_str(&format!("\t{v}"));
                        }
                    }
                    None => {
                        for _ in cols {
                            table.push_str("\tNA");
                        }
                    }
                }
            }
            table.push('\n');
        }
    }

    if let Some(out) = &args.out {
        write_manifest(
            &manifest_path(out),
            &[
                ("command", "bench".into()),
                ("synth", args.synth.join(",")),
                (
                    "input",
                    args.input
                        .iter()
                        .map(|p| p.display().to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                ),
                ("alg", args.alg.join(",")),
                ("k", args.k.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")),
                ("eps", args.eps.to_string()),
                ("p_norm", args.p_norm.map_or("default".into(), |p| p.to_string())),
                ("mode", args.mode.clone()),
                ("reps", reps.to_string()),
                ("seed", seed.to_string()),
            ],
        )?;
    }
    emit(args.out.as_deref(), &table)?;
    Ok(table)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.tsv");
    out.with_file_name(name)
}

type BaselineTable = (Vec<String>, std::collections::BTreeMap<(String, usize), Vec<String>>);

fn read_baseline(path: &Path) -> Result<BaselineTable> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty baseline file".into()))?
        .split('\t')
        .collect();
    if header.len() < 3 || header[0] != "dataset" || header[1] != "k" {
        return Err(Error::Parse("baseline header must start with dataset\tk".into()));
    }
    let cols: Vec<String> = header[2..].iter().map(|s| s.to_string()).collect();
    let mut rows = std::collections::BTreeMap::new();
    for line in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse(format!("baseline row has {} fields", fields.len())));
        }
        let k: usize = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("baseline k {:?}", fields[1])))?;
        rows.insert(
            (fields[0].to_string(), k),
            fields[2..].iter().map(|s| s.to_string()).collect(),
        );
    }
    Ok((cols, rows))
}

const DEFAULT_STUDY_SIZES: &[f64] =
    &[0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn cmd_coreset_study(args: &CoresetStudyArgs) -> Result<String> {
    let seed = resolve_seed(args.seed);
    let semiring = args
        .semiring
        .as_deref()
        .map(Semiring::parse)
        .transpose()?
        .unwrap_or(Semiring::Integer);
    let (label, a) =
        load_dataset(args.input.as_deref(), args.synth.as_deref(), args.threshold, seed)?;
    let sizes: Vec<f64> =
        if args.sizes.is_empty() { DEFAULT_STUDY_SIZES.to_vec() } else { args.sizes.clone() };
    for &r in &sizes {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::param(format!("coreset size ratio {r} must be in (0,1]")));
        }
    }
    let reps = args.reps.max(1);
    let n = a.n_rows();
    let k_cluster = (1usize << args.k.min(30)).min(n);

    // Full-data baseline, one kBMF+ run per repetition seed.
    let baseline: f64 = (0..reps)
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xba5e, rep as u64));
            kbmf_plus(&a, args.k, semiring, &mut rng).map(|f| report_error(&f))
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>()
        / reps as f64;

    let unit = WeightedRows::unit(a.clone());
    let mut jobs: Vec<(f64, usize)> = Vec::new();
    for &r in &sizes {
        jobs.push((r, 0)); // sensitivity
        jobs.push((r, 1)); // lightweight
    }
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(r, construction)| {
            let target = ((r * n as f64).ceil() as usize).max(1);
            let mut errors = Vec::new();
            for rep in 0..reps {
                let tag = 0xc0de + construction as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, rep as u64));
                let coreset = if construction == 0 {
                    sensitivity_coreset_with_target(&unit, k_cluster, 0.5, target, &mut rng)
                } else {
                    lightweight_coreset(&unit, target, &mut rng)
                };
                let Ok(coreset) = coreset else { continue };
                let mut alg_rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xba5e, rep as u64));
                if let Ok(f) = kbmf_plus_on_coreset(&a, &coreset, args.k, semiring, &mut alg_rng) {
                    errors.push(report_error(&f));
                }
            }
            let name = if construction == 0 { "sensitivity" } else { "lightweight" };
            if errors.is_empty() {
                format!("{r}\t{name}\tNA\tNA\t{baseline:.4}\n")
            } else {
                let mean = errors.iter().sum::<f64>() / errors.len() as f64;
                let var =
                    errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / errors.len() as f64;
                format!("{r}\t{name}\t{mean:.4}\t{:.4}\t{baseline:.4}\n", var.sqrt())
            }
        })
        .collect();

    let mut table = String::from("r\tconstruction\tmean_error\tstd_error\tbaseline_error\n");
    for row in rows {
        table.push_str(&row);
    }

    if let Some(out) = &args.out {
        write_manifest(
            &manifest_path(out),
            &[
                ("command", "coreset-study".into()),
                ("dataset", label),
                ("k", args.k.to_string()),
                ("sizes", sizes.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")),
                ("reps", reps.to_string()),
                ("seed", seed.to_string()),
            ],
        )?;
    }
    emit(args.out.as_deref(), &table)?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Runs the CLI on explicit arguments; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let _ = e.print();
            return EXIT_CONFIG;
        }
    };
    let outcome = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Factorize(a) => cmd_factorize(a),
        Command::Bench(a) => cmd_bench(a).map(|_| ()),
        Command::CoresetStudy(a) => cmd_coreset_study(a).map(|_| ()),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::DimensionMismatch(_) | Error::Parse(_) => {
                    EXIT_CONFIG
                }
                Error::TooLarge(_) | Error::Io(_) => EXIT_RUNTIME,
            }
        }
    }
}

pub fn run_from_env() -> i32 {
    run_from(std::env::args_os())
}
