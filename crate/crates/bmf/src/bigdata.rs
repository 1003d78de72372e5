//! Two-pass streaming driver and two-round distributed protocol simulator,
//! built on the clustering and solver modules, with space and communication
//! accounting.
//!
//! Degenerate configurations replay the centralized pipeline bit for bit:
//! a single-block stream performs no reductions in pass one, and a
//! single-user protocol ships a coreset the coordinator's re-coreset step
//! passes through untouched, so both consume randomness in exactly the same
//! order as `frobenius_coreset_solver_with`. Per-stage seeds are derived
//! from one master seed for that purpose.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::binmat::{BinMatrix, LossSpec, Semiring};
use crate::clustering::{
    coreset_target, merge_reduce_stream, sensitivity_coreset_with_target, WeightedRows,
};
use crate::seed::role;
use crate::solvers::{Factorization, FrobeniusConfig, FrobeniusMode};
use crate::{derive_seed, Error, Result};

/// A source of binary rows that can be replayed (the streaming driver reads
/// it twice). Stands in for a true stream; the driver is checked against its
/// space budget rather than real I/O.
pub trait RowSource {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn rows(&self) -> Box<dyn Iterator<Item = Vec<u8>> + '_>;
}

impl RowSource for BinMatrix {
    fn n_rows(&self) -> usize {
        self.n_rows()
    }

    fn n_cols(&self) -> usize {
        self.n_cols()
    }

    fn rows(&self) -> Box<dyn Iterator<Item = Vec<u8>> + '_> {
        Box::new((0..BinMatrix::n_rows(self)).map(|i| self.row_to_vec(i)))
    }
}

/// File-backed replayable source over the 0/1 CSV format; dimensions are
/// validated once at open, each pass re-reads the file.
pub struct CsvRowSource {
    path: std::path::PathBuf,
    n_rows: usize,
    n_cols: usize,
}

impl CsvRowSource {
    pub fn open(path: impl Into<std::path::PathBuf>) -> Result<Self> {
        let path = path.into();
        let m = BinMatrix::from_csv_file(&path)?;
        Ok(CsvRowSource { path, n_rows: m.n_rows(), n_cols: m.n_cols() })
    }
}

impl RowSource for CsvRowSource {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn rows(&self) -> Box<dyn Iterator<Item = Vec<u8>> + '_> {
        let m = BinMatrix::from_csv_file(&self.path).expect("validated at open");
        Box::new((0..m.n_rows()).map(move |i| m.row_to_vec(i)))
    }
}

/// Space accounting for the streaming driver.
#[derive(Clone, Copy, Debug)]
pub struct StreamStats {
    /// Largest number of rows buffered at any point across both passes.
    pub peak_buffered_rows: usize,
    /// Always 2.
    pub passes: usize,
    /// Rows consumed over both passes.
    pub rows_seen: usize,
}

#[derive(Clone, Debug)]
pub struct StreamConfig {
    pub block: usize,
    pub mode: FrobeniusMode,
    pub frobenius: FrobeniusConfig,
    /// Space budget factor: peak rows must stay within
    /// `factor · block · (log₂ n + 2)`.
    pub space_factor: usize,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            block: 256,
            mode: FrobeniusMode::SketchSampled,
            frobenius: FrobeniusConfig::default(),
            space_factor: 4,
        }
    }
}

/// Two-pass streaming factorization in the row-arrival model.
///
/// Pass one builds a merge-and-reduce coreset, then re-coresets it offline to
/// drop the log-factor blowup and solves for `V'`. Pass two computes each row
/// of `U'` on arrival; nothing beyond the coreset tree and one row is ever
/// buffered (asserted against the configured budget).
pub fn streaming_two_pass(
    source: &dyn RowSource,
    k: usize,
    epsilon: f64,
    seed: u64,
    cfg: &StreamConfig,
) -> Result<(Factorization, StreamStats)> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let epsilon = epsilon.min(0.999_999);
    let n = source.n_rows();
    let d = source.n_cols();
    let k_cluster = (1usize << k.min(30)).min(n);
    let target = cfg
        .frobenius
        .coreset_target
        .unwrap_or_else(|| coreset_target(k_cluster, epsilon));

    // Pass 1: merge-and-reduce, then the offline re-coreset on its output.
    let mut rng_coreset = ChaCha8Rng::seed_from_u64(derive_seed(seed, role::CORESET, 0));
    let (merged, mr_stats) = merge_reduce_stream(
        source.rows(),
        d,
        n,
        k_cluster,
        epsilon,
        cfg.block,
        &mut rng_coreset,
    )?;
    let mut rows_seen = mr_stats.rows_seen;
    let coreset =
        sensitivity_coreset_with_target(&merged, k_cluster, epsilon, target, &mut rng_coreset)?;

    let mut rng_solve = ChaCha8Rng::seed_from_u64(derive_seed(seed, role::SOLVE, 0));
    let v = crate::solvers::solve_v_on_coreset(
        &coreset,
        k,
        epsilon,
        cfg.mode,
        &cfg.frobenius,
        &mut rng_solve,
    )?;

    // Pass 2: one exact row solve per arriving row; only one row buffered.
    let solver = crate::solvers::RowSolver::new(
        &v,
        LossSpec::Frobenius,
        Semiring::Integer,
        None,
        crate::solvers::DEFAULT_K_CAP,
    )?;
    let mut u = BinMatrix::zeros(n, v.n_rows());
    let mut total_loss = 0.0;
    let mut scratch = Vec::new();
    for (i, row) in source.rows().enumerate() {
        if i >= n {
            return Err(Error::param("source produced more rows on second pass"));
        }
        let packed = BinMatrix::from_rows(&[row])?;
        let (bits, loss) = solver.best_row(packed.row_words(0), &mut scratch);
        crate::solvers::write_row_bits(&mut u, i, 0, v.n_rows(), bits);
        total_loss += loss;
        rows_seen += 1;
    }
    if rows_seen < 2 * n {
        return Err(Error::param("source ended early on second pass"));
    }

    let peak = mr_stats.peak_rows.max(coreset.n_rows() + 1);
    let budget = cfg.space_factor * cfg.block * ((n.max(2) as f64).log2().ceil() as usize + 2);
    assert!(
        peak <= budget,
        "stream buffered {peak} rows, budget {budget} (block {})",
        cfg.block
    );

    let fact = Factorization {
        k_actual: v.n_rows(),
        u,
        v,
        semiring: Semiring::Integer,
        loss_spec: LossSpec::Frobenius,
        achieved_loss: total_loss,
        k_nominal: k,
        method: format!("streaming/{}", cfg.mode.name()),
    };
    let stats = StreamStats { peak_buffered_rows: peak, passes: 2, rows_seen };
    Ok((fact, stats))
}

/// Column-arrival adapter: feed the columns of `A` (that is, the rows of
/// `Aᵀ`) through the row pipeline and swap the factors on the way out.
pub fn streaming_two_pass_columns(
    column_source: &dyn RowSource,
    k: usize,
    epsilon: f64,
    seed: u64,
    cfg: &StreamConfig,
) -> Result<(Factorization, StreamStats)> {
    let (f, stats) = streaming_two_pass(column_source, k, epsilon, seed, cfg)?;
    Ok((swap_factors(f), stats))
}

fn swap_factors(f: Factorization) -> Factorization {
    Factorization {
        u: f.v.transpose(),
        v: f.u.transpose(),
        method: format!("{}/transposed", f.method),
        ..f
    }
}

/// Direction of a protocol message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    UserToCoordinator,
    CoordinatorToUsers,
}

/// One message record: `user` is `None` for the round-2 broadcast of `V'`.
#[derive(Clone, Debug)]
pub struct Message {
    pub round: usize,
    pub user: Option<usize>,
    pub direction: Direction,
    pub rows: usize,
    /// Matrix payload bits (rows × row width).
    pub bits: usize,
}

/// Communication log of a protocol run.
#[derive(Clone, Debug, Default)]
pub struct ProtocolTranscript {
    pub users: usize,
    pub messages: Vec<Message>,
}

impl ProtocolTranscript {
    pub fn rounds(&self) -> usize {
        self.messages.iter().map(|m| m.round).max().unwrap_or(0)
    }

    pub fn total_bits(&self) -> usize {
        self.messages.iter().map(|m| m.bits).sum()
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "round\tuser\tdirection\trows\tbits")?;
        for m in &self.messages {
            let user = m.user.map_or("all".to_string(), |u| u.to_string());
            let dir = match m.direction {
                Direction::UserToCoordinator => "to_coordinator",
                Direction::CoordinatorToUsers => "to_users",
            };
            writeln!(w, "{}\t{}\t{}\t{}\t{}", m.round, user, dir, m.rows, m.bits)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct DistributedConfig {
    pub mode_cfg: StreamConfig,
}

/// Two-round distributed protocol over row partitions.
///
/// Round 1: every user ships a local coreset of its rows; the coordinator
/// unions them, re-coresets, and solves for `V'`. Round 2: `V'` is broadcast,
/// each user returns the exact `U` rows for its partition, and the
/// coordinator assembles `U'` in the original row order. The coordinator
/// never touches raw partitions; the achieved loss is the sum of the
/// user-reported row losses.
pub fn distributed_two_round(
    partitions: &[BinMatrix],
    k: usize,
    epsilon: f64,
    seed: u64,
    cfg: &StreamConfig,
) -> Result<(Factorization, ProtocolTranscript)> {
    if partitions.is_empty() {
        return Err(Error::param("need at least one user"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let epsilon = epsilon.min(0.999_999);
    let d = partitions
        .iter()
        .map(|p| p.n_cols())
        .find(|&c| c > 0)
        .unwrap_or(0);
    if partitions.iter().any(|p| p.n_rows() > 0 && p.n_cols() != d) {
        return Err(Error::dim("partitions disagree on column count"));
    }
    let n: usize = partitions.iter().map(|p| p.n_rows()).sum();
    let k_cluster = (1usize << k.min(30)).min(n);
    let target = cfg
        .frobenius
        .coreset_target
        .unwrap_or_else(|| coreset_target(k_cluster, epsilon));

    let mut transcript = ProtocolTranscript { users: partitions.len(), messages: Vec::new() };

    // Round 1: local coresets.
    let mut locals: Vec<WeightedRows> = Vec::with_capacity(partitions.len());
    for (user, part) in partitions.iter().enumerate() {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(seed, role::CORESET, user as u64));
        let local = if part.n_rows() == 0 {
            WeightedRows::unit(BinMatrix::zeros(0, d))
        } else {
            sensitivity_coreset_with_target(
                &WeightedRows::unit(part.clone()),
                k_cluster,
                epsilon,
                target,
                &mut rng,
            )?
        };
        transcript.messages.push(Message {
            round: 1,
            user: Some(user),
            direction: Direction::UserToCoordinator,
            rows: local.n_rows(),
            bits: local.n_rows() * d,
        });
        locals.push(local);
    }

    // Coordinator: union, re-coreset, solve V'.
    let union = WeightedRows::concat(&locals.iter().collect::<Vec<_>>())?;
    let mut rng_reduce = ChaCha8Rng::seed_from_u64(derive_seed(seed, role::REDUCE, 0));
    let coreset =
        sensitivity_coreset_with_target(&union, k_cluster, epsilon, target, &mut rng_reduce)?;
    let mut rng_solve = ChaCha8Rng::seed_from_u64(derive_seed(seed, role::SOLVE, 0));
    let v = crate::solvers::solve_v_on_coreset(
        &coreset,
        k,
        epsilon,
        cfg.mode,
        &cfg.frobenius,
        &mut rng_solve,
    )?;

    // Round 2: broadcast V', collect U rows per user in partition order.
    transcript.messages.push(Message {
        round: 2,
        user: None,
        direction: Direction::CoordinatorToUsers,
        rows: v.n_rows(),
        bits: v.n_rows() * d,
    });
    let mut u = BinMatrix::zeros(n, v.n_rows());
    let mut total_loss = 0.0;
    let mut next_row = 0;
    for (user, part) in partitions.iter().enumerate() {
        let (u_part, loss) = crate::solvers::solve_u_given_v(
            part,
            &v,
            LossSpec::Frobenius,
            Semiring::Integer,
        )?;
        transcript.messages.push(Message {
            round: 2,
            user: Some(user),
            direction: Direction::UserToCoordinator,
            rows: u_part.n_rows(),
            bits: u_part.n_rows() * v.n_rows(),
        });
        for i in 0..u_part.n_rows() {
            u.copy_row_from(next_row, &u_part, i);
            next_row += 1;
        }
        total_loss += loss;
    }

    let fact = Factorization {
        k_actual: v.n_rows(),
        u,
        v,
        semiring: Semiring::Integer,
        loss_spec: LossSpec::Frobenius,
        achieved_loss: total_loss,
        k_nominal: k,
        method: format!("distributed/{}", cfg.mode.name()),
    };
    Ok((fact, transcript))
}

/// Column-partitioned adapter: partitions hold columns of `A` (rows of
/// `Aᵀ`); factors are swapped on the way out.
pub fn distributed_two_round_columns(
    column_partitions: &[BinMatrix],
    k: usize,
    epsilon: f64,
    seed: u64,
    cfg: &StreamConfig,
) -> Result<(Factorization, ProtocolTranscript)> {
    let (f, t) = distributed_two_round(column_partitions, k, epsilon, seed, cfg)?;
    Ok((swap_factors(f), t))
}
