//! Two-pass streaming factorization in the row-arrival model, with space
//! accounting: pass one builds a merge-and-reduce coreset and solves for V,
//! pass two emits each U row on arrival.
//!
//! ```bash
//! cargo run --release --example streaming
//! ```

use bmf::bigdata::{streaming_two_pass, StreamConfig};
use bmf::datagen::{SynthKind, SynthSpec};
use bmf::solvers::{frobenius_coreset_solver_with, FrobeniusConfig, FrobeniusMode};

fn main() {
    let spec = SynthSpec {
        kind: SynthKind::LowRank,
        n: 2000,
        d: 16,
        p: 0.5,
        r: 3,
        p_e: 0.0,
        seed: 5,
    };
    let a = spec.generate().unwrap();
    let cfg = StreamConfig {
        block: 200,
        mode: FrobeniusMode::SketchSampled,
        frobenius: FrobeniusConfig::default(),
        space_factor: 4,
    };

    let (fact, stats) = streaming_two_pass(&a, 3, 0.5, 17, &cfg).unwrap();
    println!("stream of {} rows, block size {}:", spec.n, cfg.block);
    println!("  passes            {}", stats.passes);
    println!("  rows consumed     {}", stats.rows_seen);
    println!("  peak buffered     {} rows", stats.peak_buffered_rows);
    println!("  achieved loss     {}", fact.achieved_loss);

    let offline = frobenius_coreset_solver_with(
        &a,
        3,
        0.5,
        FrobeniusMode::SketchSampled,
        &cfg.frobenius,
        17,
    )
    .unwrap();
    println!("  offline loss      {}", offline.achieved_loss);

    // With a block at least as large as the stream, pass one degenerates and
    // the driver replays the offline pipeline exactly.
    let small_spec = SynthSpec { n: 150, seed: 6, ..spec };
    let small = small_spec.generate().unwrap();
    let big_block = StreamConfig { block: 256, ..cfg };
    let (fs, _) = streaming_two_pass(&small, 3, 0.5, 17, &big_block).unwrap();
    let fc = frobenius_coreset_solver_with(
        &small,
        3,
        0.5,
        FrobeniusMode::SketchSampled,
        &big_block.frobenius,
        17,
    )
    .unwrap();
    assert_eq!(fs.u, fc.u);
    assert_eq!(fs.v, fc.v);
    println!("single-block stream is bit-identical to the centralized solver");
}
