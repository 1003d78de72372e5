//! A small benchmark grid through the CLI layer: datasets x algorithms x k,
//! mean errors and timings as a TSV table.
//!
//! ```bash
//! cargo run --release --example bench_table
//! ```

fn main() {
    let code = bmf::cli::run_from([
        "bmf",
        "bench",
        "--synth",
        "bernoulli:250:50:0.5,lowrank:250:50:0.5:5",
        "--alg",
        "kbmf,kbmf-plus",
        "--k",
        "2,5,10",
        "--semiring",
        "gf2",
        "--reps",
        "5",
        "--seed",
        "0",
    ]);
    std::process::exit(code);
}
