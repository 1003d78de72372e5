//! Error versus coreset size for kBMF+: the V step runs on sensitivity or
//! lightweight coresets of varying relative size, compared against the
//! full-data baseline.
//!
//! ```bash
//! cargo run --release --example coreset_study
//! ```

fn main() {
    let code = bmf::cli::run_from([
        "bmf",
        "coreset-study",
        "--synth",
        "noisy:500:50:0.5:5:0.01",
        "--k",
        "5",
        "--sizes",
        "0.05,0.1,0.2,0.5,0.9",
        "--reps",
        "10",
        "--seed",
        "7",
    ]);
    std::process::exit(code);
}
