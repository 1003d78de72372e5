//! Leverage scores, the sampling-and-rescaling sketch operator, and the L0
//! nonzero-row norm estimator.
//!
//! ```bash
//! cargo run --example sketching
//! ```

use bmf::binmat::{BinMatrix, IntMatrix, LossSpec};
use bmf::sketch::{
    bin_to_real, l0_affine_sketch, l0_row_estimate, leverage_sample, leverage_scores,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = BinMatrix::from_fn(16, 3, |_, _| rng.gen_bool(0.5));
    let ar = bin_to_real(&a);

    let lev = leverage_scores(&ar);
    println!("leverage scores (sum = rank = {:.6}):", lev.sum());
    for (i, s) in lev.scores.iter().enumerate().take(6) {
        println!("  row {i}: {s:.4}");
    }

    // Sampling sketch: row j drawn with probability ~ min(1, boost * score),
    // rescaled by 1/sqrt(m p_j). Frobenius mass is preserved in expectation.
    let exact_mass: f64 = ar.iter().map(|v| v * v).sum();
    let mut mean_mass = 0.0;
    let draws = 2000;
    for _ in 0..draws {
        let sk = leverage_sample(&lev, 8, 1.0, &mut rng).unwrap();
        mean_mass += sk.apply_real(&ar).iter().map(|v| v * v).sum::<f64>() / draws as f64;
    }
    println!("E[|S A|_F^2] over {draws} draws: {mean_mass:.2} (exact {exact_mass:.2})");

    // L0 norm estimator: sample random nonzero rows, pad to a power of two.
    let mut m = IntMatrix::zeros(32, 4);
    for i in 0..32 {
        for j in 0..4 {
            m.set(i, j, rng.gen_range(0..=3));
        }
    }
    for p in [1.0, 2.0, 3.0] {
        let spec = LossSpec::Lp(p);
        let exact: f64 = m.entries.iter().map(|&e| spec.pow(e as f64)).sum();
        let est = l0_row_estimate(&m, p, 10_000, &mut rng);
        println!("l0_row_estimate p={p}: {est:.1} (exact {exact:.1})");
    }

    // Affine L0 sketch: one operator that preserves |A X - B|_p^p for every
    // binary X simultaneously (checked here by exhausting all X).
    let acand = BinMatrix::from_fn(40, 2, |_, _| rng.gen_bool(0.5));
    let b = BinMatrix::from_fn(40, 2, |_, _| rng.gen_bool(0.5));
    let sk = l0_affine_sketch(&acand, &b, 0.5, 1.0, &mut rng).unwrap();
    println!(
        "affine sketch: {} sampled rows (nominal {})",
        sk.len(),
        sk.nominal_rows
    );
    let spec = LossSpec::Lp(1.0);
    for xbits in 0u32..16 {
        let x = BinMatrix::from_fn(2, 2, |i, j| (xbits >> (i * 2 + j)) & 1 == 1);
        let prod = bmf::binmat::product(&acand, &x, bmf::binmat::Semiring::Integer).unwrap();
        let mut resid = IntMatrix::zeros(40, 2);
        for i in 0..40 {
            for j in 0..2 {
                resid.set(i, j, (prod.entry(i, j) as i64 - b.get(i, j) as i64).unsigned_abs() as u32);
            }
        }
        let exact: f64 = resid.entries.iter().map(|&e| spec.pow(e as f64)).sum();
        let sketched = sk.lp_norm_int(&resid, 1.0);
        println!("  X={xbits:04b}: exact {exact:>5.1}, sketched {sketched:>6.1}");
    }
}
