//! Bicriteria L_p factorization: row and column coresets, double grouping by
//! weight classes, per-part rank-k solves, and blockwise reassembly.
//!
//! ```bash
//! cargo run --release --example lp_pipeline
//! ```

use bmf::binmat::{loss, product, BinMatrix, LossSpec, Semiring};
use bmf::solvers::{brute_force_bmf, lp_bicriteria_solver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);

    println!("tiny random instances, k=1, eps=0.5, p=1:");
    for trial in 0..6 {
        let a = BinMatrix::from_fn(8, 4, |_, _| rng.gen_bool(0.5));
        let f = lp_bicriteria_solver(&a, 1, 1.0, 0.5, 80 + trial).unwrap();
        let opt = brute_force_bmf(&a, 1, LossSpec::Lp(1.0), Semiring::Integer)
            .unwrap()
            .achieved_loss;
        println!(
            "  trial {trial}: bicriteria {} (k'={}) vs optimum {opt}",
            f.achieved_loss, f.k_actual
        );
    }

    // p = 2 in power form is exactly the squared Frobenius loss, and for
    // binary predictions every p gives the same mismatch count.
    let a = BinMatrix::from_fn(10, 6, |_, _| rng.gen_bool(0.5));
    let u = BinMatrix::from_fn(10, 2, |_, _| rng.gen_bool(0.5));
    let v = BinMatrix::from_fn(2, 6, |_, _| rng.gen_bool(0.5));
    let int_prod = product(&u, &v, Semiring::Integer).unwrap();
    println!(
        "\nloss at p=2 {} == squared Frobenius {}",
        loss(&a, &int_prod, LossSpec::Lp(2.0)).unwrap(),
        loss(&a, &int_prod, LossSpec::Frobenius).unwrap()
    );
    let bool_prod = product(&u, &v, Semiring::Boolean).unwrap();
    println!(
        "binary predictions: p=1 {} == p=3 {}",
        loss(&a, &bool_prod, LossSpec::Lp(1.0)).unwrap(),
        loss(&a, &bool_prod, LossSpec::Lp(3.0)).unwrap()
    );

    // Larger p punishes overshoot: compare a p=1 and a p=3 factorization of
    // the same instance.
    let f1 = lp_bicriteria_solver(&a, 2, 1.0, 0.5, 99).unwrap();
    let f3 = lp_bicriteria_solver(&a, 2, 3.0, 0.5, 99).unwrap();
    println!("\np=1 run: loss {} (k'={})", f1.achieved_loss, f1.k_actual);
    println!("p=3 run: loss {} (k'={})", f3.achieved_loss, f3.k_actual);
}
