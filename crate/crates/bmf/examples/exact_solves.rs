//! Exact conditional solves (optimal `V` given `U`, optimal `U` given `V`,
//! blockwise `U`) and the global brute-force oracle.
//!
//! ```bash
//! cargo run --example exact_solves
//! ```

use bmf::binmat::{BinMatrix, LossSpec, Semiring};
use bmf::solvers::{
    brute_force_bmf, solve_u_blockwise, solve_u_given_v, solve_v_given_u,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = BinMatrix::from_fn(8, 6, |_, _| rng.gen_bool(0.5));
    let u = BinMatrix::from_fn(8, 3, |_, _| rng.gen_bool(0.5));

    // Optimal V for this U: each column solved independently over 2^k
    // candidates, so the result is the global conditional optimum.
    let (v, loss_v) = solve_v_given_u(&a, &u, LossSpec::Frobenius, Semiring::Integer).unwrap();
    println!("solve_v_given_u: loss {loss_v}");

    // Optimal U for that V, one row at a time.
    let (_, loss_u) = solve_u_given_v(&a, &v, LossSpec::Frobenius, Semiring::Integer).unwrap();
    println!("solve_u_given_v: loss {loss_u} (never above {loss_v})");
    assert!(loss_u <= loss_v);

    // Blockwise solve: each row picks one factor block and one combination.
    let v2 = BinMatrix::from_fn(3, 6, |_, _| rng.gen_bool(0.3));
    let (_, blocks, loss_b) =
        solve_u_blockwise(&a, &[v.clone(), v2], LossSpec::Frobenius, Semiring::Integer).unwrap();
    println!("blockwise over 2 factors: loss {loss_b}, block choices {blocks:?}");

    // The brute-force oracle enumerates every V in {0,1}^(k x d); it is the
    // ground truth the approximation pipelines are tested against.
    let tiny = BinMatrix::identity(4);
    for k in 1..=3 {
        let f = brute_force_bmf(&tiny, k, LossSpec::Frobenius, Semiring::Integer).unwrap();
        println!("brute force on I4, k={k}: optimal squared loss {}", f.achieved_loss);
    }

    let f = brute_force_bmf(&tiny, 2, LossSpec::L0, Semiring::Boolean).unwrap();
    println!("brute force on I4 over the boolean semiring, k=2: {}", f.achieved_loss);
}
