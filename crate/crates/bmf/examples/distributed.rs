//! Two-round distributed protocol: users ship local coresets, the
//! coordinator solves for V and broadcasts it, users return their exact U
//! rows. Communication is metered per message.
//!
//! ```bash
//! cargo run --release --example distributed
//! ```

use bmf::bigdata::{distributed_two_round, StreamConfig};
use bmf::binmat::BinMatrix;
use bmf::solvers::FrobeniusConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = BinMatrix::from_fn(400, 12, |_, _| rng.gen_bool(0.4));

    // Four users, uneven row partition in original order.
    let cuts = [0usize, 90, 210, 310, 400];
    let partitions: Vec<BinMatrix> = cuts
        .windows(2)
        .map(|w| a.select_rows(&(w[0]..w[1]).collect::<Vec<_>>()))
        .collect();

    let cfg = StreamConfig {
        frobenius: FrobeniusConfig { coreset_target: Some(32), ..Default::default() },
        ..Default::default()
    };
    let (fact, transcript) = distributed_two_round(&partitions, 3, 0.5, 77, &cfg).unwrap();
    fact.verify(&a).unwrap();

    println!(
        "{} users, {} rounds, achieved loss {}",
        transcript.users,
        transcript.rounds(),
        fact.achieved_loss
    );
    println!("transcript ({} matrix-payload bits total):", transcript.total_bits());
    let mut tsv = Vec::new();
    transcript.write_tsv(&mut tsv).unwrap();
    print!("{}", String::from_utf8(tsv).unwrap());
}
