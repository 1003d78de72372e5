//! Weighted coreset constructions: sensitivity sampling and lightweight
//! coresets, with their cost-preservation quality measured against exact
//! k-means costs.
//!
//! ```bash
//! cargo run --release --example coresets
//! ```

use bmf::binmat::BinMatrix;
use bmf::clustering::{
    kmeans_cost, lightweight_coreset, sensitivity_coreset_with_target, CenterSet, WeightedRows,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = BinMatrix::from_fn(1000, 10, |_, _| rng.gen_bool(0.5));
    let unit = WeightedRows::unit(data);

    // Random probe center sets and their exact weighted costs.
    let center_sets: Vec<CenterSet> = (0..400)
        .map(|_| CenterSet {
            centers: (0..4)
                .map(|_| (0..10).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect(),
        })
        .collect();
    let exact: Vec<f64> = center_sets.iter().map(|s| kmeans_cost(&unit, s).unwrap()).collect();

    println!(
        "{:<14} {:>6} {:>8} {:>12} {:>10}",
        "construction", "rows", "weight", "max rel dev", "within 5%"
    );
    for target in [100, 200, 400] {
        let mut srng = ChaCha8Rng::seed_from_u64(11);
        let sens = sensitivity_coreset_with_target(&unit, 4, 0.2, target, &mut srng).unwrap();
        let mut lrng = ChaCha8Rng::seed_from_u64(11);
        let light = lightweight_coreset(&unit, target, &mut lrng).unwrap();
        for (name, coreset) in [("sensitivity", &sens), ("lightweight", &light)] {
            let mut max_dev = 0.0f64;
            let mut close = 0;
            for (s, &e) in center_sets.iter().zip(&exact) {
                let approx = kmeans_cost(coreset, s).unwrap();
                let dev = (approx - e).abs() / e;
                max_dev = max_dev.max(dev);
                close += (dev <= 0.05) as usize;
            }
            println!(
                "{:<14} {:>6} {:>8} {:>12.4} {:>7}/400",
                format!("{name}@{target}"),
                coreset.n_rows(),
                coreset.total_weight(),
                max_dev,
                close
            );
        }
    }
    println!("(every returned row is a data row; weights are positive integers)");
}
