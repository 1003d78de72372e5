use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::binmat::{loss, product, ProductMatrix};
use crate::clustering::WeightedRows;

fn m(rows: &[&[u8]]) -> BinMatrix {
    BinMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn random_bin(n: usize, d: usize, p: f64, rng: &mut impl Rng) -> BinMatrix {
    BinMatrix::from_fn(n, d, |_, _| rng.gen_bool(p))
}

/// Exhaustive minimum over all V in {0,1}^{k x d} of loss(A, U·V).
fn joint_v_oracle(
    a: &BinMatrix,
    u: &BinMatrix,
    spec: LossSpec,
    semiring: Semiring,
) -> f64 {
    let k = u.n_cols();
    let d = a.n_cols();
    let mut best = f64::INFINITY;
    for bits in 0u64..1 << (k * d) {
        let v = BinMatrix::from_fn(k, d, |l, j| (bits >> (l * d + j)) & 1 == 1);
        let p = product(u, &v, semiring).unwrap();
        best = best.min(loss(a, &p, spec).unwrap());
    }
    best
}

fn joint_u_oracle(
    a: &BinMatrix,
    v: &BinMatrix,
    spec: LossSpec,
    semiring: Semiring,
) -> f64 {
    let k = v.n_rows();
    let n = a.n_rows();
    let mut best = f64::INFINITY;
    for bits in 0u64..1 << (k * n) {
        let u = BinMatrix::from_fn(n, k, |i, l| (bits >> (i * k + l)) & 1 == 1);
        let p = product(&u, v, semiring).unwrap();
        best = best.min(loss(a, &p, spec).unwrap());
    }
    best
}

#[test]
fn solve_v_recovers_perfect_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for semiring in [Semiring::Integer, Semiring::Boolean, Semiring::Gf2] {
        let u = random_bin(7, 3, 0.5, &mut rng);
        let v0 = random_bin(3, 5, 0.5, &mut rng);
        let p = product(&u, &v0, semiring).unwrap();
        let a = match p {
            ProductMatrix::Bin(b) => b,
            ProductMatrix::Int(_) => continue, // integer products need not be binary
        };
        let (_, l) = solve_v_given_u(&a, &u, LossSpec::Frobenius, semiring).unwrap();
        assert_eq!(l, 0.0, "{semiring:?}");
    }
}

#[test]
fn solve_v_zero_u_tie_breaks_to_zero() {
    let a = m(&[&[1, 0, 1], &[0, 1, 1]]);
    let u = BinMatrix::zeros(2, 2);
    let (v, l) = solve_v_given_u(&a, &u, LossSpec::Frobenius, Semiring::Integer).unwrap();
    assert_eq!(v, BinMatrix::zeros(2, 3));
    assert_eq!(l, a.count_ones() as f64);
}

#[test]
fn solve_v_matches_joint_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let a = random_bin(6, 4, 0.5, &mut rng);
        let u = random_bin(6, 2, 0.5, &mut rng);
        for (spec, semiring) in [
            (LossSpec::Frobenius, Semiring::Integer),
            (LossSpec::Lp(1.0), Semiring::Integer),
            (LossSpec::L0, Semiring::Gf2),
            (LossSpec::L0, Semiring::Boolean),
        ] {
            let (_, got) = solve_v_given_u(&a, &u, spec, semiring).unwrap();
            let want = joint_v_oracle(&a, &u, spec, semiring);
            assert_eq!(got, want, "{spec:?} {semiring:?}");
        }
    }
}

#[test]
fn solve_u_matches_joint_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let a = random_bin(6, 4, 0.5, &mut rng);
        let v = random_bin(2, 4, 0.5, &mut rng);
        for (spec, semiring) in [
            (LossSpec::Frobenius, Semiring::Integer),
            (LossSpec::Lp(1.0), Semiring::Integer),
            (LossSpec::L0, Semiring::Gf2),
        ] {
            let (_, got) = solve_u_given_v(&a, &v, spec, semiring).unwrap();
            let want = joint_u_oracle(&a, &v, spec, semiring);
            assert_eq!(got, want, "{spec:?} {semiring:?}");
        }
    }
}

#[test]
fn solve_u_single_row_matching_v_row() {
    let v = m(&[&[1, 0, 1, 0], &[0, 1, 1, 1]]);
    let a = m(&[&[0, 1, 1, 1]]);
    let (u, l) = solve_u_given_v(&a, &v, LossSpec::Frobenius, Semiring::Integer).unwrap();
    assert_eq!(l, 0.0);
    assert!(u.get(0, 1));
}

#[test]
fn weighted_solves_equal_expanded_duplicates() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows = random_bin(4, 3, 0.5, &mut rng);
    let weights = vec![3u64, 1, 2, 4];
    let wr = WeightedRows::new(rows.clone(), weights.clone()).unwrap();
    let expanded = wr.expand();
    let u = random_bin(4, 2, 0.5, &mut rng);
    let u_expanded = {
        let mut idx = Vec::new();
        for (i, &w) in weights.iter().enumerate() {
            idx.extend(std::iter::repeat(i).take(w as usize));
        }
        u.select_rows(&idx)
    };
    for semiring in [Semiring::Integer, Semiring::Gf2] {
        let (v_w, l_w) =
            solve_v_given_u_weighted(&rows, Some(&weights), &u, LossSpec::Frobenius, semiring).unwrap();
        let (v_e, l_e) =
            solve_v_given_u(&expanded, &u_expanded, LossSpec::Frobenius, semiring).unwrap();
        assert_eq!(v_w, v_e, "{semiring:?}");
        assert_eq!(l_w, l_e);
    }
    let v = random_bin(2, 3, 0.5, &mut rng);
    let (_, l_w) =
        solve_u_given_v_weighted(&rows, Some(&weights), &v, LossSpec::Frobenius, Semiring::Integer).unwrap();
    let (_, l_e) = solve_u_given_v(&expanded, &v, LossSpec::Frobenius, Semiring::Integer).unwrap();
    assert_eq!(l_w, l_e);
}

#[test]
fn blockwise_single_block_equals_plain_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_bin(8, 5, 0.5, &mut rng);
    let v = random_bin(2, 5, 0.5, &mut rng);
    let (u_plain, l_plain) = solve_u_given_v(&a, &v, LossSpec::Frobenius, Semiring::Integer).unwrap();
    let (u_block, blocks, l_block) =
        solve_u_blockwise(&a, std::slice::from_ref(&v), LossSpec::Frobenius, Semiring::Integer).unwrap();
    assert_eq!(u_plain, u_block);
    assert_eq!(l_plain, l_block);
    assert!(blocks.iter().all(|&b| b == 0));
}

#[test]
fn blockwise_picks_matching_block() {
    let v1 = m(&[&[1, 1, 1, 1, 1]]);
    let v2 = m(&[&[0, 1, 0, 1, 0]]);
    let a = m(&[&[0, 1, 0, 1, 0]]);
    let (u, blocks, l) =
        solve_u_blockwise(&a, &[v1, v2], LossSpec::L0, Semiring::Integer).unwrap();
    assert_eq!(l, 0.0);
    assert_eq!(blocks, vec![1]);
    assert!(!u.get(0, 0) && u.get(0, 1));
}

#[test]
fn blockwise_matches_per_row_exhaustion() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = random_bin(8, 5, 0.5, &mut rng);
    let v1 = random_bin(2, 5, 0.5, &mut rng);
    let v2 = random_bin(2, 5, 0.5, &mut rng);
    let (u, blocks, total) =
        solve_u_blockwise(&a, &[v1.clone(), v2.clone()], LossSpec::Frobenius, Semiring::Integer).unwrap();
    // independent exhaustion per row
    let mut want_total = 0.0;
    for i in 0..a.n_rows() {
        let target = a.select_rows(&[i]);
        let mut best = f64::INFINITY;
        for (vj, _) in [(&v1, 0), (&v2, 1)] {
            for bits in 0u64..4 {
                let u_row = BinMatrix::from_fn(1, 2, |_, l| (bits >> l) & 1 == 1);
                let p = product(&u_row, vj, Semiring::Integer).unwrap();
                best = best.min(loss(&target, &p, LossSpec::Frobenius).unwrap());
            }
        }
        want_total += best;
        // also confirm the written row realizes the claimed block
        let b = blocks[i];
        for l in 0..2 {
            let expect = u.get(i, b * 2 + l);
            let outside: bool = (0..4).filter(|&c| c / 2 != b).any(|c| u.get(i, c));
            assert!(!outside || expect || true); // nonzeros confined checked below
        }
    }
    assert_eq!(total, want_total);
    // each row's nonzeros confined to its chosen block
    for i in 0..a.n_rows() {
        for c in 0..4 {
            if c / 2 != blocks[i] {
                assert!(!u.get(i, c));
            }
        }
    }
}

#[test]
fn brute_force_identity_2x2_k1_costs_one() {
    let a = BinMatrix::identity(2);
    let f = brute_force_bmf(&a, 1, LossSpec::Frobenius, Semiring::Integer).unwrap();
    // independent oracle: enumerate all 2^2 V and all 2^2 U
    let mut oracle = f64::INFINITY;
    for vb in 0u64..4 {
        let v = BinMatrix::from_fn(1, 2, |_, j| (vb >> j) & 1 == 1);
        oracle = oracle.min(joint_u_oracle(&a, &v, LossSpec::Frobenius, Semiring::Integer));
    }
    assert_eq!(oracle, 1.0);
    assert_eq!(f.achieved_loss, 1.0);
    f.verify(&a).unwrap();
}

#[test]
fn brute_force_zero_on_expressible_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_bin(6, 2, 0.5, &mut rng);
    let v = random_bin(2, 4, 0.5, &mut rng);
    let a = match product(&u, &v, Semiring::Gf2).unwrap() {
        ProductMatrix::Bin(b) => b,
        _ => unreachable!(),
    };
    let f = brute_force_bmf(&a, 2, LossSpec::L0, Semiring::Gf2).unwrap();
    assert_eq!(f.achieved_loss, 0.0);
}

#[test]
fn brute_force_monotone_in_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let a = random_bin(5, 4, 0.5, &mut rng);
        let l1 = brute_force_bmf(&a, 1, LossSpec::Frobenius, Semiring::Integer).unwrap().achieved_loss;
        let l2 = brute_force_bmf(&a, 2, LossSpec::Frobenius, Semiring::Integer).unwrap().achieved_loss;
        assert!(l2 <= l1);
    }
}

#[test]
fn brute_force_guard() {
    let a = BinMatrix::zeros(4, 13);
    assert!(matches!(
        brute_force_bmf(&a, 2, LossSpec::Frobenius, Semiring::Integer),
        Err(crate::Error::TooLarge(_))
    ));
}

#[test]
fn alternation_is_non_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_bin(10, 6, 0.5, &mut rng);
    let v0 = random_bin(3, 6, 0.5, &mut rng);
    let (_, l0) = solve_u_given_v(&a, &v0, LossSpec::Frobenius, Semiring::Integer).unwrap();
    let (_, _, l) = alternate_from(&a, v0, LossSpec::Frobenius, Semiring::Integer, 10).unwrap();
    assert!(l <= l0);
}

#[test]
fn group_partition_levels() {
    let weights = vec![1u64, 1, 2, 3, 7, 8, 100];
    let part = partition_by_weight(&weights, 0.5);
    // every weight in exactly one group
    let mut seen = vec![false; weights.len()];
    for (level, members) in &part.groups {
        for &i in members {
            assert!(!seen[i]);
            seen[i] = true;
            let w = weights[i] as f64;
            let lo = part.base.powi(*level as i32);
            let hi = part.base.powi(*level as i32 + 1);
            assert!(w >= lo - 1e-9 && w < hi, "w={w} level={level}");
        }
    }
    assert!(seen.iter().all(|&s| s));
    let max_w = 100f64;
    let bound = (max_w.ln() / part.base.ln()).ceil() as usize + 1;
    assert!(part.groups.len() <= bound);
}

#[test]
fn kbmf_exact_when_k_covers_distinct_rows() {
    let base = m(&[&[1, 0, 1, 0], &[0, 1, 0, 1], &[1, 1, 1, 1]]);
    let a = base.select_rows(&[0, 1, 2, 0, 1, 2, 1, 0]);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = kbmf(&a, 3, Semiring::Integer, &mut rng).unwrap();
    assert_eq!(f.achieved_loss, 0.0);
    f.verify(&a).unwrap();
}

#[test]
fn kbmf_v_rows_are_data_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_bin(30, 6, 0.4, &mut rng);
    let f = kbmf(&a, 4, Semiring::Integer, &mut rng).unwrap();
    let originals: std::collections::HashSet<Vec<u8>> = a.rows_as_vecs().into_iter().collect();
    for r in f.v.rows_as_vecs() {
        assert!(originals.contains(&r));
    }
}

#[test]
fn kbmf_plus_never_worse_than_kbmf() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..10 {
        let a = random_bin(25, 8, 0.5, &mut rng);
        let mut r1 = ChaCha8Rng::seed_from_u64(100 + trial);
        let mut r2 = ChaCha8Rng::seed_from_u64(100 + trial);
        let f1 = kbmf(&a, 3, Semiring::Integer, &mut r1).unwrap();
        let f2 = kbmf_plus(&a, 3, Semiring::Integer, &mut r2).unwrap();
        assert!(f2.achieved_loss <= f1.achieved_loss, "trial {trial}");
    }
}

#[test]
fn frobenius_solver_exact_on_structured_input() {
    // at most 2^k distinct rows with an exact rank-k binary structure
    let v = m(&[&[1, 1, 0, 0, 1], &[0, 0, 1, 1, 0]]);
    let u = BinMatrix::from_fn(12, 2, |i, l| (i >> l) & 1 == 1);
    let a = match product(&u, &v, Semiring::Integer).unwrap() {
        ProductMatrix::Int(p) => BinMatrix::from_fn(p.n_rows, p.n_cols, |i, j| p.get(i, j) >= 1),
        _ => unreachable!(),
    };
    // u rows are 0/1 one-bit-per-block here, so the boolean view is exact for
    // the integer product as well when u has a single set bit; restrict rows.
    let rows: Vec<usize> = (0..12).filter(|i| (i & 3 == 1) || (i & 3 == 2) || (i & 3 == 0)).collect();
    let a = a.select_rows(&rows);
    for mode in [FrobeniusMode::GuessEnumeration, FrobeniusMode::SketchSampled] {
        let f = frobenius_coreset_solver(&a, 2, 0.5, mode, 17).unwrap();
        assert_eq!(f.achieved_loss, 0.0, "{mode:?}");
        f.verify(&a).unwrap();
    }
}

#[test]
fn frobenius_guess_mode_near_optimal_on_tiny_instances() {
    let mut ok = 0;
    let total = 8;
    let cfg = FrobeniusConfig { coreset_target: Some(8), ..Default::default() };
    for trial in 0..total {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + trial);
        let a = random_bin(10, 4, 0.5, &mut rng);
        let f = frobenius_coreset_solver_with(&a, 1, 0.5, FrobeniusMode::GuessEnumeration, &cfg, 300 + trial)
            .unwrap();
        let opt = brute_force_bmf(&a, 1, LossSpec::Frobenius, Semiring::Integer).unwrap().achieved_loss;
        if f.achieved_loss <= (1.0 + 6.0 * 0.5) * opt + 1e-9 {
            ok += 1;
        }
    }
    assert!(ok >= total - 1, "{ok}/{total} within (1+6eps)");
}

#[test]
fn frobenius_coreset_passthrough_matches_default() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = random_bin(10, 4, 0.5, &mut rng);
    let cfg_explicit = FrobeniusConfig { coreset_target: Some(10), ..Default::default() };
    let f1 = frobenius_coreset_solver_with(&a, 1, 0.5, FrobeniusMode::SketchSampled, &cfg_explicit, 7).unwrap();
    let f2 = frobenius_coreset_solver(&a, 1, 0.5, FrobeniusMode::SketchSampled, 7).unwrap();
    assert_eq!(f1.u, f2.u);
    assert_eq!(f1.v, f2.v);
    assert_eq!(f1.achieved_loss, f2.achieved_loss);
}

#[test]
fn gf2_solver_zero_loss_on_exact_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let u0 = random_bin(9, 2, 0.5, &mut rng);
    let v0 = random_bin(2, 4, 0.5, &mut rng);
    let a = match product(&u0, &v0, Semiring::Gf2).unwrap() {
        ProductMatrix::Bin(b) => b,
        _ => unreachable!(),
    };
    let f = gf2_bicriteria_solver(&a, 2, 0.5, 21).unwrap();
    assert_eq!(f.achieved_loss, 0.0);
    assert_eq!(f.semiring, Semiring::Gf2);
    f.verify(&a).unwrap();
}

#[test]
fn gf2_solver_block_structure_and_bound() {
    let mut within = 0;
    let total = 8;
    for trial in 0..total {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + trial);
        let a = random_bin(9, 4, 0.5, &mut rng);
        let k = 1;
        let f = gf2_bicriteria_solver(&a, k, 0.5, 500 + trial).unwrap();
        let ell = f.k_actual / k;
        assert_eq!(f.k_actual % k, 0);
        // nonzeros confined to one k-block per row
        for i in 0..f.u.n_rows() {
            let blocks_used: std::collections::HashSet<usize> =
                (0..f.k_actual).filter(|&c| f.u.get(i, c)).map(|c| c / k).collect();
            assert!(blocks_used.len() <= 1, "row {i} uses {blocks_used:?} of {ell} blocks");
        }
        let opt = brute_force_bmf(&a, 1, LossSpec::L0, Semiring::Gf2).unwrap().achieved_loss;
        if f.achieved_loss <= 1.5f64.powi(5) * opt + 1e-9 {
            within += 1;
        }
    }
    assert!(within >= total - 1, "{within}/{total} within (1+eps)^5");
}

#[test]
fn lp_loss_value_matches_frobenius_at_p2() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let a = random_bin(8, 5, 0.5, &mut rng);
    let u = random_bin(8, 2, 0.5, &mut rng);
    let v = random_bin(2, 5, 0.5, &mut rng);
    let p = product(&u, &v, Semiring::Integer).unwrap();
    assert_eq!(
        loss(&a, &p, LossSpec::Lp(2.0)).unwrap(),
        loss(&a, &p, LossSpec::Frobenius).unwrap()
    );
}

#[test]
fn lp_loss_p_independent_for_binary_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let a = random_bin(8, 5, 0.5, &mut rng);
    let u = random_bin(8, 2, 0.5, &mut rng);
    let v = random_bin(2, 5, 0.5, &mut rng);
    let p = product(&u, &v, Semiring::Boolean).unwrap();
    assert_eq!(
        loss(&a, &p, LossSpec::Lp(1.0)).unwrap(),
        loss(&a, &p, LossSpec::Lp(3.0)).unwrap()
    );
}

#[test]
fn lp_solver_near_optimal_on_tiny_instances() {
    let mut within = 0;
    let total = 8;
    for trial in 0..total {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + trial);
        let a = random_bin(8, 4, 0.5, &mut rng);
        let f = lp_bicriteria_solver(&a, 1, 1.0, 0.5, 700 + trial).unwrap();
        f.verify(&a).unwrap();
        let opt = brute_force_bmf(&a, 1, LossSpec::Lp(1.0), Semiring::Integer).unwrap().achieved_loss;
        if f.achieved_loss <= 1.5f64.powi(6) * opt + 1e-9 {
            within += 1;
        }
    }
    assert!(within >= total - 1, "{within}/{total} within (1+eps)^6");
}

#[test]
fn solvers_are_deterministic_given_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let a = random_bin(12, 5, 0.5, &mut rng);
    let f1 = frobenius_coreset_solver(&a, 2, 0.5, FrobeniusMode::SketchSampled, 99).unwrap();
    let f2 = frobenius_coreset_solver(&a, 2, 0.5, FrobeniusMode::SketchSampled, 99).unwrap();
    assert_eq!(f1.u, f2.u);
    assert_eq!(f1.v, f2.v);
    let g1 = gf2_bicriteria_solver(&a, 1, 0.5, 42).unwrap();
    let g2 = gf2_bicriteria_solver(&a, 1, 0.5, 42).unwrap();
    assert_eq!(g1.u, g2.u);
    assert_eq!(g1.v, g2.v);
}

mod conditional_optimality {
    use super::*;
    use proptest::prelude::*;

    // No V (or U) strictly beats the conditional solve, over random
    // instances small enough to exhaust.
    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn no_better_v_exists(
            abits in prop::collection::vec(0u8..=1, 24),
            ubits in prop::collection::vec(0u8..=1, 12),
            semiring_pick in 0u8..3,
        ) {
            let a = BinMatrix::from_fn(6, 4, |i, j| abits[i * 4 + j] == 1);
            let u = BinMatrix::from_fn(6, 2, |i, l| ubits[i * 2 + l] == 1);
            let semiring = match semiring_pick {
                0 => Semiring::Integer,
                1 => Semiring::Boolean,
                _ => Semiring::Gf2,
            };
            let (_, got) = solve_v_given_u(&a, &u, LossSpec::Frobenius, semiring).unwrap();
            for bits in 0u64..1 << 8 {
                let v = BinMatrix::from_fn(2, 4, |l, j| (bits >> (l * 4 + j)) & 1 == 1);
                let p = product(&u, &v, semiring).unwrap();
                prop_assert!(loss(&a, &p, LossSpec::Frobenius).unwrap() >= got);
            }
        }

        #[test]
        fn no_better_u_row_exists(
            abits in prop::collection::vec(0u8..=1, 20),
            vbits in prop::collection::vec(0u8..=1, 15),
        ) {
            let a = BinMatrix::from_fn(4, 5, |i, j| abits[i * 5 + j] == 1);
            let v = BinMatrix::from_fn(3, 5, |l, j| vbits[l * 5 + j] == 1);
            let (_, got) = solve_u_given_v(&a, &v, LossSpec::Lp(1.0), Semiring::Integer).unwrap();
            for bits in 0u64..1 << 12 {
                let u = BinMatrix::from_fn(4, 3, |i, l| (bits >> (i * 3 + l)) & 1 == 1);
                let p = product(&u, &v, Semiring::Integer).unwrap();
                prop_assert!(loss(&a, &p, LossSpec::Lp(1.0)).unwrap() >= got);
            }
        }
    }
}

#[test]
fn blockwise_coordinate_weights_match_expanded_targets() {
    // Coordinate weights scale per-column contributions; duplicating each
    // coordinate w times must give the same choices and loss.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let weights = [2usize, 1, 3, 1];
    let a = random_bin(6, 4, 0.5, &mut rng);
    let v1 = random_bin(2, 4, 0.5, &mut rng);
    let v2 = random_bin(2, 4, 0.5, &mut rng);

    let wreal: Vec<f64> = weights.iter().map(|&w| w as f64).collect();
    let (u_w, blocks_w, loss_w) = solve_u_blockwise_weighted(
        &a,
        &[v1.clone(), v2.clone()],
        LossSpec::Lp(1.0),
        Semiring::Integer,
        Some(&wreal),
    )
    .unwrap();

    let dup: Vec<usize> = weights
        .iter()
        .enumerate()
        .flat_map(|(j, &w)| std::iter::repeat(j).take(w))
        .collect();
    let a_e = a.select_cols(&dup);
    let v1_e = v1.select_cols(&dup);
    let v2_e = v2.select_cols(&dup);
    let (_, blocks_e, loss_e) =
        solve_u_blockwise(&a_e, &[v1_e, v2_e], LossSpec::Lp(1.0), Semiring::Integer).unwrap();
    assert_eq!(blocks_w, blocks_e);
    assert_eq!(loss_w, loss_e);
    assert_eq!(u_w.n_cols(), 4);
}

#[test]
fn kmeans_rejects_k_beyond_rows() {
    let x = WeightedRows::unit(BinMatrix::identity(3));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(crate::clustering::kmeans_pp_lloyd(&x, 4, 5, &mut rng).is_err());
    assert!(crate::clustering::kmeans_pp_lloyd(&x, 0, 5, &mut rng).is_err());
}

#[test]
fn factorization_save_round_trip_fields() {
    let dir = tempfile::tempdir().unwrap();
    let a = BinMatrix::identity(3);
    let f = brute_force_bmf(&a, 1, LossSpec::Frobenius, Semiring::Integer).unwrap();
    f.save(dir.path(), 5).unwrap();
    let u = BinMatrix::from_csv_file(dir.path().join("U.csv")).unwrap();
    let v = BinMatrix::from_csv_file(dir.path().join("V.csv")).unwrap();
    assert_eq!(u, f.u);
    assert_eq!(v, f.v);
    let meta = std::fs::read_to_string(dir.path().join("meta.tsv")).unwrap();
    assert!(meta.contains(&format!("achieved_loss\t{}", f.achieved_loss)));
    assert!(meta.contains("seed\t5"));
}
