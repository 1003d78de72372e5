//! Bit-packed binary matrices, the three semiring products, and entrywise
//! losses.
//!
//! ```bash
//! cargo run --example semiring_products
//! ```

use bmf::binmat::{distinct_rows, loss, product, BinMatrix, LossSpec, Semiring};

fn main() {
    let u = BinMatrix::from_rows(&[vec![1, 1], vec![1, 0], vec![0, 1]]).unwrap();
    let v = BinMatrix::from_rows(&[vec![1, 0, 1], vec![1, 1, 0]]).unwrap();

    println!("U =\n{u:?}");
    println!("V =\n{v:?}");

    for semiring in [Semiring::Integer, Semiring::Boolean, Semiring::Gf2] {
        let p = product(&u, &v, semiring).unwrap();
        print!("U*V over {:<8}:", semiring.name());
        for i in 0..3 {
            print!("  [");
            for j in 0..3 {
                print!("{} ", p.entry(i, j));
            }
            print!("]");
        }
        println!();
    }

    // Entrywise losses are reported in power form (squared Frobenius, p-th
    // power L_p); with binary predictions all of them count mismatches.
    let a = BinMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 0], vec![1, 1, 1]]).unwrap();
    let p_gf2 = product(&u, &v, Semiring::Gf2).unwrap();
    for spec in [LossSpec::Frobenius, LossSpec::Lp(1.0), LossSpec::Lp(3.0), LossSpec::L0] {
        println!("loss(A, U*V mod 2, {:?}) = {}", spec.name(), loss(&a, &p_gf2, spec).unwrap());
    }

    // Row deduplication keeps multiplicities and an index map.
    let dup = a.select_rows(&[0, 1, 0, 2, 1, 0]);
    let (uniq, mult, map) = distinct_rows(&dup);
    println!("distinct rows: {} uniques, multiplicities {mult:?}, index map {map:?}", uniq.n_rows());

    // CSV round trip is bit exact.
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    assert_eq!(BinMatrix::read_csv(&buf[..]).unwrap(), a);
    println!("csv round trip ok ({} bytes)", buf.len());
}
