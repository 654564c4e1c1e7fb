mod common;

use common::random_matrix;
use fairalloc::{read_matrix_market, write_matrix_market, Error};
use proptest::prelude::*;

#[test]
fn only_general_real_files_are_accepted() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 1 3\n";
    assert!(matches!(
        read_matrix_market(text.as_bytes()),
        Err(Error::Parse { line: 1, .. })
    ));
}

#[test]
fn errors_carry_line_numbers() {
    let text = "%%MatrixMarket matrix coordinate real general\n% note\n2 2 2\n1 1 1\n2 x 1\n";
    match read_matrix_market(text.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(seed in 0u64..100_000, width in 1.0f64..1e6) {
        let a = random_matrix(seed, 20, width);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &a).unwrap();
        let b = read_matrix_market(buf.as_slice()).unwrap();
        prop_assert_eq!(a.rows(), b.rows());
        prop_assert_eq!(a.cols(), b.cols());
        let bits = |m: &fairalloc::SparseNonnegMatrix| {
            m.triplets().map(|(i, j, v)| (i, j, v.to_bits())).collect::<Vec<_>>()
        };
        prop_assert_eq!(bits(&a), bits(&b));
    }
}
