mod common;

use hstream_core::gf2::{dot, enumerate, rank, solve_affine, BitMatrix, BitVector};
use hstream_core::Error;
use proptest::prelude::*;

fn vector(n: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(any::<bool>(), n).prop_map(|b| BitVector::from_bools(&b))
}

fn system() -> impl Strategy<Value = (usize, Vec<BitVector>, BitVector)> {
    (0usize..=12).prop_flat_map(|n| {
        (0usize..=14).prop_flat_map(move |r| {
            (Just(n), proptest::collection::vec(vector(n), r), vector(r))
        })
    })
}

fn satisfies(rows: &[BitVector], rhs: &BitVector, x: &BitVector) -> bool {
    rows.iter().enumerate().all(|(i, row)| dot(row, x).unwrap() == rhs.get(i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solve_matches_exhaustive_scan((n, rows, rhs) in system()) {
        let m = BitMatrix::from_rows(n, rows.clone()).unwrap();
        let expected: Vec<BitVector> =
            common::all_words(n).filter(|x| satisfies(&rows, &rhs, x)).collect();
        match solve_affine(&m, &rhs) {
            Err(Error::Inconsistent) => prop_assert!(expected.is_empty()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(space) => {
                let mut got = enumerate(&space, 1 << 12).unwrap();
                prop_assert!(got.iter().all(|x| satisfies(&rows, &rhs, x)));
                got.sort();
                let mut want = expected.clone();
                want.sort();
                prop_assert_eq!(&got, &want);
                // rank-nullity
                prop_assert_eq!(got.len() << rank(&m), 1usize << n);
                prop_assert_eq!(space.dimension(), n - rank(&m));
            }
        }
    }

    #[test]
    fn dot_is_bilinear(u in vector(70), u2 in vector(70), v in vector(70)) {
        let sum = u.xor(&u2).unwrap();
        prop_assert_eq!(dot(&sum, &v).unwrap(), dot(&u, &v).unwrap() ^ dot(&u2, &v).unwrap());
        prop_assert_eq!(dot(&u, &v).unwrap(), dot(&v, &u).unwrap());
    }

    #[test]
    fn rank_bounded_by_shape(rows in proptest::collection::vec(vector(9), 0..12)) {
        let r = rows.len();
        let m = BitMatrix::from_rows(9, rows).unwrap();
        prop_assert!(rank(&m) <= r.min(9));
    }
}
