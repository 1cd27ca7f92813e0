use num_bigint::BigInt;
use proptest::prelude::*;

use fracpoisson::pascal::{apply_inverse_pascal, apply_pascal, SignedVector, Signing};

fn ints(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1_000_000i64..=1_000_000, 1..=max_len)
}

proptest! {
    #[test]
    fn roundtrip_is_exact(v in ints(60)) {
        let v: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
        let sv = SignedVector::plain(v.clone()).unwrap();
        let back = apply_inverse_pascal(&apply_pascal(&sv).unwrap()).unwrap();
        prop_assert_eq!(back.entries(), v.as_slice());
    }

    #[test]
    fn inverse_then_forward_is_exact(v in ints(60)) {
        let v: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
        let sv = SignedVector::new(v.clone(), Signing::Alternating).unwrap();
        let back = apply_pascal(&apply_inverse_pascal(&sv).unwrap()).unwrap();
        prop_assert_eq!(back.entries(), v.as_slice());
    }

    #[test]
    fn truncation_is_exact(v in ints(30), pad in 1usize..30) {
        let v: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
        let short = apply_pascal(&SignedVector::plain(v.clone()).unwrap()).unwrap();
        let mut padded = v.clone();
        padded.resize(v.len() + pad, BigInt::from(0));
        let long = apply_pascal(&SignedVector::plain(padded).unwrap()).unwrap();
        prop_assert_eq!(short.entries(), &long.entries()[..v.len()]);
    }
}
