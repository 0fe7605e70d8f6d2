use lsckit::boolfourier::{self, BoolFunction};
use lsckit::bounds;
use lsckit::cipher::{self, CipherContainer, Keystream};
use lsckit::galois::Field;
use lsckit::lsc::LscCode;
use proptest::prelude::*;

fn field_order() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 4, 7, 8, 13, 16, 251, 256, 257, 65537])
}

proptest! {
    #[test]
    fn field_axioms(q in field_order(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let f = Field::with_order(q).unwrap();
        let (a, b, c) = ((a % q) as u32, (b % q) as u32, (c % q) as u32);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        match f.inv(a) {
            Some(ia) => prop_assert_eq!(f.mul(a, ia), 1),
            None => prop_assert_eq!(a, 0),
        }
    }

    #[test]
    fn coset_solution_reproduces_input(
        (q, n, k) in prop::sample::select(vec![(5u64, 4usize, 2usize), (7, 6, 3), (16, 15, 5), (257, 20, 8)]),
        seed in any::<u64>(),
    ) {
        let code = LscCode::new(&Field::with_order(q).unwrap(), n, k).unwrap();
        let x: Vec<u32> = (0..n as u64).map(|i| (seed.wrapping_mul(i * 2 + 1).rotate_left(i as u32) % q) as u32).collect();
        let sigma = code.encode(&x).unwrap();
        let digits = code.position_digits(&x).unwrap();
        prop_assert_eq!(code.solve_block(&sigma, &digits).unwrap(), x);
    }

    #[test]
    fn z_n_monotone_in_b(a in prop::collection::vec(0.01f64..3.0, 1..6), seed in prop::collection::vec(0.0f64..=1.0, 6), bump in 0.0f64..0.5) {
        let b: Vec<f64> = seed[..a.len()].to_vec();
        let raised: Vec<f64> = b.iter().map(|v| (v + bump).min(1.0)).collect();
        let lo = bounds::z_n(&a, &b).unwrap();
        let hi = bounds::z_n(&a, &raised).unwrap();
        prop_assert!(lo <= hi + 1e-12);
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(hi <= norm + 1e-12);
    }

    #[test]
    fn fourier_inverse_round_trip(n in 1usize..8, table in any::<u64>()) {
        let f = BoolFunction::from_fn(n, |x| table.rotate_left(x) & 1 == 0).unwrap();
        let spec = boolfourier::fourier_transform(&f).unwrap();
        prop_assert!((spec.norm_sq() - 1.0).abs() < 1e-12);
        prop_assert_eq!(boolfourier::inverse_boolean(&spec).unwrap(), f);
    }

    #[test]
    fn container_round_trip(data in prop::collection::vec(any::<u8>(), 0..400), key in prop::collection::vec(any::<u8>(), 1..40)) {
        let code = LscCode::new(&Field::with_order(16).unwrap(), 15, 5).unwrap();
        let c = cipher::two_phase_encrypt(&code, &data, &key, Keystream::Test).unwrap();
        let parsed = CipherContainer::from_bytes(&c.to_bytes()).unwrap();
        prop_assert_eq!(cipher::two_phase_decrypt(&parsed, &key).unwrap(), data);
    }
}
