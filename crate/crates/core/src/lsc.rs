//! Linear list-source codes: syndrome encoding with an MDS parity-check
//! matrix, coset ranking, and rate-list accounting.
//!
//! A code is the pair `(H, D)` where `H` is an `(n-k) x n` parity-check
//! matrix and `D` a `k x n` completion so that `[H; D]` is invertible. The
//! encoder publishes `σ = H x`; the decoder's list is the coset
//! `{x : H x = σ}` of size `q^k`. Within a coset, elements are ranked by the
//! base-q integer value of `D x` (most significant digit first).

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::galois::{complete_basis, rs_parity_check, Field, FieldElement, FqMatrix, GaloisError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LscError {
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coset index out of range (list size {list_size})")]
    IndexOutOfRange { list_size: BigUint },
    #[error("value out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, LscError>;

/// The published part of an encoded block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syndrome(pub Vec<FieldElement>);

impl Syndrome {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Base-q integer value, most significant symbol first.
    pub fn to_index(&self, q: u32) -> BigUint {
        digits_to_integer(&self.0, q)
    }
}

/// Reads `digits` as a base-q integer, most significant digit first.
pub fn digits_to_integer(digits: &[FieldElement], q: u32) -> BigUint {
    let q = BigUint::from(q);
    digits.iter().fold(BigUint::zero(), |acc, &d| acc * &q + BigUint::from(d))
}

/// Inverse of [`digits_to_integer`] with a fixed number of digits; `None` if
/// the value does not fit.
pub fn integer_to_digits(value: &BigUint, q: u32, len: usize) -> Option<Vec<FieldElement>> {
    let mut out = vec![0; len];
    let mut v = value.clone();
    let qb = BigUint::from(q);
    for slot in out.iter_mut().rev() {
        let r = &v % &qb;
        *slot = r.to_u32().expect("remainder below q");
        v /= &qb;
    }
    v.is_zero().then_some(out)
}

/// Number of bits needed to store any value in `[0, q^e)`, i.e. `⌈e log2 q⌉`.
pub fn packed_bits(q: u32, e: usize) -> u64 {
    let total = BigUint::from(q).pow(e as u32);
    (total - 1u32).bits()
}

#[derive(Debug, Clone)]
pub struct LscCode {
    field: Field,
    n: usize,
    k: usize,
    h: FqMatrix,
    d: FqMatrix,
    /// Inverse of `[H; D]`, used to solve for coset elements.
    stacked_inverse: FqMatrix,
}

impl LscCode {
    /// MDS code: Vandermonde parity check plus deterministic completion.
    pub fn new(field: &Field, n: usize, k: usize) -> Result<Self> {
        let h = rs_parity_check(n, k, field)?;
        Self::from_parity_check(h)
    }

    /// Any full-row-rank parity-check matrix; the completion is computed.
    pub fn from_parity_check(h: FqMatrix) -> Result<Self> {
        let d = complete_basis(&h)?;
        let stacked_inverse = h.vstack(&d)?.inverse()?;
        Ok(LscCode {
            field: h.field().clone(),
            n: h.cols(),
            k: h.cols() - h.rows(),
            h,
            d,
            stacked_inverse,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parity_check(&self) -> &FqMatrix {
        &self.h
    }

    pub fn completion(&self) -> &FqMatrix {
        &self.d
    }

    /// `q^k`, the number of candidates per syndrome.
    pub fn list_size(&self) -> BigUint {
        BigUint::from(self.q()).pow(self.k as u32)
    }

    /// `k / n` for the alphabet GF(q).
    pub fn normalized_list_size(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Bits needed per block to store a syndrome: `⌈(n-k) log2 q⌉`.
    pub fn syndrome_bits(&self) -> u64 {
        packed_bits(self.q(), self.n - self.k)
    }

    /// Bits needed per block to store a coset position: `⌈k log2 q⌉`.
    pub fn position_bits(&self) -> u64 {
        packed_bits(self.q(), self.k)
    }

    fn check_len(&self, x: &[FieldElement]) -> Result<()> {
        if x.len() != self.n {
            return Err(LscError::LengthMismatch { expected: self.n, got: x.len() });
        }
        for &v in x {
            self.field.check(v as u64)?;
        }
        Ok(())
    }

    pub fn encode(&self, x: &[FieldElement]) -> Result<Syndrome> {
        self.check_len(x)?;
        Ok(Syndrome(self.h.mul_vec(x)?))
    }

    /// `D x`, the digits of the coset position.
    pub fn position_digits(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.check_len(x)?;
        Ok(self.d.mul_vec(x)?)
    }

    pub fn pos(&self, x: &[FieldElement]) -> Result<BigUint> {
        Ok(digits_to_integer(&self.position_digits(x)?, self.q()))
    }

    /// Solves `[H; D] x = [σ; digits]`.
    pub fn solve_block(
        &self,
        syndrome: &Syndrome,
        digits: &[FieldElement],
    ) -> Result<Vec<FieldElement>> {
        if syndrome.len() != self.n - self.k {
            return Err(LscError::LengthMismatch { expected: self.n - self.k, got: syndrome.len() });
        }
        if digits.len() != self.k {
            return Err(LscError::LengthMismatch { expected: self.k, got: digits.len() });
        }
        let mut rhs = syndrome.0.clone();
        rhs.extend_from_slice(digits);
        for &v in &rhs {
            self.field.check(v as u64)?;
        }
        Ok(self.stacked_inverse.mul_vec(&rhs)?)
    }

    /// The element of coset `σ` at rank `index`.
    pub fn coset_element(&self, syndrome: &Syndrome, index: &BigUint) -> Result<Vec<FieldElement>> {
        let digits = integer_to_digits(index, self.q(), self.k)
            .ok_or_else(|| LscError::IndexOutOfRange { list_size: self.list_size() })?;
        self.solve_block(syndrome, &digits)
    }

    /// Convenience wrapper for small codes.
    pub fn coset_element_u64(&self, syndrome: &Syndrome, index: u64) -> Result<Vec<FieldElement>> {
        self.coset_element(syndrome, &BigUint::from(index))
    }
}

/// `R(L) = H(X) - L log2|X|` in bits per symbol.
pub fn rate_list_function(source_entropy: f64, alphabet_size: u64, list: f64) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(LscError::OutOfRange(format!("alphabet size {alphabet_size}")));
    }
    let log_x = (alphabet_size as f64).log2();
    if !(0.0..=log_x + 1e-12).contains(&source_entropy) {
        return Err(LscError::OutOfRange(format!("entropy {source_entropy}")));
    }
    let max_list = source_entropy / log_x;
    if !(list >= 0.0 && list <= max_list + 1e-12) {
        return Err(LscError::OutOfRange(format!("L = {list} outside [0, {max_list}]")));
    }
    Ok((source_entropy - list * log_x).max(0.0))
}

/// Reference scheme that keeps the first `n - ⌊L n⌋` symbols and discards
/// the rest. It reaches the optimal rate-list tradeoff but concentrates all
/// of the uncertainty on the discarded suffix.
pub fn trivial_prefix_encode<T: Clone>(x: &[T], list: f64) -> Vec<T> {
    let n = x.len();
    let dropped = ((list.clamp(0.0, 1.0) * n as f64) + 1e-9).floor() as usize;
    x[..n - dropped.min(n)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn gf(q: u64) -> Field {
        Field::with_order(q).unwrap()
    }

    fn all_vectors(q: u32, n: usize) -> impl Iterator<Item = Vec<u32>> {
        let total = (q as u64).pow(n as u32);
        (0..total).map(move |mut v| {
            let mut x = vec![0; n];
            for slot in x.iter_mut().rev() {
                *slot = (v % q as u64) as u32;
                v /= q as u64;
            }
            x
        })
    }

    #[test]
    fn construction_examples() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        assert_eq!(code.normalized_list_size(), 0.5);
        assert_eq!(code.list_size(), BigUint::from(25u32));

        let code = LscCode::new(&gf(2), 2, 1).unwrap();
        assert_eq!(code.parity_check().to_rows(), vec![vec![1, 1]]);
        assert_eq!(code.completion().to_rows(), vec![vec![1, 0]]);

        assert!(matches!(
            LscCode::new(&gf(5), 6, 2),
            Err(LscError::Galois(GaloisError::BlockTooLong { n: 6, q: 5 }))
        ));
    }

    #[test]
    fn encode_examples() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        assert_eq!(code.encode(&[0; 4]).unwrap(), Syndrome(vec![0, 0]));
        assert_eq!(code.encode(&[1, 0, 0, 0]).unwrap(), Syndrome(vec![1, 1]));
        assert_eq!(
            code.encode(&[1, 0, 0]).unwrap_err(),
            LscError::LengthMismatch { expected: 4, got: 3 }
        );
    }

    #[test]
    fn zero_coset_is_the_code() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        let zero = Syndrome(vec![0, 0]);
        // brute-force kernel of H
        let kernel: HashSet<Vec<u32>> =
            all_vectors(5, 4).filter(|x| code.encode(x).unwrap() == zero).collect();
        assert_eq!(kernel.len(), 25);
        let listed: HashSet<Vec<u32>> =
            (0..25).map(|i| code.coset_element_u64(&zero, i).unwrap()).collect();
        assert_eq!(listed, kernel);
        let x = code.coset_element_u64(&zero, 0).unwrap();
        assert_eq!(code.pos(&x).unwrap(), BigUint::zero());
    }

    #[test]
    fn index_out_of_range() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        let err = code.coset_element_u64(&Syndrome(vec![0, 0]), 25).unwrap_err();
        assert!(matches!(err, LscError::IndexOutOfRange { .. }));
    }

    #[test]
    fn round_trip_and_partition_exhaustive() {
        for (q, n, k) in [(5u64, 4, 2), (7, 6, 3), (8, 4, 2), (2, 2, 1), (3, 3, 1), (4, 3, 2)] {
            let code = LscCode::new(&gf(q), n, k).unwrap();
            let q = q as u32;
            let mut coset_sizes = std::collections::HashMap::new();
            for x in all_vectors(q, n) {
                let s = code.encode(&x).unwrap();
                let p = code.pos(&x).unwrap();
                assert_eq!(code.coset_element(&s, &p).unwrap(), x);
                *coset_sizes.entry(s).or_insert(0u64) += 1;
            }
            assert_eq!(coset_sizes.len() as u64, (q as u64).pow((n - k) as u32));
            assert!(coset_sizes.values().all(|&c| c == (q as u64).pow(k as u32)));
        }
    }

    #[test]
    fn mds_restriction_is_bijective() {
        for (q, n, k) in [(5u64, 4, 2), (7, 6, 3), (7, 5, 2), (4, 3, 1), (5, 5, 3)] {
            let code = LscCode::new(&gf(q), n, k).unwrap();
            let q = q as u32;
            let positions: Vec<Vec<usize>> = (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
                .collect();
            for syn in all_vectors(q, n - k) {
                let s = Syndrome(syn);
                let coset: Vec<Vec<u32>> = (0..(q as u64).pow(k as u32))
                    .map(|i| code.coset_element_u64(&s, i).unwrap())
                    .collect();
                for pos in &positions {
                    let images: HashSet<Vec<u32>> =
                        coset.iter().map(|x| pos.iter().map(|&i| x[i]).collect()).collect();
                    assert_eq!(images.len(), coset.len());
                }
            }
        }
    }

    #[test]
    fn rate_accounting() {
        for (q, n, k) in [(5u64, 4, 2), (7, 6, 3), (256, 255, 64), (3, 3, 1)] {
            let code = LscCode::new(&gf(q), n, k).unwrap();
            let expected = ((n - k) as f64 * (q as f64).log2() - 1e-9).ceil() as u64;
            assert_eq!(code.syndrome_bits(), expected);
        }
        assert_eq!(packed_bits(256, 191), 191 * 8);
    }

    #[test]
    fn rate_list_examples() {
        let h = 5f64.log2();
        assert!((rate_list_function(h, 5, 0.5).unwrap() - 1.160964047443681).abs() < 1e-12);
        assert_eq!(rate_list_function(h, 5, 0.0).unwrap(), h);
        assert_eq!(rate_list_function(1.0, 2, 1.0).unwrap(), 0.0);
        assert!(rate_list_function(0.5, 2, 0.75).is_err());
        assert!(rate_list_function(1.0, 2, -0.1).is_err());
    }

    #[test]
    fn prefix_scheme() {
        assert_eq!(trivial_prefix_encode(&[1, 2, 3, 4], 0.5), vec![1, 2]);
        assert_eq!(trivial_prefix_encode(&[1, 2, 3, 4], 0.0), vec![1, 2, 3, 4]);
        assert!(trivial_prefix_encode(&[1, 2, 3, 4], 1.0).is_empty());
    }

    #[test]
    fn digit_conversions() {
        let v = digits_to_integer(&[1, 2, 3], 5);
        assert_eq!(v, BigUint::from(38u32));
        assert_eq!(integer_to_digits(&v, 5, 3).unwrap(), vec![1, 2, 3]);
        assert!(integer_to_digits(&BigUint::from(125u32), 5, 3).is_none());
    }
}
