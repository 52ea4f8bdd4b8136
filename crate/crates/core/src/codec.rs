//! Cantor pairing and the sequence code built on it.
//!
//! `pair(x, y) = (x+y)(x+y+1)/2 + y`, `c(⟨⟩) = 0`, `c(s⌢⟨a⟩) = pair(c(s), a) + 1`.
//! Sequence codes grow doubly exponentially, so the general versions work on
//! `BigUint`; the `u64` helpers are for the small indices that appear as
//! positions inside sequences.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

pub fn pair(x: &BigUint, y: &BigUint) -> BigUint {
    let s = x + y;
    let tri = (&s * (&s + 1u32)) >> 1u32;
    tri + y
}

pub fn unpair(z: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8z+1) - 1) / 2)
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) >> 1u32;
    let tri = (&w * (&w + 1u32)) >> 1u32;
    let y = z - tri;
    let x = &w - &y;
    (x, y)
}

pub fn encode_seq(items: &[BigUint]) -> BigUint {
    items
        .iter()
        .fold(BigUint::zero(), |acc, a| pair(&acc, a) + 1u32)
}

pub fn decode_seq(code: &BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    let mut c = code.clone();
    while !c.is_zero() {
        let (prev, last) = unpair(&(c - BigUint::one()));
        out.push(last);
        c = prev;
    }
    out.reverse();
    out
}

pub fn pair_u64(x: u64, y: u64) -> Option<u64> {
    let s = x.checked_add(y)?;
    let tri = s.checked_mul(s.checked_add(1)?)? / 2;
    tri.checked_add(y)
}

pub fn unpair_u64(z: u64) -> (u64, u64) {
    let (x, y) = unpair(&BigUint::from(z));
    (x.to_u64().unwrap(), y.to_u64().unwrap())
}

/// Decodes a sequence code given as a `u64`. Entries always fit since they
/// are bounded by the code itself.
pub fn decode_seq_u64(code: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = code;
    while c != 0 {
        let (prev, last) = unpair_u64(c - 1);
        out.push(last);
        c = prev;
    }
    out.reverse();
    out
}

pub fn encode_seq_u64(items: &[u64]) -> Option<u64> {
    items
        .iter()
        .try_fold(0u64, |acc, &a| pair_u64(acc, a)?.checked_add(1))
}
