//! Fixed-width and arbitrary-precision signed integers behind one trait, so
//! the large-graph solvers can run on 512-bit words when the magnitudes allow
//! and fall back to heap integers otherwise.

use std::fmt::Debug;

use bnum::types::{I512, U512};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, Zero};

pub trait ExactInt: Clone + Ord + Debug + Send + Sync {
    /// Largest magnitude (in bits) that every intermediate value must stay
    /// below; `None` means unbounded.
    const MAX_BITS: Option<u64>;

    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn times_i64(&self, v: i64) -> Self;
    /// Multiplication by `2^bits`.
    fn shl(&self, bits: u32) -> Self;
    /// Truncating division by a small positive integer, with remainder.
    fn div_rem_u32(&self, d: u32) -> (Self, i64);
    fn is_neg(&self) -> bool;
    fn is_zero_value(&self) -> bool;
    fn bit_len(&self) -> u64;
}

impl ExactInt for I512 {
    const MAX_BITS: Option<u64> = Some(510);

    fn zero() -> Self {
        I512::ZERO
    }

    fn from_i64(v: i64) -> Self {
        I512::from(v)
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        if v.bits() > 510 {
            return None;
        }
        I512::from_le_slice(&v.to_signed_bytes_le())
    }

    fn to_bigint(&self) -> BigInt {
        let mag = self.unsigned_abs();
        let bytes: Vec<u8> = mag.digits().iter().flat_map(|d| d.to_le_bytes()).collect();
        let sign = if self.is_negative() { Sign::Minus } else { Sign::Plus };
        BigInt::from_biguint(sign, BigUint::from_bytes_le(&bytes))
    }

    #[inline]
    fn plus(&self, o: &Self) -> Self {
        *self + *o
    }

    #[inline]
    fn minus(&self, o: &Self) -> Self {
        *self - *o
    }

    #[inline]
    fn times(&self, o: &Self) -> Self {
        *self * *o
    }

    #[inline]
    fn times_i64(&self, v: i64) -> Self {
        match v {
            1 => *self,
            2 => *self + *self,
            _ => *self * I512::from(v),
        }
    }

    fn shl(&self, bits: u32) -> Self {
        *self << bits
    }

    fn div_rem_u32(&self, d: u32) -> (Self, i64) {
        let dd = I512::from(d as i64);
        let r = *self % dd;
        let r = i64::try_from(r).expect("remainder below divisor");
        (*self / dd, r)
    }

    #[inline]
    fn is_neg(&self) -> bool {
        self.is_negative()
    }

    #[inline]
    fn is_zero_value(&self) -> bool {
        *self == I512::ZERO
    }

    fn bit_len(&self) -> u64 {
        let m: U512 = self.unsigned_abs();
        m.bits() as u64
    }
}

/// Native integers for small instances; callers must bound magnitudes first.
impl ExactInt for i128 {
    const MAX_BITS: Option<u64> = Some(120);

    fn zero() -> Self {
        0
    }

    fn from_i64(v: i64) -> Self {
        v as i128
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        if v.bits() > 120 {
            return None;
        }
        v.try_into().ok()
    }

    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }

    #[inline]
    fn plus(&self, o: &Self) -> Self {
        self.checked_add(*o).expect("i128 overflow")
    }

    #[inline]
    fn minus(&self, o: &Self) -> Self {
        self.checked_sub(*o).expect("i128 overflow")
    }

    #[inline]
    fn times(&self, o: &Self) -> Self {
        self.checked_mul(*o).expect("i128 overflow")
    }

    #[inline]
    fn times_i64(&self, v: i64) -> Self {
        self.checked_mul(v as i128).expect("i128 overflow")
    }

    fn shl(&self, bits: u32) -> Self {
        self.checked_mul(1i128 << bits).expect("i128 overflow")
    }

    fn div_rem_u32(&self, d: u32) -> (Self, i64) {
        let d = d as i128;
        (self / d, (self % d) as i64)
    }

    #[inline]
    fn is_neg(&self) -> bool {
        *self < 0
    }

    #[inline]
    fn is_zero_value(&self) -> bool {
        *self == 0
    }

    fn bit_len(&self) -> u64 {
        (128 - self.unsigned_abs().leading_zeros()) as u64
    }
}

impl ExactInt for BigInt {
    const MAX_BITS: Option<u64> = None;

    fn zero() -> Self {
        Zero::zero()
    }

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }

    fn to_bigint(&self) -> BigInt {
        self.clone()
    }

    fn plus(&self, o: &Self) -> Self {
        self + o
    }

    fn minus(&self, o: &Self) -> Self {
        self - o
    }

    fn times(&self, o: &Self) -> Self {
        self * o
    }

    fn times_i64(&self, v: i64) -> Self {
        if v == 1 {
            self.clone()
        } else {
            self * v
        }
    }

    fn shl(&self, bits: u32) -> Self {
        self << bits
    }

    fn div_rem_u32(&self, d: u32) -> (Self, i64) {
        let r = self % BigInt::from(d);
        (self / BigInt::from(d), r.try_into().expect("remainder below divisor"))
    }

    fn is_neg(&self) -> bool {
        self.is_negative()
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }

    fn bit_len(&self) -> u64 {
        self.bits()
    }
}

/// Which integer type a computation needs, given a bound on the bits of
/// every intermediate value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Native,
    Wide,
    Big,
}

impl Backend {
    pub fn for_bits(bits: u64) -> Self {
        if bits <= <i128 as ExactInt>::MAX_BITS.unwrap_or(0) {
            Backend::Native
        } else if bits <= <I512 as ExactInt>::MAX_BITS.unwrap_or(0) {
            Backend::Wide
        } else {
            Backend::Big
        }
    }
}

/// Converts a slice of big integers, failing if any entry does not fit.
pub fn convert_all<T: ExactInt>(values: &[BigInt]) -> Option<Vec<T>> {
    values.iter().map(T::from_bigint).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wide_roundtrip_edges() {
        for s in ["0", "-1", "1", "170141183460469231731687303715884105728", "-340282366920938463463374607431768211457"] {
            let b: BigInt = s.parse().unwrap();
            let w = I512::from_bigint(&b).unwrap();
            assert_eq!(w.to_bigint(), b);
            assert_eq!(w.bit_len(), b.bits());
        }
        let huge = BigInt::from(1) << 600u32;
        assert!(I512::from_bigint(&huge).is_none());
    }

    proptest! {
        #[test]
        fn wide_matches_bigint(a in any::<i64>(), b in any::<i64>(), s in 0u32..300) {
            let ab = BigInt::from(a) << s;
            let bb = BigInt::from(b);
            let aw = I512::from_bigint(&ab).unwrap();
            let bw = I512::from_i64(b);
            prop_assert_eq!(aw.plus(&bw).to_bigint(), &ab + &bb);
            prop_assert_eq!(aw.minus(&bw).to_bigint(), &ab - &bb);
            prop_assert_eq!(aw.times(&bw).to_bigint(), &ab * &bb);
            prop_assert_eq!(aw.cmp(&bw), ab.cmp(&bb));
            let d = (b.unsigned_abs() % 1000 + 1) as u32;
            let (qw, rw) = aw.div_rem_u32(d);
            let (qb, rb) = ab.div_rem_u32(d);
            prop_assert_eq!(qw.to_bigint(), qb);
            prop_assert_eq!(rw, rb);
            prop_assert_eq!(aw.times_i64(2).to_bigint(), &ab * 2);
            prop_assert_eq!(aw.shl(100).to_bigint(), &ab << 100u32);
            let (qn, rn) = (a as i128).div_rem_u32(d);
            let (qb2, rb2) = BigInt::from(a).div_rem_u32(d);
            prop_assert_eq!(qn.to_bigint(), qb2);
            prop_assert_eq!(rn, rb2);
        }
    }
}
