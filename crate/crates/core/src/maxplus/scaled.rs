//! Tables of exact integers over one common positive denominator.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::exact::ExactInt;
use crate::rational::{lcm_denominators, Q};
use crate::shift::Alphabet;
use crate::space::ASequence;

#[derive(Clone, Debug)]
pub struct ScaledTable<T> {
    pub alphabet: Alphabet,
    pub depth: usize,
    pub den: BigInt,
    pub nums: Vec<T>,
}

/// Common denominator and numerators of a rational table.
pub fn to_common_denominator(values: &[Q]) -> (BigInt, Vec<BigInt>) {
    let den = lcm_denominators(values);
    let nums = values.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    (den, nums)
}

pub fn max_bits(nums: &[BigInt]) -> u64 {
    nums.iter().map(|n| n.bits()).max().unwrap_or(0)
}

impl<T: ExactInt> ScaledTable<T> {
    pub fn from_rationals(alphabet: Alphabet, depth: usize, values: &[Q]) -> Option<Self> {
        let (den, nums) = to_common_denominator(values);
        let nums = crate::exact::convert_all(&nums)?;
        Some(ScaledTable { alphabet, depth, den, nums })
    }

    pub fn value(&self, i: usize) -> Q {
        Q::new(self.nums[i].to_bigint(), self.den.clone())
    }

    pub fn to_rationals(&self) -> Vec<Q> {
        (0..self.nums.len()).map(|i| self.value(i)).collect()
    }

    pub fn max_bits(&self) -> u64 {
        self.nums.iter().map(|n| n.bit_len()).max().unwrap_or(0)
    }

    /// Oscillations `var_0 .. var_(depth-1)` as numerators over `den`.
    pub fn variation_nums(&self) -> Vec<T> {
        variation_nums(self.alphabet.size(), self.depth, &self.nums)
    }

    pub fn sup_norm(&self) -> Q {
        sup_norm(&self.den, &self.nums)
    }

    pub fn lip_a(&self, a: &ASequence) -> Q {
        lip_a(&self.den, &self.variation_nums(), a)
    }

    pub fn a_norm(&self, a: &ASequence) -> Q {
        a_norm(self.alphabet.size(), self.depth, &self.den, &self.nums, a)
    }
}

/// Oscillations `var_0 .. var_(depth-1)` of a lexicographic table, computed
/// level by level from block minima and maxima.
pub fn variation_nums<T: ExactInt>(m: usize, depth: usize, nums: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); depth];
    if depth == 0 {
        return out;
    }
    let mut lo: Vec<T> = Vec::with_capacity(nums.len() / m);
    let mut hi: Vec<T> = Vec::with_capacity(nums.len() / m);
    let mut worst = T::zero();
    for block in nums.chunks(m) {
        let l = block.iter().min().expect("m >= 2");
        let h = block.iter().max().expect("m >= 2");
        let spread = h.minus(l);
        if spread > worst {
            worst = spread;
        }
        lo.push(l.clone());
        hi.push(h.clone());
    }
    out[depth - 1] = worst;
    for j in (0..depth - 1).rev() {
        let blocks = lo.len() / m;
        let mut worst = T::zero();
        for b in 0..blocks {
            let l = lo[b * m..(b + 1) * m].iter().min().expect("m >= 2").clone();
            let h = hi[b * m..(b + 1) * m].iter().max().expect("m >= 2").clone();
            let spread = h.minus(&l);
            if spread > worst {
                worst = spread;
            }
            lo[b] = l;
            hi[b] = h;
        }
        lo.truncate(blocks);
        hi.truncate(blocks);
        out[j] = worst;
    }
    out
}

pub fn sup_norm<T: ExactInt>(den: &BigInt, nums: &[T]) -> Q {
    let hi = nums.iter().max().map(|v| v.to_bigint().abs()).unwrap_or_default();
    let lo = nums.iter().min().map(|v| v.to_bigint().abs()).unwrap_or_default();
    Q::new(hi.max(lo), den.clone())
}

fn lip_a<T: ExactInt>(den: &BigInt, vars: &[T], a: &ASequence) -> Q {
    vars.iter()
        .enumerate()
        .map(|(j, v)| Q::new(v.to_bigint(), den.clone()) / a.value(j))
        .max()
        .unwrap_or_else(|| Q::new(BigInt::from(0), BigInt::one()))
}

/// `Lip_A + sup` of the table `nums / den` on words of length `depth`.
pub fn a_norm<T: ExactInt>(m: usize, depth: usize, den: &BigInt, nums: &[T], a: &ASequence) -> Q {
    lip_a(den, &variation_nums(m, depth, nums), a) + sup_norm(den, nums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::space::CylinderFunction;
    use bnum::types::I512;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn scaled_norm_matches_rational(vals in proptest::collection::vec((-40i64..40, 1i64..16), 27)) {
            let a = Alphabet::new(3).unwrap();
            let table: Vec<Q> = vals.iter().map(|&(n, d)| q(n, d)).collect();
            let f = CylinderFunction::new(a, 3, table.clone()).unwrap();
            let s = ScaledTable::<I512>::from_rationals(a, 3, &table).unwrap();
            for seq in ASequence::builtin_kinds() {
                prop_assert_eq!(s.a_norm(&seq), f.a_norm(&seq));
            }
            prop_assert_eq!(s.to_rationals(), table);
        }
    }
}
