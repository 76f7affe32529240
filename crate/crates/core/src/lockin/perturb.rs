use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::ExactInt;
use crate::maxplus::scaled::{self, ScaledTable};
use crate::rational::{floor_log2, Q};
use crate::shift::{Alphabet, PeriodicOrbit};
use crate::space::{ASequence, CylinderFunction};

/// Raw sample range: table entries (or per-level increments) are
/// `r / RANGE` with `|r| <= RANGE`.
pub const RANGE: i64 = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Independent entries per depth-`K` cylinder. Almost all of the norm
    /// sits in the finest variation, so the sup is tiny.
    Uniform,
    /// An independent increment on every cylinder of every length up to
    /// `K`, weighted by `A_j`, so each scale carries a comparable share of
    /// the norm.
    #[default]
    Multiscale,
}

/// A perturbation `nums[i] / den` on words of length `depth`, with its
/// exact A-norm.
#[derive(Clone, Debug)]
pub struct Perturbation<T> {
    pub alphabet: Alphabet,
    pub depth: usize,
    pub den: BigInt,
    pub nums: Vec<T>,
    pub norm: Q,
}

impl<T: ExactInt> Perturbation<T> {
    pub fn zero(alphabet: Alphabet) -> Self {
        Perturbation { alphabet, depth: 0, den: BigInt::one(), nums: vec![T::zero()], norm: Q::zero() }
    }

    pub fn constant(alphabet: Alphabet, c: &Q) -> Option<Self> {
        Some(Perturbation {
            alphabet,
            depth: 0,
            den: c.denom().clone(),
            nums: vec![T::from_bigint(c.numer())?],
            norm: c.abs(),
        })
    }

    pub fn from_function(f: &CylinderFunction, a: &ASequence) -> Option<Self> {
        let t = ScaledTable::<T>::from_rationals(f.alphabet(), f.depth(), f.table())?;
        let norm = t.a_norm(a);
        Some(Perturbation { alphabet: f.alphabet(), depth: f.depth(), den: t.den, nums: t.nums, norm })
    }

    pub fn to_function(&self) -> CylinderFunction {
        let table = self.nums.iter().map(|v| Q::new(v.to_bigint(), self.den.clone())).collect();
        CylinderFunction::new(self.alphabet, self.depth, table).expect("consistent table")
    }

    pub fn max_bits(&self) -> u64 {
        let hi = self.nums.iter().max().map_or(0, |v| v.bit_len());
        let lo = self.nums.iter().min().map_or(0, |v| v.bit_len());
        hi.max(lo)
    }

    pub fn sup_norm(&self) -> Q {
        scaled::sup_norm(&self.den, &self.nums)
    }

    /// Recomputes the A-norm from the table.
    pub fn recompute_norm(&self, a: &ASequence) -> Q {
        scaled::a_norm(self.alphabet.size(), self.depth, &self.den, &self.nums, a)
    }

    pub fn negate(mut self) -> Self {
        self.nums = self.nums.iter().map(|v| T::zero().minus(v)).collect();
        self
    }
}

/// Scales a raw table of norm `norm0` by the largest 32-bit dyadic
/// `c' <= target / norm0`, so the result has norm in
/// `(target·(1 - 2^-31), target]`.
pub(crate) fn scale_to_norm<T: ExactInt>(
    alphabet: Alphabet,
    depth: usize,
    den0: BigInt,
    nums0: Vec<T>,
    norm0: &Q,
    target: &Q,
) -> Option<Perturbation<T>> {
    if norm0.is_zero() || !target.is_positive() {
        return Some(Perturbation { alphabet, depth, den: den0, nums: nums0, norm: Q::zero() });
    }
    let c = target / norm0;
    let s = 31 - floor_log2(&c);
    let two = BigInt::from(2);
    let shifted = if s >= 0 { &c * Q::from_integer(two.pow(s as u32)) } else { &c / Q::from_integer(two.pow((-s) as u32)) };
    let n = shifted.floor().to_integer().to_i64()?;
    let bits0 = nums0.iter().map(|v| v.bit_len()).max().unwrap_or(0);
    let extra = if s < 0 { (-s) as u64 } else { 0 };
    if T::MAX_BITS.is_some_and(|cap| bits0 + 33 + extra > cap) {
        return None;
    }
    let mut nums = nums0;
    for v in nums.iter_mut() {
        *v = v.times_i64(n);
    }
    let (den, c_prime) = if s >= 0 {
        let p = two.pow(s as u32);
        (&den0 * &p, Q::new(BigInt::from(n), p))
    } else {
        for v in nums.iter_mut() {
            *v = v.shl((-s) as u32);
        }
        (den0, Q::from_integer(BigInt::from(n) << ((-s) as u32)))
    };
    let norm = c_prime * norm0;
    Some(Perturbation { alphabet, depth, den, nums, norm })
}

fn common_level_denominator(a: &ASequence, levels: usize) -> (BigInt, Vec<BigInt>) {
    let vals: Vec<Q> = (0..levels).map(|j| a.value(j)).collect();
    let den = vals.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let nums = vals.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    (den, nums)
}

fn raw_uniform<T: ExactInt>(rng: &mut ChaCha8Rng, entries: usize) -> Vec<T> {
    (0..entries).map(|_| T::from_i64(rng.gen_range(-RANGE..=RANGE))).collect()
}

fn raw_multiscale<T: ExactInt>(rng: &mut ChaCha8Rng, a: &ASequence, m: usize, depth: usize) -> Option<(BigInt, Vec<T>)> {
    let (den, level_nums) = common_level_denominator(a, depth);
    let level_nums: Vec<T> = crate::exact::convert_all(&level_nums)?;
    if T::MAX_BITS.is_some_and(|cap| den.bits() + 10 + (depth as u64).max(1).ilog2() as u64 + 2 > cap) {
        return None;
    }
    let mut cur = vec![T::zero()];
    for lvl in &level_nums {
        let mut next = Vec::with_capacity(cur.len() * m);
        for v in &cur {
            for _ in 0..m {
                next.push(v.plus(&lvl.times_i64(rng.gen_range(-RANGE..=RANGE))));
            }
        }
        cur = next;
    }
    Some((den, cur))
}

/// A random perturbation of depth `depth` with `b/2 < ∥h∥_A < b`,
/// determined by `seed`. `None` when `T` is too narrow.
pub fn sample_perturbation<T: ExactInt>(
    alphabet: Alphabet,
    a: &ASequence,
    depth: usize,
    b: &Q,
    seed: u64,
    scheme: Sampling,
) -> Option<Perturbation<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Q::new(BigInt::from(rng.gen_range((1u64 << 31) + 2..1u64 << 32)), BigInt::from(1u64 << 32));
    let entries = alphabet.count(depth)?;
    let (den0, nums0) = match scheme {
        Sampling::Uniform => (BigInt::one(), raw_uniform::<T>(&mut rng, entries)),
        Sampling::Multiscale => raw_multiscale::<T>(&mut rng, a, alphabet.size(), depth)?,
    };
    let norm0 = scaled::a_norm(alphabet.size(), depth, &den0, &nums0, a);
    scale_to_norm(alphabet, depth, den0, nums0, &norm0, &(b * u))
}

/// Length of the longest common prefix of each word of length `depth` with
/// a point of `orbit`, in lexicographic word order.
pub fn prefix_levels(orbit: &PeriodicOrbit, depth: usize) -> Vec<u8> {
    let m = orbit.alphabet().size();
    let p = orbit.period();
    let total = orbit.alphabet().count(depth).expect("table size checked");
    let mut out = vec![0u8; total];
    let mut pw = vec![1usize; depth + 1];
    for i in 1..=depth {
        pw[i] = pw[i - 1] * m;
    }
    // (prefix length, word index of the prefix, rotations still matching)
    let mut stack: Vec<(usize, usize, Vec<usize>)> = vec![(0, 0, (0..p).collect())];
    while let Some((d, idx, alive)) = stack.pop() {
        if d == depth {
            out[idx] = depth as u8;
            continue;
        }
        for s in 0..m {
            let next: Vec<usize> = alive.iter().copied().filter(|&r| orbit.symbol(r, d) as usize == s).collect();
            let child = idx * m + s;
            if next.is_empty() {
                let lo = child * pw[depth - d - 1];
                out[lo..lo + pw[depth - d - 1]].fill(d as u8);
            } else {
                stack.push((d + 1, child, next));
            }
        }
    }
    out
}

/// `g_K(w) = A_c(w)` as numerators over a common denominator.
pub fn penalty_table<T: ExactInt>(alphabet: Alphabet, a: &ASequence, levels: &[u8], depth: usize) -> Option<Perturbation<T>> {
    let (den, level_nums) = common_level_denominator(a, depth + 1);
    let level_nums: Vec<T> = crate::exact::convert_all(&level_nums)?;
    let nums: Vec<T> = levels.iter().map(|&c| level_nums[c as usize].clone()).collect();
    let norm = scaled::a_norm(alphabet.size(), depth, &den, &nums, a);
    Some(Perturbation { alphabet, depth, den, nums, norm })
}

/// `±c'·g_K` with `c'·∥g_K∥_A` just below `target`: the direction along
/// which the penalty itself is weakened (`+`) or strengthened (`-`).
pub fn penalty_direction<T: ExactInt>(g: &Perturbation<T>, target: &Q, weaken: bool) -> Option<Perturbation<T>> {
    let h = scale_to_norm(g.alphabet, g.depth, g.den.clone(), g.nums.clone(), &g.norm, target)?;
    Some(if weaken { h } else { h.negate() })
}
