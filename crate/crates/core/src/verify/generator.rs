use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rational::Q;
use crate::shift::{Alphabet, Point, Word};
use crate::space::{ASequence, CylinderFunction};

/// Ranges for generated instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ranges {
    pub alphabets: Vec<usize>,
    pub min_depth: usize,
    pub max_depth: usize,
    pub max_denominator: i64,
    pub max_period: usize,
}

impl Default for Ranges {
    fn default() -> Self {
        Ranges { alphabets: vec![2, 3], min_depth: 1, max_depth: 4, max_denominator: 64, max_period: 6 }
    }
}

/// Instance `i` of a run draws from its own ChaCha stream, so results do not
/// depend on which other instances ran.
#[derive(Clone, Debug)]
pub struct InstanceGenerator {
    pub seed: u64,
    pub ranges: Ranges,
}

impl InstanceGenerator {
    pub fn new(seed: u64, ranges: Ranges) -> Self {
        InstanceGenerator { seed, ranges }
    }

    pub fn rng(&self, index: usize) -> Gen<'_> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        Gen { rng, ranges: &self.ranges }
    }
}

pub struct Gen<'a> {
    pub rng: ChaCha8Rng,
    pub ranges: &'a Ranges,
}

impl Gen<'_> {
    pub fn alphabet(&mut self) -> Alphabet {
        let m = *self.ranges.alphabets.choose(&mut self.rng).expect("at least one alphabet size");
        Alphabet::new(m).expect("alphabet range is valid")
    }

    pub fn depth(&mut self) -> usize {
        self.rng.gen_range(self.ranges.min_depth..=self.ranges.max_depth)
    }

    pub fn value(&mut self) -> Q {
        let d = self.rng.gen_range(1..=self.ranges.max_denominator);
        let n = self.rng.gen_range(-self.ranges.max_denominator..=self.ranges.max_denominator);
        Q::new(n.into(), d.into())
    }

    pub fn function(&mut self, alphabet: Alphabet, depth: usize) -> CylinderFunction {
        let n = alphabet.count(depth).expect("small depth");
        let table = (0..n).map(|_| self.value()).collect();
        CylinderFunction::new(alphabet, depth, table).expect("table sized to the alphabet")
    }

    pub fn kind(&mut self) -> ASequence {
        ASequence::builtin_kinds().choose(&mut self.rng).expect("nonempty").clone()
    }

    pub fn word(&mut self, alphabet: Alphabet, len: usize) -> Word {
        let m = alphabet.size() as u8;
        Word((0..len).map(|_| self.rng.gen_range(0..m)).collect())
    }

    /// A periodic point with primitive period of length in `min..=max_period`.
    pub fn periodic(&mut self, alphabet: Alphabet, min: usize) -> Point {
        loop {
            let len = self.rng.gen_range(min..=self.ranges.max_period.max(min));
            let w = self.word(alphabet, len);
            if w.is_primitive() {
                return Point::periodic(alphabet, w).expect("valid word");
            }
        }
    }

    /// `block` followed by a symbol different from `avoid` and a random
    /// periodic tail.
    pub fn splice(&mut self, alphabet: Alphabet, block: &[u8], avoid: u8) -> Point {
        let m = alphabet.size() as u8;
        let mut u = block.to_vec();
        u.push((avoid + self.rng.gen_range(1..m)) % m);
        let tail = self.periodic(alphabet, 1);
        tail.prepend(&u)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_order() {
        let g = InstanceGenerator::new(42, Ranges::default());
        let a: Vec<Q> = (0..5).map(|_| g.rng(3).value()).collect();
        let mut r = g.rng(3);
        assert_eq!(r.value(), a[0]);
        let mut other = g.rng(4);
        let b: Vec<Q> = (0..8).map(|_| other.value()).collect();
        let mut again = g.rng(3);
        assert!((0..8).map(|_| again.value()).collect::<Vec<_>>() != b);
    }

    #[test]
    fn splice_diverges_after_the_block() {
        let g = InstanceGenerator::new(1, Ranges::default());
        let mut r = g.rng(0);
        let a = Alphabet::new(3).unwrap();
        for _ in 0..50 {
            let x = r.splice(a, &[0, 1, 2], 1);
            assert_eq!(x.prefix(3).0, vec![0, 1, 2]);
            assert_ne!(x.symbol(3), 1);
        }
    }
}
