use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::word::{Alphabet, Word};
use crate::error::{Error, Result};
use crate::rational::{pow2_neg, Q};

/// The sequence `u v v v ...`, always held in canonical form: `v` primitive
/// and `u` as short as possible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    alphabet: Alphabet,
    preperiod: Word,
    period: Word,
}

/// Wire form of a point; the alphabet comes from the enclosing document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRepr {
    pub preperiod: Vec<u8>,
    pub period: Vec<u8>,
}

impl Point {
    pub fn new(alphabet: Alphabet, preperiod: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        preperiod.validate(alphabet)?;
        period.validate(alphabet)?;
        Ok(Self::canonical(alphabet, preperiod.0, period.0))
    }

    pub fn periodic(alphabet: Alphabet, period: Word) -> Result<Self> {
        Self::new(alphabet, Word::default(), period)
    }

    pub fn from_repr(alphabet: Alphabet, repr: &PointRepr) -> Result<Self> {
        Self::new(alphabet, Word(repr.preperiod.clone()), Word(repr.period.clone()))
    }

    pub fn to_repr(&self) -> PointRepr {
        PointRepr { preperiod: self.preperiod.0.clone(), period: self.period.0.clone() }
    }

    fn canonical(alphabet: Alphabet, mut u: Vec<u8>, mut v: Vec<u8>) -> Self {
        let root = Word(v.clone()).primitive_root_len();
        v.truncate(root);
        while let (Some(&a), Some(&b)) = (u.last(), v.last()) {
            if a != b {
                break;
            }
            u.pop();
            v.rotate_right(1);
        }
        Point { alphabet, preperiod: Word(u), period: Word(v) }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn preperiod(&self) -> &Word {
        &self.preperiod
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn is_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }

    pub fn symbol(&self, i: usize) -> u8 {
        let u = &self.preperiod.0;
        if i < u.len() {
            u[i]
        } else {
            let v = &self.period.0;
            v[(i - u.len()) % v.len()]
        }
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.symbol(i)).collect())
    }

    pub fn shift(&self) -> Point {
        self.shift_by(1)
    }

    pub fn shift_by(&self, n: usize) -> Point {
        let u = &self.preperiod.0;
        if n <= u.len() {
            return Point {
                alphabet: self.alphabet,
                preperiod: Word(u[n..].to_vec()),
                period: self.period.clone(),
            };
        }
        Point {
            alphabet: self.alphabet,
            preperiod: Word::default(),
            period: self.period.rotate_left(n - u.len()),
        }
    }

    /// The point `w x`.
    pub fn prepend(&self, w: &[u8]) -> Point {
        let mut u = w.to_vec();
        u.extend_from_slice(&self.preperiod.0);
        Self::canonical(self.alphabet, u, self.period.0.clone())
    }

    /// Index past which both points are periodic with a common period, so
    /// agreement up to it implies equality.
    pub(crate) fn agreement_bound(&self, other: &Point) -> usize {
        self.preperiod.len().max(other.preperiod.len())
            + self.period.len().lcm(&other.period.len())
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if !self.preperiod.is_empty() {
            write!(f, "{}·", self.preperiod)?;
        }
        write!(f, "({})^∞", self.period)
    }
}

/// Smallest index where the sequences differ; `None` when equal.
pub fn first_disagreement(x: &Point, y: &Point) -> Result<Option<usize>> {
    x.alphabet.check_same(y.alphabet)?;
    if x == y {
        return Ok(None);
    }
    let bound = x.agreement_bound(y);
    Ok((0..bound).find(|&i| x.symbol(i) != y.symbol(i)))
}

pub fn d(x: &Point, y: &Point) -> Result<Q> {
    Ok(match first_disagreement(x, y)? {
        None => Q::from_integer(0.into()),
        Some(n) => pow2_neg(n as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn a2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn pt(u: &[u8], v: &[u8]) -> Point {
        Point::new(a2(), Word(u.to_vec()), Word(v.to_vec())).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(pt(&[], &[0, 1, 0, 1]), pt(&[], &[0, 1]));
        assert_eq!(pt(&[1], &[0, 1]), pt(&[], &[1, 0]));
        assert_eq!(pt(&[0, 0], &[1, 0]).preperiod().len(), 1);
        assert!(Point::new(a2(), Word::default(), Word::default()).is_err());
        assert!(Point::new(a2(), Word::default(), Word(vec![2])).is_err());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(pt(&[], &[0, 1]).shift(), pt(&[], &[1, 0]));
        assert_eq!(pt(&[1], &[0]).shift(), pt(&[], &[0]));
        assert_eq!(pt(&[0, 0], &[1, 0]).shift(), pt(&[0], &[1, 0]));
    }

    #[test]
    fn disagreement_examples() {
        let x = pt(&[], &[0, 1]);
        assert_eq!(first_disagreement(&x, &x).unwrap(), None);
        assert_eq!(first_disagreement(&x, &pt(&[], &[0, 1, 1, 0])).unwrap(), Some(2));
        assert_eq!(first_disagreement(&pt(&[1], &[0]), &pt(&[], &[0])).unwrap(), Some(0));
        assert_eq!(d(&x, &x).unwrap(), q(0, 1));
        assert_eq!(d(&x, &pt(&[], &[0, 1, 1, 0])).unwrap(), q(1, 4));
        assert_eq!(d(&pt(&[1], &[0]), &pt(&[], &[0])).unwrap(), q(1, 1));
        let a3 = Alphabet::new(3).unwrap();
        let z = Point::periodic(a3, Word(vec![0])).unwrap();
        assert!(first_disagreement(&x, &z).is_err());
    }

    #[test]
    fn late_disagreement_is_found() {
        // agree on the first 11 symbols, differ at index 11
        let x = pt(&[0; 11], &[1]);
        let y = pt(&[], &[0]);
        assert_eq!(first_disagreement(&x, &y).unwrap(), Some(11));
        let x = pt(&[], &[0, 0, 1]);
        let y = pt(&[], &[0, 0, 1, 0, 0, 1, 0, 0, 0]);
        assert_eq!(first_disagreement(&x, &y).unwrap(), Some(8));
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        (proptest::collection::vec(0u8..2, 0..5), proptest::collection::vec(0u8..2, 1..5))
            .prop_map(|(u, v)| pt(&u, &v))
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent(u in proptest::collection::vec(0u8..2, 0..6), v in proptest::collection::vec(0u8..2, 1..6)) {
            let p = pt(&u, &v);
            let again = Point::new(a2(), p.preperiod().clone(), p.period().clone()).unwrap();
            prop_assert_eq!(&p, &again);
            for i in 0..20 {
                let raw = if i < u.len() { u[i] } else { v[(i - u.len()) % v.len()] };
                prop_assert_eq!(p.symbol(i), raw);
            }
        }

        #[test]
        fn ultrametric(x in arb_point(), y in arb_point(), z in arb_point()) {
            let xz = d(&x, &z).unwrap();
            let m = d(&x, &y).unwrap().max(d(&y, &z).unwrap());
            prop_assert!(xz <= m);
        }

        #[test]
        fn equality_matches_zero_distance(x in arb_point(), y in arb_point()) {
            prop_assert_eq!(x == y, first_disagreement(&x, &y).unwrap().is_none());
        }

        #[test]
        fn shift_expands_by_at_most_two(x in arb_point(), y in arb_point()) {
            let dxy = d(&x, &y).unwrap();
            if dxy < q(1, 1) {
                prop_assert!(d(&x.shift(), &y.shift()).unwrap() <= dxy * q(2, 1));
            }
        }

        #[test]
        fn shift_is_surjective(x in arb_point(), a in 0u8..2) {
            prop_assert_eq!(&x.prepend(&[a]).shift(), &x);
        }
    }
}
