use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::point::{d, first_disagreement, Point};
use super::word::{Alphabet, Word};
use crate::error::{Error, Result};
use crate::rational::{pow2_neg, Q};

/// The iterates `T^start x, ..., T^(start+len-1) x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitSegment {
    pub base: Point,
    pub start: usize,
    pub len: usize,
}

impl OrbitSegment {
    pub fn new(base: Point, start: usize, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Precondition("orbit segment length must be at least 1".into()));
        }
        Ok(OrbitSegment { base, start, len })
    }

    pub fn point(&self, t: usize) -> Point {
        self.base.shift_by(self.start + t)
    }

    /// The distinct points of the segment, in order of first appearance.
    pub fn distinct_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for t in 0..self.len {
            let p = self.point(t);
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

/// A periodic orbit identified by its necklace (least rotation of a
/// primitive word).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeriodicOrbit {
    alphabet: Alphabet,
    necklace: Word,
}

impl PeriodicOrbit {
    /// Orbit of the point `w^∞`; `w` need not be primitive or least.
    pub fn from_word(alphabet: Alphabet, w: &Word) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        w.validate(alphabet)?;
        let root = Word(w.0[..w.primitive_root_len()].to_vec());
        Ok(PeriodicOrbit { alphabet, necklace: root.least_rotation() })
    }

    pub fn of_point(x: &Point) -> Result<Self> {
        if !x.is_periodic() {
            return Err(Error::Precondition(format!("{x} is not periodic")));
        }
        Self::from_word(x.alphabet(), x.period())
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn necklace(&self) -> &Word {
        &self.necklace
    }

    pub fn period(&self) -> usize {
        self.necklace.len()
    }

    /// `T^r` of the necklace point.
    pub fn point(&self, r: usize) -> Point {
        Point::periodic(self.alphabet, self.necklace.rotate_left(r))
            .expect("necklace is a valid period word")
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.period()).map(|r| self.point(r)).collect()
    }

    /// Symbol `i` of `T^r` of the necklace point.
    pub fn symbol(&self, r: usize, i: usize) -> u8 {
        self.necklace.0[(r + i) % self.period()]
    }

    /// Minimum distance between distinct orbit points; `None` for fixed points.
    pub fn min_separation(&self) -> Option<Q> {
        let p = self.period();
        if p == 1 {
            return None;
        }
        // distinct rotations of a primitive word differ within p symbols
        let mut longest = 0usize;
        for a in 0..p {
            for b in a + 1..p {
                let c = (0..p).find(|&i| self.symbol(a, i) != self.symbol(b, i)).unwrap_or(p);
                longest = longest.max(c);
            }
        }
        Some(pow2_neg(longest as u64))
    }

    /// Longest common prefix of `w` with any orbit point, capped at `w.len()`.
    pub fn common_prefix_with_word(&self, w: &[u8]) -> usize {
        let p = self.period();
        (0..p)
            .map(|r| w.iter().enumerate().take_while(|&(i, &s)| self.symbol(r, i) == s).count())
            .max()
            .unwrap_or(0)
    }

    /// Longest common prefix with any orbit point; `None` if `x` lies on the orbit.
    pub fn first_disagreement_with(&self, x: &Point) -> Result<Option<usize>> {
        let mut best = Some(0usize);
        for y in self.points() {
            match first_disagreement(x, &y)? {
                None => return Ok(None),
                Some(c) => best = best.max(Some(c)),
            }
        }
        Ok(best)
    }

    pub fn distance(&self, x: &Point) -> Result<Q> {
        Ok(match self.first_disagreement_with(x)? {
            None => Q::from_integer(0.into()),
            Some(c) => pow2_neg(c as u64),
        })
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.alphabet() == self.alphabet && x.is_periodic() && self.points().contains(x)
    }
}

impl std::fmt::Display for PeriodicOrbit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "O({})", self.necklace)
    }
}

#[derive(Serialize, Deserialize)]
struct OrbitRepr {
    alphabet: Alphabet,
    necklace: Vec<u8>,
    period: usize,
}

impl Serialize for PeriodicOrbit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OrbitRepr { alphabet: self.alphabet, necklace: self.necklace.0.clone(), period: self.period() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicOrbit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = OrbitRepr::deserialize(d)?;
        let o = PeriodicOrbit::from_word(r.alphabet, &Word(r.necklace)).map_err(serde::de::Error::custom)?;
        if o.period() != r.period {
            return Err(serde::de::Error::custom("necklace is not primitive or period mismatch"));
        }
        Ok(o)
    }
}

/// `d(T^i x, T^(start+i) base) <= eps` for every step of the segment.
pub fn shadows(x: &Point, s: &OrbitSegment, eps: &Q) -> Result<bool> {
    for i in 0..s.len {
        if d(&x.shift_by(i), &s.point(i))? > *eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `d(T^i x, O) <= eps` for `0 <= i < steps`.
pub fn stays_close(x: &Point, orbit: &PeriodicOrbit, eps: &Q, steps: usize) -> Result<bool> {
    x.alphabet().check_same(orbit.alphabet())?;
    for i in 0..steps {
        if orbit.distance(&x.shift_by(i))? > *eps {
            return Ok(false);
        }
    }
    Ok(true)
}

fn unique_closest(z: &Point, pts: &[Point]) -> Result<Option<usize>> {
    let dist = pts.iter().map(|p| d(z, p)).collect::<Result<Vec<_>>>()?;
    let Some(best) = dist.iter().min() else { return Ok(None) };
    let mut at = dist.iter().enumerate().filter(|(_, v)| *v == best).map(|(i, _)| i);
    let first = at.next();
    Ok(if at.next().is_some() { None } else { first })
}

/// Whether `x, Tx, ..., T^(steps-1) x` each follow `s` in order for one step.
/// The segment is treated as a set, so a point at distance 0 from exactly one
/// member counts as having a unique closest point.
pub fn follows_in_order(x: &Point, s: &OrbitSegment, steps: usize) -> Result<bool> {
    let pts = s.distinct_points();
    let mut z = x.clone();
    for _ in 0..steps {
        let Some(here) = unique_closest(&z, &pts)? else { return Ok(false) };
        let next_target = pts[here].shift();
        let Some(target) = pts.iter().position(|p| *p == next_target) else { return Ok(false) };
        z = z.shift();
        if unique_closest(&z, &pts)? != Some(target) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First pair `i < j <= horizon` whose length-`k` blocks agree, with the
/// smallest `j` (which forces minimality and a unique `i`).
pub fn minimal_recurrence(x: &Point, k: usize, horizon: usize) -> Result<(usize, usize)> {
    let mut seen: HashMap<Word, usize> = HashMap::new();
    for j in 0..=horizon {
        let block = x.shift_by(j).prefix(k);
        if let Some(&i) = seen.get(&block) {
            return Ok((i, j));
        }
        seen.insert(block, j);
    }
    Err(Error::HorizonTooSmall { depth: k, horizon })
}

/// The point `y` of period `j - i` agreeing with `x` on indices `i..j`.
pub fn recurrence_point(x: &Point, i: usize, j: usize) -> Result<Point> {
    if i >= j {
        return Err(Error::Precondition(format!("recurrence needs i < j, got ({i}, {j})")));
    }
    let p = j - i;
    let period: Vec<u8> = (0..p).map(|t| x.symbol(i + (t + p - i % p) % p)).collect();
    Point::periodic(x.alphabet(), Word(period))
}

pub fn periodic_point_from_recurrence(x: &Point, i: usize, j: usize) -> Result<PeriodicOrbit> {
    PeriodicOrbit::of_point(&recurrence_point(x, i, j)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn a2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn pt(u: &[u8], v: &[u8]) -> Point {
        Point::new(a2(), Word(u.to_vec()), Word(v.to_vec())).unwrap()
    }

    fn orb(v: &[u8]) -> PeriodicOrbit {
        PeriodicOrbit::from_word(a2(), &Word(v.to_vec())).unwrap()
    }

    #[test]
    fn orbit_basics() {
        let o = orb(&[1, 0, 1, 0]);
        assert_eq!(o.necklace().0, vec![0, 1]);
        assert_eq!(o.period(), 2);
        assert_eq!(o.min_separation(), Some(q(1, 1)));
        assert_eq!(orb(&[0, 0, 1]).min_separation(), Some(q(1, 2)));
        assert_eq!(orb(&[0]).min_separation(), None);
        assert!(o.contains(&pt(&[], &[1, 0])));
    }

    #[test]
    fn shadows_examples() {
        let s = OrbitSegment::new(pt(&[], &[0, 1]), 0, 2).unwrap();
        assert!(shadows(&pt(&[], &[0, 1]), &s, &q(1, 1)).unwrap());
        let x = pt(&[0, 1, 1, 1], &[0]);
        let s1 = OrbitSegment::new(pt(&[], &[0, 1]), 0, 1).unwrap();
        assert!(shadows(&x, &s1, &q(1, 4)).unwrap());
        assert!(!shadows(&x, &s1, &q(1, 8)).unwrap());
    }

    #[test]
    fn stays_close_examples() {
        let y = orb(&[0, 1]);
        let x = pt(&[0, 1, 0, 0], &[1]);
        assert!(stays_close(&x, &y, &q(1, 4), 2).unwrap());
        assert!(!stays_close(&x, &y, &q(1, 4), 4).unwrap());
        assert!(stays_close(&y.point(1), &y, &q(1, 1024), 7).unwrap());
    }

    #[test]
    fn in_order_on_orbit() {
        let y = pt(&[], &[0, 0, 1]);
        let s = OrbitSegment::new(y.clone(), 0, 3).unwrap();
        assert!(follows_in_order(&y, &s, 2).unwrap());
        // (2)^∞ is at distance 1 from both (01)^∞ and (10)^∞
        let x3 = Point::new(Alphabet::new(3).unwrap(), Word::default(), Word(vec![2])).unwrap();
        let s3 = OrbitSegment::new(
            Point::periodic(Alphabet::new(3).unwrap(), Word(vec![0, 1])).unwrap(),
            0,
            2,
        )
        .unwrap();
        assert!(!follows_in_order(&x3, &s3, 1).unwrap());
    }

    #[test]
    fn recurrence_examples() {
        assert_eq!(minimal_recurrence(&pt(&[], &[0]), 1, 3).unwrap(), (0, 1));
        assert_eq!(minimal_recurrence(&pt(&[0, 0, 1, 0, 1, 1, 0, 1], &[0]), 1, 3).unwrap(), (0, 1));
        // brute force over pairs for (0110)^∞ at depth 2
        let x = pt(&[], &[0, 1, 1, 0]);
        let mut brute = None;
        'outer: for j in 1..=8 {
            for i in 0..j {
                if x.shift_by(i).prefix(2) == x.shift_by(j).prefix(2) {
                    brute = Some((i, j));
                    break 'outer;
                }
            }
        }
        assert_eq!(Some(minimal_recurrence(&x, 2, 8).unwrap()), brute);
        assert!(minimal_recurrence(&x, 2, 2).is_err());
    }

    #[test]
    fn recurrence_orbits() {
        let o = periodic_point_from_recurrence(&pt(&[], &[0, 1]), 0, 2).unwrap();
        assert_eq!(o, orb(&[0, 1]));
        let x = pt(&[0], &[1, 0]);
        let y = recurrence_point(&x, 1, 3).unwrap();
        assert_eq!(y.prefix(4).0[1..3], x.prefix(3).0[1..3]);
        assert_eq!(periodic_point_from_recurrence(&x, 1, 3).unwrap().necklace().0, vec![0, 1]);
    }
}
