use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::aseq::ASequence;
use crate::error::{Error, Result};
use crate::rational::{int, serde_q, serde_q_vec, Q};
use crate::shift::{first_disagreement, Alphabet, PeriodicOrbit, Point, Word};

/// A function of the first `depth` symbols, stored as a table over all
/// words of that length in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderFunction {
    alphabet: Alphabet,
    depth: usize,
    table: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormReport {
    /// `var_0 .. var_depth`.
    #[serde(with = "serde_q_vec")]
    pub variations: Vec<Q>,
    /// `V_0 .. V_depth`.
    #[serde(with = "serde_q_vec")]
    pub tail_sums: Vec<Q>,
    #[serde(with = "serde_q")]
    pub lip_a: Q,
    #[serde(with = "serde_q")]
    pub sup_norm: Q,
    #[serde(with = "serde_q")]
    pub a_norm: Q,
}

impl CylinderFunction {
    pub fn new(alphabet: Alphabet, depth: usize, table: Vec<Q>) -> Result<Self> {
        let expected = alphabet
            .count(depth)
            .ok_or_else(|| Error::InvalidTable(format!("{}^{depth} overflows", alphabet.size())))?;
        if table.len() != expected {
            return Err(Error::InvalidTable(format!(
                "depth {depth} over {} symbols needs {expected} entries, got {}",
                alphabet.size(),
                table.len()
            )));
        }
        Ok(CylinderFunction { alphabet, depth, table })
    }

    pub fn from_fn(alphabet: Alphabet, depth: usize, mut f: impl FnMut(&Word) -> Q) -> Result<Self> {
        let n = alphabet
            .count(depth)
            .ok_or_else(|| Error::InvalidTable("table size overflows".into()))?;
        let table = (0..n).map(|i| f(&Word::from_index(i, depth, alphabet))).collect();
        Self::new(alphabet, depth, table)
    }

    pub fn constant(alphabet: Alphabet, c: Q) -> Self {
        CylinderFunction { alphabet, depth: 0, table: vec![c] }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn table(&self) -> &[Q] {
        &self.table
    }

    pub fn into_table(self) -> Vec<Q> {
        self.table
    }

    /// Value on any word of length at least `depth`.
    pub fn eval_word(&self, w: &[u8]) -> &Q {
        let m = self.alphabet.size();
        let idx = w[..self.depth].iter().fold(0usize, |acc, &s| acc * m + s as usize);
        &self.table[idx]
    }

    pub fn eval(&self, x: &Point) -> &Q {
        self.eval_word(&x.prefix(self.depth).0)
    }

    /// Largest oscillation over words sharing a length-`j` prefix.
    pub fn var(&self, j: usize) -> Q {
        if j >= self.depth {
            return Q::zero();
        }
        let block = self.alphabet.count(self.depth - j).expect("fits: table exists");
        self.table
            .chunks(block)
            .map(|c| {
                let hi = c.iter().max().expect("nonempty");
                let lo = c.iter().min().expect("nonempty");
                hi - lo
            })
            .max()
            .unwrap_or_else(Q::zero)
    }

    pub fn variations(&self) -> Vec<Q> {
        (0..=self.depth).map(|j| self.var(j)).collect()
    }

    /// `V_n = sum_(j >= n) var_j`.
    pub fn tail_sum(&self, n: usize) -> Q {
        (n..self.depth).map(|j| self.var(j)).fold(Q::zero(), |a, b| a + b)
    }

    pub fn sup_norm(&self) -> Q {
        self.table.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn max_value(&self) -> Q {
        self.table.iter().max().cloned().unwrap_or_else(Q::zero)
    }

    pub fn lip_a(&self, a: &ASequence) -> Q {
        (0..self.depth).map(|j| self.var(j) / a.value(j)).max().unwrap_or_else(Q::zero)
    }

    pub fn a_norm(&self, a: &ASequence) -> Q {
        self.lip_a(a) + self.sup_norm()
    }

    pub fn norm(&self, a: &ASequence) -> NormReport {
        let variations = self.variations();
        let mut tail_sums = vec![Q::zero(); self.depth + 1];
        for j in (0..self.depth).rev() {
            tail_sums[j] = &tail_sums[j + 1] + &variations[j];
        }
        let lip_a = (0..self.depth)
            .map(|j| &variations[j] / a.value(j))
            .max()
            .unwrap_or_else(Q::zero);
        let sup_norm = self.sup_norm();
        let a_norm = &lip_a + &sup_norm;
        NormReport { variations, tail_sums, lip_a, sup_norm, a_norm }
    }

    /// Same function, tabulated at depth `k >= depth`.
    pub fn lift_depth(&self, k: usize) -> Result<Self> {
        if k < self.depth {
            return Err(Error::InvalidTable(format!("cannot lift depth {} to {k}", self.depth)));
        }
        let stride = self.alphabet.count(k - self.depth).ok_or_else(|| Error::InvalidTable("overflow".into()))?;
        let n = self.alphabet.count(k).ok_or_else(|| Error::InvalidTable("overflow".into()))?;
        let table = (0..n).map(|i| self.table[i / stride].clone()).collect();
        Self::new(self.alphabet, k, table)
    }

    /// `h ∘ T`, one level deeper.
    pub fn compose_shift(&self) -> Self {
        let modulus = self.table.len();
        let n = modulus * self.alphabet.size();
        let table = (0..n).map(|i| self.table[i % modulus].clone()).collect();
        CylinderFunction { alphabet: self.alphabet, depth: self.depth + 1, table }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&Q, &Q) -> Q) -> Result<Self> {
        self.alphabet.check_same(other.alphabet)?;
        let k = self.depth.max(other.depth);
        let a = self.lift_depth(k)?;
        let b = other.lift_depth(k)?;
        let table = a.table.iter().zip(&b.table).map(|(x, y)| op(x, y)).collect();
        Self::new(self.alphabet, k, table)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, c: &Q) -> Self {
        CylinderFunction {
            alphabet: self.alphabet,
            depth: self.depth,
            table: self.table.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add_constant(&self, c: &Q) -> Self {
        CylinderFunction {
            alphabet: self.alphabet,
            depth: self.depth,
            table: self.table.iter().map(|v| v + c).collect(),
        }
    }
}

/// `S_n f(x) = sum_(i<n) f(T^i x)`.
pub fn birkhoff_sum(f: &CylinderFunction, x: &Point, n: usize) -> Result<Q> {
    f.alphabet().check_same(x.alphabet())?;
    let k = f.depth();
    let w: Vec<u8> = (0..n + k).map(|i| x.symbol(i)).collect();
    Ok((0..n).fold(Q::zero(), |acc, i| acc + f.eval_word(&w[i..])))
}

/// Mean of `f` over one period, i.e. its integral against the orbit measure.
pub fn ergodic_average(f: &CylinderFunction, orbit: &PeriodicOrbit) -> Result<Q> {
    let p = orbit.period();
    Ok(birkhoff_sum(f, &orbit.point(0), p)? / int(p as i64))
}

/// `A_n` where `n` is the first disagreement; zero when equal.
pub fn d_a(x: &Point, y: &Point, a: &ASequence) -> Result<Q> {
    Ok(match first_disagreement(x, y)? {
        None => Q::zero(),
        Some(n) => a.value(n),
    })
}

/// `min over orbit points of A_min(c, K)` with `c` the common prefix length of
/// `w` (of length `K`) with the point.
pub fn d_a_to_orbit_truncated(w: &Word, orbit: &PeriodicOrbit, a: &ASequence) -> Result<Q> {
    w.validate(orbit.alphabet())?;
    if w.is_empty() {
        return Err(Error::Precondition("truncation depth must be at least 1".into()));
    }
    Ok(a.value(orbit.common_prefix_with_word(&w.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn a2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn f(depth: usize, vals: &[i64]) -> CylinderFunction {
        CylinderFunction::new(a2(), depth, vals.iter().map(|&v| int(v)).collect()).unwrap()
    }

    fn pt(u: &[u8], v: &[u8]) -> Point {
        Point::new(a2(), Word(u.to_vec()), Word(v.to_vec())).unwrap()
    }

    #[test]
    fn variations_and_norms() {
        let g = f(1, &[0, 1]);
        assert_eq!(g.var(0), int(1));
        assert_eq!(g.var(1), int(0));
        assert_eq!(g.norm(&ASequence::Dyadic).a_norm, int(2));

        let w = f(2, &[0, 0, 2, 0]);
        assert_eq!(w.variations(), vec![int(2), int(2), int(0)]);
        assert_eq!(w.tail_sum(0), int(4));
        assert_eq!(w.tail_sum(1), int(2));
        assert_eq!(w.tail_sum(2), int(0));
        let r = w.norm(&ASequence::TriangularDyadic);
        assert_eq!(r.lip_a, int(4));
        assert_eq!(r.a_norm, int(6));
        assert_eq!(r.tail_sums, vec![int(4), int(2), int(0)]);
        assert_eq!(w.scale(&q(-3, 2)).a_norm(&ASequence::TriangularDyadic), int(9));

        let c = f(2, &[5, 5, 5, 5]);
        assert!(c.variations().iter().all(|v| v.is_zero()));
        assert_eq!(c.tail_sum(0), int(0));
    }

    #[test]
    fn algebra() {
        let g = f(1, &[3, 7]);
        let l = g.lift_depth(2).unwrap();
        assert_eq!(l.table(), &[int(3), int(3), int(7), int(7)]);
        let s = g.compose_shift();
        assert_eq!(s.table(), &[int(3), int(7), int(3), int(7)]);
        assert_eq!(*s.eval_word(&[1, 0]), int(3));
        let z = g.add(&g.scale(&int(-1))).unwrap();
        assert!(z.table().iter().all(|v| v.is_zero()));
        assert!(g.lift_depth(0).is_err());
    }

    #[test]
    fn averages() {
        let g = f(1, &[0, 1]);
        let x = pt(&[], &[0, 1]);
        assert_eq!(birkhoff_sum(&g, &x, 0).unwrap(), int(0));
        assert_eq!(birkhoff_sum(&g, &x, 4).unwrap(), int(2));
        let w = f(2, &[0, 0, 2, 0]);
        let y = PeriodicOrbit::from_word(a2(), &Word(vec![0, 1])).unwrap();
        assert_eq!(ergodic_average(&w, &y).unwrap(), int(1));
        let z = PeriodicOrbit::from_word(a2(), &Word(vec![0])).unwrap();
        assert_eq!(ergodic_average(&w, &z).unwrap(), int(0));
        let c = CylinderFunction::constant(a2(), q(2, 3));
        assert_eq!(ergodic_average(&c, &y).unwrap(), q(2, 3));
    }

    #[test]
    fn d_a_examples() {
        let x = pt(&[], &[0, 1]);
        let y = pt(&[], &[0, 1, 1, 0]);
        assert_eq!(d_a(&x, &x, &ASequence::TriangularDyadic).unwrap(), int(0));
        assert_eq!(d_a(&x, &y, &ASequence::TriangularDyadic).unwrap(), q(1, 8));
        assert_eq!(d_a(&x, &y, &ASequence::Dyadic).unwrap(), crate::shift::d(&x, &y).unwrap());

        let o = PeriodicOrbit::from_word(a2(), &Word(vec![0, 1])).unwrap();
        assert_eq!(d_a_to_orbit_truncated(&Word(vec![0, 0]), &o, &ASequence::Dyadic).unwrap(), q(1, 2));
        assert_eq!(d_a_to_orbit_truncated(&Word(vec![1, 0, 1]), &o, &ASequence::Dyadic).unwrap(), q(1, 8));
        let fixed = PeriodicOrbit::from_word(a2(), &Word(vec![0])).unwrap();
        assert_eq!(
            d_a_to_orbit_truncated(&Word(vec![1, 1]), &fixed, &ASequence::TriangularDyadic).unwrap(),
            int(1)
        );
    }

    fn arb_fn(depth: usize) -> impl Strategy<Value = CylinderFunction> {
        proptest::collection::vec((-20i64..20, 1i64..9), 1usize << depth).prop_map(move |v| {
            CylinderFunction::new(a2(), depth, v.into_iter().map(|(n, d)| q(n, d)).collect()).unwrap()
        })
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        (proptest::collection::vec(0u8..2, 0..5), proptest::collection::vec(0u8..2, 1..5))
            .prop_map(|(u, v)| pt(&u, &v))
    }

    proptest! {
        #[test]
        fn lift_preserves_functionals(g in arb_fn(2), extra in 0usize..3) {
            let l = g.lift_depth(2 + extra).unwrap();
            for j in 0..6 {
                prop_assert_eq!(g.var(j), l.var(j));
            }
            prop_assert_eq!(g.norm(&ASequence::TriangularDyadic).a_norm, l.norm(&ASequence::TriangularDyadic).a_norm);
        }

        #[test]
        fn norm_triangle(g in arb_fn(3), h in arb_fn(2)) {
            for a in ASequence::builtin_kinds() {
                let s = g.add(&h).unwrap();
                prop_assert!(s.a_norm(&a) <= g.a_norm(&a) + h.a_norm(&a));
            }
        }

        #[test]
        fn tail_sum_bounded_by_gamma(g in arb_fn(3)) {
            for a in ASequence::builtin_kinds() {
                let gamma = a.gamma().unwrap();
                let norm = g.a_norm(&a);
                for n in 0..=3 {
                    prop_assert!(g.tail_sum(n) <= &gamma * &norm * a.value(n));
                }
            }
        }

        #[test]
        fn birkhoff_additive(g in arb_fn(2), x in arb_point(), n in 0usize..7, m in 0usize..7) {
            let lhs = birkhoff_sum(&g, &x, n + m).unwrap();
            let rhs = birkhoff_sum(&g, &x, n).unwrap() + birkhoff_sum(&g, &x.shift_by(n), m).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn d_a_ultrametric(x in arb_point(), y in arb_point(), z in arb_point()) {
            let a = ASequence::TriangularDyadic;
            let xz = d_a(&x, &z, &a).unwrap();
            prop_assert!(xz <= d_a(&x, &y, &a).unwrap().max(d_a(&y, &z, &a).unwrap()));
        }

        #[test]
        fn truncation_error_at_most_a_k(x in arb_point(), v in proptest::collection::vec(0u8..2, 1..4), k in 1usize..6) {
            let a = ASequence::Dyadic;
            let o = PeriodicOrbit::from_word(a2(), &Word(v)).unwrap();
            let exact = match o.first_disagreement_with(&x).unwrap() {
                None => Q::zero(),
                Some(c) => a.value(c),
            };
            let approx = d_a_to_orbit_truncated(&x.prefix(k), &o, &a).unwrap();
            prop_assert!((exact - approx).abs() <= a.value(k));
        }
    }
}
