//! Brute-force maximum over periodic orbits, independent of the graph
//! solvers.

use std::cmp::Ordering;

use bnum::types::I512;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::graph::Topology;
use super::scaled::{max_bits, to_common_denominator};
use crate::error::{Error, Result};
use crate::exact::{convert_all, Backend, ExactInt};
use crate::rational::{serde_q, Q};
use crate::shift::{PeriodicOrbit, Word};
use crate::space::CylinderFunction;

/// Explicit necklace enumeration is used while `m^P` stays below this.
pub const ENUMERATION_GUARD: u128 = 10_000_000;
/// Bound on `P * nodes * edges` for the closed-walk recurrence.
pub const WALK_GUARD: u128 = 2_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    /// Every Lyndon word of length at most `P`.
    Necklaces,
    /// Diagonal of max-plus matrix powers up to `P`; reports one best orbit.
    ClosedWalks,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    #[serde(with = "serde_q")]
    pub beta: Q,
    pub best: Vec<PeriodicOrbit>,
    pub method: OracleMethod,
    pub max_period: usize,
}

/// Lyndon words of length `1..=max_len` in lexicographic order.
pub fn lyndon_words(m: usize, max_len: usize, mut visit: impl FnMut(&[u8])) {
    if max_len == 0 {
        return;
    }
    let mut w: Vec<u8> = vec![0];
    loop {
        visit(&w);
        let n = w.len();
        while w.len() < max_len {
            let s = w[w.len() - n];
            w.push(s);
        }
        while w.last() == Some(&((m - 1) as u8)) {
            w.pop();
        }
        match w.last_mut() {
            Some(s) => *s += 1,
            None => break,
        }
    }
}

fn cmp_means<T: ExactInt>(s1: &T, p1: usize, s2: &T, p2: usize) -> Ordering {
    s1.times_i64(p2 as i64).cmp(&s2.times_i64(p1 as i64))
}

fn by_necklaces<T: ExactInt>(f: &CylinderFunction, w: &[T], max_period: usize) -> Result<(T, usize, Vec<PeriodicOrbit>)> {
    let m = f.alphabet().size();
    let k = f.depth();
    let mut best: Option<(T, usize)> = None;
    let mut words: Vec<Vec<u8>> = Vec::new();
    lyndon_words(m, max_period, |word| {
        let p = word.len();
        let mut sum = T::zero();
        for i in 0..p {
            let idx = (0..k).fold(0usize, |acc, j| acc * m + word[(i + j) % p] as usize);
            sum = sum.plus(&w[idx]);
        }
        let ord = best.as_ref().map_or(Ordering::Greater, |(s, q)| cmp_means(&sum, p, s, *q));
        match ord {
            Ordering::Greater => {
                best = Some((sum, p));
                words.clear();
                words.push(word.to_vec());
            }
            Ordering::Equal => words.push(word.to_vec()),
            Ordering::Less => {}
        }
    });
    let (s, p) = best.expect("at least the word 0");
    let orbits = words
        .into_iter()
        .map(|v| PeriodicOrbit::from_word(f.alphabet(), &Word(v)))
        .collect::<Result<Vec<_>>>()?;
    Ok((s, p, orbits))
}

fn by_closed_walks<T: ExactInt>(f: &CylinderFunction, w: &[T], max_period: usize) -> Result<(T, usize, Vec<PeriodicOrbit>)> {
    let t = Topology::new(f.alphabet(), f.depth());
    let walk_from = |s: usize, keep: bool| {
        let mut rows: Vec<Vec<Option<(T, usize)>>> = Vec::new();
        let mut cur: Vec<Option<(T, usize)>> = vec![None; t.nodes];
        cur[s] = Some((T::zero(), usize::MAX));
        let mut best: Option<(T, usize)> = None;
        for n in 1..=max_period {
            let next: Vec<Option<(T, usize)>> = (0..t.nodes)
                .map(|v| {
                    let mut top: Option<(T, usize)> = None;
                    for a in 0..t.m {
                        let e = t.in_edge(v, a);
                        if let Some((d, _)) = &cur[t.src(e)] {
                            let cand = d.plus(&w[e]);
                            if top.as_ref().map_or(true, |(b, _)| cand > *b) {
                                top = Some((cand, e));
                            }
                        }
                    }
                    top
                })
                .collect();
            if let Some((d, _)) = &next[s] {
                if best.as_ref().map_or(true, |(b, q)| cmp_means(d, n, b, *q) == Ordering::Greater) {
                    best = Some((d.clone(), n));
                }
            }
            if keep {
                rows.push(cur);
            }
            cur = next;
        }
        if keep {
            rows.push(cur);
        }
        (best, rows)
    };
    let mut overall: Option<(T, usize, usize)> = None;
    for s in 0..t.nodes {
        if let (Some((d, n)), _) = walk_from(s, false) {
            if overall.as_ref().map_or(true, |(b, q, _)| cmp_means(&d, n, b, *q) == Ordering::Greater) {
                overall = Some((d, n, s));
            }
        }
    }
    let (sum, n, s) = overall.expect("every node lies on a cycle");
    // rebuild the best closed walk and cut out its first simple cycle,
    // which has the same mean
    let (_, rows) = walk_from(s, true);
    let mut edges = Vec::with_capacity(n);
    let mut v = s;
    for step in (1..=n).rev() {
        let (_, e) = rows[step][v].clone().expect("on the optimal walk");
        edges.push(e);
        v = t.src(e);
    }
    edges.reverse();
    let mut first_seen = vec![usize::MAX; t.nodes];
    let mut cycle = edges.clone();
    for (i, &e) in edges.iter().enumerate() {
        let u = t.src(e);
        if first_seen[u] != usize::MAX {
            cycle = edges[first_seen[u]..i].to_vec();
            break;
        }
        first_seen[u] = i;
    }
    Ok((sum, n, vec![t.orbit_of_cycle(f.alphabet(), &cycle)?]))
}

fn run<T: ExactInt>(f: &CylinderFunction, den: &BigInt, nums: &[BigInt], max_period: usize, method: OracleMethod) -> Result<OracleResult> {
    let w: Vec<T> = convert_all(nums).ok_or_else(|| Error::Precondition("weights exceed backend".into()))?;
    let (s, p, best) = match method {
        OracleMethod::Necklaces => by_necklaces(f, &w, max_period)?,
        OracleMethod::ClosedWalks => by_closed_walks(f, &w, max_period)?,
    };
    Ok(OracleResult { beta: Q::new(s.to_bigint(), den * BigInt::from(p)), best, method, max_period })
}

/// Maximum ergodic average over all periodic orbits of period at most `P`.
pub fn oracle_max(f: &CylinderFunction, max_period: usize) -> Result<OracleResult> {
    if max_period == 0 {
        return Err(Error::Precondition("period bound must be at least 1".into()));
    }
    let f = if f.depth() == 0 { f.lift_depth(1)? } else { f.clone() };
    let m = f.alphabet().size() as u128;
    let words = m.checked_pow(max_period as u32).unwrap_or(u128::MAX);
    let t = Topology::new(f.alphabet(), f.depth());
    let method = if words <= ENUMERATION_GUARD {
        OracleMethod::Necklaces
    } else if (max_period as u128) * (t.nodes as u128) * (t.edges as u128) <= WALK_GUARD {
        OracleMethod::ClosedWalks
    } else {
        return Err(Error::OracleGuard { alphabet: m as usize, period: max_period });
    };
    let (den, nums) = to_common_denominator(f.table());
    let lg = (usize::BITS - max_period.leading_zeros()) as u64;
    match Backend::for_bits(max_bits(&nums) + 2 * lg + 2) {
        Backend::Native => run::<i128>(&f, &den, &nums, max_period, method),
        Backend::Wide => run::<I512>(&f, &den, &nums, max_period, method),
        Backend::Big => run::<BigInt>(&f, &den, &nums, max_period, method),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxplus::karp_max_mean;
    use crate::maxplus::build_graph;
    use crate::rational::{int, q};
    use crate::shift::Alphabet;
    use proptest::prelude::*;

    #[test]
    fn lyndon_counts() {
        // number of binary Lyndon words of length 1..=6: 2,1,2,3,6,9
        let mut n = 0;
        lyndon_words(2, 6, |_| n += 1);
        assert_eq!(n, 23);
        let mut ws = Vec::new();
        lyndon_words(2, 3, |w| ws.push(w.to_vec()));
        assert_eq!(ws, vec![vec![0], vec![0, 0, 1], vec![0, 1], vec![0, 1, 1], vec![1]]);
    }

    #[test]
    fn oracle_examples() {
        let a = Alphabet::new(2).unwrap();
        let f = CylinderFunction::new(a, 2, vec![int(0), int(1), int(1), int(0)]).unwrap();
        let r = oracle_max(&f, 4).unwrap();
        assert_eq!(r.beta, int(1));
        assert_eq!(r.best, vec![PeriodicOrbit::from_word(a, &Word(vec![0, 1])).unwrap()]);
        let c = CylinderFunction::constant(a, q(-2, 3));
        assert_eq!(oracle_max(&c, 3).unwrap().beta, q(-2, 3));
        assert!(oracle_max(&f, 0).is_err());
    }

    #[test]
    fn closed_walks_for_long_periods() {
        let a = Alphabet::new(3).unwrap();
        let vals: Vec<Q> = (0..81).map(|i| q((i * 37 % 23) - 11, 1 + i % 5)).collect();
        let f = CylinderFunction::new(a, 4, vals).unwrap();
        let r = oracle_max(&f, 28).unwrap();
        assert_eq!(r.method, OracleMethod::ClosedWalks);
        assert_eq!(r.beta, karp_max_mean(&build_graph(&f)));
        let avg = crate::space::ergodic_average(&f, &r.best[0]).unwrap();
        assert_eq!(avg, r.beta);
    }

    proptest! {
        #[test]
        fn both_methods_agree(vals in proptest::collection::vec((-9i64..9, 1i64..4), 8)) {
            let a = Alphabet::new(2).unwrap();
            let f = CylinderFunction::new(a, 3, vals.iter().map(|&(n, d)| q(n, d)).collect()).unwrap();
            let (den, nums) = to_common_denominator(f.table());
            let e = run::<i128>(&f, &den, &nums, 5, OracleMethod::Necklaces).unwrap();
            let w = run::<BigInt>(&f, &den, &nums, 5, OracleMethod::ClosedWalks).unwrap();
            prop_assert_eq!(&e.beta, &w.beta);
            prop_assert_eq!(&e.beta, &karp_max_mean(&build_graph(&f)));
            prop_assert!(e.best.contains(&w.best[0]));
        }
    }
}
