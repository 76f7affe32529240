//! Max-plus policy iteration for the maximum cycle mean on a de Bruijn
//! graph with exact integer weights.
//!
//! A policy picks one in-edge per node. Each node then inherits the mean of
//! the cycle its parent chain falls into, and a value scaled by that mean's
//! (reduced) denominator, so that all bookkeeping stays integral.

use std::cmp::Ordering;

use num_integer::Integer;

use super::graph::Topology;
use crate::error::{Error, Result};
use crate::exact::ExactInt;

const MAX_ITERATIONS: usize = 100_000;

/// A reduced cycle mean `num / len` in weight units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mean<T> {
    pub num: T,
    pub len: u32,
}

impl<T: ExactInt> Mean<T> {
    pub fn cmp_mean(&self, other: &Self) -> Ordering {
        if self.len == other.len {
            return self.num.cmp(&other.num);
        }
        self.num.times_i64(other.len as i64).cmp(&other.num.times_i64(self.len as i64))
    }
}

#[derive(Clone, Debug)]
pub struct HowardSolution<T> {
    /// In-edge symbol chosen at each node.
    pub policy: Vec<u8>,
    pub mean: Mean<T>,
    /// Edges of one cycle attaining the mean, in walk order.
    pub cycle: Vec<usize>,
    /// Values scaled by `mean.len`; a Bellman potential when `uniform`.
    pub values: Vec<T>,
    /// Every node reaches a cycle of the maximal mean.
    pub uniform: bool,
    pub iterations: usize,
}

struct CycleInfo<T> {
    mean: Mean<T>,
    root: usize,
}

struct Evaluation<T> {
    cycles: Vec<CycleInfo<T>>,
    cycle_of: Vec<u32>,
    values: Vec<T>,
    /// Rank of each cycle's mean; equal means share a rank.
    rank: Vec<u32>,
}

pub struct Howard<'a, T> {
    topo: Topology,
    weights: &'a [T],
    excluded: Option<usize>,
}

impl<'a, T: ExactInt> Howard<'a, T> {
    pub fn new(topo: Topology, weights: &'a [T]) -> Self {
        assert_eq!(weights.len(), topo.edges);
        Howard { topo, weights, excluded: None }
    }

    /// Solve on the graph with one edge removed.
    pub fn excluding(mut self, e: usize) -> Self {
        self.excluded = Some(e);
        self
    }

    #[inline]
    fn usable(&self, e: usize) -> bool {
        self.excluded != Some(e)
    }

    fn greedy_policy(&self) -> Vec<u8> {
        let t = self.topo;
        (0..t.nodes)
            .map(|v| {
                let mut best: Option<(usize, &T)> = None;
                for a in 0..t.m {
                    let e = t.in_edge(v, a);
                    if !self.usable(e) {
                        continue;
                    }
                    let w = &self.weights[e];
                    if best.map_or(true, |(_, b)| w > b) {
                        best = Some((a, w));
                    }
                }
                best.expect("every node keeps an in-edge").0 as u8
            })
            .collect()
    }

    fn repair(&self, mut policy: Vec<u8>) -> Vec<u8> {
        if let Some(x) = self.excluded {
            let v = self.topo.dst(x);
            if self.topo.in_edge(v, policy[v] as usize) == x {
                let greedy = self.greedy_policy();
                policy[v] = greedy[v];
            }
        }
        policy
    }

    pub fn solve(&self, warm: Option<&[u8]>) -> Result<HowardSolution<T>> {
        let t = self.topo;
        let mut policy = match warm {
            Some(p) if p.len() == t.nodes => self.repair(p.to_vec()),
            _ => self.greedy_policy(),
        };
        let mut prev: Option<Evaluation<T>> = None;
        for iteration in 1..=MAX_ITERATIONS {
            let ev = self.evaluate(&policy, prev.as_ref());
            if !self.improve_means(&mut policy, &ev) && !self.improve_values(&mut policy, &ev) {
                return Ok(self.finish(policy, ev, iteration));
            }
            prev = Some(ev);
        }
        Err(Error::Certificate(format!("policy iteration did not converge in {MAX_ITERATIONS} rounds")))
    }

    #[inline]
    fn parent(&self, policy: &[u8], v: usize) -> usize {
        self.topo.src(self.topo.in_edge(v, policy[v] as usize))
    }

    #[inline]
    fn step_value(&self, e: usize, mean: &Mean<T>, parent_value: &T) -> T {
        self.weights[e].times_i64(mean.len as i64).minus(&mean.num).plus(parent_value)
    }

    fn evaluate(&self, policy: &[u8], prev: Option<&Evaluation<T>>) -> Evaluation<T> {
        let t = self.topo;
        let n = t.nodes;
        const FRESH: u32 = u32::MAX;
        const OPEN: u32 = u32::MAX - 1;
        let mut cycle_of = vec![FRESH; n];
        let mut values = vec![T::zero(); n];
        let mut cycles: Vec<CycleInfo<T>> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut pos = vec![0u32; n];

        for s in 0..n {
            if cycle_of[s] != FRESH {
                continue;
            }
            let mut v = s;
            while cycle_of[v] == FRESH {
                cycle_of[v] = OPEN;
                pos[v] = stack.len() as u32;
                stack.push(v);
                v = self.parent(policy, v);
            }
            if cycle_of[v] == OPEN {
                // stack[start..] is a cycle, each entry's parent is the next
                let start = pos[v] as usize;
                let ring: Vec<usize> = stack.drain(start..).collect();
                let len = ring.len();
                let mut sum = T::zero();
                for &c in &ring {
                    sum = sum.plus(&self.weights[t.in_edge(c, policy[c] as usize)]);
                }
                let (_, r) = sum.div_rem_u32(len as u32);
                let g = (r.unsigned_abs()).gcd(&(len as u64)) as u32;
                let mean = Mean { num: if g == 1 { sum } else { sum.div_rem_u32(g).0 }, len: len as u32 / g };
                let (ir, &root) = ring.iter().enumerate().min_by_key(|(_, &c)| c).expect("nonempty");
                let id = cycles.len() as u32;
                let root_value = prev
                    .and_then(|p| {
                        let old = &p.cycles[p.cycle_of[root] as usize].mean;
                        (old.cmp_mean(&mean) == Ordering::Equal && old.len == mean.len)
                            .then(|| p.values[root].clone())
                    })
                    .unwrap_or_else(T::zero);
                values[root] = root_value;
                cycle_of[root] = id;
                // children precede parents in `ring`, so walk backwards from the root
                for step in 1..len {
                    let i = (ir + len - step) % len;
                    let c = ring[i];
                    let parent = ring[(i + 1) % len];
                    values[c] = self.step_value(t.in_edge(c, policy[c] as usize), &mean, &values[parent]);
                    cycle_of[c] = id;
                }
                cycles.push(CycleInfo { mean, root });
            }
            while let Some(c) = stack.pop() {
                let parent = self.parent(policy, c);
                let id = cycle_of[parent];
                values[c] = self.step_value(
                    t.in_edge(c, policy[c] as usize),
                    &cycles[id as usize].mean,
                    &values[parent],
                );
                cycle_of[c] = id;
            }
        }

        let mut order: Vec<u32> = (0..cycles.len() as u32).collect();
        order.sort_by(|&a, &b| cycles[a as usize].mean.cmp_mean(&cycles[b as usize].mean));
        let mut rank = vec![0u32; cycles.len()];
        let mut r = 0u32;
        for w in 0..order.len() {
            if w > 0
                && cycles[order[w] as usize].mean.cmp_mean(&cycles[order[w - 1] as usize].mean)
                    != Ordering::Equal
            {
                r += 1;
            }
            rank[order[w] as usize] = r;
        }
        Evaluation { cycles, cycle_of, values, rank }
    }

    /// Move each node to an in-edge whose source sits on a strictly better
    /// mean.
    fn improve_means(&self, policy: &mut [u8], ev: &Evaluation<T>) -> bool {
        let t = self.topo;
        let mut changed = false;
        for v in 0..t.nodes {
            let mut best = ev.rank[ev.cycle_of[v] as usize];
            let mut choice = None;
            for a in 0..t.m {
                let e = t.in_edge(v, a);
                if !self.usable(e) {
                    continue;
                }
                let r = ev.rank[ev.cycle_of[t.src(e)] as usize];
                if r > best {
                    best = r;
                    choice = Some(a as u8);
                }
            }
            if let Some(a) = choice {
                policy[v] = a;
                changed = true;
            }
        }
        changed
    }

    /// Among in-edges with the same mean, move to a strictly larger value.
    fn improve_values(&self, policy: &mut [u8], ev: &Evaluation<T>) -> bool {
        let t = self.topo;
        let mut changed = false;
        for v in 0..t.nodes {
            let id = ev.cycle_of[v] as usize;
            let rank = ev.rank[id];
            let mean = &ev.cycles[id].mean;
            let mut best: Option<T> = None;
            let mut choice = None;
            for a in 0..t.m {
                if a == policy[v] as usize {
                    continue;
                }
                let e = t.in_edge(v, a);
                if !self.usable(e) {
                    continue;
                }
                let u = t.src(e);
                if ev.rank[ev.cycle_of[u] as usize] != rank {
                    continue;
                }
                let cand = self.step_value(e, mean, &ev.values[u]);
                let bar = best.as_ref().unwrap_or(&ev.values[v]);
                if cand > *bar {
                    best = Some(cand);
                    choice = Some(a as u8);
                }
            }
            if let Some(a) = choice {
                policy[v] = a;
                changed = true;
            }
        }
        changed
    }

    fn finish(&self, policy: Vec<u8>, ev: Evaluation<T>, iterations: usize) -> HowardSolution<T> {
        let t = self.topo;
        let top = *ev.rank.iter().max().expect("at least one cycle");
        let uniform = ev.cycle_of.iter().all(|&c| ev.rank[c as usize] == top);
        let best = (0..ev.cycles.len())
            .filter(|&c| ev.rank[c] == top)
            .min_by_key(|&c| ev.cycles[c].root)
            .expect("top rank exists");
        let root = ev.cycles[best].root;
        // follow parents from the root, then reverse into walk order
        let mut nodes = vec![root];
        let mut v = self.parent(&policy, root);
        while v != root {
            nodes.push(v);
            v = self.parent(&policy, v);
        }
        nodes.reverse();
        let cycle = nodes.iter().map(|&c| t.in_edge(c, policy[c] as usize)).collect();
        let Evaluation { mut cycles, values, .. } = ev;
        let mean = cycles.swap_remove(best).mean;
        HowardSolution { policy, mean, cycle, values, uniform, iterations }
    }
}

/// Bits needed for any intermediate quantity when solving with weights of
/// at most `weight_bits` bits on `nodes` nodes.
pub fn required_bits(weight_bits: u64, nodes: usize) -> u64 {
    let lg = (usize::BITS - nodes.leading_zeros()) as u64;
    weight_bits + 2 * lg + 4
}
