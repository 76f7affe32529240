use std::collections::VecDeque;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::graph::{build_graph, DeBruijnGraph, Topology};
use super::normal_form::{cohomologous_form, sub_action, NormalForm};
use crate::error::Result;
use crate::rational::{serde_q, Q};
use crate::shift::{Alphabet, PeriodicOrbit};
use crate::space::CylinderFunction;

/// Upper limit on simple cycles listed from a non-unique support.
pub const CYCLE_LIST_LIMIT: usize = 1000;
const DFS_STEP_LIMIT: usize = 2_000_000;

/// The cyclic part of the zero subgraph and the periodic orbits in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub orbits: Vec<PeriodicOrbit>,
    pub unique: bool,
    pub core_nodes: usize,
    pub core_edges: usize,
    /// False when cycle listing stopped at a limit.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxMeanResult {
    #[serde(with = "serde_q")]
    pub beta: Q,
    pub critical_cycles: Vec<PeriodicOrbit>,
    pub unique: bool,
    pub complete: bool,
}

/// Removes nodes without an incoming or outgoing zero edge until none
/// remain; returns which nodes survive.
pub fn peel(t: Topology, zero: &[bool]) -> Vec<bool> {
    let mut alive = vec![true; t.nodes];
    let mut indeg = vec![0u32; t.nodes];
    let mut outdeg = vec![0u32; t.nodes];
    for e in (0..t.edges).filter(|&e| zero[e]) {
        outdeg[t.src(e)] += 1;
        indeg[t.dst(e)] += 1;
    }
    let mut queue: VecDeque<usize> = (0..t.nodes).filter(|&v| indeg[v] == 0 || outdeg[v] == 0).collect();
    while let Some(v) = queue.pop_front() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for a in 0..t.m {
            let out = t.out_edge(v, a);
            if zero[out] {
                let w = t.dst(out);
                if alive[w] && w != v {
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        queue.push_back(w);
                    }
                }
            }
            let inc = t.in_edge(v, a);
            if zero[inc] {
                let u = t.src(inc);
                if alive[u] && u != v {
                    outdeg[u] -= 1;
                    if outdeg[u] == 0 {
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    alive
}

/// Support of the measures living on the zero edges.
pub fn support_from_zero_edges(alphabet: Alphabet, t: Topology, zero: &[bool]) -> Result<Support> {
    let alive = peel(t, zero);
    let core = |e: usize| zero[e] && alive[t.src(e)] && alive[t.dst(e)];
    let core_nodes = alive.iter().filter(|&&a| a).count();
    let mut outdeg = vec![0usize; t.nodes];
    let mut indeg = vec![0usize; t.nodes];
    let mut core_edges = 0;
    for e in (0..t.edges).filter(|&e| core(e)) {
        outdeg[t.src(e)] += 1;
        indeg[t.dst(e)] += 1;
        core_edges += 1;
    }
    if core_nodes > 0 && core_edges == core_nodes && (0..t.nodes).all(|v| !alive[v] || (indeg[v] == 1 && outdeg[v] == 1)) {
        let start = (0..t.nodes).find(|&v| alive[v]).expect("core nonempty");
        let mut cycle = Vec::new();
        let mut v = start;
        loop {
            let e = (0..t.m).map(|a| t.out_edge(v, a)).find(|&e| core(e)).expect("out-degree one");
            cycle.push(e);
            v = t.dst(e);
            if v == start {
                break;
            }
        }
        if cycle.len() == core_nodes {
            let orbit = t.orbit_of_cycle(alphabet, &cycle)?;
            return Ok(Support { orbits: vec![orbit], unique: true, core_nodes, core_edges, complete: true });
        }
    }
    // zero paths joining cycles survive peeling, so the core may still carry
    // a single cycle
    let (orbits, complete) = enumerate_cycles(alphabet, t, &core)?;
    let unique = complete && orbits.len() == 1;
    Ok(Support { orbits, unique, core_nodes, core_edges, complete })
}

/// Simple cycles of the core, each found from its smallest node.
fn enumerate_cycles(alphabet: Alphabet, t: Topology, core: &dyn Fn(usize) -> bool) -> Result<(Vec<PeriodicOrbit>, bool)> {
    let mut found: Vec<PeriodicOrbit> = Vec::new();
    let mut steps = 0usize;
    let mut on_path = vec![false; t.nodes];
    for s in 0..t.nodes {
        if !(0..t.m).any(|a| core(t.out_edge(s, a))) {
            continue;
        }
        // stack of (node, next symbol to try); path holds the edges taken
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        let mut path: Vec<usize> = Vec::new();
        on_path[s] = true;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            steps += 1;
            if steps > DFS_STEP_LIMIT || found.len() >= CYCLE_LIST_LIMIT {
                found.sort();
                found.dedup();
                return Ok((found, false));
            }
            if *next >= t.m {
                on_path[v] = false;
                stack.pop();
                path.pop();
                continue;
            }
            let e = t.out_edge(v, *next);
            *next += 1;
            if !core(e) {
                continue;
            }
            let w = t.dst(e);
            if w == s {
                path.push(e);
                found.push(t.orbit_of_cycle(alphabet, &path)?);
                path.pop();
            } else if w > s && !on_path[w] {
                on_path[w] = true;
                path.push(e);
                stack.push((w, 0));
            }
        }
    }
    found.sort();
    found.dedup();
    Ok((found, true))
}

pub fn maximizing_support(nf: &NormalForm) -> Result<Support> {
    let f = &nf.f_hat;
    let t = Topology::new(f.alphabet(), f.depth());
    let zero: Vec<bool> = f.table().iter().map(|v| v.is_zero()).collect();
    support_from_zero_edges(f.alphabet(), t, &zero)
}

/// β together with the maximizing cycles read off the normal form.
pub fn max_mean_cycle(g: &DeBruijnGraph) -> Result<MaxMeanResult> {
    let f = CylinderFunction::new(g.alphabet, g.topology.order, g.weights.clone())?;
    let sa = sub_action(&f)?;
    let f_hat = cohomologous_form(&f, &sa)?;
    let zero: Vec<bool> = f_hat.table().iter().map(|v| v.is_zero()).collect();
    let s = support_from_zero_edges(g.alphabet, g.topology, &zero)?;
    Ok(MaxMeanResult { beta: sa.beta, critical_cycles: s.orbits, unique: s.unique, complete: s.complete })
}

pub fn max_mean_of(f: &CylinderFunction) -> Result<MaxMeanResult> {
    max_mean_cycle(&build_graph(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxplus::normal_form;
    use crate::rational::int;
    use crate::shift::Word;
    use crate::space::ASequence;

    fn a2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn f(k: usize, vals: &[i64]) -> CylinderFunction {
        CylinderFunction::new(a2(), k, vals.iter().map(|&v| int(v)).collect()).unwrap()
    }

    fn orb(v: &[u8]) -> PeriodicOrbit {
        PeriodicOrbit::from_word(a2(), &Word(v.to_vec())).unwrap()
    }

    #[test]
    fn max_mean_examples() {
        let r = max_mean_of(&f(2, &[0, 1, 1, 0])).unwrap();
        assert_eq!(r.beta, int(1));
        assert!(r.unique);
        assert_eq!(r.critical_cycles, vec![orb(&[0, 1])]);
        let r = max_mean_of(&f(2, &[0, 0, 2, 0])).unwrap();
        assert_eq!((r.beta, r.unique), (int(1), true));
        let r = max_mean_of(&f(2, &[4, 4, 4, 4])).unwrap();
        assert_eq!(r.beta, int(4));
        assert!(!r.unique);
        assert_eq!(r.critical_cycles, vec![orb(&[0]), orb(&[0, 1]), orb(&[1])]);
    }

    #[test]
    fn support_examples() {
        let t = Topology::new(a2(), 2);
        let s = support_from_zero_edges(a2(), t, &[false, true, true, false]).unwrap();
        assert!(s.unique);
        assert_eq!(s.orbits, vec![orb(&[0, 1])]);
        let s = support_from_zero_edges(a2(), t, &[true; 4]).unwrap();
        assert!(!s.unique);
        assert_eq!(s.core_edges, 4);
        let s = support_from_zero_edges(a2(), t, &[true, false, false, true]).unwrap();
        assert!(!s.unique);
        assert_eq!(s.orbits, vec![orb(&[0]), orb(&[1])]);
        // a dangling zero edge is peeled away
        let s = support_from_zero_edges(a2(), t, &[true, true, false, false]).unwrap();
        assert!(s.unique);
        assert_eq!(s.orbits, vec![orb(&[0])]);
    }

    #[test]
    fn support_from_normal_form() {
        let nf = normal_form(&f(2, &[0, 0, 2, 0]), &ASequence::Dyadic).unwrap();
        let s = maximizing_support(&nf).unwrap();
        assert!(s.unique);
        assert_eq!(s.orbits, vec![orb(&[0, 1])]);
    }

    #[test]
    fn listing_is_capped() {
        let a = Alphabet::new(3).unwrap();
        let t = Topology::new(a, 5);
        let s = support_from_zero_edges(a, t, &vec![true; t.edges]).unwrap();
        assert!(!s.complete);
        assert!(!s.unique);
        assert_eq!(s.orbits[0], PeriodicOrbit::from_word(a, &Word(vec![0])).unwrap());
    }
}
