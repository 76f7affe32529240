use crate::error::Result;
use crate::rational::Q;
use crate::shift::{Alphabet, PeriodicOrbit, Word};
use crate::space::CylinderFunction;

/// Index arithmetic for the de Bruijn graph of order `k`: nodes are words of
/// length `k - 1`, edges are words of length `k`, and edge `w` runs from
/// `w[..k-1]` to `w[1..]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Topology {
    pub m: usize,
    pub order: usize,
    pub nodes: usize,
    pub edges: usize,
}

impl Topology {
    pub fn new(alphabet: Alphabet, order: usize) -> Self {
        assert!(order >= 1, "de Bruijn order must be at least 1");
        let m = alphabet.size();
        let nodes = alphabet.count(order - 1).expect("node count fits");
        Topology { m, order, nodes, edges: nodes * m }
    }

    #[inline]
    pub fn src(&self, e: usize) -> usize {
        e / self.m
    }

    #[inline]
    pub fn dst(&self, e: usize) -> usize {
        e % self.nodes
    }

    /// Edge `a·v`, the `a`-th in-edge of node `v`.
    #[inline]
    pub fn in_edge(&self, v: usize, a: usize) -> usize {
        a * self.nodes + v
    }

    /// Edge `u·a`, the `a`-th out-edge of node `u`.
    #[inline]
    pub fn out_edge(&self, u: usize, a: usize) -> usize {
        u * self.m + a
    }

    /// First symbol of the edge word.
    #[inline]
    pub fn lead_symbol(&self, e: usize) -> u8 {
        (e / self.nodes) as u8
    }

    /// Orbit traced by a closed edge walk.
    pub fn orbit_of_cycle(&self, alphabet: Alphabet, edges: &[usize]) -> Result<PeriodicOrbit> {
        let w: Vec<u8> = edges.iter().map(|&e| self.lead_symbol(e)).collect();
        PeriodicOrbit::from_word(alphabet, &Word(w))
    }

    /// The closed edge walk of an orbit, starting at its necklace point.
    pub fn cycle_of_orbit(&self, orbit: &PeriodicOrbit) -> Vec<usize> {
        let p = orbit.period();
        (0..p)
            .map(|r| (0..self.order).fold(0usize, |acc, i| acc * self.m + orbit.symbol(r, i) as usize))
            .collect()
    }
}

/// The weighted de Bruijn graph of a cylinder function; edge weights are the
/// table entries.
#[derive(Clone, Debug)]
pub struct DeBruijnGraph {
    pub alphabet: Alphabet,
    pub topology: Topology,
    pub weights: Vec<Q>,
}

impl DeBruijnGraph {
    pub fn node_count(&self) -> usize {
        self.topology.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edges
    }
}

/// Depth-0 functions are lifted to depth 1 (one node, `m` loops).
pub fn build_graph(f: &CylinderFunction) -> DeBruijnGraph {
    let f = if f.depth() == 0 { f.lift_depth(1).expect("lift to depth 1") } else { f.clone() };
    DeBruijnGraph {
        alphabet: f.alphabet(),
        topology: Topology::new(f.alphabet(), f.depth()),
        weights: f.into_table(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn graph(m: usize, k: usize) -> DeBruijnGraph {
        let a = Alphabet::new(m).unwrap();
        let n = a.count(k).unwrap();
        build_graph(&CylinderFunction::new(a, k, vec![int(0); n]).unwrap())
    }

    #[test]
    fn counts() {
        assert_eq!((graph(2, 2).node_count(), graph(2, 2).edge_count()), (2, 4));
        assert_eq!((graph(2, 1).node_count(), graph(2, 1).edge_count()), (1, 2));
        assert_eq!((graph(3, 3).node_count(), graph(3, 3).edge_count()), (9, 27));
    }

    #[test]
    fn degrees_and_endpoints() {
        let t = graph(3, 3).topology;
        let mut indeg = vec![0; t.nodes];
        let mut outdeg = vec![0; t.nodes];
        for e in 0..t.edges {
            outdeg[t.src(e)] += 1;
            indeg[t.dst(e)] += 1;
        }
        assert!(indeg.iter().chain(&outdeg).all(|&d| d == 3));
        for v in 0..t.nodes {
            for a in 0..3 {
                assert_eq!(t.dst(t.in_edge(v, a)), v);
                assert_eq!(t.src(t.out_edge(v, a)), v);
            }
        }
        // edge 120 runs from 12 to 20
        let e = 9 + 2 * 3;
        assert_eq!((t.src(e), t.dst(e)), (3 + 2, 2 * 3));
    }

    #[test]
    fn cycles_and_orbits() {
        let a = Alphabet::new(2).unwrap();
        let t = Topology::new(a, 3);
        let o = PeriodicOrbit::from_word(a, &Word(vec![0, 1, 1])).unwrap();
        let c = t.cycle_of_orbit(&o);
        assert_eq!(c.len(), 3);
        for i in 0..3 {
            assert_eq!(t.dst(c[i]), t.src(c[(i + 1) % 3]));
        }
        assert_eq!(t.orbit_of_cycle(a, &c).unwrap(), o);
    }
}
