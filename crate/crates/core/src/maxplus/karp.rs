use num_traits::Zero;

use super::graph::DeBruijnGraph;
use crate::rational::{int, Q};

/// Maximum cycle mean by Karp's recurrence from a virtual source joined to
/// every node: `β = max_v min_(t<n) (D_n(v) - D_t(v)) / (n - t)`.
pub fn karp_max_mean(g: &DeBruijnGraph) -> Q {
    let t = g.topology;
    let n = t.nodes;
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(n + 1);
    rows.push(vec![Q::zero(); n]);
    for step in 1..=n {
        let prev = &rows[step - 1];
        let row: Vec<Q> = (0..n)
            .map(|v| {
                (0..t.m)
                    .map(|a| {
                        let e = t.in_edge(v, a);
                        &prev[t.src(e)] + &g.weights[e]
                    })
                    .max()
                    .expect("in-degree is m >= 2")
            })
            .collect();
        rows.push(row);
    }
    (0..n)
        .map(|v| {
            (0..n)
                .map(|s| (&rows[n][v] - &rows[s][v]) / int((n - s) as i64))
                .min()
                .expect("n >= 1")
        })
        .max()
        .expect("n >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxplus::build_graph;
    use crate::rational::q;
    use crate::shift::Alphabet;
    use crate::space::CylinderFunction;

    fn beta(m: usize, k: usize, vals: &[Q]) -> Q {
        let a = Alphabet::new(m).unwrap();
        karp_max_mean(&build_graph(&CylinderFunction::new(a, k, vals.to_vec()).unwrap()))
    }

    #[test]
    fn worked_examples() {
        assert_eq!(beta(2, 2, &[int(0), int(1), int(1), int(0)]), int(1));
        assert_eq!(beta(2, 2, &[int(0), int(0), int(2), int(0)]), int(1));
        assert_eq!(beta(2, 2, &vec![q(3, 7); 4]), q(3, 7));
        assert_eq!(beta(2, 1, &[int(-1), int(4)]), int(4));
    }

    #[test]
    fn three_cycle_wins() {
        // 001 cycle edges: 001, 010, 100 carry weight 1 each at depth 3
        let mut v = vec![int(0); 8];
        v[1] = int(1);
        v[2] = int(1);
        v[4] = int(1);
        v[7] = q(1, 2);
        assert_eq!(beta(2, 3, &v), int(1));
    }
}
