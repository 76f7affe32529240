use bnum::types::I512;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::graph::{build_graph, Topology};
use super::howard::{required_bits, Howard};
use super::karp::karp_max_mean;
use super::scaled::{max_bits, to_common_denominator};
use crate::error::{Error, Result};
use crate::exact::{convert_all, Backend, ExactInt};
use crate::rational::{serde_q, serde_q_opt, Q};
use crate::space::{ASequence, CylinderFunction};

/// Graphs up to this many nodes use the Kleene star for the sub-action.
pub const KLEENE_NODE_LIMIT: usize = 64;
/// Graphs up to this many nodes cross-check β with Karp's recurrence.
pub const KARP_NODE_LIMIT: usize = 256;

/// A fixed point of `Φ_(f-β)`, of depth one less than `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubAction {
    pub h: CylinderFunction,
    pub beta: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormCertificate {
    pub fixed_point: bool,
    pub nonpositive: bool,
    pub karp_agrees: Option<bool>,
    #[serde(with = "serde_q_opt")]
    pub gamma: Option<Q>,
    #[serde(with = "serde_q")]
    pub f_norm: Q,
    #[serde(with = "serde_q")]
    pub f_hat_norm: Q,
    pub norm_bound: Option<bool>,
    pub tail_bounds: Option<bool>,
    #[serde(with = "serde_q")]
    pub h_lip: Q,
    pub lip_bound: Option<bool>,
}

impl NormalFormCertificate {
    pub fn all_passed(&self) -> bool {
        self.fixed_point
            && self.nonpositive
            && self.karp_agrees != Some(false)
            && self.norm_bound != Some(false)
            && self.tail_bounds != Some(false)
            && self.lip_bound != Some(false)
    }
}

/// `f̂ = f - β + h - h∘T`, nonpositive and cohomologous to `f - β`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub beta: Q,
    pub sub_action: SubAction,
    pub f_hat: CylinderFunction,
    pub certificate: NormalFormCertificate,
}

fn at_least_depth_one(f: &CylinderFunction) -> CylinderFunction {
    if f.depth() == 0 {
        f.lift_depth(1).expect("lift to depth 1")
    } else {
        f.clone()
    }
}

/// `(Φ_f g)(w) = max_a f(aw) + g((aw)_0^(k-2))` on words `w` of length `k - 1`.
pub fn apply_phi(f: &CylinderFunction, g: &CylinderFunction) -> Result<CylinderFunction> {
    f.alphabet().check_same(g.alphabet())?;
    let f = at_least_depth_one(f);
    let k = f.depth();
    if g.depth() > k - 1 {
        return Err(Error::InvalidTable(format!("g has depth {} but f has depth {k}", g.depth())));
    }
    let g = g.lift_depth(k - 1)?;
    let t = Topology::new(f.alphabet(), k);
    let table = (0..t.nodes)
        .map(|v| {
            (0..t.m)
                .map(|a| {
                    let e = t.in_edge(v, a);
                    &f.table()[e] + &g.table()[t.src(e)]
                })
                .max()
                .expect("m >= 2")
        })
        .collect();
    CylinderFunction::new(f.alphabet(), k - 1, table)
}

/// Max-plus Kleene star of the normalized node matrix; the sub-action is the
/// entrywise maximum of the rows indexed by critical nodes.
fn kleene_sub_action(f: &CylinderFunction, beta: &Q) -> Vec<Q> {
    let t = Topology::new(f.alphabet(), f.depth());
    let n = t.nodes;
    let mut p: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n];
    for e in 0..t.edges {
        let w = &f.table()[e] - beta;
        let slot = &mut p[t.src(e)][t.dst(e)];
        if slot.as_ref().map_or(true, |cur| w > *cur) {
            *slot = Some(w);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = p[i][k].clone() else { continue };
            for j in 0..n {
                if let Some(kj) = &p[k][j] {
                    let cand = &ik + kj;
                    if p[i][j].as_ref().map_or(true, |cur| cand > *cur) {
                        p[i][j] = Some(cand);
                    }
                }
            }
        }
    }
    let critical: Vec<usize> = (0..n).filter(|&c| p[c][c].as_ref().is_some_and(|v| v.is_zero())).collect();
    // the graph is strongly connected, so every entry of the closure exists
    let star = |c: usize, v: usize| {
        let plus = p[c][v].clone().expect("strongly connected");
        if c == v {
            plus.max(Q::zero())
        } else {
            plus
        }
    };
    (0..n)
        .map(|v| critical.iter().map(|&c| star(c, v)).max().expect("a maximal cycle exists"))
        .collect()
}

fn howard_sub_action_typed<T: ExactInt>(t: Topology, den: &BigInt, nums: &[BigInt]) -> Option<(Q, Vec<Q>)> {
    let w: Vec<T> = convert_all(nums)?;
    let sol = Howard::new(t, &w).solve(None).ok()?;
    let scale = den * BigInt::from(sol.mean.len);
    let beta = Q::new(sol.mean.num.to_bigint(), scale.clone());
    let h = sol.values.iter().map(|v| Q::new(v.to_bigint(), scale.clone())).collect();
    Some((beta, h))
}

/// β and a sub-action by exact policy iteration.
pub fn howard_sub_action(f: &CylinderFunction) -> Result<(Q, Vec<Q>)> {
    let f = at_least_depth_one(f);
    let t = Topology::new(f.alphabet(), f.depth());
    let (den, nums) = to_common_denominator(f.table());
    let solved = match Backend::for_bits(required_bits(max_bits(&nums), t.nodes)) {
        Backend::Native => howard_sub_action_typed::<i128>(t, &den, &nums),
        Backend::Wide => howard_sub_action_typed::<I512>(t, &den, &nums),
        Backend::Big => howard_sub_action_typed::<BigInt>(t, &den, &nums),
    };
    solved.ok_or_else(|| Error::Certificate("policy iteration failed".into()))
}

/// A fixed point `h` with `Φ_f h = h + β`, certified by re-application.
pub fn sub_action(f: &CylinderFunction) -> Result<SubAction> {
    let f = at_least_depth_one(f);
    let t = Topology::new(f.alphabet(), f.depth());
    let (beta, table) = if t.nodes <= KLEENE_NODE_LIMIT {
        let beta = karp_max_mean(&build_graph(&f));
        let h = kleene_sub_action(&f, &beta);
        (beta, h)
    } else {
        howard_sub_action(&f)?
    };
    let h = CylinderFunction::new(f.alphabet(), f.depth() - 1, table)?;
    let sa = SubAction { h, beta };
    if !is_fixed_point(&f, &sa)? {
        return Err(Error::Certificate("sub-action fails the fixed-point equation".into()));
    }
    Ok(sa)
}

pub fn is_fixed_point(f: &CylinderFunction, sa: &SubAction) -> Result<bool> {
    let shifted = f.add_constant(&-sa.beta.clone());
    Ok(apply_phi(&shifted, &sa.h)? == sa.h.lift_depth(at_least_depth_one(f).depth() - 1)?)
}

/// Iterates `h ← Φ_(f-β) h` from zero until it stops changing; `None` if it
/// has not settled within `max_iter` steps (e.g. when every critical cycle
/// has length above one and the iterates oscillate).
pub fn value_iteration(f: &CylinderFunction, beta: &Q, max_iter: usize) -> Result<Option<CylinderFunction>> {
    let f = at_least_depth_one(f);
    let shifted = f.add_constant(&-beta.clone());
    let mut h = CylinderFunction::constant(f.alphabet(), Q::zero()).lift_depth(f.depth() - 1)?;
    for _ in 0..max_iter {
        let next = apply_phi(&shifted, &h)?;
        if next == h {
            return Ok(Some(h));
        }
        h = next;
    }
    Ok(None)
}

/// `f - β + h - h∘T` for a sub-action of `f`.
pub fn cohomologous_form(f: &CylinderFunction, sa: &SubAction) -> Result<CylinderFunction> {
    let f = at_least_depth_one(f);
    let t = Topology::new(f.alphabet(), f.depth());
    let h = sa.h.lift_depth(f.depth() - 1)?;
    let table = (0..t.edges)
        .map(|e| &f.table()[e] - &sa.beta + &h.table()[t.src(e)] - &h.table()[t.dst(e)])
        .collect();
    CylinderFunction::new(f.alphabet(), f.depth(), table)
}

pub fn normal_form(f: &CylinderFunction, a: &ASequence) -> Result<NormalForm> {
    let gamma = a.gamma()?;
    let f1 = at_least_depth_one(f);
    let sa = sub_action(&f1)?;
    let f_hat = cohomologous_form(&f1, &sa)?;
    let karp_agrees = (f1.alphabet().count(f1.depth() - 1).unwrap_or(usize::MAX) <= KARP_NODE_LIMIT)
        .then(|| karp_max_mean(&build_graph(&f1)) == sa.beta);
    let f_norm = f1.a_norm(a);
    let fh = f_hat.norm(a);
    let bound = &gamma * &f_norm;
    let tail_bounds = (0..=f_hat.depth()).all(|n| fh.tail_sums[n] <= &bound * a.value(n));
    let h_lip = sa.h.lip_a(a);
    let lip_bound = a.delta().map(|delta| h_lip <= f1.lip_a(a) / delta);
    let certificate = NormalFormCertificate {
        fixed_point: true,
        nonpositive: f_hat.table().iter().all(|v| !v.is_positive()),
        karp_agrees,
        gamma: Some(gamma),
        f_norm,
        f_hat_norm: fh.a_norm.clone(),
        norm_bound: Some(fh.a_norm <= bound),
        tail_bounds: Some(tail_bounds),
        h_lip,
        lip_bound,
    };
    if !certificate.nonpositive {
        return Err(Error::Certificate("normal form has a positive entry".into()));
    }
    Ok(NormalForm { beta: sa.beta.clone(), sub_action: sa, f_hat, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};
    use crate::shift::Alphabet;

    fn f2(vals: &[i64]) -> CylinderFunction {
        CylinderFunction::new(Alphabet::new(2).unwrap(), 2, vals.iter().map(|&v| int(v)).collect()).unwrap()
    }

    #[test]
    fn phi_examples() {
        let zero = f2(&[0, 0, 0, 0]);
        let g0 = CylinderFunction::constant(zero.alphabet(), int(0));
        assert!(apply_phi(&zero, &g0).unwrap().table().iter().all(|v| v.is_zero()));
        let f = f2(&[0, 0, 2, 0]);
        assert_eq!(apply_phi(&f, &g0).unwrap().table(), &[int(2), int(0)]);
    }

    #[test]
    fn sub_action_examples() {
        let sa = sub_action(&f2(&[0, 1, 1, 0])).unwrap();
        assert_eq!(sa.beta, int(1));
        assert_eq!(sa.h.table(), &[int(0), int(0)]);

        let sa = sub_action(&f2(&[0, 0, 2, 0])).unwrap();
        assert_eq!(sa.beta, int(1));
        assert_eq!(sa.h.table(), &[int(1), int(0)]);

        let c = CylinderFunction::constant(Alphabet::new(3).unwrap(), q(5, 2)).lift_depth(2).unwrap();
        let sa = sub_action(&c).unwrap();
        assert_eq!(sa.beta, q(5, 2));
        assert!(sa.h.table().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn normal_form_examples() {
        let a = ASequence::TriangularDyadic;
        let nf = normal_form(&f2(&[0, 1, 1, 0]), &a).unwrap();
        assert_eq!(nf.f_hat.table(), &[int(-1), int(0), int(0), int(-1)]);
        let nf = normal_form(&f2(&[0, 0, 2, 0]), &a).unwrap();
        assert_eq!(nf.f_hat.table(), &[int(-1), int(0), int(0), int(-1)]);
        assert!(nf.certificate.all_passed());
        let nf = normal_form(&f2(&[7, 7, 7, 7]), &a).unwrap();
        assert!(nf.f_hat.table().iter().all(|v| v.is_zero()));
        let nf = normal_form(&CylinderFunction::constant(Alphabet::new(2).unwrap(), int(3)), &a).unwrap();
        assert_eq!(nf.beta, int(3));
    }

    #[test]
    fn kleene_matches_howard_on_fixed_point() {
        let a = Alphabet::new(2).unwrap();
        let vals = [3, -1, 4, 1, -5, 9, 2, -6, 5, 3, -5, 8, 9, 7, -9, 3];
        let f = CylinderFunction::new(a, 4, vals.iter().map(|&v| q(v, 3)).collect()).unwrap();
        let sa = sub_action(&f).unwrap();
        let (beta, h) = howard_sub_action(&f).unwrap();
        assert_eq!(beta, sa.beta);
        let other = SubAction { h: CylinderFunction::new(a, 3, h).unwrap(), beta };
        assert!(is_fixed_point(&f, &other).unwrap());
    }

    #[test]
    fn value_iteration_cross_check() {
        // critical loop at 0 has length one, so the iterates settle
        let f = f2(&[3, 0, 1, 2]);
        let sa = sub_action(&f).unwrap();
        let h = value_iteration(&f, &sa.beta, 100).unwrap().unwrap();
        assert!(is_fixed_point(&f, &SubAction { h, beta: sa.beta.clone() }).unwrap());
        // the 01 cycle has length two: iterates oscillate
        let f = f2(&[0, 0, 2, 0]);
        assert!(value_iteration(&f, &int(1), 50).unwrap().is_none());
    }
}
