use std::collections::HashSet;

use bnum::types::I512;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, Solved};
use super::perturb::{sample_perturbation, Perturbation, Sampling};
use super::plan::PerturbationPlan;
use crate::error::{Error, Result};
use crate::exact::ExactInt;
use crate::maxplus::scaled::to_common_denominator;
use crate::maxplus::{sub_action, Topology};
use crate::rational::{serde_q, serde_q_opt, serde_q_vec, Q};
use crate::shift::{PeriodicOrbit, Point, PointRepr, Word};
use crate::space::CylinderFunction;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub start: PointRepr,
    pub steps: usize,
    /// `a_1, a_2, ...`, so that `ω_t = a_t ⋯ a_1 z`.
    pub symbols: Vec<u8>,
    /// Times `t` with `ω_t` farther than `2^-(k+1)` from the orbit.
    pub excursion_times: Vec<usize>,
    /// `q^(t_n - t_(n-1))(ω_(t_n))` for consecutive excursion times.
    #[serde(with = "serde_q_vec")]
    pub excursion_sums: Vec<Q>,
    #[serde(with = "serde_q")]
    pub alpha: Q,
    /// Every excursion sum is below `-α` (vacuous when `α <= 0`).
    pub sums_below_alpha: bool,
    /// `∥h*∥_∞` with `h*` shifted to maximum zero.
    #[serde(with = "serde_q")]
    pub h_sup: Q,
    /// `2∥h*∥_∞ / α` when `α > 0`.
    #[serde(with = "serde_q_opt")]
    pub count_bound: Option<Q>,
    pub count_within_bound: bool,
    /// The chosen preimage attains `h*` at every step.
    pub fixed_point_holds: bool,
    /// No excursion in the second half of the walk.
    pub settled: bool,
}

impl WalkTrace {
    pub fn passed(&self) -> bool {
        self.sums_below_alpha && self.count_within_bound && self.fixed_point_holds && self.settled
    }
}

/// Greedy backward walk over integer data scaled by `den`: `q(e)` on edges
/// and `h(v)` on nodes of a de Bruijn graph of order `topo.order`.
#[allow(clippy::too_many_arguments)]
fn walk_scaled<T: ExactInt>(
    topo: Topology,
    q: &dyn Fn(usize) -> T,
    h: &[T],
    den: &BigInt,
    z: &Point,
    steps: usize,
    k: usize,
    orbit: &PeriodicOrbit,
    alpha: &Q,
) -> Result<WalkTrace> {
    let alphabet = z.alphabet();
    alphabet.check_same(orbit.alphabet())?;
    let top = h.iter().max().expect("nonempty").clone();
    let h: Vec<T> = h.iter().map(|v| v.minus(&top)).collect();
    let h_sup = Q::new(h.iter().min().expect("nonempty").to_bigint().abs(), den.clone());
    let near: HashSet<Word> = (0..orbit.period()).map(|r| orbit.point(r).prefix(k + 1)).collect();
    let prefix_of = |symbols: &[u8]| -> Word {
        let mut w: Vec<u8> = symbols.iter().rev().take(k + 1).copied().collect();
        let mut i = 0;
        while w.len() < k + 1 {
            w.push(z.symbol(i));
            i += 1;
        }
        Word(w)
    };
    let mut v = z.prefix(topo.order - 1).index(alphabet);
    let mut symbols = Vec::with_capacity(steps);
    let mut gains: Vec<T> = Vec::with_capacity(steps);
    let mut times = Vec::new();
    let mut fixed_point_holds = true;
    if !near.contains(&prefix_of(&symbols)) {
        times.push(0);
    }
    for t in 1..=steps {
        let mut best: Option<(usize, T)> = None;
        for a in 0..topo.m {
            let e = topo.in_edge(v, a);
            let val = q(e).plus(&h[topo.src(e)]);
            if best.as_ref().map_or(true, |(_, b)| val > *b) {
                best = Some((a, val));
            }
        }
        let (a, val) = best.expect("m >= 2");
        if val != h[v] {
            fixed_point_holds = false;
        }
        let e = topo.in_edge(v, a);
        gains.push(q(e));
        symbols.push(a as u8);
        v = topo.src(e);
        if !near.contains(&prefix_of(&symbols)) {
            times.push(t);
        }
    }
    let mut excursion_sums = Vec::new();
    for pair in times.windows(2) {
        let mut s = T::zero();
        for g in &gains[pair[0]..pair[1]] {
            s = s.plus(g);
        }
        excursion_sums.push(Q::new(s.to_bigint(), den.clone()));
    }
    let certified = alpha.is_positive();
    let sums_below_alpha = !certified || excursion_sums.iter().all(|s| *s < -alpha.clone());
    let count_bound = certified.then(|| Q::from_integer(2.into()) * &h_sup / alpha);
    let count_within_bound = count_bound
        .as_ref()
        .map_or(true, |b| Q::from_integer(times.len().into()) <= *b);
    let settled = times.last().map_or(true, |&t| t < steps / 2);
    Ok(WalkTrace {
        start: z.to_repr(),
        steps,
        symbols,
        excursion_times: times,
        excursion_sums,
        alpha: alpha.clone(),
        sums_below_alpha,
        h_sup,
        count_bound,
        count_within_bound,
        fixed_point_holds,
        settled,
    })
}

/// Backward walk for a cylinder function with `β = 0`, using its computed
/// sub-action as `h*`.
pub fn backward_walk(
    q: &CylinderFunction,
    z: &Point,
    steps: usize,
    k: usize,
    orbit: &PeriodicOrbit,
    alpha: &Q,
) -> Result<WalkTrace> {
    if steps == 0 {
        return Err(Error::Precondition("walk needs at least one step".into()));
    }
    let q = if q.depth() == 0 { q.lift_depth(1)? } else { q.clone() };
    let sa = sub_action(&q)?;
    if !sa.beta.is_zero() {
        return Err(Error::Precondition("q must be normalized to β = 0".into()));
    }
    let h = sa.h.lift_depth(q.depth() - 1)?;
    let values: Vec<Q> = q.table().iter().chain(h.table().iter()).cloned().collect();
    let (den, nums) = to_common_denominator(&values);
    let edges = q.table().len();
    let qn: Vec<BigInt> = nums[..edges].to_vec();
    let topo = Topology::new(q.alphabet(), q.depth());
    walk_scaled(topo, &|e| qn[e].clone(), &nums[edges..], &den, z, steps, k, orbit, alpha)
}

/// Backward walk for `f̃ + h` using the trial's exact potential.
pub fn backward_walk_solved<T: ExactInt>(
    engine: &Engine<T>,
    solved: &Solved<T>,
    z: &Point,
    steps: usize,
    plan: &PerturbationPlan,
) -> Result<WalkTrace> {
    let sol = &solved.solution;
    let den = &solved.den * BigInt::from(sol.mean.len);
    let q = |e: usize| solved.weights[e].times_i64(sol.mean.len as i64).minus(&sol.mean.num);
    walk_scaled(engine.topo, &q, &sol.values, &den, z, steps, plan.k, &plan.orbit, &plan.constants.alpha)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkSuite {
    pub seed: u64,
    pub steps: usize,
    pub walks: Vec<WalkTrace>,
    pub violations: usize,
    pub passed: bool,
}

/// A random eventually periodic start point.
pub fn random_point(rng: &mut ChaCha8Rng, alphabet: crate::shift::Alphabet, prefix: usize) -> Point {
    let m = alphabet.size() as u8;
    let u: Vec<u8> = (0..prefix).map(|_| rng.gen_range(0..m)).collect();
    let len = rng.gen_range(1..=5);
    let v: Vec<u8> = (0..len).map(|_| rng.gen_range(0..m)).collect();
    Point::new(alphabet, Word(u), Word(v)).expect("valid symbols")
}

fn walk_suite_typed<T: ExactInt>(plan: &PerturbationPlan, starts: usize, steps: usize, seed: u64) -> Result<Option<WalkSuite>> {
    let Some(engine) = Engine::<T>::new(plan, plan.truncation_depth)? else { return Ok(None) };
    let alphabet = plan.function.alphabet;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walks = Vec::with_capacity(starts);
    for i in 0..starts {
        let h = if i == 0 {
            Perturbation::zero(alphabet)
        } else {
            let s = seed.wrapping_add(i as u64);
            match sample_perturbation(alphabet, plan.a_sequence(), engine.topo.order, &plan.radius, s, Sampling::Multiscale) {
                Some(h) => h,
                None => return Ok(None),
            }
        };
        let Some(solved) = engine.solve(&h)? else { return Ok(None) };
        let z = random_point(&mut rng, alphabet, 2 * engine.topo.order);
        walks.push(backward_walk_solved(&engine, &solved, &z, steps, plan)?);
    }
    let violations = walks.iter().filter(|w| !w.passed()).count();
    Ok(Some(WalkSuite { seed, steps, walks, violations, passed: violations == 0 }))
}

/// Walks from `starts` random points; walk `i > 0` uses the sampled
/// perturbation with seed `seed + i`, walk `0` uses `f̃` itself.
pub fn walk_suite(plan: &PerturbationPlan, starts: usize, steps: usize, seed: u64) -> Result<WalkSuite> {
    if let Some(s) = walk_suite_typed::<i128>(plan, starts, steps, seed)? {
        return Ok(s);
    }
    if let Some(s) = walk_suite_typed::<I512>(plan, starts, steps, seed)? {
        return Ok(s);
    }
    Ok(walk_suite_typed::<BigInt>(plan, starts, steps, seed)?.expect("unbounded integers"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lockin::{build_perturbation, PlanOptions};
    use crate::rational::{int, q};
    use crate::shift::Alphabet;
    use crate::space::ASequence;

    fn a2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    /// Fast-decaying A and a depth-one function, so that `α > 0` already at
    /// `k = 2`.
    pub(crate) fn small_certified_plan() -> PerturbationPlan {
        let f = CylinderFunction::new(a2(), 1, vec![int(1), int(0)]).unwrap();
        let a = ASequence::geometric(int(1), q(1, 100_000)).unwrap();
        let opts = PlanOptions { k: Some(2), ..Default::default() };
        build_perturbation(&f, &a, &q(1, 2), &opts).unwrap()
    }

    #[test]
    fn zero_function_walks_along_zeros() {
        let q0 = CylinderFunction::constant(a2(), Q::zero()).lift_depth(1).unwrap();
        let orbit = PeriodicOrbit::from_word(a2(), &Word(vec![0])).unwrap();
        let z = Point::periodic(a2(), Word(vec![1])).unwrap();
        let w = backward_walk(&q0, &z, 10, 2, &orbit, &Q::zero()).unwrap();
        assert_eq!(w.symbols, vec![0; 10]);
        assert!(w.fixed_point_holds);
        // ω_0, ω_1, ω_2 start with 1 within the first three symbols
        assert_eq!(w.excursion_times, vec![0, 1, 2]);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let f = CylinderFunction::new(a2(), 2, vec![int(0), int(0), int(2), int(0)]).unwrap();
        let orbit = PeriodicOrbit::from_word(a2(), &Word(vec![0, 1])).unwrap();
        let z = orbit.point(0);
        assert!(backward_walk(&f, &z, 5, 2, &orbit, &Q::zero()).is_err());
    }

    #[test]
    fn start_on_the_orbit_has_no_excursion() {
        let plan = small_certified_plan();
        assert!(plan.certified);
        let engine = Engine::<BigInt>::new(&plan, plan.truncation_depth).unwrap().unwrap();
        let solved = engine.solve(&Perturbation::zero(a2())).unwrap().unwrap();
        let w = backward_walk_solved(&engine, &solved, &plan.orbit.point(1), 50, &plan).unwrap();
        assert!(w.excursion_times.is_empty());
        assert!(w.passed());
    }

    #[test]
    fn certified_walks_pass() {
        let plan = small_certified_plan();
        let suite = walk_suite(&plan, 6, 200, 3).unwrap();
        assert!(suite.passed, "{suite:?}");
        assert!(suite.walks.iter().any(|w| w.excursion_times.len() > 1));
        assert_eq!(suite, walk_suite(&plan, 6, 200, 3).unwrap());
    }
}
