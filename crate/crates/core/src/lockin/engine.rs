use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::perturb::{penalty_table, prefix_levels, Perturbation};
use super::plan::PerturbationPlan;
use crate::error::{Error, Result};
use crate::exact::{convert_all, ExactInt};
use crate::maxplus::howard::{required_bits, Howard, HowardSolution};
use crate::maxplus::{support_from_zero_edges, Support, Topology};
use crate::rational::{serde_q, Q};
use crate::shift::{Alphabet, PeriodicOrbit};

/// Orbits listed in a verdict when the optimizer is not unique.
const ORBITS_SHOWN: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialVerdict {
    pub label: String,
    pub seed: Option<u64>,
    #[serde(with = "serde_q")]
    pub norm_h: Q,
    #[serde(with = "serde_q")]
    pub sup_h: Q,
    #[serde(with = "serde_q")]
    pub beta: Q,
    pub unique: bool,
    pub orbits: Vec<PeriodicOrbit>,
    /// Mean of the plan's orbit minus the best mean of any other cycle.
    #[serde(with = "serde_q")]
    pub margin: Q,
    pub locked: bool,
    pub iterations: usize,
}

/// A solved trial: weights, their optimal policy and potential.
pub struct Solved<T> {
    pub den: BigInt,
    pub weights: Vec<T>,
    pub solution: HowardSolution<T>,
}

enum Factor<T> {
    One,
    Shift(u32),
    Mul(T),
}

impl<T: ExactInt> Factor<T> {
    fn of(x: &BigInt) -> Option<(Self, u64)> {
        if x.is_one() {
            return Some((Factor::One, 0));
        }
        let tz = x.trailing_zeros().unwrap_or(0);
        if (x >> tz).is_one() {
            return Some((Factor::Shift(tz as u32), tz));
        }
        Some((Factor::Mul(T::from_bigint(x)?), x.bits()))
    }

    #[inline]
    fn apply(&self, v: &T) -> T {
        match self {
            Factor::One => v.clone(),
            Factor::Shift(s) => v.shl(*s),
            Factor::Mul(c) => v.times(c),
        }
    }
}

/// `f̃` of a plan as integers over one denominator on the depth-`K` de
/// Bruijn graph.
pub struct Engine<T> {
    pub alphabet: Alphabet,
    pub topo: Topology,
    pub orbit: PeriodicOrbit,
    pub levels: Vec<u8>,
    pub den: BigInt,
    base: Vec<T>,
    base_block: usize,
    penalty: Vec<T>,
    bits: u64,
    pub cycle: Vec<usize>,
    /// `2·A_K`, the slack a margin must beat.
    pub slack: Q,
    warm: Vec<u8>,
}

impl<T: ExactInt> Engine<T> {
    /// `None` when `T` cannot hold the weights.
    pub fn new(plan: &PerturbationPlan, depth: usize) -> Result<Option<Self>> {
        let ft = &plan.f_tilde;
        if depth < ft.base_depth || depth < 1 {
            return Err(Error::Precondition(format!("depth {depth} is below the function depth {}", ft.base_depth)));
        }
        let alphabet = plan.function.alphabet;
        let a = plan.a_sequence();
        let eps = &plan.epsilon;
        let penalty_q: Vec<Q> = (0..=depth).map(|c| eps * a.value(c)).collect();
        if depth == ft.depth && penalty_q != ft.penalty {
            return Err(Error::Precondition("plan penalty levels do not match ε·A".into()));
        }
        let den = ft.base.iter().chain(penalty_q.iter()).fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scale = |v: &Q| v.numer() * (&den / v.denom());
        let base_big: Vec<BigInt> = ft.base.iter().map(scale).collect();
        let pen_big: Vec<BigInt> = penalty_q.iter().map(scale).collect();
        let bits = base_big.iter().chain(pen_big.iter()).map(|v| v.bits()).max().unwrap_or(0) + 1;
        let topo = Topology::new(alphabet, depth);
        let (Some(base), Some(penalty)) = (convert_all::<T>(&base_big), convert_all::<T>(&pen_big)) else {
            return Ok(None);
        };
        if T::MAX_BITS.is_some_and(|cap| required_bits(bits, topo.nodes) > cap) {
            return Ok(None);
        }
        let levels = prefix_levels(&ft.orbit, depth);
        let base_block = alphabet.count(depth - ft.base_depth).expect("fits");
        let cycle = topo.cycle_of_orbit(&ft.orbit);
        let slack = Q::from_integer(2.into()) * a.value(depth);
        let mut engine = Engine {
            alphabet,
            topo,
            orbit: ft.orbit.clone(),
            levels,
            den,
            base,
            base_block,
            penalty,
            bits,
            cycle,
            slack,
            warm: Vec::new(),
        };
        let w: Vec<T> = (0..topo.edges).map(|e| engine.f_tilde(e)).collect();
        engine.warm = Howard::new(topo, &w).solve(None)?.policy;
        Ok(Some(engine))
    }

    #[inline]
    pub fn f_tilde(&self, e: usize) -> T {
        self.base[e / self.base_block].minus(&self.penalty[self.levels[e] as usize])
    }

    pub fn penalty_direction_base(&self, plan: &PerturbationPlan) -> Option<Perturbation<T>> {
        penalty_table(self.alphabet, plan.a_sequence(), &self.levels, self.topo.order)
    }

    /// Weights of `f̃ + h` over a common denominator; `None` on overflow.
    pub fn weights(&self, h: &Perturbation<T>) -> Result<Option<(BigInt, Vec<T>)>> {
        if h.depth > self.topo.order {
            return Err(Error::Precondition(format!("perturbation depth {} exceeds {}", h.depth, self.topo.order)));
        }
        h.alphabet.check_same(self.alphabet)?;
        let den = self.den.lcm(&h.den);
        let (Some((fa, ba)), Some((fh, bh))) = (Factor::<T>::of(&(&den / &self.den)), Factor::<T>::of(&(&den / &h.den)))
        else {
            return Ok(None);
        };
        let bits = (self.bits + ba).max(h.max_bits() + bh) + 1;
        if T::MAX_BITS.is_some_and(|cap| required_bits(bits, self.topo.nodes) > cap) {
            return Ok(None);
        }
        let block = self.alphabet.count(self.topo.order - h.depth).expect("fits");
        let w = (0..self.topo.edges).map(|e| fa.apply(&self.f_tilde(e)).plus(&fh.apply(&h.nums[e / block]))).collect();
        Ok(Some((den, w)))
    }

    pub fn solve(&self, h: &Perturbation<T>) -> Result<Option<Solved<T>>> {
        let Some((den, weights)) = self.weights(h)? else { return Ok(None) };
        let solution = Howard::new(self.topo, &weights).solve(Some(&self.warm))?;
        if !solution.uniform {
            return Err(Error::Certificate("optimal policy is not uniform on a strongly connected graph".into()));
        }
        Ok(Some(Solved { den, weights, solution }))
    }

    /// `ℓ·w(e) - S + v(src) - v(dst)`: the normal form scaled by `ℓ·den`.
    pub fn normalized(&self, s: &Solved<T>, e: usize) -> T {
        let sol = &s.solution;
        s.weights[e]
            .times_i64(sol.mean.len as i64)
            .minus(&sol.mean.num)
            .plus(&sol.values[self.topo.src(e)])
            .minus(&sol.values[self.topo.dst(e)])
    }

    pub fn support(&self, s: &Solved<T>) -> Result<Support> {
        let mut zero = vec![false; self.topo.edges];
        for (e, z) in zero.iter_mut().enumerate() {
            let v = self.normalized(s, e);
            if !v.is_neg() && !v.is_zero_value() {
                return Err(Error::Certificate(format!("potential violates the Bellman inequality on edge {e}")));
            }
            *z = v.is_zero_value();
        }
        support_from_zero_edges(self.alphabet, self.topo, &zero)
    }

    fn mean_q(num: &T, len: u32, den: &BigInt) -> Q {
        Q::new(num.to_bigint(), den * BigInt::from(len))
    }

    /// Mean of the plan's orbit minus the best mean over cycles avoiding
    /// one of its edges.
    pub fn margin(&self, s: &Solved<T>) -> Result<Q> {
        let mut sum = T::zero();
        for &e in &self.cycle {
            sum = sum.plus(&s.weights[e]);
        }
        let own = Self::mean_q(&sum, self.cycle.len() as u32, &s.den);
        let mut best: Option<Q> = None;
        for &e in &self.cycle {
            let other = Howard::new(self.topo, &s.weights).excluding(e).solve(Some(&s.solution.policy))?;
            let m = Self::mean_q(&other.mean.num, other.mean.len, &s.den);
            if best.as_ref().map_or(true, |b| m > *b) {
                best = Some(m);
            }
        }
        Ok(own - best.expect("orbit has an edge"))
    }

    pub fn trial(&self, label: &str, seed: Option<u64>, h: &Perturbation<T>) -> Result<Option<TrialVerdict>> {
        let Some(solved) = self.solve(h)? else { return Ok(None) };
        let support = self.support(&solved)?;
        let margin = self.margin(&solved)?;
        let beta = Self::mean_q(&solved.solution.mean.num, solved.solution.mean.len, &solved.den);
        let locked = support.unique && support.orbits[0] == self.orbit && margin > self.slack;
        let orbits = support.orbits.iter().take(ORBITS_SHOWN).cloned().collect();
        Ok(Some(TrialVerdict {
            label: label.to_string(),
            seed,
            norm_h: h.norm.clone(),
            sup_h: h.sup_norm(),
            beta,
            unique: support.unique,
            orbits,
            margin,
            locked,
            iterations: solved.solution.iterations,
        }))
    }
}
