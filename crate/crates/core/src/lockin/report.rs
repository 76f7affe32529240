use bnum::types::I512;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::constants::choose_k_from_norm;
use super::engine::{Engine, TrialVerdict};
use super::perturb::{penalty_direction, sample_perturbation, Perturbation, Sampling};
use super::plan::{recurrence_of, PerturbationPlan};
use crate::error::{Error, Result};
use crate::exact::ExactInt;
use crate::rational::{pow2_neg, serde_q, serde_q_opt, Q};
use crate::space::{ASequence, CylinderFunction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockInReport {
    pub trials: usize,
    pub seed: u64,
    pub sampling: Sampling,
    #[serde(with = "serde_q")]
    pub radius: Q,
    pub truncation_depth: usize,
    #[serde(with = "serde_q")]
    pub slack: Q,
    pub orbit: crate::shift::PeriodicOrbit,
    pub all_locked: bool,
    #[serde(with = "serde_q")]
    pub min_margin: Q,
    pub backend: String,
    pub results: Vec<TrialVerdict>,
}

fn backend_name<T: ExactInt>() -> &'static str {
    match T::MAX_BITS {
        Some(b) if b <= 120 => "i128",
        Some(_) => "i512",
        None => "bigint",
    }
}

/// `1 - 2^-32`, keeping deterministic directions strictly inside the ball.
fn inside() -> Q {
    Q::one() - pow2_neg(32)
}

enum TrialKind {
    Zero,
    Constant,
    Adversarial { weaken: bool },
    Sampled(u64),
}

/// The fixed trials (`h ≡ 0`, a constant, both penalty directions) followed
/// by `n` sampled ones with seeds `seed + i`.
fn trial_set(radius: &Q, n: usize, seed: u64) -> Vec<(String, TrialKind)> {
    let mut out = vec![("zero".to_string(), TrialKind::Zero)];
    if !radius.is_zero() {
        out.push(("constant".to_string(), TrialKind::Constant));
        out.push(("adversarial".to_string(), TrialKind::Adversarial { weaken: true }));
        out.push(("adversarial_reverse".to_string(), TrialKind::Adversarial { weaken: false }));
    }
    for i in 0..n as u64 {
        out.push((format!("sampled_{i}"), TrialKind::Sampled(seed.wrapping_add(i))));
    }
    out
}

/// Tables are built one trial at a time; at depth 21 each one is large.
fn materialize<T: ExactInt>(
    engine: &Engine<T>,
    plan: &PerturbationPlan,
    radius: &Q,
    kind: &TrialKind,
    sampling: Sampling,
) -> Option<Perturbation<T>> {
    let alphabet = plan.function.alphabet;
    match kind {
        TrialKind::Zero => Some(Perturbation::zero(alphabet)),
        TrialKind::Constant => Perturbation::constant(alphabet, &(radius / Q::from_integer(2.into()))),
        TrialKind::Adversarial { weaken } => {
            let g = engine.penalty_direction_base(plan)?;
            penalty_direction(&g, &(radius * inside()), *weaken)
        }
        TrialKind::Sampled(s) => {
            let b = if radius.is_zero() { pow2_neg(64) } else { radius.clone() };
            sample_perturbation(alphabet, plan.a_sequence(), engine.topo.order, &b, *s, sampling)
        }
    }
}

fn run_typed<T: ExactInt>(
    plan: &PerturbationPlan,
    radius: &Q,
    n: usize,
    seed: u64,
    sampling: Sampling,
) -> Result<Option<(Vec<TrialVerdict>, Q)>> {
    let Some(engine) = Engine::<T>::new(plan, plan.truncation_depth)? else { return Ok(None) };
    let set = trial_set(radius, n, seed);
    let mut results = Vec::with_capacity(set.len());
    for (label, kind) in &set {
        let Some(h) = materialize(&engine, plan, radius, kind, sampling) else { return Ok(None) };
        if !radius.is_zero() && h.norm >= *radius {
            return Err(Error::Precondition(format!("trial {label} has norm outside the ball")));
        }
        let s = match kind {
            TrialKind::Sampled(s) => Some(*s),
            _ => None,
        };
        match engine.trial(label, s, &h)? {
            Some(v) => results.push(v),
            None => return Ok(None),
        }
    }
    Ok(Some((results, engine.slack.clone())))
}

fn run_any(
    plan: &PerturbationPlan,
    radius: &Q,
    n: usize,
    seed: u64,
    sampling: Sampling,
) -> Result<(Vec<TrialVerdict>, Q, &'static str)> {
    if let Some((r, s)) = run_typed::<i128>(plan, radius, n, seed, sampling)? {
        return Ok((r, s, backend_name::<i128>()));
    }
    if let Some((r, s)) = run_typed::<I512>(plan, radius, n, seed, sampling)? {
        return Ok((r, s, backend_name::<I512>()));
    }
    let (r, s) = run_typed::<BigInt>(plan, radius, n, seed, sampling)?.expect("unbounded integers");
    Ok((r, s, backend_name::<BigInt>()))
}

fn aggregate(
    plan: &PerturbationPlan,
    radius: &Q,
    n: usize,
    seed: u64,
    sampling: Sampling,
) -> Result<LockInReport> {
    let (results, slack, backend) = run_any(plan, radius, n, seed, sampling)?;
    let all_locked = results.iter().all(|v| v.locked);
    let min_margin = results.iter().map(|v| v.margin.clone()).min().unwrap_or_else(Q::zero);
    Ok(LockInReport {
        trials: n,
        seed,
        sampling,
        radius: radius.clone(),
        truncation_depth: plan.truncation_depth,
        slack,
        orbit: plan.orbit.clone(),
        all_locked,
        min_margin,
        backend: backend.to_string(),
        results,
    })
}

/// Runs `n` sampled trials inside the ball of radius `εσ`, plus the fixed
/// ones, each solved exactly.
pub fn lockin_report(plan: &PerturbationPlan, n: usize, seed: u64, sampling: Sampling) -> Result<LockInReport> {
    if n == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    aggregate(plan, &plan.radius, n, seed, sampling)
}

/// One exact trial with a caller-supplied perturbation.
pub fn lockin_trial(plan: &PerturbationPlan, h: &CylinderFunction) -> Result<TrialVerdict> {
    let a = plan.a_sequence();
    let norm = h.a_norm(a);
    if norm >= plan.radius {
        return Err(Error::Precondition(format!(
            "perturbation norm {} is not below the radius {}",
            crate::rational::fmt_q(&norm),
            crate::rational::fmt_q(&plan.radius)
        )));
    }
    let depth = plan.truncation_depth.max(h.depth());
    fn typed<T: ExactInt>(plan: &PerturbationPlan, h: &CylinderFunction, depth: usize) -> Result<Option<TrialVerdict>> {
        let Some(engine) = Engine::<T>::new(plan, depth)? else { return Ok(None) };
        let Some(p) = Perturbation::<T>::from_function(h, plan.a_sequence()) else { return Ok(None) };
        engine.trial("custom", None, &p)
    }
    if let Some(v) = typed::<I512>(plan, h, depth)? {
        return Ok(v);
    }
    Ok(typed::<BigInt>(plan, h, depth)?.expect("unbounded integers"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusStep {
    #[serde(with = "serde_q")]
    pub radius: Q,
    pub all_locked: bool,
    #[serde(with = "serde_q")]
    pub min_margin: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusSearch {
    /// `k` the theorem would pick for the same function and ε.
    pub theorem_k: Option<usize>,
    #[serde(with = "serde_q_opt")]
    pub theorem_radius: Option<Q>,
    #[serde(with = "serde_q")]
    pub plan_radius: Q,
    /// Largest radius at which every trial locked.
    #[serde(with = "serde_q_opt")]
    pub empirical_radius: Option<Q>,
    /// Smallest radius seen to fail.
    #[serde(with = "serde_q_opt")]
    pub first_failure: Option<Q>,
    /// `empirical_radius / theorem_radius`.
    #[serde(with = "serde_q_opt")]
    pub ratio: Option<Q>,
    pub directions: usize,
    pub steps: Vec<RadiusStep>,
}

pub const MAX_DOUBLINGS: usize = 256;

/// `εσ` for the theorem-grade `k` of the plan's function.
pub fn theorem_radius(plan: &PerturbationPlan) -> Result<(usize, Q)> {
    let a: &ASequence = plan.a_sequence();
    let k = choose_k_from_norm(&plan.f_norm, a, &plan.epsilon)?;
    let (_, orbit) = recurrence_of(&plan.source_orbit, k)?;
    let sigma = a.value(k) / Q::from_integer((4 * orbit.period()).into());
    Ok((k, &plan.epsilon * sigma))
}

/// Largest radius (by doubling from the plan radius, then `bisections`
/// halvings of the bracket) at which the fixed trials and `directions`
/// sampled ones all lock.
pub fn empirical_radius(
    plan: &PerturbationPlan,
    directions: usize,
    seed: u64,
    bisections: usize,
    sampling: Sampling,
) -> Result<RadiusSearch> {
    let mut steps = Vec::new();
    let probe = |b: &Q, steps: &mut Vec<RadiusStep>| -> Result<bool> {
        let r = aggregate(plan, b, directions, seed, sampling)?;
        steps.push(RadiusStep { radius: b.clone(), all_locked: r.all_locked, min_margin: r.min_margin });
        Ok(r.all_locked)
    };
    let two = Q::from_integer(2.into());
    let start = if plan.radius > Q::zero() { plan.radius.clone() } else { pow2_neg(64) };
    let (mut good, mut bad): (Option<Q>, Option<Q>) = (None, None);
    let mut b = start.clone();
    if probe(&b, &mut steps)? {
        good = Some(b.clone());
        for _ in 0..MAX_DOUBLINGS {
            b = &b * &two;
            if probe(&b, &mut steps)? {
                good = Some(b.clone());
            } else {
                bad = Some(b.clone());
                break;
            }
        }
    } else {
        bad = Some(b.clone());
        for _ in 0..MAX_DOUBLINGS {
            b = &b / &two;
            if probe(&b, &mut steps)? {
                good = Some(b.clone());
                break;
            }
            bad = Some(b.clone());
        }
    }
    if let (Some(lo), Some(hi)) = (good.clone(), bad.clone()) {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..bisections {
            let mid = (&lo + &hi) / &two;
            if probe(&mid, &mut steps)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        good = Some(lo);
        bad = Some(hi);
    }
    let theorem = theorem_radius(plan).ok();
    let ratio = match (&good, &theorem) {
        (Some(g), Some((_, t))) => Some(g / t),
        _ => None,
    };
    Ok(RadiusSearch {
        theorem_k: theorem.as_ref().map(|t| t.0),
        theorem_radius: theorem.map(|t| t.1),
        plan_radius: plan.radius.clone(),
        empirical_radius: good,
        first_failure: bad,
        ratio,
        directions,
        steps,
    })
}
