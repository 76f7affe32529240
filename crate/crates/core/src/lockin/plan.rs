use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::constants::{check_epsilon, choose_k_from_norm, constants_from_norm, Constants};
use crate::error::{Error, Result};
use crate::io::FunctionFile;
use crate::maxplus::{maximizing_support, normal_form, NormalForm};
use crate::rational::{serde_q, serde_q_vec, Q};
use crate::shift::{minimal_recurrence, periodic_point_from_recurrence, PeriodicOrbit};
use crate::space::{ASequence, CylinderFunction};

/// Default cap on `m^K` for the truncated penalty table.
pub const DEFAULT_TABLE_LIMIT: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `k` chosen so that `α > 0`.
    Theorem,
    /// `k` supplied by the caller; `α` may be nonpositive.
    Empirical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recurrence {
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanNormalForm {
    #[serde(with = "serde_q")]
    pub beta: Q,
    pub sub_action_depth: usize,
    #[serde(with = "serde_q_vec")]
    pub sub_action: Vec<Q>,
    pub f_hat_depth: usize,
    #[serde(with = "serde_q_vec")]
    pub f_hat: Vec<Q>,
}

/// `f̃(w) = base(w[..base_depth]) - penalty[c]` on words `w` of length
/// `depth`, where `c` is the longest common prefix of `w` with a point of
/// `orbit` and `penalty[c] = ε·A_c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FTilde {
    pub depth: usize,
    pub base_depth: usize,
    #[serde(with = "serde_q_vec")]
    pub base: Vec<Q>,
    #[serde(with = "serde_q_vec")]
    pub penalty: Vec<Q>,
    pub orbit: PeriodicOrbit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub mode: Mode,
    /// `α > 0`.
    pub certified: bool,
    pub function: FunctionFile,
    #[serde(with = "serde_q")]
    pub epsilon: Q,
    #[serde(with = "serde_q")]
    pub f_norm: Q,
    pub normal_form: PlanNormalForm,
    pub source_orbit: PeriodicOrbit,
    pub k: usize,
    pub recurrence: Recurrence,
    pub orbit: PeriodicOrbit,
    pub period: usize,
    #[serde(flatten)]
    pub constants: Constants,
    /// `εσ`.
    #[serde(with = "serde_q")]
    pub radius: Q,
    pub truncation_depth: usize,
    pub f_tilde: FTilde,
}

#[derive(Clone, Debug, Default)]
pub struct PlanOptions {
    pub k: Option<usize>,
    pub truncation_depth: Option<usize>,
    pub table_limit: Option<u128>,
}

/// The orbit point the plan starts from and its minimal recurrence.
pub fn recurrence_of(orbit: &PeriodicOrbit, k: usize) -> Result<(Recurrence, PeriodicOrbit)> {
    let x = orbit.point(0);
    let (i, j) = minimal_recurrence(&x, k, orbit.period())?;
    Ok((Recurrence { i, j }, periodic_point_from_recurrence(&x, i, j)?))
}

fn default_truncation(a: &ASequence, alpha: &Q, k: usize, p: usize) -> usize {
    let floor = k + 2 * p + 2;
    if !alpha.is_positive() {
        return floor;
    }
    let target = alpha / Q::from_integer(100.into());
    // A is non-increasing and tends to zero
    let mut big_k = 0;
    while a.value(big_k) >= target {
        big_k += 1;
    }
    big_k.max(floor)
}

pub fn build_perturbation(f: &CylinderFunction, a: &ASequence, eps: &Q, opts: &PlanOptions) -> Result<PerturbationPlan> {
    check_epsilon(eps)?;
    let nf = normal_form(f, a)?;
    let support = maximizing_support(&nf)?;
    let source_orbit = support.orbits.first().cloned().ok_or_else(|| Error::Certificate("empty support".into()))?;
    let f_norm = nf.certificate.f_norm.clone();
    let (mode, k) = match opts.k {
        Some(k) => (Mode::Empirical, k),
        None => (Mode::Theorem, choose_k_from_norm(&f_norm, a, eps)?),
    };
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let (recurrence, orbit) = recurrence_of(&source_orbit, k)?;
    let p = orbit.period();
    let constants = constants_from_norm(&f_norm, a, eps, k, p)?;
    let big_k = opts
        .truncation_depth
        .unwrap_or_else(|| default_truncation(a, &constants.alpha, k, p))
        .max(nf.f_hat.depth());
    let limit = opts.table_limit.unwrap_or(DEFAULT_TABLE_LIMIT);
    let entries = (f.alphabet().size() as u128).checked_pow(big_k as u32).unwrap_or(u128::MAX);
    if entries > limit {
        return Err(Error::TableTooLarge { entries, limit });
    }
    Ok(assemble(f, a, eps, mode, &nf, f_norm, source_orbit, k, recurrence, orbit, constants, big_k))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    f: &CylinderFunction,
    a: &ASequence,
    eps: &Q,
    mode: Mode,
    nf: &NormalForm,
    f_norm: Q,
    source_orbit: PeriodicOrbit,
    k: usize,
    recurrence: Recurrence,
    orbit: PeriodicOrbit,
    constants: Constants,
    big_k: usize,
) -> PerturbationPlan {
    let p = orbit.period();
    let f_tilde = FTilde {
        depth: big_k,
        base_depth: nf.f_hat.depth(),
        base: nf.f_hat.table().to_vec(),
        penalty: (0..=big_k).map(|c| eps * a.value(c)).collect(),
        orbit: orbit.clone(),
    };
    PerturbationPlan {
        mode,
        certified: constants.alpha.is_positive(),
        function: FunctionFile::new(f, a),
        epsilon: eps.clone(),
        f_norm,
        normal_form: PlanNormalForm {
            beta: nf.beta.clone(),
            sub_action_depth: nf.sub_action.h.depth(),
            sub_action: nf.sub_action.h.table().to_vec(),
            f_hat_depth: nf.f_hat.depth(),
            f_hat: nf.f_hat.table().to_vec(),
        },
        source_orbit,
        k,
        recurrence,
        orbit,
        period: p,
        radius: eps * &constants.sigma,
        constants,
        truncation_depth: big_k,
        f_tilde,
    }
}

impl PerturbationPlan {
    pub fn a_sequence(&self) -> &ASequence {
        &self.function.a_sequence
    }

    pub fn f_hat(&self) -> Result<CylinderFunction> {
        CylinderFunction::new(self.function.alphabet, self.normal_form.f_hat_depth, self.normal_form.f_hat.clone())
    }

    /// Re-derives every stored quantity from the embedded function and
    /// compares.
    pub fn check(&self) -> Result<()> {
        let f = self.function.function()?;
        let a = self.a_sequence();
        check_epsilon(&self.epsilon)?;
        let nf = normal_form(&f, a)?;
        let support = maximizing_support(&nf)?;
        let source = support.orbits.first().cloned().ok_or_else(|| Error::Certificate("empty support".into()))?;
        let (recurrence, orbit) = recurrence_of(&source, self.k)?;
        let constants = constants_from_norm(&nf.certificate.f_norm, a, &self.epsilon, self.k, orbit.period())?;
        let again = assemble(
            &f,
            a,
            &self.epsilon,
            self.mode,
            &nf,
            nf.certificate.f_norm.clone(),
            source,
            self.k,
            recurrence,
            orbit,
            constants,
            self.truncation_depth,
        );
        if again != *self {
            return Err(Error::Precondition("plan does not match its embedded function".into()));
        }
        if self.mode == Mode::Theorem && !self.certified {
            return Err(Error::Precondition("theorem-mode plan with nonpositive alpha".into()));
        }
        if self.truncation_depth < self.normal_form.f_hat_depth {
            return Err(Error::Precondition("truncation depth below the function depth".into()));
        }
        Ok(())
    }

    /// The same plan with a different ε, keeping `k` and `K`.
    pub fn with_epsilon(&self, eps: &Q) -> Result<PerturbationPlan> {
        let mut out = self.clone();
        out.epsilon = eps.clone();
        out.constants = constants_from_norm(&self.f_norm, self.a_sequence(), eps, self.k, self.period)?;
        out.certified = out.constants.alpha.is_positive();
        out.radius = eps * &out.constants.sigma;
        out.f_tilde.penalty = (0..=self.truncation_depth).map(|c| eps * self.a_sequence().value(c)).collect();
        Ok(out)
    }

    /// The unperturbed model `ε = 0`, for which lock-in is not expected.
    pub fn without_penalty(&self) -> PerturbationPlan {
        let mut out = self.clone();
        out.epsilon = Q::zero();
        out.certified = false;
        out.radius = Q::zero();
        out.f_tilde.penalty = vec![Q::zero(); self.truncation_depth + 1];
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, pow2_neg, q};
    use crate::shift::{Alphabet, Word};

    fn a2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn worked() -> CylinderFunction {
        CylinderFunction::new(a2(), 2, vec![int(0), int(0), int(2), int(0)]).unwrap()
    }

    #[test]
    fn worked_example_plan() {
        let plan = build_perturbation(&worked(), &ASequence::TriangularDyadic, &q(1, 2), &PlanOptions::default()).unwrap();
        assert_eq!(plan.mode, Mode::Theorem);
        assert!(plan.certified);
        assert_eq!(plan.k, 15);
        assert_eq!(plan.orbit.necklace(), &Word(vec![0, 1]));
        assert_eq!(plan.recurrence, Recurrence { i: 0, j: 2 });
        assert_eq!(plan.constants.sigma, pow2_neg(123));
        assert_eq!(plan.radius, pow2_neg(124));
        assert_eq!(plan.truncation_depth, 21);
        assert_eq!(plan.normal_form.f_hat, vec![int(-1), int(0), int(0), int(-1)]);
        assert_eq!(plan.f_tilde.penalty[3], q(1, 2) * pow2_neg(6));
        plan.check().unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        let back: PerturbationPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
        assert!(json.contains(r#""alpha":""#));
    }

    #[test]
    fn empirical_mode_flags() {
        let opts = PlanOptions { k: Some(2), ..Default::default() };
        let plan = build_perturbation(&worked(), &ASequence::TriangularDyadic, &q(1, 2), &opts).unwrap();
        assert_eq!(plan.mode, Mode::Empirical);
        assert!(!plan.certified);
        assert_eq!(plan.radius, pow2_neg(7));
        assert_eq!(plan.truncation_depth, 8);
        plan.check().unwrap();
    }

    #[test]
    fn tampered_plan_is_rejected() {
        let opts = PlanOptions { k: Some(2), ..Default::default() };
        let mut plan = build_perturbation(&worked(), &ASequence::TriangularDyadic, &q(1, 2), &opts).unwrap();
        plan.radius = q(1, 2);
        assert!(plan.check().is_err());
    }

    #[test]
    fn table_guard() {
        let opts = PlanOptions { table_limit: Some(1000), ..Default::default() };
        let err = build_perturbation(&worked(), &ASequence::TriangularDyadic, &q(1, 2), &opts).unwrap_err();
        assert!(matches!(err, Error::TableTooLarge { .. }));
    }

    #[test]
    fn zero_function_uses_least_cycle() {
        let f = CylinderFunction::constant(a2(), int(0)).lift_depth(2).unwrap();
        let opts = PlanOptions { k: Some(3), ..Default::default() };
        let plan = build_perturbation(&f, &ASequence::Dyadic, &q(1, 2), &opts).unwrap();
        assert_eq!(plan.source_orbit.necklace(), &Word(vec![0]));
        assert_eq!(plan.orbit.necklace(), &Word(vec![0]));
    }

    #[test]
    fn incumbent_orbit_is_kept() {
        // optimizer (001)^∞ already has period below the recurrence span
        let f = CylinderFunction::from_fn(a2(), 3, |w| {
            let s = w.0.iter().map(|&b| b as usize).collect::<Vec<_>>();
            if matches!(s.as_slice(), [0, 0, 1] | [0, 1, 0] | [1, 0, 0]) { int(1) } else { int(0) }
        })
        .unwrap();
        let opts = PlanOptions { k: Some(4), ..Default::default() };
        let plan = build_perturbation(&f, &ASequence::Dyadic, &q(1, 3), &opts).unwrap();
        assert_eq!(plan.source_orbit, plan.orbit);
        assert_eq!(plan.orbit.necklace(), &Word(vec![0, 0, 1]));
    }
}
