use num_traits::{One, Zero};
use serde_json::json;

use super::report::{run_suite, Checker, SuiteConfig, SuiteReport};
use crate::error::{Error, Result};
use crate::io::FunctionFile;
use crate::lockin::{recurrence_of, shadow_gap_check};
use crate::maxplus::{
    apply_phi, is_fixed_point, lyndon_words, max_mean_of, maximizing_support, normal_form, oracle_max, sub_action,
};
use crate::rational::{fmt_q, int, pow2_neg, Q};
use crate::shift::{d, follows_in_order, shadows, stays_close, OrbitSegment, PeriodicOrbit, Point, Word};
use crate::space::{ergodic_average, ASequence, CylinderFunction};

pub const SUITES: [&str; 7] =
    ["oracle", "cohomology_bounds", "fixed_point", "shadowing", "parallel_orbit", "in_order", "shadow_gap"];

/// Default instance count of each suite.
pub fn default_instances(suite: &str) -> usize {
    match suite {
        "shadow_gap" => 200,
        _ => 500,
    }
}

pub fn run_named(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    Ok(match name {
        "oracle" => suite_oracle(cfg),
        "cohomology_bounds" => suite_cohomology_bounds(cfg),
        "fixed_point" => suite_fixed_point(cfg),
        "shadowing" => suite_shadowing(cfg),
        "parallel_orbit" => suite_parallel_orbit(cfg),
        "in_order" => suite_in_order(cfg),
        "shadow_gap" => suite_shadow_gap(cfg),
        other => return Err(Error::Parse(format!("unknown suite {other:?}; expected one of {SUITES:?} or \"all\""))),
    })
}

fn function_json(f: &CylinderFunction, a: &ASequence) -> serde_json::Value {
    serde_json::to_value(FunctionFile::new(f, a)).expect("function serializes")
}

fn random_instance(c: &mut Checker<'_>) -> (CylinderFunction, ASequence) {
    let alphabet = c.gen.alphabet();
    let depth = c.gen.depth();
    let f = c.gen.function(alphabet, depth);
    let a = c.gen.kind();
    c.record(function_json(&f, &a));
    (f, a)
}

fn oracle_period(f: &CylinderFunction) -> usize {
    let m = f.alphabet().size();
    m.pow(f.depth().max(1) as u32 - 1) + 1
}

/// `β` from the max-plus solver against enumeration of periodic orbits.
pub fn suite_oracle(cfg: &SuiteConfig) -> SuiteReport {
    run_suite("oracle", cfg, false, |c| {
        let (f, _) = random_instance(c);
        let solved = max_mean_of(&f)?;
        let oracle = oracle_max(&f, oracle_period(&f))?;
        c.eq("beta_equals_oracle", &solved.beta, &oracle.beta);
        Ok(())
    })
}

fn orbits_up_to(alphabet: crate::shift::Alphabet, max_len: usize) -> Vec<PeriodicOrbit> {
    let mut out = Vec::new();
    lyndon_words(alphabet.size(), max_len, |w| {
        out.push(PeriodicOrbit::from_word(alphabet, &Word(w.to_vec())).expect("Lyndon words are primitive"));
    });
    out
}

/// Normal form: sign, cohomology on short orbits, and both norm bounds for
/// every built-in A-sequence.
pub fn suite_cohomology_bounds(cfg: &SuiteConfig) -> SuiteReport {
    run_suite("cohomology_bounds", cfg, false, |c| {
        // same draws as the oracle suite, so both see the same instances
        let (f, _) = random_instance(c);
        let alphabet = f.alphabet();
        let oracle = oracle_max(&f, oracle_period(&f))?;
        let orbits = orbits_up_to(alphabet, 6);
        for a in ASequence::builtin_kinds() {
            let nf = normal_form(&f, &a)?;
            let fh = &nf.f_hat;
            c.le("f_hat_nonpositive", &fh.max_value(), &Q::zero());
            let bound = a.gamma()? * f.a_norm(&a);
            c.le("f_hat_norm", &fh.a_norm(&a), &bound);
            for k in 0..=fh.depth() {
                c.le("tail_bound", &fh.tail_sum(k), &(&bound * a.value(k)));
            }
            c.eq("beta_equals_oracle", &nf.beta, &oracle.beta);
            for orbit in &orbits {
                let lhs = ergodic_average(fh, orbit)?;
                let rhs = ergodic_average(&f, orbit)? - &nf.beta;
                c.eq("orbit_average_shift", &lhs, &rhs);
            }
        }
        if c.gen.chance(0.05) {
            let g = CylinderFunction::constant(alphabet, c.gen.value()).lift_depth(f.depth())?;
            let nf = normal_form(&g, &ASequence::Dyadic)?;
            c.holds("constant_gives_zero", nf.f_hat.table().iter().all(|v| v.is_zero()), "normal form of a constant is not 0");
        }
        Ok(())
    })
}

/// Sub-action fixed point, its Lipschitz bound, and the one-step variation
/// inequality for `Φ_f` on random pairs.
pub fn suite_fixed_point(cfg: &SuiteConfig) -> SuiteReport {
    run_suite("fixed_point", cfg, false, |c| {
        let (f, _) = random_instance(c);
        let sa = sub_action(&f)?;
        c.holds("fixed_point", is_fixed_point(&f, &sa)?, "apply_phi(f - β, h) != h");
        for a in ASequence::builtin_kinds() {
            if let Some(delta) = a.delta() {
                c.le("sub_action_lip", &sa.h.lip_a(&a), &(f.lip_a(&a) / delta));
            }
        }
        let k = f.depth();
        let g_depth = c.gen.rng_range(0, k - 1);
        let g = c.gen.function(f.alphabet(), g_depth);
        let phi = apply_phi(&f, &g)?;
        c.record(json!({
            "f": function_json(&f, &ASequence::Dyadic),
            "g": function_json(&g, &ASequence::Dyadic),
        }));
        for n in 1..=k {
            c.le("phi_variation", &phi.var(n - 1), &(f.var(n) + g.var(n)));
        }
        Ok(())
    })
}

/// Smallest `l` with `2^-l <= rho`, for `0 < rho < 1`.
fn agreement_length(rho: &Q) -> usize {
    let mut l = 0;
    while pow2_neg(l as u64) > *rho {
        l += 1;
    }
    l
}

fn random_rho(c: &mut Checker<'_>) -> Q {
    if c.gen.chance(0.5) {
        pow2_neg(c.gen.rng_range(1, 5) as u64)
    } else {
        let den = c.gen.rng_range(2, 64) as i64;
        let num = c.gen.rng_range(1, den as usize - 1) as i64;
        Q::new(num.into(), den.into())
    }
}

fn point_json(p: &Point) -> serde_json::Value {
    serde_json::to_value(p.to_repr()).expect("point serializes")
}

/// A point shadowing `k` steps of the orbit of `y` from offset `i`, within
/// `rho`: shadowing for `k` steps at scale `rho` pins `k + l - 1` symbols.
pub fn suite_shadowing(cfg: &SuiteConfig) -> SuiteReport {
    run_suite("shadowing", cfg, true, |c| {
        let alphabet = c.gen.alphabet();
        let y = c.gen.periodic(alphabet, 1);
        let i = c.gen.rng_range(0, y.period().len() - 1);
        let k = c.gen.rng_range(1, 6);
        let rho = random_rho(c);
        let l = agreement_length(&rho);
        let target = y.shift_by(i);
        let x = if c.gen.chance(0.1) {
            target.clone()
        } else {
            let block = target.prefix(k + l - 1);
            c.gen.splice(alphabet, &block.0, target.symbol(k + l - 1))
        };
        c.record(json!({ "y": point_json(&y), "x": point_json(&x), "i": i, "k": k, "rho": fmt_q(&rho) }));
        let segment = OrbitSegment::new(y.clone(), i, k)?;
        if !shadows(&x, &segment, &rho)? {
            c.discard("x does not shadow the segment");
            return Ok(());
        }
        for j in 0..k {
            let lhs = d(&x.shift_by(j), &y.shift_by(i + j))?;
            let rhs = &rho * pow2_neg((k - 1 - j) as u64);
            c.le("shadowing_bound", &lhs, &rhs);
        }
        Ok(())
    })
}

/// Summed differences along a `2^-r`-shadowing stretch against `V_r(f)`.
pub fn suite_parallel_orbit(cfg: &SuiteConfig) -> SuiteReport {
    run_suite("parallel_orbit", cfg, true, |c| {
        let alphabet = c.gen.alphabet();
        let y = c.gen.periodic(alphabet, 1);
        let i = c.gen.rng_range(0, y.period().len() - 1);
        let r = c.gen.rng_range(1, 4);
        let target = y.shift_by(i);
        let designed = c.gen.chance(0.2);
        let (k, f) = if designed {
            // indicator of the target's first r + 1 symbols: both sides equal 1
            let word = target.prefix(r + 1);
            let f = CylinderFunction::from_fn(alphabet, r + 1, |w| if *w == word { Q::one() } else { Q::zero() })?;
            (1, f)
        } else {
            let depth = c.gen.depth();
            (c.gen.rng_range(1, 6), c.gen.function(alphabet, depth))
        };
        let lead = c.gen.rng_range(0, 3);
        let u = c.gen.word(alphabet, lead);
        let block = target.prefix(k + r - 1);
        let x = c.gen.splice(alphabet, &block.0, target.symbol(k + r - 1)).prepend(&u.0);
        c.record(json!({
            "f": function_json(&f, &ASequence::Dyadic),
            "y": point_json(&y), "x": point_json(&x), "i": i, "m": lead, "k": k, "r": r,
        }));
        let segment = OrbitSegment::new(y.clone(), i, k)?;
        if !shadows(&x.shift_by(lead), &segment, &pow2_neg(r as u64))? {
            c.discard("x does not shadow the segment");
            return Ok(());
        }
        let mut lhs = Q::zero();
        for j in 0..k {
            let diff = f.eval(&x.shift_by(lead + j)) - f.eval(&y.shift_by(i + j));
            lhs += if diff < Q::zero() { -diff } else { diff };
        }
        c.le("parallel_orbit_bound", &lhs, &f.tail_sum(r));
        Ok(())
    })
}

/// Points staying `rho`-close to a periodic orbit for `k + 1` steps follow it
/// in order, with a single offset.
pub fn suite_in_order(cfg: &SuiteConfig) -> SuiteReport {
    run_suite("in_order", cfg, true, |c| {
        let alphabet = c.gen.alphabet();
        let y = c.gen.periodic(alphabet, 2);
        let orbit = PeriodicOrbit::of_point(&y)?;
        let p = orbit.period();
        let gamma = orbit.min_separation().expect("period at least two");
        let rho = &gamma / int(4) * pow2_neg(c.gen.rng_range(0, 2) as u64);
        let k = c.gen.rng_range(1, 6);
        let start = c.gen.rng_range(0, p - 1);
        let l = agreement_length(&rho);
        let target = y.shift_by(start);
        let x = if c.gen.chance(0.1) {
            target.clone()
        } else {
            let block = target.prefix(k + l);
            c.gen.splice(alphabet, &block.0, target.symbol(k + l))
        };
        c.record(json!({ "y": point_json(&y), "x": point_json(&x), "k": k, "rho": fmt_q(&rho) }));
        if rho > &gamma / int(4) {
            c.discard("rho exceeds a quarter of the minimal separation");
            return Ok(());
        }
        if !stays_close(&x, &orbit, &rho, k + 1)? {
            c.discard("x leaves the rho-neighbourhood");
            return Ok(());
        }
        let whole = OrbitSegment::new(y.clone(), 0, p)?;
        c.holds("follows_in_order", follows_in_order(&x, &whole, k)?, "x does not follow the orbit in order");
        let mut best: Option<Q> = None;
        for offset in 0..p {
            let mut worst = Q::zero();
            for j in 0..=k {
                let dist = d(&x.shift_by(j), &y.shift_by(offset + j))?;
                if dist > worst {
                    worst = dist;
                }
            }
            if best.as_ref().map_or(true, |b| worst < *b) {
                best = Some(worst);
            }
        }
        c.le("single_offset", &best.expect("p >= 2"), &rho);
        Ok(())
    })
}

/// Periodic orbits built from recurrences of a maximizing orbit sit within
/// `γ∥f∥A_r / p` of the maximum.
pub fn suite_shadow_gap(cfg: &SuiteConfig) -> SuiteReport {
    run_suite("shadow_gap", cfg, true, |c| {
        let (f, a) = random_instance(c);
        let nf = normal_form(&f, &a)?;
        let x = maximizing_support(&nf)?.orbits[0].clone();
        let same = shadow_gap_check(&f, &a, &x, &x, 1)?;
        c.le("gap_upper", &same.measured, &same.upper);
        for r in 1..=4 {
            let (_, y) = recurrence_of(&x, r)?;
            match shadow_gap_check(&f, &a, &x, &y, r) {
                Ok(rep) => {
                    c.le("gap_lower", &rep.lower, &rep.measured);
                    c.le("gap_upper", &rep.measured, &rep.upper);
                }
                Err(Error::Precondition(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    })
}

impl super::generator::Gen<'_> {
    /// Uniform integer in `lo..=hi`.
    pub fn rng_range(&mut self, lo: usize, hi: usize) -> usize {
        use rand::Rng;
        self.rng.gen_range(lo..=hi.max(lo))
    }
}
