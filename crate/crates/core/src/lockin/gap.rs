use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxplus::max_mean_of;
use crate::rational::{serde_q, Q};
use crate::shift::PeriodicOrbit;
use crate::space::{ergodic_average, ASequence, CylinderFunction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowGapReport {
    pub r: usize,
    pub p: usize,
    /// Offsets with `d(T^(i+m) x, T^(i+m') y) <= 2^-r` for `0 <= i < p`.
    pub m: usize,
    pub m_prime: usize,
    /// `f̄(x) - γ∥f∥A_r / p`.
    #[serde(with = "serde_q")]
    pub lower: Q,
    /// `f̄(y)`.
    #[serde(with = "serde_q")]
    pub measured: Q,
    /// `f̄(x)`.
    #[serde(with = "serde_q")]
    pub upper: Q,
    pub holds: bool,
}

/// Offsets `(m, m')` at which a segment of the orbit of `x` follows the
/// orbit of `y` within `2^-r` for one period of `y`.
pub fn shadow_offsets(x: &PeriodicOrbit, y: &PeriodicOrbit, r: usize) -> Option<(usize, usize)> {
    let p = y.period();
    let span = p + r.max(1) - 1;
    (0..x.period()).find_map(|m| {
        (0..p).find(|&mp| (0..span).all(|t| x.symbol(m, t) == y.symbol(mp, t))).map(|mp| (m, mp))
    })
}

/// Checks `f̄(x) - γ∥f∥A_r / p <= f̄(y) <= f̄(x)` exactly for a maximizing
/// orbit `x` and a period-`p` orbit `y` it shadows at scale `2^-r`.
pub fn shadow_gap_check(
    f: &CylinderFunction,
    a: &ASequence,
    x: &PeriodicOrbit,
    y: &PeriodicOrbit,
    r: usize,
) -> Result<ShadowGapReport> {
    if r == 0 {
        return Err(Error::Precondition("r must be positive".into()));
    }
    let upper = ergodic_average(f, x)?;
    let beta = max_mean_of(f)?.beta;
    if upper != beta {
        return Err(Error::Precondition(format!("{x} is not a maximizing orbit")));
    }
    let (m, m_prime) =
        shadow_offsets(x, y, r).ok_or_else(|| Error::Precondition(format!("no segment of {x} shadows {y} at depth {r}")))?;
    let p = y.period();
    let gamma = a.gamma()?;
    let lower = &upper - gamma * f.a_norm(a) * a.value(r) / Q::from_integer(p.into());
    let measured = ergodic_average(f, y)?;
    let holds = lower <= measured && measured <= upper;
    Ok(ShadowGapReport { r, p, m, m_prime, lower, measured, upper, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lockin::recurrence_of;
    use crate::maxplus::{maximizing_support, normal_form};
    use crate::rational::{int, q};
    use crate::shift::{Alphabet, Word};
    use proptest::prelude::*;

    fn a2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn orb(v: &[u8]) -> PeriodicOrbit {
        PeriodicOrbit::from_word(a2(), &Word(v.to_vec())).unwrap()
    }

    #[test]
    fn same_orbit_is_tight_at_the_top() {
        let f = CylinderFunction::new(a2(), 2, vec![int(0), int(0), int(2), int(0)]).unwrap();
        let x = orb(&[0, 1]);
        let rep = shadow_gap_check(&f, &ASequence::TriangularDyadic, &x, &x, 3).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.measured, rep.upper);
        let (_, y) = recurrence_of(&x, 1).unwrap();
        assert!(shadow_gap_check(&f, &ASequence::Dyadic, &x, &y, 1).unwrap().holds);
    }

    #[test]
    fn designed_optimizer() {
        let x = orb(&[0, 1, 1, 1]);
        let f = CylinderFunction::from_fn(a2(), 4, |w| if x.common_prefix_with_word(&w.0) == 4 { int(1) } else { int(0) })
            .unwrap();
        let y = orb(&[0, 1]);
        let rep = shadow_gap_check(&f, &ASequence::Dyadic, &x, &y, 2).unwrap();
        assert_eq!((rep.upper.clone(), rep.measured.clone()), (int(1), int(0)));
        assert!(rep.holds);
        assert!(shadow_gap_check(&f, &ASequence::Dyadic, &x, &orb(&[0]), 2).is_err());
        assert!(shadow_gap_check(&f, &ASequence::Dyadic, &y, &y, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn recurrence_orbits_obey_the_gap(vals in prop::collection::vec(-8i64..8, 8), r in 1usize..5) {
            let f = CylinderFunction::new(a2(), 3, vals.iter().map(|&v| q(v, 3)).collect()).unwrap();
            let a = ASequence::Dyadic;
            let nf = normal_form(&f, &a).unwrap();
            let x = maximizing_support(&nf).unwrap().orbits[0].clone();
            let (_, y) = recurrence_of(&x, r).unwrap();
            let rep = shadow_gap_check(&f, &a, &x, &y, r).unwrap();
            prop_assert!(rep.holds);
        }
    }
}
