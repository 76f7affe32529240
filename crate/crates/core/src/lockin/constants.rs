use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{serde_q, Q};
use crate::space::{ASequence, CylinderFunction, SuperContinuity};

/// Search limit for [`choose_k`]; super-continuous sequences settle long
/// before this.
pub const MAX_K: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(with = "serde_q")]
    pub gamma: Q,
    #[serde(with = "serde_q")]
    pub l: Q,
    #[serde(with = "serde_q")]
    pub sigma: Q,
    #[serde(with = "serde_q")]
    pub alpha: Q,
}

pub(crate) fn check_epsilon(eps: &Q) -> Result<()> {
    if !eps.is_positive() || *eps >= Q::one() {
        return Err(Error::EpsilonOutOfRange(crate::rational::fmt_q(eps)));
    }
    Ok(())
}

/// `L = γ²(∥f∥ + 2)`.
pub fn l_constant(f_norm: &Q, a: &ASequence) -> Result<Q> {
    let gamma = a.gamma()?;
    Ok(&gamma * &gamma * (f_norm + Q::from_integer(2.into())))
}

/// `α = (ε/2)A_k - 3L·A_(k+1)`.
pub fn alpha(l: &Q, a: &ASequence, eps: &Q, k: usize) -> Q {
    eps / Q::from_integer(2.into()) * a.value(k) - Q::from_integer(3.into()) * l * a.value(k + 1)
}

pub fn constants_from_norm(f_norm: &Q, a: &ASequence, eps: &Q, k: usize, p: usize) -> Result<Constants> {
    check_epsilon(eps)?;
    if k == 0 || p == 0 {
        return Err(Error::Precondition(format!("need k >= 1 and p >= 1, got k = {k}, p = {p}")));
    }
    let gamma = a.gamma()?;
    let l = l_constant(f_norm, a)?;
    let sigma = a.value(k) / Q::from_integer((4 * p).into());
    let alpha = alpha(&l, a, eps, k);
    Ok(Constants { gamma, l, sigma, alpha })
}

/// `γ`, `L`, `σ` and `α` for `f` at recurrence depth `k` and period `p`.
pub fn constants(f: &CylinderFunction, a: &ASequence, eps: &Q, k: usize, p: usize) -> Result<Constants> {
    constants_from_norm(&f.a_norm(a), a, eps, k, p)
}

/// Smallest `k >= 1` with `α > 0`.
pub fn choose_k_from_norm(f_norm: &Q, a: &ASequence, eps: &Q) -> Result<usize> {
    check_epsilon(eps)?;
    if a.super_continuity() != SuperContinuity::Yes {
        return Err(Error::NotSuperContinuous);
    }
    let l = l_constant(f_norm, a)?;
    (1..=MAX_K)
        .find(|&k| alpha(&l, a, eps, k) > Q::zero())
        .ok_or_else(|| Error::Precondition(format!("no admissible k up to {MAX_K}")))
}

pub fn choose_k(f: &CylinderFunction, a: &ASequence, eps: &Q) -> Result<usize> {
    choose_k_from_norm(&f.a_norm(a), a, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, pow2_neg, q};
    use crate::shift::Alphabet;

    fn worked() -> CylinderFunction {
        CylinderFunction::new(Alphabet::new(2).unwrap(), 2, vec![int(0), int(0), int(2), int(0)]).unwrap()
    }

    #[test]
    fn worked_example_constants() {
        let a = ASequence::TriangularDyadic;
        let c = constants(&worked(), &a, &q(1, 2), 15, 2).unwrap();
        assert_eq!(c.gamma, int(20));
        assert_eq!(c.l, int(3200));
        assert_eq!(c.sigma, pow2_neg(120) / int(8));
        assert_eq!(c.alpha, pow2_neg(120) / int(4) - int(9600) * pow2_neg(136));
        assert!(c.alpha > Q::zero());
        assert_eq!(choose_k(&worked(), &a, &q(1, 2)).unwrap(), 15);
        // one step earlier the inequality fails
        assert!(alpha(&c.l, &a, &q(1, 2), 14) <= Q::zero());
    }

    #[test]
    fn sigma_example() {
        let c = constants(&worked(), &ASequence::Dyadic, &q(1, 2), 3, 2).unwrap();
        assert_eq!(c.sigma, q(1, 64));
    }

    #[test]
    fn refuses_bad_input() {
        let f = worked();
        assert!(matches!(choose_k(&f, &ASequence::Dyadic, &q(1, 2)), Err(Error::NotSuperContinuous)));
        assert!(matches!(constants(&f, &ASequence::Dyadic, &int(1), 3, 2), Err(Error::EpsilonOutOfRange(_))));
        assert!(constants(&f, &ASequence::Dyadic, &int(0), 3, 2).is_err());
        assert!(constants(&f, &ASequence::Dyadic, &q(1, 2), 0, 2).is_err());
    }

    #[test]
    fn monotone_in_epsilon_and_period() {
        let a = ASequence::TriangularDyadic;
        let f = worked();
        let mut last = usize::MAX;
        for den in [100, 50, 10, 4, 2] {
            let k = choose_k(&f, &a, &q(1, den)).unwrap();
            assert!(k <= last);
            last = k;
        }
        let lo = constants(&f, &a, &q(1, 4), 15, 2).unwrap();
        let hi = constants(&f, &a, &q(3, 4), 15, 2).unwrap();
        assert!(hi.alpha > lo.alpha);
        let p3 = constants(&f, &a, &q(1, 4), 15, 3).unwrap();
        assert!(p3.sigma < lo.sigma);
    }
}
