use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, pow2_neg, serde_q, serde_q_vec, Q};

/// A positive sequence decreasing to zero, given in closed form so that any
/// term can be evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawASequence")]
pub enum ASequence {
    /// `A_n = 2^-n`.
    Dyadic,
    /// `A_n = a0 r^n` with `0 < r < 1`.
    Geometric {
        #[serde(with = "serde_q")]
        a0: Q,
        #[serde(with = "serde_q")]
        r: Q,
    },
    /// `A_n = 2^(-n(n+1)/2)`.
    TriangularDyadic,
    /// Explicit leading terms followed by a geometric tail:
    /// `A_n = values[last] * tail_ratio^(n - last)` beyond the table.
    CustomTable {
        #[serde(with = "serde_q_vec")]
        values: Vec<Q>,
        #[serde(with = "serde_q")]
        tail_ratio: Q,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawASequence {
    Dyadic,
    Geometric {
        #[serde(with = "serde_q")]
        a0: Q,
        #[serde(with = "serde_q")]
        r: Q,
    },
    TriangularDyadic,
    CustomTable {
        #[serde(with = "serde_q_vec")]
        values: Vec<Q>,
        #[serde(with = "serde_q")]
        tail_ratio: Q,
    },
}

impl TryFrom<RawASequence> for ASequence {
    type Error = Error;
    fn try_from(raw: RawASequence) -> Result<Self> {
        match raw {
            RawASequence::Dyadic => Ok(ASequence::Dyadic),
            RawASequence::TriangularDyadic => Ok(ASequence::TriangularDyadic),
            RawASequence::Geometric { a0, r } => ASequence::geometric(a0, r),
            RawASequence::CustomTable { values, tail_ratio } => ASequence::custom(values, tail_ratio),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperContinuity {
    Yes,
    No,
    /// Only a finite table is known; the declared tail is not trusted as a
    /// limit statement.
    Unknown,
}

/// A lacunary replacement `B` of an A-sequence together with the norm
/// comparison constants: `||f||_A <= M ||f||_B` and `M' = max A_n / B_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lacunarized {
    pub b: ASequence,
    pub m: Q,
    pub m_prime: Q,
}

impl ASequence {
    pub fn geometric(a0: Q, r: Q) -> Result<Self> {
        if !a0.is_positive() {
            return Err(Error::InvalidSequence("a0 must be positive".into()));
        }
        if !r.is_positive() || r >= Q::one() {
            return Err(Error::InvalidSequence("ratio must lie in (0, 1)".into()));
        }
        Ok(ASequence::Geometric { a0, r })
    }

    /// Table entries must be positive and non-increasing.
    pub fn custom(values: Vec<Q>, tail_ratio: Q) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSequence("custom table needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidSequence("values must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidSequence("values must be non-increasing".into()));
        }
        if !tail_ratio.is_positive() || tail_ratio >= Q::one() {
            return Err(Error::InvalidSequence("tail ratio must lie in (0, 1)".into()));
        }
        Ok(ASequence::CustomTable { values, tail_ratio })
    }

    pub fn value(&self, n: usize) -> Q {
        match self {
            ASequence::Dyadic => pow2_neg(n as u64),
            ASequence::Geometric { a0, r } => a0 * num_traits::pow(r.clone(), n),
            ASequence::TriangularDyadic => {
                let n = n as u64;
                pow2_neg(n * (n + 1) / 2)
            }
            ASequence::CustomTable { values, tail_ratio } => {
                let last = values.len() - 1;
                if n <= last {
                    values[n].clone()
                } else {
                    &values[last] * num_traits::pow(tail_ratio.clone(), n - last)
                }
            }
        }
    }

    /// `A_(n+1) / A_n`.
    pub fn ratio(&self, n: usize) -> Q {
        match self {
            ASequence::Dyadic => pow2_neg(1),
            ASequence::Geometric { r, .. } => r.clone(),
            ASequence::TriangularDyadic => pow2_neg(n as u64 + 1),
            ASequence::CustomTable { values, tail_ratio } => {
                if n + 1 < values.len() {
                    &values[n + 1] / &values[n]
                } else {
                    tail_ratio.clone()
                }
            }
        }
    }

    /// Largest ratio over all `n`; the ratio sequences of the closed forms
    /// are monotone, so a finite scan suffices.
    pub fn max_ratio(&self) -> Q {
        match self {
            ASequence::CustomTable { values, tail_ratio } => (0..values.len())
                .map(|n| self.ratio(n))
                .chain(std::iter::once(tail_ratio.clone()))
                .max()
                .expect("nonempty"),
            _ => self.ratio(0),
        }
    }

    pub fn limsup_ratio(&self) -> Q {
        match self {
            ASequence::Dyadic => pow2_neg(1),
            ASequence::Geometric { r, .. } => r.clone(),
            ASequence::TriangularDyadic => Q::zero(),
            ASequence::CustomTable { tail_ratio, .. } => tail_ratio.clone(),
        }
    }

    /// `inf_n (1 - A_(n+1)/A_n)` if positive.
    pub fn delta(&self) -> Option<Q> {
        let d = Q::one() - self.max_ratio();
        d.is_positive().then_some(d)
    }

    pub fn is_lacunary(&self) -> bool {
        self.delta().is_some()
    }

    pub fn super_continuity(&self) -> SuperContinuity {
        match self {
            ASequence::TriangularDyadic => SuperContinuity::Yes,
            ASequence::Dyadic | ASequence::Geometric { .. } => SuperContinuity::No,
            ASequence::CustomTable { .. } => SuperContinuity::Unknown,
        }
    }

    /// Replaces finitely many terms to make the sequence lacunary. Terms are
    /// raised, working backwards from the end of the table, until every
    /// ratio is at most the largest ratio below one.
    pub fn lacunarize(&self) -> Result<Lacunarized> {
        if self.is_lacunary() {
            return Ok(Lacunarized { b: self.clone(), m: Q::one(), m_prime: Q::one() });
        }
        let ASequence::CustomTable { values, tail_ratio } = self else {
            unreachable!("closed-form kinds are lacunary")
        };
        if *tail_ratio >= Q::one() {
            return Err(Error::NotLacunary("limsup of ratios is not below 1".into()));
        }
        let rho = (0..values.len() - 1)
            .map(|n| self.ratio(n))
            .filter(|r| *r < Q::one())
            .chain(std::iter::once(tail_ratio.clone()))
            .max()
            .expect("nonempty");
        let mut b = values.clone();
        for n in (0..b.len() - 1).rev() {
            let need = &b[n + 1] / &rho;
            if need > b[n] {
                b[n] = need;
            }
        }
        let m = values
            .iter()
            .zip(&b)
            .map(|(a, bb)| bb / a)
            .chain(std::iter::once(Q::one()))
            .max()
            .expect("nonempty");
        let m_prime = values
            .iter()
            .zip(&b)
            .map(|(a, bb)| a / bb)
            .max()
            .expect("nonempty")
            .max(Q::one());
        Ok(Lacunarized { b: ASequence::custom(b, tail_ratio.clone())?, m, m_prime })
    }

    /// `2(A_0 + 1 + δ)/δ²`, passing to a lacunary replacement if needed.
    pub fn gamma(&self) -> Result<Q> {
        if let Some(delta) = self.delta() {
            return Ok(int(2) * (self.value(0) + Q::one() + &delta) / (&delta * &delta));
        }
        let lac = self.lacunarize()?;
        Ok(&lac.m * &lac.m_prime * lac.b.gamma()?)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ASequence::Dyadic => "dyadic",
            ASequence::Geometric { .. } => "geometric",
            ASequence::TriangularDyadic => "triangular_dyadic",
            ASequence::CustomTable { .. } => "custom_table",
        }
    }

    /// One instance of every built-in kind, for sweeps.
    pub fn builtin_kinds() -> Vec<ASequence> {
        vec![
            ASequence::Dyadic,
            ASequence::Geometric { a0: Q::one(), r: crate::rational::q(1, 4) },
            ASequence::TriangularDyadic,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn values() {
        assert_eq!(ASequence::Dyadic.value(3), q(1, 8));
        assert_eq!(ASequence::TriangularDyadic.value(3), q(1, 64));
        let g = ASequence::geometric(q(1, 1), q(1, 4)).unwrap();
        assert_eq!(g.value(2), q(1, 16));
        let c = ASequence::custom(vec![q(1, 1), q(1, 3)], q(1, 2)).unwrap();
        assert_eq!(c.value(1), q(1, 3));
        assert_eq!(c.value(3), q(1, 12));
    }

    #[test]
    fn gammas() {
        assert_eq!(ASequence::geometric(q(1, 1), q(1, 4)).unwrap().gamma().unwrap(), q(88, 9));
        assert_eq!(ASequence::Dyadic.gamma().unwrap(), q(20, 1));
        assert_eq!(ASequence::TriangularDyadic.delta(), Some(q(1, 2)));
        assert_eq!(ASequence::TriangularDyadic.gamma().unwrap(), q(20, 1));
    }

    #[test]
    fn lacunarize_identity_and_repair() {
        let l = ASequence::Dyadic.lacunarize().unwrap();
        assert_eq!(l.b, ASequence::Dyadic);
        assert_eq!((l.m, l.m_prime), (q(1, 1), q(1, 1)));

        // ratio 1 at n = 0 violates lacunarity
        let a = ASequence::custom(vec![q(1, 1), q(1, 1), q(1, 4)], q(1, 2)).unwrap();
        assert!(!a.is_lacunary());
        let l = a.lacunarize().unwrap();
        assert!(l.b.is_lacunary());
        assert_eq!(l.b.value(0), q(2, 1));
        assert_eq!(l.b.value(1), q(1, 1));
        assert_eq!(l.m, q(2, 1));
        assert_eq!(l.m_prime, q(1, 1));
        for n in 3..10 {
            assert_eq!(l.b.value(n), a.value(n));
        }
        assert_eq!(a.gamma().unwrap(), q(2, 1) * l.b.gamma().unwrap());
    }

    #[test]
    fn validation_and_serde() {
        assert!(ASequence::geometric(q(1, 1), q(1, 1)).is_err());
        assert!(ASequence::custom(vec![q(1, 2), q(1, 1)], q(1, 2)).is_err());
        let s = serde_json::to_string(&ASequence::geometric(q(1, 1), q(1, 4)).unwrap()).unwrap();
        assert_eq!(s, r#"{"kind":"geometric","a0":"1/1","r":"1/4"}"#);
        let back: ASequence = serde_json::from_str(&s).unwrap();
        assert_eq!(back.value(1), q(1, 4));
        assert!(serde_json::from_str::<ASequence>(r#"{"kind":"geometric","a0":"1","r":"2"}"#).is_err());
        let t: ASequence = serde_json::from_str(r#"{"kind":"triangular_dyadic"}"#).unwrap();
        assert_eq!(t.super_continuity(), SuperContinuity::Yes);
    }
}
