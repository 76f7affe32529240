use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(m: usize) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&m) {
            return Err(Error::InvalidAlphabet { got: m, max: MAX_ALPHABET });
        }
        Ok(Alphabet(m))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn check_symbol(self, s: u8) -> Result<()> {
        if (s as usize) < self.0 {
            Ok(())
        } else {
            Err(Error::InvalidSymbol { symbol: s, size: self.0 })
        }
    }

    pub fn check_same(self, other: Alphabet) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch { left: self.0, right: other.0 })
        }
    }

    /// `m^n`, or `None` on overflow.
    pub fn count(self, n: usize) -> Option<usize> {
        (self.0 as u64).checked_pow(n as u32).and_then(|v| usize::try_from(v).ok())
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;
    fn try_from(m: usize) -> Result<Self> {
        Alphabet::new(m)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn validate(&self, a: Alphabet) -> Result<()> {
        self.0.iter().try_for_each(|&s| a.check_symbol(s))
    }

    /// Position of the word in lexicographic order among words of its length.
    pub fn index(&self, a: Alphabet) -> usize {
        self.0.iter().fold(0usize, |acc, &s| acc * a.size() + s as usize)
    }

    pub fn from_index(mut index: usize, len: usize, a: Alphabet) -> Self {
        let m = a.size();
        let mut w = vec![0u8; len];
        for slot in w.iter_mut().rev() {
            *slot = (index % m) as u8;
            index /= m;
        }
        Word(w)
    }

    /// Length of the shortest `r` with `self = r^(len/|r|)`.
    pub fn primitive_root_len(&self) -> usize {
        let n = self.0.len();
        (1..=n)
            .find(|&d| n % d == 0 && (d..n).all(|i| self.0[i] == self.0[i - d]))
            .unwrap_or(n)
    }

    pub fn is_primitive(&self) -> bool {
        !self.0.is_empty() && self.primitive_root_len() == self.0.len()
    }

    pub fn rotate_left(&self, r: usize) -> Self {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let r = r % v.len();
            v.rotate_left(r);
        }
        Word(v)
    }

    /// Lexicographically least rotation (two-pointer minimum expression).
    pub fn least_rotation(&self) -> Self {
        let s = &self.0;
        let n = s.len();
        let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
        while i < n && j < n && k < n {
            let a = s[(i + k) % n];
            let b = s[(j + k) % n];
            if a == b {
                k += 1;
                continue;
            }
            if a > b {
                i += k + 1;
            } else {
                j += k + 1;
            }
            if i == j {
                j += 1;
            }
            k = 0;
        }
        self.rotate_left(i.min(j))
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.0 {
            if s < 10 {
                write!(f, "{s}")?;
            } else {
                write!(f, "[{s}]")?;
            }
        }
        Ok(())
    }
}

impl From<&[u8]> for Word {
    fn from(s: &[u8]) -> Self {
        Word(s.to_vec())
    }
}
