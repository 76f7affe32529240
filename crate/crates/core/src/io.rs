//! JSON document formats shared by the library and the command line.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rational::{serde_q_vec, Q};
use crate::shift::Alphabet;
use crate::space::{ASequence, CylinderFunction};

/// `{"alphabet": m, "depth": k, "table": ["p/q", ...], "a_sequence": {...}}`
/// with the table in lexicographic word order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub alphabet: Alphabet,
    pub depth: usize,
    #[serde(with = "serde_q_vec")]
    pub table: Vec<Q>,
    pub a_sequence: ASequence,
}

impl FunctionFile {
    pub fn new(f: &CylinderFunction, a: &ASequence) -> Self {
        FunctionFile { alphabet: f.alphabet(), depth: f.depth(), table: f.table().to_vec(), a_sequence: a.clone() }
    }

    pub fn function(&self) -> Result<CylinderFunction> {
        CylinderFunction::new(self.alphabet, self.depth, self.table.clone())
    }

    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_worked_example() {
        let text = r#"{"alphabet": 2, "depth": 2, "table": ["0/1", "0", "2/1", "0/1"],
                       "a_sequence": {"kind": "triangular_dyadic"}}"#;
        let doc = FunctionFile::parse(text).unwrap();
        let f = doc.function().unwrap();
        assert_eq!(f.a_norm(&doc.a_sequence), Q::from_integer(6.into()));
        let again = serde_json::to_string(&doc).unwrap();
        assert!(again.contains(r#""table":["0/1","0/1","2/1","0/1"]"#));
    }

    #[test]
    fn rejects_bad_documents() {
        let short = r#"{"alphabet": 2, "depth": 2, "table": ["0"], "a_sequence": {"kind": "dyadic"}}"#;
        assert!(FunctionFile::parse(short).unwrap().function().is_err());
        let bad_m = r#"{"alphabet": 1, "depth": 1, "table": ["0"], "a_sequence": {"kind": "dyadic"}}"#;
        assert!(FunctionFile::parse(bad_m).is_err());
        let extra = r#"{"alphabet": 2, "depth": 0, "table": ["0"], "a_sequence": {"kind": "dyadic"}, "x": 1}"#;
        assert!(FunctionFile::parse(extra).is_err());
    }
}
