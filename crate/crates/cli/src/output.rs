use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use ergopt::rational::{parse_q, to_f64};
use serde::Serialize;
use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub role: String,
    pub sha256: String,
}

/// Embedded in every output document. Paths are left out so that a run is
/// reproducible from the manifest and the hashed inputs alone.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: Value,
    pub inputs: Vec<InputHash>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Only with `--timing`; breaks byte-for-byte reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value) -> Self {
        RunManifest {
            tool: "ergopt",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            parameters,
            inputs: Vec::new(),
            seed: None,
            timing_ms: None,
        }
    }
}

pub fn read_input(path: &Path, role: &str, manifest: &mut RunManifest) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    manifest.inputs.push(InputHash { role: role.to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
    String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
}

fn rational_string(s: &str) -> Option<f64> {
    let (n, d) = s.split_once('/')?;
    let n = n.strip_prefix('-').unwrap_or(n);
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(n) || !digits(d) {
        return None;
    }
    parse_q(s).ok().map(|x| to_f64(&x))
}

fn decimal(v: &Value) -> Option<Value> {
    match v {
        Value::String(s) => rational_string(s).map(|x| Number::from_f64(x).map_or(Value::Null, Value::Number)),
        Value::Array(items) if !items.is_empty() => items.iter().map(decimal).collect::<Option<Vec<_>>>().map(Value::Array),
        _ => None,
    }
}

/// Adds `<key>_decimal` beside every exact rational (or array of them).
pub fn annotate_decimals(v: &mut Value) {
    match v {
        Value::Object(map) => {
            let extra: Vec<(String, Value)> =
                map.iter().filter_map(|(k, x)| decimal(x).map(|d| (format!("{k}_decimal"), d))).collect();
            for x in map.values_mut() {
                annotate_decimals(x);
            }
            map.extend(extra);
        }
        Value::Array(items) => items.iter_mut().for_each(annotate_decimals),
        _ => {}
    }
}

pub fn document(manifest: &RunManifest, body: &impl Serialize, float: bool) -> Result<String> {
    let mut map = match serde_json::to_value(body)? {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("manifest".into(), serde_json::to_value(manifest)?);
    let mut v = Value::Object(map);
    if float {
        annotate_decimals(&mut v);
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn decimals_sit_beside_rationals() {
        let mut v = json!({"beta": "1/2", "table": ["-1/4", "0/1"], "name": "01", "n": 3, "mixed": ["1/2", "x"]});
        annotate_decimals(&mut v);
        assert_eq!(v["beta_decimal"], json!(0.5));
        assert_eq!(v["table_decimal"], json!([-0.25, 0.0]));
        assert!(v.get("name_decimal").is_none());
        assert!(v.get("mixed_decimal").is_none());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
