use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::generator::{Gen, InstanceGenerator, Ranges};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// A failing instance, re-runnable from `(suite, seed, index)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub suite: String,
    pub seed: u64,
    pub index: usize,
    pub property: String,
    pub detail: String,
    pub instance: serde_json::Value,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyStats {
    pub checked: usize,
    pub failed: usize,
    /// Checks where the inequality held with equality.
    pub tight: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub instances: usize,
    pub discarded: usize,
    pub properties: BTreeMap<String, PropertyStats>,
    pub failures: Vec<Counterexample>,
    pub notes: Vec<String>,
    pub status: Status,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn tight(&self) -> usize {
        self.properties.values().map(|p| p.tight).sum()
    }

    pub fn summary(&self) -> String {
        let checks: usize = self.properties.values().map(|p| p.checked).sum();
        format!(
            "{:<18} {:<4} instances={} discarded={} checks={} tight={} failures={}",
            self.suite,
            if self.passed() { "pass" } else { "FAIL" },
            self.instances,
            self.discarded,
            checks,
            self.tight(),
            self.failures.len()
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    /// Run only this instance index.
    pub only: Option<usize>,
    /// Flip every checked inequality, to exercise the failure path.
    pub inject_fault: bool,
    pub ranges: Ranges,
}

/// Per-instance recorder handed to suite bodies.
pub struct Checker<'a> {
    pub gen: Gen<'a>,
    fault: bool,
    results: Vec<(&'static str, bool, bool, String)>,
    pub instance: serde_json::Value,
    discarded: Option<String>,
}

impl Checker<'_> {
    /// Records `lhs <= rhs`; `tight` when equal and nonzero.
    pub fn le<T: PartialOrd + Default + std::fmt::Debug>(&mut self, property: &'static str, lhs: &T, rhs: &T) {
        let ok = (lhs <= rhs) != self.fault;
        let tight = lhs == rhs && *rhs != T::default();
        self.results.push((property, ok, tight, format!("{lhs:?} <= {rhs:?}")));
    }

    pub fn eq<T: PartialEq + std::fmt::Debug>(&mut self, property: &'static str, lhs: &T, rhs: &T) {
        let ok = (lhs == rhs) != self.fault;
        self.results.push((property, ok, false, format!("{lhs:?} == {rhs:?}")));
    }

    pub fn holds(&mut self, property: &'static str, ok: bool, detail: impl Into<String>) {
        self.results.push((property, ok != self.fault, false, detail.into()));
    }

    pub fn discard(&mut self, reason: impl Into<String>) {
        self.discarded = Some(reason.into());
    }

    pub fn record(&mut self, instance: serde_json::Value) {
        self.instance = instance;
    }
}

/// Runs `body` on every instance and aggregates.
pub fn run_suite(
    name: &str,
    cfg: &SuiteConfig,
    require_tight: bool,
    body: impl Fn(&mut Checker<'_>) -> Result<()>,
) -> SuiteReport {
    let gen = InstanceGenerator::new(cfg.seed, cfg.ranges.clone());
    let indices: Vec<usize> = match cfg.only {
        Some(i) => vec![i],
        None => (0..cfg.instances).collect(),
    };
    let mut properties: BTreeMap<String, PropertyStats> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut discarded = 0;
    for &index in &indices {
        let mut c =
            Checker { gen: gen.rng(index), fault: cfg.inject_fault, results: Vec::new(), instance: serde_json::Value::Null, discarded: None };
        if let Err(e) = body(&mut c) {
            c.results.push(("no_error", false, false, e.to_string()));
        }
        if c.discarded.is_some() {
            discarded += 1;
            continue;
        }
        for (property, ok, tight, detail) in c.results {
            let stats = properties.entry(property.to_string()).or_default();
            stats.checked += 1;
            if tight && ok {
                stats.tight += 1;
            }
            if !ok {
                stats.failed += 1;
                failures.push(Counterexample {
                    suite: name.to_string(),
                    seed: cfg.seed,
                    index,
                    property: property.to_string(),
                    detail,
                    instance: c.instance.clone(),
                });
            }
        }
    }
    let mut notes = Vec::new();
    if !indices.is_empty() && discarded == indices.len() {
        notes.push("every instance was discarded".to_string());
    }
    let tight: usize = properties.values().map(|p| p.tight).sum();
    if require_tight && cfg.only.is_none() && tight == 0 {
        notes.push("no instance attained its bound".to_string());
    }
    let status = if failures.is_empty() && notes.is_empty() { Status::Pass } else { Status::Fail };
    SuiteReport {
        suite: name.to_string(),
        seed: cfg.seed,
        instances: indices.len(),
        discarded,
        properties,
        failures,
        notes,
        status,
    }
}
