//! The annotated example corpus and its expectation runner.

use std::collections::BTreeSet;

use dynledger::annotations::AnnotationSet;
use dynledger::count::CountReport;
use dynledger::pipeline::{analyze, AnalysisConfig, Audits, ExtReport};
use dynledger::{DynError, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::input::MapSpec;

const BUILTIN: &str = include_str!("../corpus/corpus.json");

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    /// Stated in the source literature.
    Paper,
    /// Immediate from the definitions.
    Trivial,
    /// Computed independently of this code.
    Derived,
}

/// One expected value, addressed by a JSON pointer into the entry's report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub path: String,
    pub value: Value,
    /// Absolute tolerance for numbers; exact when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub provenance: Provenance,
    pub source: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntryOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jet_order: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub map: MapSpec,
    #[serde(default)]
    pub annotations: AnnotationSet,
    #[serde(default)]
    pub options: EntryOptions,
    pub expected: Vec<Expectation>,
    #[serde(default)]
    pub notes: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("built-in corpus is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut c: Corpus =
            serde_json::from_str(text).map_err(|e| DynError::Input(format!("corpus: {e}")))?;
        let mut seen = BTreeSet::new();
        for e in &c.entries {
            if !seen.insert(e.name.clone()) {
                return Err(DynError::Input(format!(
                    "duplicate corpus entry `{}`",
                    e.name
                )));
            }
            e.annotations.validate()?;
        }
        c.entries.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(c)
    }

    pub fn entry(&self, name: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub path: String,
    pub expected: Value,
    pub actual: Value,
    pub ok: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<CheckResult>,
    pub counts: Option<CountReport>,
    pub audits: Option<Audits>,
    pub ext: Option<ExtReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRun {
    pub passed: bool,
    pub entries: Vec<EntryResult>,
}

fn matches(expected: &Value, actual: &Value, tol: Option<f64>) -> bool {
    match (expected.as_f64(), actual.as_f64()) {
        (Some(e), Some(a)) => (e - a).abs() <= tol.unwrap_or(0.0),
        _ => expected == actual,
    }
}

pub fn entry_config(entry: &CorpusEntry, base: &AnalysisConfig) -> AnalysisConfig {
    let mut cfg = base.clone();
    if let Some(p) = entry.options.max_period {
        cfg.cycles.max_period = p;
    }
    if let Some(b) = entry.options.budget {
        cfg.budget = b;
    }
    if let Some(j) = entry.options.jet_order {
        cfg.jet_order = j;
    }
    cfg
}

pub fn run_entry(entry: &CorpusEntry, base: &AnalysisConfig) -> EntryResult {
    let failed = |msg: String| EntryResult {
        name: entry.name.clone(),
        passed: false,
        error: Some(msg),
        checks: Vec::new(),
        counts: None,
        audits: None,
        ext: None,
    };
    let analysis = match entry
        .map
        .build()
        .and_then(|f| analyze(&f, &entry.annotations, &entry_config(entry, base)))
    {
        Ok(a) => a,
        Err(e) => return failed(e.to_string()),
    };
    let doc = match serde_json::to_value(&analysis) {
        Ok(v) => v,
        Err(e) => return failed(format!("serializing the report: {e}")),
    };
    let checks: Vec<CheckResult> = entry
        .expected
        .iter()
        .map(|x| {
            let actual = doc.pointer(&x.path).cloned().unwrap_or(Value::Null);
            CheckResult {
                path: x.path.clone(),
                ok: matches(&x.value, &actual, x.tol),
                expected: x.value.clone(),
                actual,
                provenance: x.provenance,
            }
        })
        .collect();
    EntryResult {
        name: entry.name.clone(),
        passed: checks.iter().all(|c| c.ok),
        error: None,
        checks,
        counts: analysis.counts,
        audits: Some(analysis.audits),
        ext: Some(analysis.ext),
    }
}

/// Run every entry whose name contains `filter`, in name order.
pub fn run_corpus(corpus: &Corpus, base: &AnalysisConfig, filter: Option<&str>) -> CorpusRun {
    let entries: Vec<EntryResult> = corpus
        .entries
        .iter()
        .filter(|e| filter.is_none_or(|f| e.name.contains(f)))
        .map(|e| run_entry(e, base))
        .collect();
    CorpusRun {
        passed: entries.iter().all(|e| e.passed),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_corpus_parses_and_is_sorted() {
        let c = Corpus::builtin();
        assert!(c.entries.len() >= 9);
        assert!(c.entries.windows(2).all(|w| w[0].name < w[1].name));
        for e in &c.entries {
            assert!(!e.expected.is_empty(), "{} has no expectations", e.name);
            for x in &e.expected {
                assert!(x.path.starts_with('/'), "{}: {}", e.name, x.path);
                assert!(!x.source.is_empty());
            }
        }
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let one = r#"{"name": "a", "map": {"expr": "z^2"}, "expected": []}"#;
        let text = format!(r#"{{"entries": [{one}, {one}]}}"#);
        assert!(matches!(Corpus::from_json(&text), Err(DynError::Input(_))));
    }

    #[test]
    fn provenance_is_mandatory() {
        let text = r#"{"entries": [{"name": "a", "map": {"expr": "z^2"},
            "expected": [{"path": "/degree", "value": 2, "source": "x"}]}]}"#;
        assert!(Corpus::from_json(text).is_err());
    }

    #[test]
    fn tolerances_apply_to_numbers_only() {
        assert!(matches(
            &Value::from(1.0),
            &Value::from(1.0 + 1e-9),
            Some(1e-8)
        ));
        assert!(!matches(&Value::from(1.0), &Value::from(1.0 + 1e-9), None));
        assert!(matches(&Value::from("SD"), &Value::from("SD"), Some(1.0)));
    }
}
