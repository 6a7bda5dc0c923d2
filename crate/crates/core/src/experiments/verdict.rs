//! Machine-readable experiment reports.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// {experiment, params, metrics, verdict, provenance}; maps are key-sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub params: Map<String, Value>,
    pub metrics: Map<String, Value>,
    pub verdict: Verdict,
    pub provenance: Map<String, Value>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        let mut provenance = Map::new();
        provenance.insert("crate".into(), Value::from(env!("CARGO_PKG_NAME")));
        provenance.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        Self {
            experiment: experiment.to_string(),
            params: Map::new(),
            metrics: Map::new(),
            verdict: Verdict::Inconclusive,
            provenance,
        }
    }

    pub fn param<V: Serialize>(&mut self, key: &str, v: V) -> &mut Self {
        self.params.insert(key.into(), to_value(v));
        self
    }

    pub fn metric<V: Serialize>(&mut self, key: &str, v: V) -> &mut Self {
        self.metrics.insert(key.into(), to_value(v));
        self
    }

    pub fn provenance<V: Serialize>(&mut self, key: &str, v: V) -> &mut Self {
        self.provenance.insert(key.into(), to_value(v));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Non-finite floats become strings so the report stays valid JSON.
fn to_value<V: Serialize>(v: V) -> Value {
    match serde_json::to_value(&v) {
        Ok(x) => x,
        Err(_) => Value::String("non-finite".into()),
    }
}
