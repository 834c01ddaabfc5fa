//! Statistical report types persisted with every run. Every number carries
//! its sample size; the seed lineage lives at the report level.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci95: Option<(f64, f64)>,
    pub n: u64,
}

impl Estimate {
    pub fn point(value: f64, n: u64) -> Self {
        Estimate {
            value,
            std_err: None,
            ci95: None,
            n,
        }
    }

    pub fn with_se(value: f64, std_err: f64, n: u64) -> Self {
        Estimate {
            value,
            std_err: Some(std_err),
            ci95: None,
            n,
        }
    }

    pub fn with_ci(value: f64, ci95: (f64, f64), n: u64) -> Self {
        Estimate {
            value,
            std_err: None,
            ci95: Some(ci95),
            n,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub n: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatReport {
    pub experiment: String,
    pub name: String,
    pub seed: u64,
    pub estimates: BTreeMap<String, Estimate>,
    pub tests: BTreeMap<String, TestResult>,
    /// Free-form flags (booleans from structural scans and the like).
    pub flags: BTreeMap<String, bool>,
}

impl StatReport {
    pub fn new(experiment: &str, name: &str, seed: u64) -> Self {
        StatReport {
            experiment: experiment.into(),
            name: name.into(),
            seed,
            estimates: BTreeMap::new(),
            tests: BTreeMap::new(),
            flags: BTreeMap::new(),
        }
    }

    pub fn estimate(&mut self, key: &str, e: Estimate) -> &mut Self {
        self.estimates.insert(key.into(), e);
        self
    }

    pub fn test(&mut self, key: &str, t: TestResult) -> &mut Self {
        self.tests.insert(key.into(), t);
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.flags.insert(key.into(), v);
        self
    }
}
