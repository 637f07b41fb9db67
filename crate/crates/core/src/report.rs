//! Check reports and their JSON form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

/// Theorem identifiers, declared in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    VariationIdentity,
    BanachZarecki,
    FundamentalLemma,
    ImageBound,
    Sard,
    AcModulus,
    Constancy,
    InjectiveIdentity,
    VfImage,
    Composition,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::VariationIdentity,
        TheoremId::BanachZarecki,
        TheoremId::FundamentalLemma,
        TheoremId::ImageBound,
        TheoremId::Sard,
        TheoremId::AcModulus,
        TheoremId::Constancy,
        TheoremId::InjectiveIdentity,
        TheoremId::VfImage,
        TheoremId::Composition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::VariationIdentity => "variation_identity",
            TheoremId::BanachZarecki => "banach_zarecki",
            TheoremId::FundamentalLemma => "fundamental_lemma",
            TheoremId::ImageBound => "image_bound",
            TheoremId::Sard => "sard",
            TheoremId::AcModulus => "ac_modulus",
            TheoremId::Constancy => "constancy",
            TheoremId::InjectiveIdentity => "injective_identity",
            TheoremId::VfImage => "vf_image",
            TheoremId::Composition => "composition",
        }
    }

    /// Parses a comma-separated list or `all`; sorted and deduplicated.
    pub fn parse_list(s: &str) -> Result<Vec<TheoremId>> {
        if s.trim() == "all" {
            return Ok(TheoremId::ALL.to_vec());
        }
        let mut ids = s
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<Vec<TheoremId>>>()?;
        ids.sort();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::InvalidParameter("empty check list".into()));
        }
        Ok(ids)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem id `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// JSON value for a real, with non-finite values as strings.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("+inf".into())
    } else {
        Value::String("-inf".into())
    }
}

fn ser_real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    real(*x).serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub theorem_id: TheoremId,
    pub verdict: Verdict,
    #[serde(serialize_with = "ser_real")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_real")]
    pub rhs: f64,
    #[serde(serialize_with = "ser_real")]
    pub slack: f64,
    pub params: BTreeMap<String, Value>,
    pub notes: String,
}

impl CheckReport {
    pub fn new(theorem_id: TheoremId, verdict: Verdict, lhs: f64, rhs: f64) -> Self {
        let slack = if lhs == rhs { 0.0 } else { rhs - lhs };
        CheckReport {
            theorem_id,
            verdict,
            lhs,
            rhs,
            slack,
            params: BTreeMap::new(),
            notes: String::new(),
        }
    }

    /// An inconclusive report with no measured sides.
    pub fn skipped(theorem_id: TheoremId, why: &str) -> Self {
        CheckReport::new(theorem_id, Verdict::Inconclusive, f64::NAN, f64::NAN).note(why)
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn real_param(self, key: &str, value: f64) -> Self {
        self.param(key, real(value))
    }

    /// Appends a sentence to the notes.
    pub fn note(mut self, text: &str) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text);
        self
    }
}

/// Pretty JSON array of reports, ordered by theorem id.
pub fn to_json(reports: &[CheckReport]) -> String {
    let mut sorted: Vec<&CheckReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.theorem_id);
    serde_json::to_string_pretty(&sorted).expect("reports always serialize")
}
