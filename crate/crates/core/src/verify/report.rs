//! Trial records and campaign reports (machine and table forms).

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lp::Relation;
use crate::model::Instance;
use crate::scalar::serde_rational;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// `Z_on ≥ Z_off/(K+1)` for matrix systems.
    K,
    /// `Z_on ≥ Z_off/2` for static and on-line polymatroids.
    Polymatroid,
    /// `Z_on ≥ Z_off/n` for correlated rewards via the constant policy.
    Correlated,
    /// Additivity and the min-factor bound for Minkowski sums.
    Minkowski,
    /// The four proof-lab LPs for on-line polymatroids.
    Lemmas234,
    /// Agreement of the sequential and direct implementability checks.
    Lemma1,
}

impl Law {
    pub const ALL: [Law; 6] = [
        Law::K,
        Law::Polymatroid,
        Law::Correlated,
        Law::Minkowski,
        Law::Lemmas234,
        Law::Lemma1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::K => "k",
            Law::Polymatroid => "polymatroid",
            Law::Correlated => "correlated",
            Law::Minkowski => "minkowski",
            Law::Lemmas234 => "lemmas234",
            Law::Lemma1 => "lemma1",
        }
    }

    pub(crate) fn stream(self) -> u64 {
        Law::ALL.iter().position(|l| *l == self).expect("listed") as u64 + 1
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Law::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown law {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        }
    }
}

/// `lhs (relation) rhs`, both sides exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inequality {
    pub label: String,
    #[serde(with = "serde_rational")]
    pub lhs: Rational,
    pub relation: Relation,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
}

impl Inequality {
    pub fn new(label: impl Into<String>, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        Inequality {
            label: label.into(),
            lhs,
            relation,
            rhs,
        }
    }

    /// A boolean fact encoded as `[fact] = 1`.
    pub fn holds_flag(label: impl Into<String>, fact: bool) -> Self {
        let one = Rational::from_integer(1.into());
        let lhs = if fact { one.clone() } else { Rational::from_integer(0.into()) };
        Inequality::new(label, lhs, Relation::Eq, one)
    }

    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Le => self.lhs <= self.rhs,
            Relation::Eq => self.lhs == self.rhs,
            Relation::Ge => self.lhs >= self.rhs,
        }
    }
}

impl std::fmt::Display for Inequality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} {} {}", self.label, self.lhs, self.relation, self.rhs)
    }
}

/// Everything needed to recompute a trial from scratch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSpec {
    pub law: Law,
    /// Interim scale `λ` (lemma1).
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Rational>,
    /// Committed coordinates `i` (lemmas234).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    /// Support index of the candidate reward `r̂_{i+1}` (lemmas234).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<usize>,
    /// Replaces the certified factor in the ratio check.
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    pub factor: Option<Rational>,
}

impl TrialSpec {
    pub fn new(law: Law) -> Self {
        TrialSpec {
            law,
            lambda: None,
            stage: None,
            candidate: None,
            factor: None,
        }
    }
}

/// Reproducer shipped with every FAIL: the instance document, the trial
/// parameters and the first violated inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counterexample {
    pub instance: serde_json::Value,
    pub spec: TrialSpec,
    pub violated: Inequality,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub law: Law,
    pub index: usize,
    pub seed: u64,
    pub digest: String,
    pub n: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    pub z_off: Option<Rational>,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    pub z_on: Option<Rational>,
    #[serde(with = "serde_rational")]
    pub factor: Rational,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    pub margin: Option<Rational>,
    /// Verdict of the scaled-interim implementability test, when one ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implementable: Option<bool>,
    pub verdict: Verdict,
    pub checks: Vec<Inequality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub law: Law,
    pub seed: u64,
    pub params: serde_json::Value,
    pub trials: Vec<TrialRecord>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl VerificationReport {
    pub fn new(law: Law, seed: u64, params: serde_json::Value, trials: Vec<TrialRecord>) -> Self {
        let count = |v: Verdict| trials.iter().filter(|t| t.verdict == v).count();
        VerificationReport {
            law,
            seed,
            params,
            passed: count(Verdict::Pass),
            failed: count(Verdict::Fail),
            skipped: count(Verdict::Skip),
            trials,
        }
    }

    /// Aggregates agree with the records.
    pub fn is_consistent(&self) -> bool {
        let count = |v: Verdict| self.trials.iter().filter(|t| t.verdict == v).count();
        self.passed == count(Verdict::Pass)
            && self.failed == count(Verdict::Fail)
            && self.skipped == count(Verdict::Skip)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One row per trial in a fixed column order.
    pub fn to_table(&self) -> String {
        let mut out = String::from("law\tseed\tn\tkind\tK\tZ_off\tZ_on\tfactor\tmargin\tverdict\n");
        let opt = |v: &Option<Rational>| v.as_ref().map_or_else(|| "-".to_string(), ToString::to_string);
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.law.name(),
                t.seed,
                t.n,
                t.kind,
                t.k.map_or_else(|| "-".to_string(), |k| k.to_string()),
                opt(&t.z_off),
                opt(&t.z_on),
                t.factor,
                opt(&t.margin),
                t.verdict.label()
            );
        }
        let _ = writeln!(
            out,
            "# {} trials: {} pass, {} fail, {} skip",
            self.trials.len(),
            self.passed,
            self.failed,
            self.skipped
        );
        out
    }
}

/// Short content hash of an instance document.
pub fn digest(instance: &Instance) -> String {
    let doc = serde_json::to_string(&crate::format::InstanceFile::from_instance(instance))
        .expect("instance documents serialize");
    let hash = Sha256::digest(doc.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
