//! Reports and their verdicts. A verdict is a pure function of the numbers
//! stored in the report, so anyone holding the JSON can recompute it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serialises floats with 17 significant digits; non-finite values become
/// the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod f17 {
    use serde::de::{self, Deserializer, Visitor};
    use serde::ser::{SerializeSeq, Serializer};
    use serde::{Deserialize, Serialize};
    use serde_json::value::RawValue;

    pub fn text(x: f64) -> String {
        if x.is_nan() {
            "\"nan\"".into()
        } else if x.is_infinite() {
            if x > 0.0 {
                "\"inf\"".into()
            } else {
                "\"-inf\"".into()
            }
        } else {
            format!("{x:.16e}")
        }
    }

    fn raw(x: f64) -> Box<RawValue> {
        RawValue::from_string(text(x)).expect("formatted float is valid JSON")
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        raw(*x).serialize(s)
    }

    struct F64Visitor;

    impl Visitor<'_> for F64Visitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::custom(format!("bad float `{v}`"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(F64Visitor)
    }

    #[derive(Deserialize)]
    struct Wrapped(#[serde(deserialize_with = "deserialize")] f64);

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for &x in v {
                seq.serialize_element(&raw(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let w: Vec<Wrapped> = Vec::deserialize(d)?;
            Ok(w.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod map {
        use super::*;
        use serde::ser::SerializeMap;
        use std::collections::BTreeMap;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            let mut out = s.serialize_map(Some(m.len()))?;
            for (k, &v) in m {
                out.serialize_entry(k, &raw(v))?;
            }
            out.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<BTreeMap<String, f64>, D::Error> {
            let w: BTreeMap<String, Wrapped> = BTreeMap::deserialize(d)?;
            Ok(w.into_iter().map(|(k, w)| (k, w.0)).collect())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Ordinary family member.
    Family,
    /// Known to stay bounded under refinement.
    Control,
    /// Known to blow up under refinement.
    Divergent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Stable,
    Diverges,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Unstable,
    DivergesAsExpected,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::DivergesAsExpected => "diverges-as-expected",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Largest accepted relative drift between consecutive levels.
    #[serde(with = "f17")]
    pub drift: f64,
    /// Minimum number of levels for a divergence signature.
    pub divergence_levels: usize,
    /// Last increment over first increment must reach this, which rules
    /// out visibly saturating sequences.
    #[serde(with = "f17")]
    pub increment_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            drift: 0.15,
            divergence_levels: 4,
            increment_ratio: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub label: String,
    pub role: Role,
    #[serde(with = "f17::map")]
    pub params: BTreeMap<String, f64>,
    #[serde(with = "f17::vec")]
    pub domain_norms: Vec<f64>,
    #[serde(with = "f17::vec")]
    pub range_norms: Vec<f64>,
    #[serde(with = "f17::vec")]
    pub ratios: Vec<f64>,
}

impl MemberRecord {
    pub fn new(label: String, role: Role, params: BTreeMap<String, f64>) -> Self {
        Self {
            label,
            role,
            params,
            domain_norms: Vec::new(),
            range_norms: Vec::new(),
            ratios: Vec::new(),
        }
    }

    /// Appends one level; zero over zero is recorded as a zero ratio.
    pub fn push(&mut self, domain: f64, range: f64) {
        let ratio = if domain == 0.0 && range == 0.0 {
            0.0
        } else {
            range / domain
        };
        self.domain_norms.push(domain);
        self.range_norms.push(range);
        self.ratios.push(ratio);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub campaign: String,
    pub domain: String,
    pub range: String,
    pub n: usize,
    /// `grid` (levels are N) or `log-depth` (levels are L, t_min = e^{-L}).
    pub level_kind: String,
    #[serde(with = "f17::vec")]
    pub levels: Vec<f64>,
    pub expect: Expectation,
    pub thresholds: Thresholds,
    pub members: Vec<MemberRecord>,
    /// Largest ratio per level over the members defining the constant.
    #[serde(with = "f17::vec")]
    pub constants: Vec<f64>,
    /// `|C_{k+1} - C_k| / C_k`.
    #[serde(with = "f17::vec")]
    pub drift: Vec<f64>,
    /// Side quantities such as identity residuals.
    #[serde(with = "f17::map")]
    pub notes: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub reason: String,
}

/// `|b - a| / a` for consecutive entries; infinite once anything is.
pub fn drift(c: &[f64]) -> Vec<f64> {
    c.windows(2)
        .map(|w| {
            if !(w[0].is_finite() && w[1].is_finite()) {
                f64::INFINITY
            } else if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (w[1] - w[0]).abs() / w[0]
            }
        })
        .collect()
}

/// Strictly increasing finite sequence over at least
/// `divergence_levels` entries whose last increment is at least
/// `increment_ratio` times the first.
pub fn divergence_signature(r: &[f64], th: &Thresholds) -> bool {
    if r.len() < th.divergence_levels.max(2) || r.iter().any(|x| !x.is_finite()) {
        return false;
    }
    if !r.windows(2).all(|w| w[1] > w[0]) {
        return false;
    }
    let first = r[1] - r[0];
    let last = r[r.len() - 1] - r[r.len() - 2];
    last >= th.increment_ratio * first
}

fn stable_sequence(r: &[f64], th: &Thresholds) -> bool {
    drift(r).iter().all(|&d| d < th.drift)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

impl Report {
    /// Builds a report and computes its verdict. Rejects reports without a
    /// control member, and divergence reports without a divergent member.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        campaign: String,
        domain: String,
        range: String,
        n: usize,
        level_kind: &str,
        levels: Vec<f64>,
        expect: Expectation,
        thresholds: Thresholds,
        members: Vec<MemberRecord>,
        notes: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::param("grids", "at least two levels are needed"));
        }
        if !members.iter().any(|m| m.role == Role::Control) {
            return Err(Error::Precondition(format!(
                "campaign `{campaign}` has no control member"
            )));
        }
        if expect == Expectation::Diverges && !members.iter().any(|m| m.role == Role::Divergent) {
            return Err(Error::Precondition(format!(
                "campaign `{campaign}` expects divergence but has no divergent member"
            )));
        }
        if let Some(m) = members.iter().find(|m| m.ratios.len() != levels.len()) {
            return Err(Error::GridMismatch(format!(
                "member `{}` has {} ratios for {} levels",
                m.label,
                m.ratios.len(),
                levels.len()
            )));
        }
        let mut r = Self {
            campaign,
            domain,
            range,
            n,
            level_kind: level_kind.into(),
            levels,
            expect,
            thresholds,
            members,
            constants: Vec::new(),
            drift: Vec::new(),
            notes,
            verdict: Verdict::Unstable,
            reason: String::new(),
        };
        r.constants = r.compute_constants();
        r.drift = drift(&r.constants);
        (r.verdict, r.reason) = r.compute_verdict();
        Ok(r)
    }

    /// Per-level maximum over all members for stability reports, over the
    /// divergent members for divergence reports.
    pub fn compute_constants(&self) -> Vec<f64> {
        let defining = |m: &&MemberRecord| match self.expect {
            Expectation::Stable => true,
            Expectation::Diverges => m.role == Role::Divergent,
        };
        (0..self.levels.len())
            .map(|k| {
                self.members
                    .iter()
                    .filter(defining)
                    .map(|m| m.ratios[k])
                    .fold(0.0, nan_max)
            })
            .collect()
    }

    /// Verdict from the recorded numbers alone.
    pub fn compute_verdict(&self) -> (Verdict, String) {
        let th = &self.thresholds;
        for m in self.members.iter().filter(|m| m.role != Role::Divergent) {
            if let Some(k) = m.ratios.iter().position(|x| !x.is_finite()) {
                return (
                    Verdict::Unstable,
                    format!("member `{}` has a non-finite ratio at level {k}", m.label),
                );
            }
        }
        for m in self.members.iter().filter(|m| m.role == Role::Control) {
            if !stable_sequence(&m.ratios, th) {
                return (
                    Verdict::Unstable,
                    format!("control `{}` drifts by {} or more", m.label, th.drift),
                );
            }
        }
        match self.expect {
            Expectation::Stable => {
                let d = drift(&self.compute_constants());
                match d.iter().position(|&x| !(x < th.drift)) {
                    Some(k) => (
                        Verdict::Unstable,
                        format!("constant drifts by {} between levels {k} and {}", d[k], k + 1),
                    ),
                    None => (Verdict::Stable, "all drifts below threshold".into()),
                }
            }
            Expectation::Diverges => {
                for m in self.members.iter().filter(|m| m.role == Role::Divergent) {
                    if !divergence_signature(&m.ratios, th) {
                        let v = if stable_sequence(&m.ratios, th) {
                            Verdict::Stable
                        } else {
                            Verdict::Unstable
                        };
                        return (v, format!("member `{}` shows no divergence signature", m.label));
                    }
                    if !stable_sequence(&m.domain_norms, th) {
                        return (
                            Verdict::Unstable,
                            format!("domain norm of `{}` is not bounded under refinement", m.label),
                        );
                    }
                }
                (
                    Verdict::DivergesAsExpected,
                    "every divergent member grows monotonically with bounded domain norm".into(),
                )
            }
        }
    }

    /// Whether the verdict matches the expectation.
    pub fn passed(&self) -> bool {
        matches!(
            (self.expect, self.verdict),
            (Expectation::Stable, Verdict::Stable)
                | (Expectation::Diverges, Verdict::DivergesAsExpected)
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse("report", e.to_string()))
    }
}
