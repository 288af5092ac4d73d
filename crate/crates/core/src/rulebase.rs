//! Condition vocabulary, risk categories and conjunctive rules.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tnorm::{TNormKind, UnitScore};

const DEFAULT_RULES_JSON: &str = include_str!("../data/default_rules.json");

/// Vocabulary terms in the built-in rule set that are reconstructed rather
/// than taken from a published rule.
pub const RECONSTRUCTED_TERMS: &[&str] = &["subliminal_technique"];

/// Identifier of a condition: lowercase ASCII letters, digits and underscores,
/// starting with a letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConditionId(String);

impl ConditionId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let well_formed = name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
            && name
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if well_formed {
            Ok(ConditionId(name))
        } else {
            Err(Error::validation(
                name,
                "condition",
                "identifier must be lowercase ASCII letters, digits or underscores",
            ))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ConditionId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        ConditionId::new(s)
    }
}

impl From<ConditionId> for String {
    fn from(c: ConditionId) -> String {
        c.0
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for ConditionId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Risk category, ordered by severity (`MinimalRisk` lowest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskCategory {
    Prohibited,
    HighRisk,
    LimitedRisk,
    MinimalRisk,
}

impl RiskCategory {
    /// All categories in ascending severity.
    pub const ASCENDING: [RiskCategory; 4] = [
        RiskCategory::MinimalRisk,
        RiskCategory::LimitedRisk,
        RiskCategory::HighRisk,
        RiskCategory::Prohibited,
    ];

    pub fn rank(self) -> u8 {
        match self {
            RiskCategory::Prohibited => 3,
            RiskCategory::HighRisk => 2,
            RiskCategory::LimitedRisk => 1,
            RiskCategory::MinimalRisk => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RiskCategory::Prohibited => "prohibited",
            RiskCategory::HighRisk => "high_risk",
            RiskCategory::LimitedRisk => "limited_risk",
            RiskCategory::MinimalRisk => "minimal_risk",
        }
    }
}

impl PartialOrd for RiskCategory {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RiskCategory {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for RiskCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskCategory {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RiskCategory::ASCENDING
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown risk category `{s}`")))
    }
}

/// Severity ordering: `Greater` means `a` is the more severe category.
pub fn compare_severity(a: RiskCategory, b: RiskCategory) -> Ordering {
    a.rank().cmp(&b.rank())
}

/// How the conditions of a rule combine under mixed semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjunctionStandard {
    /// Conditions must be jointly and strongly confirmed.
    Strong,
    /// The weakest condition decides.
    Bottleneck,
}

impl ConjunctionStandard {
    pub fn tnorm(self) -> TNormKind {
        match self {
            ConjunctionStandard::Strong => TNormKind::Lukasiewicz,
            ConjunctionStandard::Bottleneck => TNormKind::Goedel,
        }
    }
}

/// A conjunctive rule: fires when the t-norm chain over `conditions`
/// strictly exceeds `theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rule {
    rule_id: String,
    category: RiskCategory,
    conditions: Vec<ConditionId>,
    theta: UnitScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    article: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    standard: Option<ConjunctionStandard>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    synthetic: bool,
}

impl Rule {
    pub fn new(
        rule_id: impl Into<String>,
        category: RiskCategory,
        conditions: Vec<ConditionId>,
        theta: f64,
    ) -> Result<Self> {
        let rule = Rule {
            rule_id: rule_id.into(),
            category,
            conditions,
            theta: UnitScore::clamped(theta),
            article: None,
            standard: None,
            synthetic: false,
        };
        validate_theta(&rule.rule_id, theta)?;
        rule.validate_shape()?;
        Ok(rule)
    }

    pub fn with_article(mut self, article: impl Into<String>) -> Self {
        self.article = Some(article.into());
        self
    }

    pub fn with_standard(mut self, standard: ConjunctionStandard) -> Self {
        self.standard = Some(standard);
        self
    }

    pub fn rule_id(&self) -> &str {
        &self.rule_id
    }

    pub fn category(&self) -> RiskCategory {
        self.category
    }

    pub fn conditions(&self) -> &[ConditionId] {
        &self.conditions
    }

    pub fn theta(&self) -> UnitScore {
        self.theta
    }

    pub fn article(&self) -> Option<&str> {
        self.article.as_deref()
    }

    pub fn standard(&self) -> Option<ConjunctionStandard> {
        self.standard
    }

    pub fn is_synthetic(&self) -> bool {
        self.synthetic
    }

    fn validate_shape(&self) -> Result<()> {
        if self.rule_id.is_empty() {
            return Err(Error::validation(
                "<unnamed rule>",
                "rule_id",
                "rule_id must not be empty",
            ));
        }
        if self.conditions.is_empty() {
            return Err(Error::validation(
                &self.rule_id,
                "conditions",
                "empty condition list",
            ));
        }
        let mut seen = HashSet::new();
        for c in &self.conditions {
            if !seen.insert(c) {
                return Err(Error::validation(
                    &self.rule_id,
                    "conditions",
                    format!("duplicate condition `{c}`"),
                ));
            }
        }
        validate_theta(&self.rule_id, self.theta.value())
    }
}

fn validate_theta(rule_id: &str, theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(
            rule_id,
            "theta",
            format!("theta out of range: {theta} (must lie strictly between 0 and 1)"),
        ))
    }
}

/// Validated, immutable collection of rules over a closed vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleSet {
    vocabulary: Vec<ConditionId>,
    rules: Vec<Rule>,
}

// Raw file layout; theta is read as a plain number so that out-of-range
// values produce a validation error naming the rule.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    vocabulary: Vec<String>,
    rules: Vec<RuleRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRecord {
    rule_id: String,
    category: RiskCategory,
    conditions: Vec<String>,
    theta: f64,
    #[serde(default)]
    article: Option<String>,
    #[serde(default)]
    standard: Option<ConjunctionStandard>,
    #[serde(default)]
    synthetic: bool,
}

impl RuleSet {
    pub fn new(vocabulary: Vec<ConditionId>, rules: Vec<Rule>) -> Result<Self> {
        let mut vocab = HashSet::new();
        for c in &vocabulary {
            if !vocab.insert(c.as_str()) {
                return Err(Error::validation(
                    "vocabulary",
                    c.as_str(),
                    "duplicate vocabulary term",
                ));
            }
        }
        let mut ids = HashSet::new();
        for rule in &rules {
            rule.validate_shape()?;
            if !ids.insert(rule.rule_id.as_str()) {
                return Err(Error::validation(
                    &rule.rule_id,
                    "rule_id",
                    "duplicate rule_id",
                ));
            }
            for c in &rule.conditions {
                if !vocab.contains(c.as_str()) {
                    return Err(Error::validation(
                        &rule.rule_id,
                        "conditions",
                        format!("unknown condition `{c}`"),
                    ));
                }
            }
        }
        Ok(RuleSet { vocabulary, rules })
    }

    /// Parses and validates a rule file held in memory.
    pub fn from_json_str(text: &str, context: &str) -> Result<Self> {
        let file: RuleFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })?;
        let vocabulary = file
            .vocabulary
            .into_iter()
            .map(|v| ConditionId::new(v).map_err(|_| bad_term("vocabulary", "vocabulary")))
            .collect::<Result<Vec<_>>>()?;
        let rules = file
            .rules
            .into_iter()
            .map(|r| {
                validate_theta(&r.rule_id, r.theta)?;
                let conditions = r
                    .conditions
                    .into_iter()
                    .map(|c| ConditionId::new(c.clone()).map_err(|_| bad_term(&r.rule_id, &c)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Rule {
                    rule_id: r.rule_id,
                    category: r.category,
                    conditions,
                    theta: UnitScore::new(r.theta)?,
                    article: r.article,
                    standard: r.standard,
                    synthetic: r.synthetic,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RuleSet::new(vocabulary, rules)
    }

    /// Pretty JSON in the rule-file layout, newline-terminated.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("rule set serialises");
        s.push('\n');
        s
    }

    pub fn vocabulary(&self) -> &[ConditionId] {
        &self.vocabulary
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, rule_id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.rule_id == rule_id)
    }

    pub fn contains_condition(&self, name: &str) -> bool {
        self.vocabulary.iter().any(|c| c.as_str() == name)
    }

    /// Copy of this rule set with `rule_id` annotated.
    pub fn with_standard(&self, rule_id: &str, standard: ConjunctionStandard) -> Result<Self> {
        let mut out = self.clone();
        let rule = out
            .rules
            .iter_mut()
            .find(|r| r.rule_id == rule_id)
            .ok_or_else(|| Error::InvalidArgument(format!("no rule named `{rule_id}`")))?;
        rule.standard = Some(standard);
        Ok(out)
    }

    /// Copy of this rule set with every rule annotated alike.
    pub fn with_uniform_standard(&self, standard: ConjunctionStandard) -> Self {
        let mut out = self.clone();
        for r in &mut out.rules {
            r.standard = Some(standard);
        }
        out
    }

    /// Copy with every rule's threshold replaced.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let mut out = self.clone();
        for r in &mut out.rules {
            validate_theta(&r.rule_id, theta)?;
            r.theta = UnitScore::new(theta)?;
        }
        Ok(out)
    }
}

fn bad_term(entity: &str, term: &str) -> Error {
    Error::validation(
        entity,
        "conditions",
        format!("malformed condition identifier `{term}`"),
    )
}

/// The built-in fourteen-rule set, all thresholds 0.5.
pub fn default_ruleset() -> RuleSet {
    RuleSet::from_json_str(DEFAULT_RULES_JSON, "built-in rules")
        .expect("built-in rule set is valid")
}

pub fn load_ruleset(path: impl AsRef<Path>) -> Result<RuleSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RuleSet::from_json_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cid(s: &str) -> ConditionId {
        ConditionId::new(s).unwrap()
    }

    #[test]
    fn default_ruleset_shape() {
        let rs = default_ruleset();
        assert_eq!(rs.rules().len(), 14);
        assert_eq!(rs.vocabulary().len(), 22);
        assert!(rs.rules().iter().all(|r| r.theta().value() == 0.5));
        assert_eq!(rs.rules().iter().filter(|r| r.is_synthetic()).count(), 7);
        assert!(rs.rules().iter().all(|r| r.standard().is_none()));
        for t in RECONSTRUCTED_TERMS {
            assert!(rs.contains_condition(t));
        }

        let rt = rs.rule("prohibited_rt_biometric").unwrap();
        assert_eq!(rt.category(), RiskCategory::Prohibited);
        assert_eq!(
            rt.conditions(),
            &[
                cid("real_time_processing"),
                cid("public_space"),
                cid("biometric_identification")
            ]
        );

        let edu = rs.rule("high_risk_education").unwrap();
        assert_eq!(edu.category(), RiskCategory::HighRisk);
        assert_eq!(
            edu.conditions(),
            &[
                cid("education_context"),
                cid("determines_access"),
                cid("affects_life_path")
            ]
        );
    }

    #[test]
    fn default_ruleset_serialises_to_shipped_file() {
        assert_eq!(default_ruleset().to_json_string(), DEFAULT_RULES_JSON);
    }

    #[test]
    fn no_rule_condition_set_contains_another() {
        let rs = default_ruleset();
        for a in rs.rules() {
            for b in rs.rules() {
                if a.rule_id() != b.rule_id() {
                    let subset = a.conditions().iter().all(|c| b.conditions().contains(c));
                    assert!(!subset, "{} is covered by {}", a.rule_id(), b.rule_id());
                }
            }
        }
    }

    #[test]
    fn severity_ordering() {
        use RiskCategory::*;
        assert_eq!(compare_severity(Prohibited, HighRisk), Ordering::Greater);
        assert_eq!(compare_severity(MinimalRisk, MinimalRisk), Ordering::Equal);
        assert_eq!(compare_severity(LimitedRisk, HighRisk), Ordering::Less);
    }

    #[test]
    fn severity_is_total_order() {
        let all = RiskCategory::ASCENDING;
        for &a in &all {
            for &b in &all {
                let ab = compare_severity(a, b);
                assert_eq!(ab, compare_severity(b, a).reverse());
                assert_eq!(ab == Ordering::Equal, a == b);
                for &c in &all {
                    if ab != Ordering::Greater && compare_severity(b, c) != Ordering::Greater {
                        assert_ne!(compare_severity(a, c), Ordering::Greater);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_unknown_condition() {
        let text = r#"{"vocabulary":["a_b"],"rules":[{"rule_id":"r1","category":"high_risk","conditions":["a_b","unknown_cond"],"theta":0.5}]}"#;
        let err = RuleSet::from_json_str(text, "t").unwrap_err().to_string();
        assert!(err.contains("unknown_cond"), "{err}");
        assert!(err.contains("r1"), "{err}");
    }

    #[test]
    fn rejects_theta_out_of_range() {
        for theta in ["1.2", "0.0", "1.0", "-0.3"] {
            let text = format!(
                r#"{{"vocabulary":["a"],"rules":[{{"rule_id":"r1","category":"high_risk","conditions":["a"],"theta":{theta}}}]}}"#
            );
            let err = RuleSet::from_json_str(&text, "t").unwrap_err().to_string();
            assert!(err.contains("theta out of range"), "{err}");
            assert!(err.contains("r1"), "{err}");
        }
    }

    #[test]
    fn rejects_duplicates_and_empty_conditions() {
        let dup_id = r#"{"vocabulary":["a"],"rules":[
            {"rule_id":"r1","category":"high_risk","conditions":["a"],"theta":0.5},
            {"rule_id":"r1","category":"prohibited","conditions":["a"],"theta":0.5}]}"#;
        assert!(RuleSet::from_json_str(dup_id, "t")
            .unwrap_err()
            .to_string()
            .contains("duplicate rule_id"));

        let empty = r#"{"vocabulary":["a"],"rules":[{"rule_id":"r2","category":"high_risk","conditions":[],"theta":0.5}]}"#;
        assert!(RuleSet::from_json_str(empty, "t")
            .unwrap_err()
            .to_string()
            .contains("empty condition list"));

        let dup_cond = r#"{"vocabulary":["a"],"rules":[{"rule_id":"r3","category":"high_risk","conditions":["a","a"],"theta":0.5}]}"#;
        assert!(RuleSet::from_json_str(dup_cond, "t")
            .unwrap_err()
            .to_string()
            .contains("duplicate condition"));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(
            RuleSet::from_json_str("{", "t"),
            Err(Error::Parse { .. })
        ));
        let unknown_field = r#"{"vocabulary":[],"rules":[],"extra":1}"#;
        assert!(matches!(
            RuleSet::from_json_str(unknown_field, "t"),
            Err(Error::Parse { .. })
        ));
        let bad_category = r#"{"vocabulary":["a"],"rules":[{"rule_id":"r","category":"severe","conditions":["a"],"theta":0.5}]}"#;
        assert!(matches!(
            RuleSet::from_json_str(bad_category, "t"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.json");
        let annotated = default_ruleset()
            .with_standard("high_risk_education", ConjunctionStandard::Bottleneck)
            .unwrap();
        std::fs::write(&path, annotated.to_json_string()).unwrap();
        let loaded = load_ruleset(&path).unwrap();
        assert_eq!(loaded, annotated);
        assert_eq!(loaded.to_json_string(), annotated.to_json_string());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_ruleset("/nonexistent/rules.json"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn condition_id_format() {
        assert!(ConditionId::new("public_space").is_ok());
        assert!(ConditionId::new("Public").is_err());
        assert!(ConditionId::new("").is_err());
        assert!(ConditionId::new("_x").is_err());
        assert!(ConditionId::new("a-b").is_err());
    }
}
