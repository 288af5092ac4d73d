//! Rule scoring, priority-ordered classification and proof trails.
//!
//! Every rule in the set is scored, including the ones that cannot win, so the
//! trail documents why each rule did or did not fire. Conditions absent from
//! the case are scored `0.0` and flagged as missing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rulebase::{ConditionId, RiskCategory, Rule, RuleSet};
use crate::tnorm::{ChainAccumulator, TNormKind, UnitScore};

/// Condition confidences for one case.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ConditionScores(BTreeMap<ConditionId, UnitScore>);

// Single-case input: only `scores` is required.
#[derive(Deserialize)]
struct CaseInput {
    #[serde(default)]
    case_id: Option<String>,
    scores: BTreeMap<String, f64>,
}

/// Parses a single case, `{"case_id": "...", "scores": {"cond": 0.9, ...}}`,
/// checking every condition against the rule set's vocabulary. `context`
/// names the source in diagnostics.
pub fn parse_case(
    text: &str,
    context: &str,
    ruleset: &RuleSet,
) -> Result<(Option<String>, ConditionScores)> {
    let input: CaseInput = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    let entity = input.case_id.clone().unwrap_or_else(|| context.to_string());
    let mut scores = ConditionScores::new();
    for (name, v) in input.scores {
        let id = ConditionId::new(name.clone()).map_err(|_| {
            Error::validation(
                &entity,
                "scores",
                format!("malformed condition identifier `{name}`"),
            )
        })?;
        if !ruleset.contains_condition(&name) {
            return Err(Error::validation(
                &entity,
                "scores",
                format!("unknown condition `{name}`"),
            ));
        }
        let s = UnitScore::new(v).map_err(|_| {
            Error::validation(
                &entity,
                format!("scores.{name}"),
                format!("score {v} outside [0, 1]"),
            )
        })?;
        scores.insert(id, s);
    }
    Ok((input.case_id, scores))
}

impl ConditionScores {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds scores from raw pairs, validating names and ranges.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut map = BTreeMap::new();
        for (name, v) in pairs {
            let id = ConditionId::new(name)?;
            let score = UnitScore::new(v).map_err(|_| {
                Error::validation(name, "score", format!("score {v} outside [0, 1]"))
            })?;
            map.insert(id, score);
        }
        Ok(ConditionScores(map))
    }

    pub fn insert(&mut self, id: ConditionId, score: UnitScore) {
        self.0.insert(id, score);
    }

    pub fn get(&self, id: &str) -> Option<UnitScore> {
        self.0.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ConditionId, UnitScore)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First key that is not part of the rule set's vocabulary.
    pub fn unknown_condition(&self, ruleset: &RuleSet) -> Option<&ConditionId> {
        self.0
            .keys()
            .find(|k| !ruleset.contains_condition(k.as_str()))
    }
}

impl FromIterator<(ConditionId, UnitScore)> for ConditionScores {
    fn from_iter<T: IntoIterator<Item = (ConditionId, UnitScore)>>(iter: T) -> Self {
        ConditionScores(iter.into_iter().collect())
    }
}

fn fixed6<S: Serializer>(v: &UnitScore, s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw = serde_json::value::RawValue::from_string(format!("{:.6}", v.value()))
        .map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn fixed6_opt<S: Serializer>(v: &Option<UnitScore>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => fixed6(v, s),
        None => s.serialize_none(),
    }
}

/// One condition evaluation within a rule chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofStep {
    pub step_index: usize,
    pub rule_id: String,
    pub condition_id: ConditionId,
    #[serde(serialize_with = "fixed6")]
    pub condition_score: UnitScore,
    pub operator: TNormKind,
    /// Chain value after folding in this condition.
    #[serde(serialize_with = "fixed6")]
    pub accumulated: UnitScore,
    pub missing_condition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleScore {
    pub rule_id: String,
    pub category: RiskCategory,
    pub tnorm: TNormKind,
    #[serde(serialize_with = "fixed6")]
    pub theta: UnitScore,
    #[serde(serialize_with = "fixed6")]
    pub score: UnitScore,
    pub fired: bool,
    pub steps: Vec<ProofStep>,
}

/// Operator used for a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Uniform(TNormKind),
    /// Per-rule operator taken from each rule's conjunction standard.
    Mixed,
}

impl Semantics {
    pub fn name(self) -> &'static str {
        match self {
            Semantics::Uniform(k) => k.name(),
            Semantics::Mixed => "mixed",
        }
    }
}

impl Serialize for Semantics {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationOutcome {
    pub case_id: Option<String>,
    pub tnorm: Semantics,
    /// The override if one was given, else the common rule threshold;
    /// `None` when rules carry differing thresholds.
    #[serde(rename = "theta", serialize_with = "fixed6_opt")]
    pub theta_used: Option<UnitScore>,
    pub predicted: RiskCategory,
    pub winning_rule: Option<String>,
    #[serde(rename = "rules")]
    pub rule_scores: Vec<RuleScore>,
}

impl ClassificationOutcome {
    pub fn with_case_id(mut self, case_id: impl Into<String>) -> Self {
        self.case_id = Some(case_id.into());
        self
    }

    pub fn fired(&self) -> impl Iterator<Item = &RuleScore> {
        self.rule_scores.iter().filter(|r| r.fired)
    }

    pub fn rule(&self, rule_id: &str) -> Option<&RuleScore> {
        self.rule_scores.iter().find(|r| r.rule_id == rule_id)
    }

    /// Proof-trail export: pretty JSON, newline-terminated.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("outcome serialises");
        s.push('\n');
        s
    }
}

/// Scores one rule against its own threshold.
pub fn score_rule(rule: &Rule, scores: &ConditionScores, kind: TNormKind) -> RuleScore {
    score_rule_at(rule, scores, kind, rule.theta())
}

fn score_rule_at(
    rule: &Rule,
    scores: &ConditionScores,
    kind: TNormKind,
    theta: UnitScore,
) -> RuleScore {
    let mut acc = ChainAccumulator::new(kind);
    let steps: Vec<ProofStep> = rule
        .conditions()
        .iter()
        .enumerate()
        .map(|(i, cond)| {
            let present = scores.get(cond.as_str());
            let s = present.unwrap_or(UnitScore::ZERO);
            ProofStep {
                step_index: i,
                rule_id: rule.rule_id().to_string(),
                condition_id: cond.clone(),
                condition_score: s,
                operator: kind,
                accumulated: acc.push(s),
                missing_condition: present.is_none(),
            }
        })
        .collect();
    // conditions are non-empty by RuleSet validation
    let score = steps
        .last()
        .map(|s| s.accumulated)
        .unwrap_or(UnitScore::ZERO);
    RuleScore {
        rule_id: rule.rule_id().to_string(),
        category: rule.category(),
        tnorm: kind,
        theta,
        score,
        fired: score.value() > theta.value(),
        steps,
    }
}

/// Classifies a case with a single operator for every rule.
pub fn classify(
    case_scores: &ConditionScores,
    ruleset: &RuleSet,
    kind: TNormKind,
    theta_override: Option<UnitScore>,
) -> ClassificationOutcome {
    let rule_scores = ruleset
        .rules()
        .iter()
        .map(|r| score_rule_at(r, case_scores, kind, theta_override.unwrap_or(r.theta())))
        .collect();
    assemble(
        Semantics::Uniform(kind),
        ruleset,
        theta_override,
        rule_scores,
    )
}

/// Classifies with per-rule operators: strong conjunction uses Łukasiewicz,
/// bottleneck conjunction uses Gödel. Every rule must be annotated.
pub fn classify_mixed(
    case_scores: &ConditionScores,
    ruleset: &RuleSet,
    theta_override: Option<UnitScore>,
) -> Result<ClassificationOutcome> {
    let rule_scores = ruleset
        .rules()
        .iter()
        .map(|r| {
            let standard = r.standard().ok_or_else(|| {
                Error::validation(
                    r.rule_id(),
                    "standard",
                    "mixed mode requires a conjunction standard on every rule",
                )
            })?;
            Ok(score_rule_at(
                r,
                case_scores,
                standard.tnorm(),
                theta_override.unwrap_or(r.theta()),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(
        Semantics::Mixed,
        ruleset,
        theta_override,
        rule_scores,
    ))
}

/// Dispatches to [`classify`] or [`classify_mixed`].
pub fn classify_with(
    case_scores: &ConditionScores,
    ruleset: &RuleSet,
    semantics: Semantics,
    theta_override: Option<UnitScore>,
) -> Result<ClassificationOutcome> {
    match semantics {
        Semantics::Uniform(kind) => Ok(classify(case_scores, ruleset, kind, theta_override)),
        Semantics::Mixed => classify_mixed(case_scores, ruleset, theta_override),
    }
}

fn assemble(
    tnorm: Semantics,
    ruleset: &RuleSet,
    theta_override: Option<UnitScore>,
    rule_scores: Vec<RuleScore>,
) -> ClassificationOutcome {
    // highest severity, then highest score, then smallest rule_id
    let winner = rule_scores.iter().filter(|r| r.fired).max_by(|a, b| {
        a.category
            .cmp(&b.category)
            .then(a.score.value().total_cmp(&b.score.value()))
            .then_with(|| b.rule_id.cmp(&a.rule_id))
    });
    let theta_used = theta_override.or_else(|| {
        let mut thetas = ruleset.rules().iter().map(|r| r.theta());
        let first = thetas.next()?;
        thetas.all(|t| t == first).then_some(first)
    });
    ClassificationOutcome {
        case_id: None,
        tnorm,
        theta_used,
        predicted: winner.map_or(RiskCategory::MinimalRisk, |w| w.category),
        winning_rule: winner.map(|w| w.rule_id.clone()),
        rule_scores,
    }
}
