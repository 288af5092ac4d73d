//! Benchmark cases, the JSON Lines dataset format and a seeded generator.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::engine::ConditionScores;
use crate::error::{Error, Result};
use crate::rulebase::{ConditionId, RiskCategory, Rule, RuleSet};
use crate::tnorm::UnitScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseType {
    Clear,
    Marginal,
    Borderline,
}

impl CaseType {
    pub const ALL: [CaseType; 3] = [CaseType::Clear, CaseType::Marginal, CaseType::Borderline];

    pub fn name(self) -> &'static str {
        match self {
            CaseType::Clear => "clear",
            CaseType::Marginal => "marginal",
            CaseType::Borderline => "borderline",
        }
    }
}

impl fmt::Display for CaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub case_id: String,
    pub description: String,
    pub case_type: CaseType,
    pub expert_label: RiskCategory,
    pub scores: ConditionScores,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseRecord {
    case_id: String,
    description: String,
    case_type: CaseType,
    expert_label: RiskCategory,
    scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    cases: Vec<Case>,
    provenance: String,
}

impl Dataset {
    /// Validates id uniqueness, non-empty scores and vocabulary membership.
    pub fn new(cases: Vec<Case>, provenance: impl Into<String>, ruleset: &RuleSet) -> Result<Self> {
        if cases.is_empty() {
            return Err(Error::validation("dataset", "cases", "no cases"));
        }
        let mut ids = HashSet::new();
        for case in &cases {
            if !ids.insert(case.case_id.as_str()) {
                return Err(Error::validation(
                    &case.case_id,
                    "case_id",
                    "duplicate case_id",
                ));
            }
            if case.scores.is_empty() {
                return Err(Error::validation(
                    &case.case_id,
                    "scores",
                    "no condition scores",
                ));
            }
            if let Some(c) = case.scores.unknown_condition(ruleset) {
                return Err(Error::validation(
                    &case.case_id,
                    "scores",
                    format!("unknown condition `{c}`"),
                ));
            }
        }
        Ok(Dataset {
            cases,
            provenance: provenance.into(),
        })
    }

    /// Parses JSON Lines text; blank lines are skipped.
    pub fn from_jsonl_str(text: &str, provenance: &str, ruleset: &RuleSet) -> Result<Self> {
        let mut cases = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: CaseRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                context: format!("{provenance}:{}", lineno + 1),
                message: e.to_string(),
            })?;
            let mut scores = ConditionScores::new();
            for (name, v) in rec.scores {
                let id = ConditionId::new(name.clone()).map_err(|_| {
                    Error::validation(
                        &rec.case_id,
                        "scores",
                        format!("malformed condition identifier `{name}`"),
                    )
                })?;
                let s = UnitScore::new(v).map_err(|_| {
                    Error::validation(
                        &rec.case_id,
                        format!("scores.{name}"),
                        format!("score {v} outside [0, 1]"),
                    )
                })?;
                scores.insert(id, s);
            }
            cases.push(Case {
                case_id: rec.case_id,
                description: rec.description,
                case_type: rec.case_type,
                expert_label: rec.expert_label,
                scores,
            });
        }
        Dataset::new(cases, provenance, ruleset)
    }

    /// One compact JSON object per line, each newline-terminated.
    pub fn to_jsonl_string(&self) -> String {
        let mut out = String::new();
        for case in &self.cases {
            out.push_str(&serde_json::to_string(case).expect("case serialises"));
            out.push('\n');
        }
        out
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn count_by_type(&self, t: CaseType) -> usize {
        self.cases.iter().filter(|c| c.case_type == t).count()
    }

    pub fn count_by_label(&self, l: RiskCategory) -> usize {
        self.cases.iter().filter(|c| c.expert_label == l).count()
    }
}

/// Loads a JSON Lines dataset; condition names are checked against the
/// rule set's vocabulary.
pub fn load_dataset(path: impl AsRef<Path>, ruleset: &RuleSet) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_jsonl_str(&text, &path.display().to_string(), ruleset)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseTypeWarning {
    pub case_id: String,
    pub case_type: CaseType,
    pub message: String,
}

impl fmt::Display for CaseTypeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.case_id, self.case_type, self.message)
    }
}

/// Clear band: every score must lie outside `[0.12, 0.80]`.
pub const CLEAR_EXCLUDED: (f64, f64) = (0.12, 0.80);
/// Marginal band: at least one score inside `[0.12, 0.65]`.
pub const MARGINAL_BAND: (f64, f64) = (0.12, 0.65);

/// Advisory checks of each case against its declared type. Borderline cases
/// are expert-flagged and never warned about.
pub fn validate_case_types(dataset: &Dataset) -> Vec<CaseTypeWarning> {
    let inside = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
    let mut warnings = Vec::new();
    for case in dataset.cases() {
        match case.case_type {
            CaseType::Clear => {
                for (id, s) in case.scores.iter() {
                    if inside(s.value(), CLEAR_EXCLUDED) {
                        warnings.push(CaseTypeWarning {
                            case_id: case.case_id.clone(),
                            case_type: case.case_type,
                            message: format!(
                                "clear case has `{id}` = {} inside [0.12, 0.80]",
                                s.value()
                            ),
                        });
                    }
                }
            }
            CaseType::Marginal => {
                if !case
                    .scores
                    .iter()
                    .any(|(_, s)| inside(s.value(), MARGINAL_BAND))
                {
                    warnings.push(CaseTypeWarning {
                        case_id: case.case_id.clone(),
                        case_type: case.case_type,
                        message: "marginal case has no score inside [0.12, 0.65]".to_string(),
                    });
                }
            }
            CaseType::Borderline => {}
        }
    }
    warnings
}

/// Minimum condition score a rule needs for the reference labeler to assign
/// its category.
pub const ORACLE_MIN_SCORE: f64 = 0.55;

/// Reference labeling oracle for synthetic data: the highest-severity
/// category among rules whose weakest condition scores at least 0.55
/// (absent conditions count as 0), else minimal risk.
pub fn reference_label(scores: &ConditionScores, ruleset: &RuleSet) -> RiskCategory {
    ruleset
        .rules()
        .iter()
        .filter(|r| {
            r.conditions().iter().all(|c| {
                scores
                    .get(c.as_str())
                    .is_some_and(|s| s.value() >= ORACLE_MIN_SCORE)
            })
        })
        .map(|r| r.category())
        .max()
        .unwrap_or(RiskCategory::MinimalRisk)
}

/// Case-type weights (clear, marginal, borderline).
const TYPE_WEIGHTS: [u64; 3] = [630, 325, 80];
/// Label percentages for high, limited and prohibited; minimal takes the rest.
const LABEL_PERCENT: [(RiskCategory, u64); 3] = [
    (RiskCategory::HighRisk, 28),
    (RiskCategory::LimitedRisk, 27),
    (RiskCategory::Prohibited, 13),
];

// Score ranges in ten-thousandths, inclusive.
const CLEAR_POSITIVE: (u32, u32) = (8201, 9899);
const CLEAR_NEGATIVE: (u32, u32) = (101, 1099);
const MARGINAL_LOW: (u32, u32) = (1201, 4999);
const MARGINAL_TRAP_LOW: (u32, u32) = (5011, 5489);
const MARGINAL_REST: (u32, u32) = (7001, 9499);
const BORDERLINE_MIN: (u32, u32) = (5511, 6500);
const BORDERLINE_REST: (u32, u32) = (7501, 9499);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Archetype {
    ClearPositive,
    ClearNegative,
    Marginal,
    /// Weak condition just above 0.5: Gödel fires, the labeler does not.
    MarginalTrap,
    Borderline,
}

impl Archetype {
    fn case_type(self) -> CaseType {
        match self {
            Archetype::ClearPositive | Archetype::ClearNegative => CaseType::Clear,
            Archetype::Marginal | Archetype::MarginalTrap => CaseType::Marginal,
            Archetype::Borderline => CaseType::Borderline,
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Archetype::ClearPositive => "all conditions strongly present",
            Archetype::ClearNegative => "all conditions clearly absent",
            Archetype::Marginal => "one condition weak",
            Archetype::MarginalTrap => "one condition just above half",
            Archetype::Borderline => "one condition moderate",
        }
    }
}

fn round_div(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

/// Case-type counts (clear, marginal, borderline) for `n` cases; rounding
/// remainder goes to clear.
pub fn case_type_counts(n: usize) -> [usize; 3] {
    let total: u64 = TYPE_WEIGHTS.iter().sum();
    let marginal = round_div(n as u64 * TYPE_WEIGHTS[1], total) as usize;
    let borderline = round_div(n as u64 * TYPE_WEIGHTS[2], total) as usize;
    [n - marginal - borderline, marginal, borderline]
}

/// Target label counts for `n` cases, indexed by severity rank. Categories
/// with no rule in `ruleset` get zero; minimal risk takes the remainder.
pub fn label_counts(n: usize, ruleset: &RuleSet) -> [usize; 4] {
    let mut counts = [0usize; 4];
    for (cat, pct) in LABEL_PERCENT {
        if ruleset.rules().iter().any(|r| r.category() == cat) {
            counts[cat.rank() as usize] = round_div(n as u64 * pct, 100) as usize;
        }
    }
    counts[0] = n - counts[1..].iter().sum::<usize>();
    counts
}

fn draw(rng: &mut SplitMix64, (lo, hi): (u32, u32)) -> f64 {
    f64::from(rng.gen_range(lo..=hi)) / 10_000.0
}

fn draw_scores(rng: &mut SplitMix64, rule: &Rule, archetype: Archetype) -> ConditionScores {
    let conds = rule.conditions();
    let weak = rng.gen_range(0..conds.len());
    conds
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let range = match archetype {
                Archetype::ClearPositive => CLEAR_POSITIVE,
                Archetype::ClearNegative => CLEAR_NEGATIVE,
                Archetype::Marginal if i == weak => MARGINAL_LOW,
                Archetype::MarginalTrap if i == weak => MARGINAL_TRAP_LOW,
                Archetype::Marginal | Archetype::MarginalTrap => MARGINAL_REST,
                Archetype::Borderline if i == weak => BORDERLINE_MIN,
                Archetype::Borderline => BORDERLINE_REST,
            };
            let v = draw(rng, range);
            (c.clone(), UnitScore::new(v).expect("drawn score in range"))
        })
        .collect()
}

/// Deterministic synthetic benchmark.
///
/// Case types follow 630:325:80 and labels 32:28:27:13 (minimal, high,
/// limited, prohibited), both scaled to `n`. Each case scores the conditions
/// of one target rule; labels come from [`reference_label`]. Randomness is a
/// SplitMix64 stream seeded with `seed`.
pub fn generate_synthetic(n: usize, seed: u64, ruleset: &RuleSet) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "n must be at least 4, got {n}"
        )));
    }
    if ruleset.rules().is_empty() {
        return Err(Error::InvalidArgument("rule set has no rules".to_string()));
    }
    let [clear, marginal, borderline] = case_type_counts(n);
    let mut labels = label_counts(n, ruleset);

    // marginal cases are all minimal by construction; borrow from the
    // largest positive bucket when the minimal quota is too small
    while labels[0] < marginal {
        let (i, _) = labels[1..]
            .iter()
            .enumerate()
            .max_by_key(|&(i, c)| (*c, i))
            .expect("three buckets");
        labels[i + 1] -= 1;
        labels[0] += 1;
    }
    let positives: usize = labels[1..].iter().sum();
    if positives < borderline {
        return Err(Error::InvalidArgument(format!(
            "rule set cannot supply {borderline} positive borderline cases"
        )));
    }

    let mut rng = SplitMix64::seed_from_u64(seed);

    let mut positive_pool: Vec<RiskCategory> = RiskCategory::ASCENDING[1..]
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, labels[c.rank() as usize]))
        .collect();
    positive_pool.shuffle(&mut rng);

    let traps = round_div(marginal as u64, 100) as usize;
    let mut plan: Vec<(Archetype, RiskCategory)> = Vec::with_capacity(n);
    for (i, &cat) in positive_pool.iter().enumerate() {
        let a = if i < borderline {
            Archetype::Borderline
        } else {
            Archetype::ClearPositive
        };
        plan.push((a, cat));
    }
    for i in 0..marginal {
        let a = if i < traps {
            Archetype::MarginalTrap
        } else {
            Archetype::Marginal
        };
        plan.push((a, RiskCategory::MinimalRisk));
    }
    let negatives = clear - (positives - borderline);
    plan.extend(std::iter::repeat_n(
        (Archetype::ClearNegative, RiskCategory::MinimalRisk),
        negatives,
    ));
    debug_assert_eq!(plan.len(), n);
    plan.shuffle(&mut rng);

    let width = n.to_string().len().max(4);
    let mut cases = Vec::with_capacity(n);
    for (i, (archetype, target)) in plan.into_iter().enumerate() {
        let candidates: Vec<&Rule> = ruleset
            .rules()
            .iter()
            .filter(|r| target == RiskCategory::MinimalRisk || r.category() == target)
            .collect();
        let rule = *candidates.choose(&mut rng).expect("category has a rule");
        let scores = draw_scores(&mut rng, rule, archetype);
        let expert_label = reference_label(&scores, ruleset);
        cases.push(Case {
            case_id: format!("SYN-{:0width$}", i + 1),
            description: format!(
                "synthetic {} case for {}: {}",
                archetype.case_type(),
                rule.rule_id(),
                archetype.describe()
            ),
            case_type: archetype.case_type(),
            expert_label,
            scores,
        });
    }
    Dataset::new(cases, format!("synthetic n={n} seed={seed}"), ruleset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulebase::default_ruleset;

    fn case(id: &str, t: CaseType, pairs: &[(&str, f64)]) -> Case {
        Case {
            case_id: id.to_string(),
            description: String::new(),
            case_type: t,
            expert_label: RiskCategory::HighRisk,
            scores: ConditionScores::from_pairs(pairs.iter().copied()).unwrap(),
        }
    }

    #[test]
    fn case_type_warnings() {
        let rs = default_ruleset();
        let ds = Dataset::new(
            vec![
                case(
                    "c1",
                    CaseType::Clear,
                    &[
                        ("employment_context", 0.93),
                        ("recruitment_or_promotion", 0.88),
                        ("automated_decision", 0.95),
                    ],
                ),
                case(
                    "c2",
                    CaseType::Clear,
                    &[
                        ("employment_context", 0.93),
                        ("recruitment_or_promotion", 0.50),
                    ],
                ),
                case(
                    "m1",
                    CaseType::Marginal,
                    &[
                        ("education_context", 0.92),
                        ("determines_access", 0.58),
                        ("affects_life_path", 0.63),
                    ],
                ),
                case(
                    "m2",
                    CaseType::Marginal,
                    &[("education_context", 0.92), ("determines_access", 0.88)],
                ),
                case("b1", CaseType::Borderline, &[("education_context", 0.5)]),
            ],
            "test",
            &rs,
        )
        .unwrap();
        let w = validate_case_types(&ds);
        let ids: Vec<_> = w.iter().map(|w| w.case_id.as_str()).collect();
        assert_eq!(ids, ["c2", "m2"]);
    }

    #[test]
    fn clear_band_edges_are_inside() {
        let rs = default_ruleset();
        let ds = Dataset::new(
            vec![
                case("lo", CaseType::Clear, &[("public_space", 0.12)]),
                case("hi", CaseType::Clear, &[("public_space", 0.80)]),
                case(
                    "ok",
                    CaseType::Clear,
                    &[("public_space", 0.81), ("safety_component", 0.11)],
                ),
            ],
            "test",
            &rs,
        )
        .unwrap();
        let ids: Vec<_> = validate_case_types(&ds)
            .into_iter()
            .map(|w| w.case_id)
            .collect();
        assert_eq!(ids, ["lo", "hi"]);
    }

    #[test]
    fn rejects_duplicates_empty_and_unknown() {
        let rs = default_ruleset();
        let c = case("x", CaseType::Clear, &[("public_space", 0.9)]);
        let err = Dataset::new(vec![c.clone(), c.clone()], "t", &rs)
            .unwrap_err()
            .to_string();
        assert!(err.contains("duplicate case_id"), "{err}");
        let err = Dataset::new(vec![], "t", &rs).unwrap_err().to_string();
        assert!(err.contains("no cases"), "{err}");
        let err = Dataset::new(
            vec![case("y", CaseType::Clear, &[("unknown_cond", 0.9)])],
            "t",
            &rs,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("unknown_cond") && err.contains('y'), "{err}");
        let err = Dataset::new(vec![case("z", CaseType::Clear, &[])], "t", &rs)
            .unwrap_err()
            .to_string();
        assert!(err.contains("no condition scores"), "{err}");
    }

    #[test]
    fn jsonl_errors_name_case_and_line() {
        let rs = default_ruleset();
        let bad_score = r#"{"case_id":"A1","description":"","case_type":"clear","expert_label":"high_risk","scores":{"public_space":1.5}}"#;
        let err = Dataset::from_jsonl_str(bad_score, "f", &rs)
            .unwrap_err()
            .to_string();
        assert!(err.contains("A1") && err.contains("public_space"), "{err}");

        let bad_json = "{\"case_id\":\"A1\"}\n";
        let err = Dataset::from_jsonl_str(bad_json, "f", &rs)
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("f:1"), "{err}");

        let err = Dataset::from_jsonl_str("", "f", &rs)
            .unwrap_err()
            .to_string();
        assert!(err.contains("no cases"), "{err}");
    }

    #[test]
    fn jsonl_round_trip() {
        let rs = default_ruleset();
        let ds = generate_synthetic(50, 7, &rs).unwrap();
        let text = ds.to_jsonl_string();
        let back = Dataset::from_jsonl_str(&text, "mem", &rs).unwrap();
        assert_eq!(back.cases(), ds.cases());
        assert_eq!(back.to_jsonl_string(), text);
    }

    #[test]
    fn reference_label_uses_weakest_condition() {
        let rs = default_ruleset();
        let hrm05 = ConditionScores::from_pairs([
            ("education_context", 0.92),
            ("determines_access", 0.58),
            ("affects_life_path", 0.63),
        ])
        .unwrap();
        assert_eq!(reference_label(&hrm05, &rs), RiskCategory::HighRisk);
        let weak = ConditionScores::from_pairs([
            ("education_context", 0.92),
            ("determines_access", 0.54),
            ("affects_life_path", 0.63),
        ])
        .unwrap();
        assert_eq!(reference_label(&weak, &rs), RiskCategory::MinimalRisk);
    }

    #[test]
    fn counts_for_reference_size() {
        assert_eq!(case_type_counts(1035), [630, 325, 80]);
        // 32/28/27/13 % of 1035 = 331.2 / 289.8 / 279.45 / 134.55
        assert_eq!(label_counts(1035, &default_ruleset()), [331, 279, 290, 135]);
    }

    #[test]
    fn generator_rejects_small_n() {
        assert!(generate_synthetic(3, 1, &default_ruleset()).is_err());
        assert!(generate_synthetic(4, 1, &default_ruleset()).is_ok());
    }

    #[test]
    fn small_sizes_generate() {
        let rs = default_ruleset();
        for n in 4..60 {
            let ds = generate_synthetic(n, n as u64, &rs).unwrap();
            assert_eq!(ds.len(), n);
            let [c, m, b] = case_type_counts(n);
            assert_eq!(ds.count_by_type(CaseType::Clear), c);
            assert_eq!(ds.count_by_type(CaseType::Marginal), m);
            assert_eq!(ds.count_by_type(CaseType::Borderline), b);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let rs = default_ruleset();
        let a = generate_synthetic(300, 42, &rs).unwrap().to_jsonl_string();
        let b = generate_synthetic(300, 42, &rs).unwrap().to_jsonl_string();
        assert_eq!(a, b);
        let c = generate_synthetic(300, 43, &rs).unwrap().to_jsonl_string();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_cases_match_recipes() {
        let rs = default_ruleset();
        let ds = generate_synthetic(1035, 42, &rs).unwrap();
        let types_only_clear = Dataset::new(
            ds.cases()
                .iter()
                .filter(|c| c.case_type == CaseType::Clear)
                .cloned()
                .collect(),
            "clear",
            &rs,
        )
        .unwrap();
        assert!(validate_case_types(&types_only_clear).is_empty());
        assert!(validate_case_types(&ds).is_empty());
        for c in ds
            .cases()
            .iter()
            .filter(|c| c.case_type == CaseType::Borderline)
        {
            let min = c.scores.iter().map(|(_, s)| s.value()).fold(1.0, f64::min);
            assert!(min > 0.55 && min <= 0.65, "{}: {min}", c.case_id);
            assert_ne!(c.expert_label, RiskCategory::MinimalRisk);
        }
    }

    #[test]
    fn label_counts_frozen_for_seed_42() {
        let ds = generate_synthetic(1035, 42, &default_ruleset()).unwrap();
        let got = [
            ds.count_by_label(RiskCategory::MinimalRisk),
            ds.count_by_label(RiskCategory::HighRisk),
            ds.count_by_label(RiskCategory::LimitedRisk),
            ds.count_by_label(RiskCategory::Prohibited),
        ];
        assert_eq!(got, [331, 290, 279, 135]);
    }
}
