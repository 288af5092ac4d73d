//! Fuzzy-conjunction risk classification.
//!
//! Rules are conjunctions of named conditions; a case supplies a confidence in
//! `[0, 1]` for each condition, a t-norm folds those confidences into a rule
//! score, and a rule fires when its score strictly exceeds its threshold. The
//! most severe fired category wins. Every decision carries a proof trail.
//!
//! ```
//! use tnorm_risk::{classify, default_ruleset, ConditionScores, RiskCategory, TNormKind};
//!
//! let scores = ConditionScores::from_pairs([
//!     ("critical_infrastructure", 0.93),
//!     ("safety_component", 0.88),
//!     ("autonomous_decision", 0.61),
//! ])?;
//! let rules = default_ruleset();
//! assert_eq!(classify(&scores, &rules, TNormKind::Goedel, None).predicted, RiskCategory::HighRisk);
//! assert_eq!(classify(&scores, &rules, TNormKind::Product, None).predicted, RiskCategory::MinimalRisk);
//! # Ok::<(), tnorm_risk::Error>(())
//! ```

pub mod benchmark;
pub mod cli;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod rulebase;
pub mod tnorm;

pub use benchmark::{
    generate_synthetic, load_dataset, reference_label, validate_case_types, Case, CaseType,
    CaseTypeWarning, Dataset,
};
pub use engine::{
    classify, classify_mixed, classify_with, parse_case, score_rule, ClassificationOutcome,
    ConditionScores, ProofStep, RuleScore, Semantics,
};
pub use error::{Error, Result};
pub use evaluation::{
    compare_operators, evaluate, evaluate_with, mcnemar_exact, sweep_to_csv, threshold_sweep,
    threshold_sweep_with, Comparison, EvalAccumulator, EvalReport, McNemarResult, PairwiseTest,
    SweepPoint,
};
pub use rulebase::{
    compare_severity, default_ruleset, load_ruleset, ConditionId, ConjunctionStandard,
    RiskCategory, Rule, RuleSet,
};
pub use tnorm::{apply, fold_chain, fold_chain_log, LogScore, TNormKind, UnitScore};
