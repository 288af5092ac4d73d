//! Accuracy, directional error rates, McNemar's exact test, operator
//! comparison and threshold sweeps.
//!
//! Errors are split by severity direction: a false positive predicts a more
//! severe category than the expert label, a false negative a less severe one.
//! Since categories are totally ordered, every misclassification is exactly
//! one of the two.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::benchmark::{CaseType, Dataset};
use crate::engine::{classify_with, Semantics};
use crate::error::{Error, Result};
use crate::rulebase::{RiskCategory, RuleSet};
use crate::tnorm::{TNormKind, UnitScore};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub tnorm: Semantics,
    pub theta: Option<f64>,
    pub n: usize,
    pub accuracy_overall: f64,
    /// Only case types present in the dataset appear.
    pub accuracy_by_type: BTreeMap<CaseType, f64>,
    pub fp_count: usize,
    pub fn_count: usize,
    pub fp_rate: f64,
    pub fn_rate: f64,
    /// Row and column order of `confusion`, ascending severity.
    pub categories: [RiskCategory; 4],
    /// `confusion[expert][predicted]`.
    pub confusion: [[usize; 4]; 4],
}

/// Incremental builder for [`EvalReport`].
#[derive(Debug, Clone, Default)]
pub struct EvalAccumulator {
    confusion: [[usize; 4]; 4],
    by_type: BTreeMap<CaseType, (usize, usize)>,
}

impl EvalAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, expert: RiskCategory, predicted: RiskCategory, case_type: CaseType) {
        self.confusion[expert.rank() as usize][predicted.rank() as usize] += 1;
        let entry = self.by_type.entry(case_type).or_default();
        entry.1 += 1;
        if expert == predicted {
            entry.0 += 1;
        }
    }

    pub fn finish(self, tnorm: Semantics, theta: Option<f64>) -> Result<EvalReport> {
        let n: usize = self.confusion.iter().flatten().sum();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "cannot evaluate an empty dataset".to_string(),
            ));
        }
        let mut correct = 0;
        let mut fp_count = 0;
        let mut fn_count = 0;
        for (e, row) in self.confusion.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                match p.cmp(&e) {
                    std::cmp::Ordering::Equal => correct += count,
                    std::cmp::Ordering::Greater => fp_count += count,
                    std::cmp::Ordering::Less => fn_count += count,
                }
            }
        }
        let nf = n as f64;
        Ok(EvalReport {
            tnorm,
            theta,
            n,
            accuracy_overall: correct as f64 / nf,
            accuracy_by_type: self
                .by_type
                .into_iter()
                .map(|(t, (ok, total))| (t, ok as f64 / total as f64))
                .collect(),
            fp_count,
            fn_count,
            fp_rate: fp_count as f64 / nf,
            fn_rate: fn_count as f64 / nf,
            categories: RiskCategory::ASCENDING,
            confusion: self.confusion,
        })
    }
}

impl EvalReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn accuracy_for(&self, t: CaseType) -> Option<f64> {
        self.accuracy_by_type.get(&t).copied()
    }
}

/// Predicted category for every case, in dataset order.
pub fn predict(
    dataset: &Dataset,
    ruleset: &RuleSet,
    semantics: Semantics,
    theta_override: Option<UnitScore>,
) -> Result<Vec<RiskCategory>> {
    dataset
        .cases()
        .iter()
        .map(|c| classify_with(&c.scores, ruleset, semantics, theta_override).map(|o| o.predicted))
        .collect()
}

fn report_from_predictions(
    dataset: &Dataset,
    predictions: &[RiskCategory],
    semantics: Semantics,
    theta_override: Option<UnitScore>,
) -> Result<EvalReport> {
    let mut acc = EvalAccumulator::new();
    for (case, &p) in dataset.cases().iter().zip(predictions) {
        acc.record(case.expert_label, p, case.case_type);
    }
    acc.finish(semantics, theta_override.map(UnitScore::value))
}

pub fn evaluate(
    dataset: &Dataset,
    ruleset: &RuleSet,
    kind: TNormKind,
    theta_override: Option<UnitScore>,
) -> Result<EvalReport> {
    evaluate_with(dataset, ruleset, Semantics::Uniform(kind), theta_override)
}

pub fn evaluate_with(
    dataset: &Dataset,
    ruleset: &RuleSet,
    semantics: Semantics,
    theta_override: Option<UnitScore>,
) -> Result<EvalReport> {
    let predictions = predict(dataset, ruleset, semantics, theta_override)?;
    report_from_predictions(dataset, &predictions, semantics, theta_override)
}

/// Exact McNemar test on discordant pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McNemarResult {
    /// A correct, B wrong.
    pub b: usize,
    /// A wrong, B correct.
    pub c: usize,
    pub n_discordant: usize,
    /// Lower binomial tail `P(X <= min(b, c))`, `X ~ Bin(b + c, 1/2)`.
    pub p_one_sided: f64,
    /// `min(1, 2 * p_one_sided)`.
    pub p_two_sided: f64,
}

impl McNemarResult {
    pub fn from_counts(b: usize, c: usize) -> Self {
        let n = b + c;
        let p_one_sided = if n == 0 {
            1.0
        } else {
            binomial_half_lower_tail(n, b.min(c))
        };
        McNemarResult {
            b,
            c,
            n_discordant: n,
            p_one_sided,
            p_two_sided: (2.0 * p_one_sided).min(1.0),
        }
    }
}

/// `sum_{k=0}^{k_max} C(n, k) / 2^n`, with terms built in log space so large
/// `n` neither overflows the binomial coefficient nor underflows `2^-n`
/// prematurely.
fn binomial_half_lower_tail(n: usize, k_max: usize) -> f64 {
    let mut log_term = -(n as f64) * std::f64::consts::LN_2;
    let mut sum = log_term.exp();
    for k in 0..k_max.min(n) {
        log_term += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        sum += log_term.exp();
    }
    sum.min(1.0)
}

pub fn mcnemar_exact(
    pred_a: &[RiskCategory],
    pred_b: &[RiskCategory],
    expert: &[RiskCategory],
) -> Result<McNemarResult> {
    if pred_a.len() != pred_b.len() || pred_a.len() != expert.len() {
        return Err(Error::InvalidArgument(format!(
            "prediction lengths differ: {} / {} / {} expert labels",
            pred_a.len(),
            pred_b.len(),
            expert.len()
        )));
    }
    if expert.is_empty() {
        return Err(Error::InvalidArgument(
            "McNemar test needs at least one case".to_string(),
        ));
    }
    let (mut b, mut c) = (0, 0);
    for ((a, bb), e) in pred_a.iter().zip(pred_b).zip(expert) {
        match (a == e, bb == e) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(McNemarResult::from_counts(b, c))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseTest {
    pub a: TNormKind,
    pub b_kind: TNormKind,
    pub b: usize,
    pub c: usize,
    pub p_one_sided: f64,
    pub p_two_sided: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub reports: Vec<EvalReport>,
    pub pairs: Vec<PairwiseTest>,
}

impl Comparison {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("comparison serialises");
        s.push('\n');
        s
    }

    pub fn pair(&self, a: TNormKind, b: TNormKind) -> Option<&PairwiseTest> {
        self.pairs.iter().find(|p| p.a == a && p.b_kind == b)
    }

    pub fn report(&self, kind: TNormKind) -> Option<&EvalReport> {
        self.reports
            .iter()
            .find(|r| r.tnorm == Semantics::Uniform(kind))
    }
}

/// Runs each operator once under identical rules and threshold, then tests
/// every pair `(kinds[i], kinds[j])` with `i < j`.
pub fn compare_operators(
    dataset: &Dataset,
    ruleset: &RuleSet,
    kinds: &[TNormKind],
    theta_override: Option<UnitScore>,
) -> Result<Comparison> {
    if kinds.len() < 2 {
        return Err(Error::InvalidArgument(
            "comparison needs at least two t-norms".to_string(),
        ));
    }
    let expert: Vec<RiskCategory> = dataset.cases().iter().map(|c| c.expert_label).collect();
    let mut predictions = Vec::with_capacity(kinds.len());
    let mut reports = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let p = predict(dataset, ruleset, Semantics::Uniform(kind), theta_override)?;
        reports.push(report_from_predictions(
            dataset,
            &p,
            Semantics::Uniform(kind),
            theta_override,
        )?);
        predictions.push(p);
    }
    let mut pairs = Vec::new();
    for i in 0..kinds.len() {
        for j in i + 1..kinds.len() {
            let m = mcnemar_exact(&predictions[i], &predictions[j], &expert)?;
            pairs.push(PairwiseTest {
                a: kinds[i],
                b_kind: kinds[j],
                b: m.b,
                c: m.c,
                p_one_sided: m.p_one_sided,
                p_two_sided: m.p_two_sided,
            });
        }
    }
    Ok(Comparison { reports, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub reports: Vec<EvalReport>,
}

/// Inclusive progression `theta_min + i * step`, never past `theta_max`.
/// A relative guard of 1e-9 steps keeps the endpoint when the span is an
/// exact multiple of `step`; values are snapped to 12 decimals.
pub fn sweep_thetas(theta_min: f64, theta_max: f64, step: f64) -> Result<Vec<f64>> {
    let valid = theta_min.is_finite()
        && theta_max.is_finite()
        && step.is_finite()
        && theta_min > 0.0
        && theta_min <= theta_max
        && theta_max < 1.0
        && step > 0.0;
    if !valid {
        return Err(Error::InvalidArgument(format!(
            "invalid sweep range: need 0 < theta_min <= theta_max < 1 and step > 0, got {theta_min}..{theta_max} step {step}"
        )));
    }
    let count = ((theta_max - theta_min) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| {
            let t = theta_min + i as f64 * step;
            ((t * 1e12).round() / 1e12).min(theta_max)
        })
        .collect())
}

pub fn threshold_sweep(
    dataset: &Dataset,
    ruleset: &RuleSet,
    kind: TNormKind,
    theta_min: f64,
    theta_max: f64,
    step: f64,
) -> Result<Vec<SweepPoint>> {
    threshold_sweep_with(
        dataset,
        ruleset,
        &[Semantics::Uniform(kind)],
        theta_min,
        theta_max,
        step,
    )
}

pub fn threshold_sweep_with(
    dataset: &Dataset,
    ruleset: &RuleSet,
    semantics: &[Semantics],
    theta_min: f64,
    theta_max: f64,
    step: f64,
) -> Result<Vec<SweepPoint>> {
    sweep_thetas(theta_min, theta_max, step)?
        .into_iter()
        .map(|theta| {
            let t = UnitScore::new(theta)?;
            let reports = semantics
                .iter()
                .map(|&s| evaluate_with(dataset, ruleset, s, Some(t)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepPoint { theta, reports })
        })
        .collect()
}

/// CSV with header `theta,kind,accuracy,fp_rate,fn_rate`, one row per
/// (theta, operator).
pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "kind", "accuracy", "fp_rate", "fn_rate"])
        .expect("in-memory write");
    for p in points {
        for r in &p.reports {
            w.write_record([
                format!("{:.6}", p.theta),
                r.tnorm.name().to_string(),
                format!("{:.6}", r.accuracy_overall),
                format!("{:.6}", r.fp_rate),
                format!("{:.6}", r.fn_rate),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
