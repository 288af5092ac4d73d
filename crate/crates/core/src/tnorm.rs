//! Triangular norms over the unit interval.
//!
//! Three canonical operators are provided: Łukasiewicz `max(0, a + b - 1)`,
//! product `a * b` and Gödel `min(a, b)`, plus a log-space evaluation of the
//! product for long chains. Chains are folded left to right so that results
//! are bit-reproducible across runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A confidence value in the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct UnitScore(f64);

impl UnitScore {
    pub const ZERO: UnitScore = UnitScore(0.0);
    pub const ONE: UnitScore = UnitScore(1.0);

    /// Rejects non-finite values and anything outside `[0, 1]`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            // normalise -0.0 so serialisation is stable
            Ok(UnitScore(value + 0.0))
        } else {
            Err(Error::ScoreOutOfRange(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    // Only for results of operations that are closed on [0, 1].
    #[inline]
    pub(crate) fn clamped(value: f64) -> Self {
        UnitScore(value.clamp(0.0, 1.0) + 0.0)
    }
}

impl TryFrom<f64> for UnitScore {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        UnitScore::new(value)
    }
}

impl From<UnitScore> for f64 {
    fn from(s: UnitScore) -> f64 {
        s.0
    }
}

impl fmt::Display for UnitScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Serialize for UnitScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for UnitScore {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        UnitScore::new(v).map_err(serde::de::Error::custom)
    }
}

/// Conjunction operator selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TNormKind {
    Lukasiewicz,
    Product,
    Goedel,
    /// Product evaluated as a sum of logarithms.
    LogProduct,
}

impl TNormKind {
    pub const ALL: [TNormKind; 4] = [
        TNormKind::Lukasiewicz,
        TNormKind::Product,
        TNormKind::Goedel,
        TNormKind::LogProduct,
    ];

    /// The three operators compared by the benchmark protocol.
    pub const CANONICAL: [TNormKind; 3] = [
        TNormKind::Lukasiewicz,
        TNormKind::Product,
        TNormKind::Goedel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TNormKind::Lukasiewicz => "lukasiewicz",
            TNormKind::Product => "product",
            TNormKind::Goedel => "goedel",
            TNormKind::LogProduct => "logproduct",
        }
    }
}

impl fmt::Display for TNormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TNormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lukasiewicz" => Ok(TNormKind::Lukasiewicz),
            "product" => Ok(TNormKind::Product),
            "goedel" => Ok(TNormKind::Goedel),
            "logproduct" => Ok(TNormKind::LogProduct),
            other => Err(Error::UnknownTNorm(other.to_string())),
        }
    }
}

impl Serialize for TNormKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TNormKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Natural logarithm of a chain result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogScore {
    /// `ln(x)` for some `x` in `(0, 1]`; always `<= 0`.
    Finite(f64),
    /// The chain contained an exact zero.
    Zero,
}

impl LogScore {
    /// Back to the linear domain. May underflow to `0.0` for very long chains.
    pub fn exp(self) -> UnitScore {
        match self {
            LogScore::Finite(l) => UnitScore::clamped(l.exp()),
            LogScore::Zero => UnitScore::ZERO,
        }
    }

    pub fn log_value(self) -> Option<f64> {
        match self {
            LogScore::Finite(l) => Some(l),
            LogScore::Zero => None,
        }
    }

    fn push(self, s: UnitScore) -> LogScore {
        match self {
            LogScore::Zero => LogScore::Zero,
            LogScore::Finite(acc) => {
                if s.value() == 0.0 {
                    LogScore::Zero
                } else {
                    LogScore::Finite((acc + s.value().ln()).min(0.0))
                }
            }
        }
    }
}

/// Binary t-norm. `LogProduct` yields the same value as `Product`.
pub fn apply(kind: TNormKind, a: UnitScore, b: UnitScore) -> UnitScore {
    let (a, b) = (a.value(), b.value());
    let v = match kind {
        TNormKind::Lukasiewicz => {
            // `hi - 1` is exact for hi >= 0.5, so the sum rounds once;
            // this keeps T(1, x) == x bit-exact.
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            ((hi - 1.0) + lo).max(0.0)
        }
        TNormKind::Product | TNormKind::LogProduct => a * b,
        TNormKind::Goedel => a.min(b),
    };
    UnitScore::clamped(v)
}

/// Left fold `T(T(..T(s1, s2).., s_{n-1}), s_n)`.
///
/// The Łukasiewicz chain is evaluated exactly and rounded once, so its
/// result is the correctly rounded value of `max(0, sum - (n - 1))`.
pub fn fold_chain(kind: TNormKind, scores: &[UnitScore]) -> Result<UnitScore> {
    if scores.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut acc = ChainAccumulator::new(kind);
    Ok(scores
        .iter()
        .map(|&s| acc.push(s))
        .last()
        .unwrap_or(UnitScore::ZERO))
}

/// Sum of natural logs of the chain. Exact zeros yield [`LogScore::Zero`];
/// strictly positive inputs never do, however long the chain.
pub fn fold_chain_log(scores: &[UnitScore]) -> Result<LogScore> {
    if scores.is_empty() {
        return Err(Error::EmptyChain);
    }
    Ok(scores
        .iter()
        .fold(LogScore::Finite(0.0), |acc, &s| acc.push(s)))
}

/// Exact floating-point summation (Shewchuk partials with a correctly
/// rounded final step).
#[derive(Debug, Clone, Default)]
pub(crate) struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        // round-half-even correction when the tail pushes past a tie
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

/// Incremental chain evaluation; yields every intermediate value of a fold.
#[derive(Debug, Clone)]
pub(crate) enum ChainAccumulator {
    /// Running exact value of `sum - (k - 1)` after k inputs.
    Lukasiewicz(Option<ExactSum>),
    Pairwise(TNormKind, Option<UnitScore>),
    /// Log-space sum plus the running minimum, which caps the rounded
    /// `exp` so the chain never exceeds its weakest input.
    Log(Option<(LogScore, UnitScore)>),
}

impl ChainAccumulator {
    pub(crate) fn new(kind: TNormKind) -> Self {
        match kind {
            TNormKind::Lukasiewicz => ChainAccumulator::Lukasiewicz(None),
            TNormKind::LogProduct => ChainAccumulator::Log(None),
            k => ChainAccumulator::Pairwise(k, None),
        }
    }

    /// Adds one score and returns the accumulated value so far.
    pub(crate) fn push(&mut self, s: UnitScore) -> UnitScore {
        match self {
            ChainAccumulator::Lukasiewicz(acc) => {
                let sum = match acc {
                    None => acc.insert(ExactSum::default()),
                    Some(sum) => {
                        sum.add(-1.0);
                        sum
                    }
                };
                sum.add(s.value());
                // once the exact value drops below zero it never recovers,
                // which is what clamping at every step would give
                UnitScore::clamped(sum.value().max(0.0))
            }
            ChainAccumulator::Pairwise(kind, acc) => {
                let next = match acc {
                    None => s,
                    Some(prev) => apply(*kind, *prev, s),
                };
                *acc = Some(next);
                next
            }
            ChainAccumulator::Log(acc) => {
                let (log, min) = acc.unwrap_or((LogScore::Finite(0.0), UnitScore::ONE));
                let min = if s < min { s } else { min };
                let log = log.push(s);
                *acc = Some((log, min));
                let v = log.exp();
                if v < min {
                    v
                } else {
                    min
                }
            }
        }
    }
}
