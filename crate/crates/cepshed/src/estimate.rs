//! Arrival-rate and match-rate estimation.
//!
//! Arrival rates come straight from sample counts. Expected match rates come
//! either empirically (count matches in a sample, divide by its span) or from
//! a closed form that assumes Poisson arrivals and any-match semantics.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::matcher::{count_matches, MatchError};
use crate::model::{Alphabet, EventSequence, MatchSemantics, Query, TypeId};

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("observation span must be positive, got {0}")]
    NonPositiveSpan(f64),
    #[error("rate for type handle {0} must be nonnegative and finite")]
    InvalidRate(TypeId),
    #[error("no rate known for type handle {0}")]
    MissingRate(TypeId),
    #[error("the closed-form match rate is only derived for any-match semantics")]
    UnsupportedSemantics,
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Per-type arrival rates (events per unit time) over an observation span.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    per_type_rate: Vec<f64>,
    observation_span: f64,
}

impl RateEstimate {
    /// Wraps externally known rates. Rates must be nonnegative and finite,
    /// the span positive.
    pub fn new(per_type_rate: Vec<f64>, observation_span: f64) -> Result<Self, EstimateError> {
        if !(observation_span > 0.0) || !observation_span.is_finite() {
            return Err(EstimateError::NonPositiveSpan(observation_span));
        }
        for (t, &r) in per_type_rate.iter().enumerate() {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(EstimateError::InvalidRate(t));
            }
        }
        Ok(RateEstimate { per_type_rate, observation_span })
    }

    pub fn rate(&self, t: TypeId) -> Option<f64> {
        self.per_type_rate.get(t).copied()
    }

    pub fn rates(&self) -> &[f64] {
        &self.per_type_rate
    }

    pub fn observation_span(&self) -> f64 {
        self.observation_span
    }
}

/// How a match-rate figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationMethod {
    Analytic,
    Empirical,
}

/// Expected matches per unit time, per query id.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRateEstimate {
    pub per_query_rate: BTreeMap<String, f64>,
    pub method: EstimationMethod,
}

/// Empirical arrival rates: instances of each type in `sample`, divided by
/// `span`. Types with no instances get rate zero.
pub fn estimate_rates(
    alphabet: &Alphabet,
    sample: &EventSequence,
    span: f64,
) -> Result<RateEstimate, EstimateError> {
    if !(span > 0.0) || !span.is_finite() {
        return Err(EstimateError::NonPositiveSpan(span));
    }
    let mut counts = vec![0u64; alphabet.len()];
    for e in sample.events() {
        if e.type_id >= counts.len() {
            return Err(MatchError::UnknownEventType(e.type_id).into());
        }
        counts[e.type_id] += 1;
    }
    RateEstimate::new(counts.into_iter().map(|c| c as f64 / span).collect(), span)
}

/// Closed-form expected any-match rate of `query` under Poisson arrivals.
///
/// With `T` the window, `l_e = rate_e * T` the expected count of type `e`
/// per window and `L` their sum, the expected matches per unit time are
///
/// ```text
/// n = (1/T) * prod_{e} (l_e)(l_e - 1)...(l_e - m_e + 1) / |Q|!
/// ```
///
/// where `m_e` is the multiplicity of `e` in the pattern. This is the
/// per-window expected count of in-order type assignments: choose the
/// pattern's events (falling factorials, exact for Poisson counts), and a
/// uniformly random interleaving puts them in pattern order with
/// probability 1/|Q|!. The result is clamped to zero when `L < |Q|`
/// (fewer expected events than pattern slots) or when any falling-factorial
/// term goes negative.
pub fn expected_matches_analytic(
    query: &Query,
    rates: &RateEstimate,
    sem: MatchSemantics,
) -> Result<f64, EstimateError> {
    if sem != MatchSemantics::AnyMatch {
        return Err(EstimateError::UnsupportedSemantics);
    }
    let t = query.window;
    let n = query.pattern.len();

    let mut mult: BTreeMap<TypeId, u32> = BTreeMap::new();
    for &e in &query.pattern {
        *mult.entry(e).or_insert(0) += 1;
    }
    let mut big_l = 0.0;
    for &e in mult.keys() {
        let r = rates.rate(e).ok_or(EstimateError::MissingRate(e))?;
        big_l += r * t;
    }
    if big_l < n as f64 {
        return Ok(0.0);
    }
    let mut prod = 1.0;
    for (&e, &m) in &mult {
        let l_e = rates.rate(e).unwrap() * t;
        for k in 0..m {
            let factor = l_e - k as f64;
            if factor < 0.0 {
                return Ok(0.0);
            }
            prod *= factor;
        }
    }
    let fact: f64 = (1..=n).map(|v| v as f64).product();
    Ok(prod / fact / t)
}

/// Empirical match rate: matches of `query` in `sample`, divided by `span`.
pub fn expected_matches_empirical(
    alphabet: &Alphabet,
    sample: &EventSequence,
    span: f64,
    query: &Query,
    sem: MatchSemantics,
) -> Result<f64, EstimateError> {
    if !(span > 0.0) || !span.is_finite() {
        return Err(EstimateError::NonPositiveSpan(span));
    }
    Ok(count_matches(alphabet, sample, query, sem)? as f64 / span)
}

/// Closed-form match rates for every query, keyed by query id.
pub fn estimate_match_rates(
    queries: &[Query],
    rates: &RateEstimate,
    sem: MatchSemantics,
) -> Result<MatchRateEstimate, EstimateError> {
    let mut per_query_rate = BTreeMap::new();
    for q in queries {
        per_query_rate.insert(q.id.clone(), expected_matches_analytic(q, rates, sem)?);
    }
    Ok(MatchRateEstimate { per_query_rate, method: EstimationMethod::Analytic })
}
