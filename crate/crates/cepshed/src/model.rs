//! Core data model: event types, timestamped event sequences, pattern
//! queries, and the subsequence relations behind the match semantics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense handle into an [`Alphabet`].
pub type TypeId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("event type `{0}` already declared")]
    DuplicateTypeName(String),
    #[error("event type `{0}`: arrival rate must be positive, got {1}")]
    NonPositiveRate(String, f64),
    #[error("event type `{0}`: memory cost must be positive, got {1}")]
    NonPositiveMemoryCost(String, f64),
    #[error("timestamp at position {0} is not finite")]
    NonFiniteTimestamp(usize),
    #[error("duplicate timestamp {1} at position {0}")]
    DuplicateTimestamp(usize, f64),
    #[error("timestamps decrease at position {0}")]
    NonMonotoneTimestamps(usize),
    #[error("index {index} out of bounds for sequence of length {len}")]
    IndexOutOfBounds { index: usize, len: usize },
    #[error("subsequence indices must be strictly increasing (position {0})")]
    NonIncreasingIndices(usize),
    #[error("query `{0}`: pattern must be non-empty")]
    EmptyPattern(String),
    #[error("query `{0}`: window must be positive, got {1}")]
    NonPositiveWindow(String, f64),
    #[error("query `{0}`: utility weight must be positive, got {1}")]
    NonPositiveWeight(String, f64),
    #[error("query `{0}`: CPU cost per match must be positive, got {1}")]
    NonPositiveCpuCost(String, f64),
    #[error("query `{0}`: expected match rate must be nonnegative, got {1}")]
    NegativeMatchRate(String, f64),
}

/// One member of the alphabet: a named event class with its arrival rate
/// (instances per unit time) and the memory cost of storing one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EventType {
    pub name: String,
    pub arrival_rate: f64,
    pub memory_cost: f64,
}

/// The event-type registry. Types get dense integer handles in insertion
/// order; all cross-module references go through those handles.
#[derive(Debug, Clone, Default)]
pub struct Alphabet {
    types: Vec<EventType>,
}

impl Alphabet {
    pub fn new() -> Self {
        Alphabet { types: Vec::new() }
    }

    /// Registers a type. Rates and memory costs must be positive and the
    /// name unique.
    pub fn add(&mut self, name: &str, arrival_rate: f64, memory_cost: f64) -> Result<TypeId, ModelError> {
        if self.types.iter().any(|t| t.name == name) {
            return Err(ModelError::DuplicateTypeName(name.to_string()));
        }
        if !(arrival_rate > 0.0) || !arrival_rate.is_finite() {
            return Err(ModelError::NonPositiveRate(name.to_string(), arrival_rate));
        }
        if !(memory_cost > 0.0) || !memory_cost.is_finite() {
            return Err(ModelError::NonPositiveMemoryCost(name.to_string(), memory_cost));
        }
        self.types.push(EventType {
            name: name.to_string(),
            arrival_rate,
            memory_cost,
        });
        Ok(self.types.len() - 1)
    }

    pub fn id(&self, name: &str) -> Option<TypeId> {
        self.types.iter().position(|t| t.name == name)
    }

    pub fn get(&self, id: TypeId) -> Option<&EventType> {
        self.types.get(id)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TypeId, &EventType)> {
        self.types.iter().enumerate()
    }

    /// Rate-weighted memory cost `arrival_rate * memory_cost` of a type,
    /// the unit in which memory budgets are expressed.
    pub fn memory_rate(&self, id: TypeId) -> f64 {
        let t = &self.types[id];
        t.arrival_rate * t.memory_cost
    }
}

/// A single timestamped occurrence of an event type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventInstance {
    pub type_id: TypeId,
    pub timestamp: f64,
}

impl EventInstance {
    pub fn new(type_id: TypeId, timestamp: f64) -> Self {
        EventInstance { type_id, timestamp }
    }
}

/// An event sequence with strictly increasing timestamps. Construction via
/// [`EventSequence::validate`] is the only way to get one, so every held
/// sequence is known ordered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventSequence {
    events: Vec<EventInstance>,
}

impl EventSequence {
    /// Accepts the events iff their timestamps are finite and strictly
    /// increasing. Sorted input passes through unchanged; out-of-order or
    /// tied timestamps are rejected, not repaired.
    pub fn validate(events: Vec<EventInstance>) -> Result<Self, ModelError> {
        for (i, e) in events.iter().enumerate() {
            if !e.timestamp.is_finite() {
                return Err(ModelError::NonFiniteTimestamp(i));
            }
            if i > 0 {
                let prev = events[i - 1].timestamp;
                if e.timestamp == prev {
                    return Err(ModelError::DuplicateTimestamp(i, e.timestamp));
                }
                if e.timestamp < prev {
                    return Err(ModelError::NonMonotoneTimestamps(i));
                }
            }
        }
        Ok(EventSequence { events })
    }

    pub fn events(&self) -> &[EventInstance] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// How a candidate subsequence relates to the surrounding sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubseqRelation {
    /// Picked positions are consecutive.
    pub contiguous: bool,
    /// Between consecutive picks there is no skipped event whose type equals
    /// the next picked event's type.
    pub type_contiguous: bool,
}

/// Reports whether the subsequence at `indices` is contiguous and/or
/// type-contiguous. Single-element (and empty) index sets are both, vacuously.
pub fn subsequence_relation(seq: &EventSequence, indices: &[usize]) -> Result<SubseqRelation, ModelError> {
    let events = seq.events();
    for (pos, &ix) in indices.iter().enumerate() {
        if ix >= events.len() {
            return Err(ModelError::IndexOutOfBounds { index: ix, len: events.len() });
        }
        if pos > 0 && ix <= indices[pos - 1] {
            return Err(ModelError::NonIncreasingIndices(pos));
        }
    }
    let mut contiguous = true;
    let mut type_contiguous = true;
    for w in indices.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b != a + 1 {
            contiguous = false;
            let picked = events[b].type_id;
            if events[a + 1..b].iter().any(|e| e.type_id == picked) {
                type_contiguous = false;
            }
        }
    }
    Ok(SubseqRelation { contiguous, type_contiguous })
}

/// Join semantics for pattern matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchSemantics {
    /// Any in-order subsequence within the window.
    AnyMatch,
    /// Only type-contiguous subsequences.
    NextMatch,
    /// Only runs of consecutive events.
    Contiguity,
}

/// An ordered event-type pattern with a sliding time window, a per-match
/// utility weight, a per-match CPU cost, and (once estimated) the expected
/// match rate per unit time.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub id: String,
    pub pattern: Vec<TypeId>,
    pub window: f64,
    pub utility_weight: f64,
    pub cpu_cost_per_match: f64,
    pub expected_matches: Option<f64>,
}

impl Query {
    pub fn new(
        id: &str,
        pattern: Vec<TypeId>,
        window: f64,
        utility_weight: f64,
        cpu_cost_per_match: f64,
    ) -> Result<Self, ModelError> {
        if pattern.is_empty() {
            return Err(ModelError::EmptyPattern(id.to_string()));
        }
        if !(window > 0.0) || !window.is_finite() {
            return Err(ModelError::NonPositiveWindow(id.to_string(), window));
        }
        if !(utility_weight > 0.0) || !utility_weight.is_finite() {
            return Err(ModelError::NonPositiveWeight(id.to_string(), utility_weight));
        }
        if !(cpu_cost_per_match > 0.0) || !cpu_cost_per_match.is_finite() {
            return Err(ModelError::NonPositiveCpuCost(id.to_string(), cpu_cost_per_match));
        }
        Ok(Query {
            id: id.to_string(),
            pattern,
            window,
            utility_weight,
            cpu_cost_per_match,
            expected_matches: None,
        })
    }

    /// Same constructor with the expected match rate already resolved.
    pub fn with_match_rate(
        id: &str,
        pattern: Vec<TypeId>,
        window: f64,
        utility_weight: f64,
        cpu_cost_per_match: f64,
        expected_matches: f64,
    ) -> Result<Self, ModelError> {
        if !(expected_matches >= 0.0) || !expected_matches.is_finite() {
            return Err(ModelError::NegativeMatchRate(id.to_string(), expected_matches));
        }
        let mut q = Query::new(id, pattern, window, utility_weight, cpu_cost_per_match)?;
        q.expected_matches = Some(expected_matches);
        Ok(q)
    }

    /// Distinct types of the pattern, ascending.
    pub fn distinct_types(&self) -> Vec<TypeId> {
        let mut ts = self.pattern.clone();
        ts.sort_unstable();
        ts.dedup();
        ts
    }
}
