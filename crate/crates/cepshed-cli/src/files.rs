//! The two on-disk JSON formats: workload files in, plan files out. Unknown
//! fields are rejected rather than ignored so a typo in a scientific config
//! fails loudly instead of silently falling back to a default.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cepshed::model::{Alphabet, MatchSemantics, Query};
use cepshed::plan::{
    FractionalPlan, Guarantee, IntegralPlan, PlanEvaluation, ProblemInstance,
};
use cepshed::sim::ShedPlan;

use crate::error::CliError;
use crate::TOOL_VERSION;

/// A problem statement: the event alphabet, the queries against it, the
/// resource budgets, and the match semantics the rates refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadFile {
    pub event_types: Vec<EventTypeSpec>,
    pub queries: Vec<QuerySpec>,
    #[serde(default, skip_serializing_if = "Budgets::is_empty")]
    pub budgets: Budgets,
    pub semantics: MatchSemantics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventTypeSpec {
    pub name: String,
    pub arrival_rate: f64,
    pub memory_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub name: String,
    pub pattern: Vec<String>,
    pub window: f64,
    pub utility_weight: f64,
    pub cpu_cost_per_match: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_matches: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu: Option<f64>,
}

impl Budgets {
    pub fn is_empty(&self) -> bool {
        self.memory.is_none() && self.cpu.is_none()
    }
}

impl WorkloadFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn emit(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("workload serializes");
        text.push('\n');
        text
    }

    pub fn alphabet(&self) -> Result<Alphabet, CliError> {
        let mut al = Alphabet::new();
        for t in &self.event_types {
            al.add(&t.name, t.arrival_rate, t.memory_cost)?;
        }
        Ok(al)
    }

    /// Queries with their patterns resolved against the alphabet. Rejects
    /// duplicate query names and patterns naming undeclared types.
    pub fn resolved_queries(&self, al: &Alphabet) -> Result<Vec<Query>, CliError> {
        let mut queries = Vec::with_capacity(self.queries.len());
        for (i, spec) in self.queries.iter().enumerate() {
            if self.queries[..i].iter().any(|other| other.name == spec.name) {
                return Err(CliError::parse(format!("query `{}` declared twice", spec.name)));
            }
            let mut pattern = Vec::with_capacity(spec.pattern.len());
            for ty in &spec.pattern {
                let id = al.id(ty).ok_or_else(|| {
                    CliError::parse(format!(
                        "query `{}`: pattern references undeclared event type `{ty}`",
                        spec.name
                    ))
                })?;
                pattern.push(id);
            }
            let query = match spec.expected_matches {
                Some(n) => Query::with_match_rate(
                    &spec.name,
                    pattern,
                    spec.window,
                    spec.utility_weight,
                    spec.cpu_cost_per_match,
                    n,
                )?,
                None => Query::new(
                    &spec.name,
                    pattern,
                    spec.window,
                    spec.utility_weight,
                    spec.cpu_cost_per_match,
                )?,
            };
            queries.push(query);
        }
        Ok(queries)
    }

    /// The full planning instance. Requires every query's match rate to be
    /// present; run `estimate` first otherwise.
    pub fn instance(&self) -> Result<ProblemInstance, CliError> {
        let al = self.alphabet()?;
        let queries = self.resolved_queries(&al)?;
        Ok(ProblemInstance::new(al, queries, self.budgets.memory, self.budgets.cpu)?)
    }
}

/// Which shedding problem a plan solves. Integral variants carry keep maps,
/// fractional variants carry sampling-rate maps. `fdls-eval` marks a
/// hand-written fractional dual-budget plan: no solver produces one, but
/// `simulate` replays it like any other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanVariant {
    Imls,
    Fmls,
    Icls,
    Fcls,
    Idls,
    FdlsEval,
}

impl PlanVariant {
    pub fn integral(self) -> bool {
        matches!(self, PlanVariant::Imls | PlanVariant::Icls | PlanVariant::Idls)
    }

    /// The serialized token, reused in text reports.
    pub fn token(self) -> &'static str {
        match self {
            PlanVariant::Imls => "imls",
            PlanVariant::Fmls => "fmls",
            PlanVariant::Icls => "icls",
            PlanVariant::Fcls => "fcls",
            PlanVariant::Idls => "idls",
            PlanVariant::FdlsEval => "fdls-eval",
        }
    }
}

/// The knobs the chosen algorithm actually consumed, resolved to their
/// effective values so the file is self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanParameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

impl PlanParameters {
    pub fn is_empty(&self) -> bool {
        self.tau.is_none()
            && self.epsilon.is_none()
            && self.k.is_none()
            && self.resolution.is_none()
    }
}

/// A shedding decision with its provenance: who computed it, with which
/// parameters, what it delivers, and what it promises. Keep/sample entries
/// are keyed by event-type and query names so the file stands alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub version: String,
    pub variant: PlanVariant,
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "PlanParameters::is_empty")]
    pub parameters: PlanParameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep_event: Option<BTreeMap<String, bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep_query: Option<BTreeMap<String, bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_event: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_query: Option<BTreeMap<String, f64>>,
    pub evaluation: PlanEvaluation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<Guarantee>,
}

impl PlanFile {
    pub fn from_integral(
        variant: PlanVariant,
        algorithm: &str,
        parameters: PlanParameters,
        al: &Alphabet,
        queries: &[Query],
        plan: &IntegralPlan,
        evaluation: PlanEvaluation,
    ) -> Self {
        let keep_event =
            al.iter().map(|(t, ty)| (ty.name.clone(), plan.keep_event[t])).collect();
        let keep_query =
            queries.iter().enumerate().map(|(i, q)| (q.id.clone(), plan.keep_query[i])).collect();
        PlanFile {
            version: TOOL_VERSION.to_string(),
            variant,
            algorithm: algorithm.to_string(),
            parameters,
            keep_event: Some(keep_event),
            keep_query: Some(keep_query),
            sample_event: None,
            sample_query: None,
            guarantee: evaluation.guarantee,
            evaluation,
        }
    }

    pub fn from_fractional(
        variant: PlanVariant,
        algorithm: &str,
        parameters: PlanParameters,
        al: &Alphabet,
        queries: &[Query],
        plan: &FractionalPlan,
        evaluation: PlanEvaluation,
    ) -> Self {
        let sample_event =
            al.iter().map(|(t, ty)| (ty.name.clone(), plan.sample_event[t])).collect();
        let sample_query = queries
            .iter()
            .enumerate()
            .map(|(i, q)| (q.id.clone(), plan.sample_query[i]))
            .collect();
        PlanFile {
            version: TOOL_VERSION.to_string(),
            variant,
            algorithm: algorithm.to_string(),
            parameters,
            keep_event: None,
            keep_query: None,
            sample_event: Some(sample_event),
            sample_query: Some(sample_query),
            guarantee: evaluation.guarantee,
            evaluation,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn emit(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plan serializes");
        text.push('\n');
        text
    }

    /// Reorders the named entries into the workload's index space and picks
    /// the plan form the variant demands.
    pub fn shed_plan(&self, al: &Alphabet, queries: &[Query]) -> Result<ShedPlan, CliError> {
        let type_names: Vec<String> = al.iter().map(|(_, ty)| ty.name.clone()).collect();
        let query_names: Vec<String> = queries.iter().map(|q| q.id.clone()).collect();
        if self.variant.integral() {
            if self.sample_event.is_some() || self.sample_query.is_some() {
                return Err(CliError::parse(format!(
                    "`{}` is an integral variant; it takes keep_event/keep_query",
                    self.variant.token()
                )));
            }
            let keep_event = self.keep_event.as_ref().ok_or_else(|| missing(self, "keep_event"))?;
            let keep_query = self.keep_query.as_ref().ok_or_else(|| missing(self, "keep_query"))?;
            Ok(ShedPlan::Integral(IntegralPlan {
                keep_event: ordered(keep_event, &type_names, "event type")?,
                keep_query: ordered(keep_query, &query_names, "query")?,
            }))
        } else {
            if self.keep_event.is_some() || self.keep_query.is_some() {
                return Err(CliError::parse(format!(
                    "`{}` is a fractional variant; it takes sample_event/sample_query",
                    self.variant.token()
                )));
            }
            let sample_event =
                self.sample_event.as_ref().ok_or_else(|| missing(self, "sample_event"))?;
            let sample_query =
                self.sample_query.as_ref().ok_or_else(|| missing(self, "sample_query"))?;
            Ok(ShedPlan::Fractional(FractionalPlan {
                sample_event: ordered(sample_event, &type_names, "event type")?,
                sample_query: ordered(sample_query, &query_names, "query")?,
            }))
        }
    }
}

fn missing(plan: &PlanFile, field: &str) -> CliError {
    CliError::parse(format!("`{}` plan lacks {field}", plan.variant.token()))
}

/// Plan entries in workload order. Every workload name must be present and
/// the plan must not name anything the workload does not declare.
fn ordered<T: Copy>(
    map: &BTreeMap<String, T>,
    names: &[String],
    what: &str,
) -> Result<Vec<T>, CliError> {
    for key in map.keys() {
        if !names.contains(key) {
            return Err(CliError::incompatible(format!("plan names an unknown {what} `{key}`")));
        }
    }
    names
        .iter()
        .map(|name| {
            map.get(name).copied().ok_or_else(|| {
                CliError::incompatible(format!("plan has no entry for {what} `{name}`"))
            })
        })
        .collect()
}
