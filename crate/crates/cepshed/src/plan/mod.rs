//! Shedding planners.
//!
//! A [`ProblemInstance`] bundles the alphabet, the queries (with expected
//! match rates resolved), and optional memory / CPU budgets. Planners return
//! a plan plus a [`PlanEvaluation`] computed by the same arithmetic the
//! oracles use, with optional guarantee metadata describing how far the
//! result can be from optimal.
//!
//! Naming scheme for the solver families: `i`/`f` prefixes mean integral
//! (keep-or-drop) versus fractional (sampling-rate) decisions, and `mls`,
//! `cls`, `dls` mean the memory-bound, CPU-bound, and dual-bound variants
//! of load shedding.

mod brute;
mod cpu;
mod dual;
mod fractional;
mod memory;

pub use brute::{brute_force_integral, brute_force_integral_limited, Variant, BRUTE_FORCE_LIMIT};
pub use cpu::{fcls_greedy, icls_dp, icls_fptas};
pub use dual::{idls_2d_knapsack, idls_tricriteria};
pub use fractional::{
    fmls_grid_search, fmls_normalize, nonconcavity_witness, CurvatureWitness, FmlsNormalized,
};
pub use memory::{imls_bicriteria, imls_knapsack_greedy, imls_multitenant_dp};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LpError, LpStatus};
use crate::model::{Alphabet, Query, TypeId};

/// Slack applied when comparing resource use against budgets.
pub const EVAL_TOL: f64 = 1e-9;
/// Default discretization step for the pseudo-polynomial dynamic programs.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("query `{0}` references event type handle {1} outside the alphabet")]
    UnknownEventType(String, TypeId),
    #[error("query `{0}` has no expected match rate; estimate it first")]
    MissingMatchRate(String),
    #[error("budget must be nonnegative, got {0}")]
    NegativeBudget(f64),
    #[error("instance has no queries")]
    NoQueries,
    #[error("plan shape mismatch: expected {expected} entries, got {got}")]
    PlanShapeMismatch { expected: usize, got: usize },
    #[error("query `{id}`: sampling rate {value} outside [0, 1]")]
    SampleOutOfRange { id: String, value: f64 },
    #[error("query `{0}` violates the plan's event/query coupling")]
    CouplingViolation(String),
    #[error("instance too large for exhaustive search: {size} > {limit}")]
    InstanceTooLarge { size: usize, limit: usize },
    #[error("this variant needs a positive {0} budget")]
    NonPositiveBudget(&'static str),
    #[error("acceptance threshold must lie strictly inside (0, 1), got {0}")]
    InvalidTau(f64),
    #[error("epsilon must lie strictly inside (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("grid order k must be at least 1")]
    ZeroGridOrder,
    #[error("resolution must be positive, got {0}")]
    NonPositiveResolution(f64),
    #[error("query `{0}` alone exceeds the memory budget")]
    QueryLargerThanBudget(String),
    #[error("event-sharing component of {size} types exceeds the limit {limit}")]
    ComponentTooLarge { size: usize, limit: usize },
    #[error("memory budget is not a multiple of the resolution (got {0} grid steps)")]
    NonIntegralBudget(f64),
    #[error("simplex grid would hold {points} points, over the cap {cap}")]
    GridTooLarge { points: u128, cap: u64 },
    #[error("discretized budget lattice would hold {cells} cells, over the cap {cap}")]
    LatticeTooLarge { cells: u128, cap: u64 },
    #[error("every query has a single-type pattern; the objective is linear")]
    AllQueriesLinear,
    #[error("relaxation solve failed: {0}")]
    LpFailure(#[from] LpError),
    #[error("relaxation ended {0:?}, expected an optimum")]
    RelaxationNotOptimal(LpStatus),
}

/// The shedding problem: what arrives, what is asked, and what fits.
///
/// `p`, `f`, and `d` are computed at construction: `p` is the largest number
/// of queries sharing one event type, `f` the largest single-query memory
/// footprint relative to the budget, `d` the longest pattern. The
/// approximation guarantees are expressed in them.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    alphabet: Alphabet,
    queries: Vec<Query>,
    memory_budget: Option<f64>,
    cpu_budget: Option<f64>,
    p: usize,
    f: Option<f64>,
    d: usize,
}

impl ProblemInstance {
    pub fn new(
        alphabet: Alphabet,
        queries: Vec<Query>,
        memory_budget: Option<f64>,
        cpu_budget: Option<f64>,
    ) -> Result<Self, PlanError> {
        if queries.is_empty() {
            return Err(PlanError::NoQueries);
        }
        for q in &queries {
            if let Some(&t) = q.pattern.iter().find(|&&t| t >= alphabet.len()) {
                return Err(PlanError::UnknownEventType(q.id.clone(), t));
            }
            if q.expected_matches.is_none() {
                return Err(PlanError::MissingMatchRate(q.id.clone()));
            }
        }
        for budget in [memory_budget, cpu_budget].into_iter().flatten() {
            if !(budget >= 0.0) || !budget.is_finite() {
                return Err(PlanError::NegativeBudget(budget));
            }
        }

        let mut sharers = vec![0usize; alphabet.len()];
        for q in &queries {
            for t in q.distinct_types() {
                sharers[t] += 1;
            }
        }
        let p = sharers.iter().copied().max().unwrap_or(0).max(1);
        let d = queries.iter().map(|q| q.pattern.len()).max().unwrap_or(1);
        let f = memory_budget.map(|m| {
            queries
                .iter()
                .map(|q| {
                    q.distinct_types().iter().map(|&t| alphabet.memory_rate(t)).sum::<f64>() / m
                })
                .fold(0.0, f64::max)
        });

        Ok(ProblemInstance { alphabet, queries, memory_budget, cpu_budget, p, f, d })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn memory_budget(&self) -> Option<f64> {
        self.memory_budget
    }

    pub fn cpu_budget(&self) -> Option<f64> {
        self.cpu_budget
    }

    /// Largest number of queries sharing one event type.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Largest per-query memory footprint over the budget; `None` without a
    /// memory budget.
    pub fn f(&self) -> Option<f64> {
        self.f
    }

    /// Longest pattern length.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Expected utility per unit time of query `i` when fully kept.
    pub(crate) fn value(&self, i: usize) -> f64 {
        let q = &self.queries[i];
        q.expected_matches.unwrap() * q.utility_weight
    }

    /// Memory footprint of keeping all of query `i`'s event types.
    pub(crate) fn memory_weight(&self, i: usize) -> f64 {
        self.queries[i].distinct_types().iter().map(|&t| self.alphabet.memory_rate(t)).sum()
    }

    /// CPU consumed per unit time by query `i` when fully kept.
    pub(crate) fn cpu_weight(&self, i: usize) -> f64 {
        let q = &self.queries[i];
        q.expected_matches.unwrap() * q.cpu_cost_per_match
    }

    pub(crate) fn require_memory_budget(&self) -> Result<f64, PlanError> {
        self.memory_budget.ok_or(PlanError::NonPositiveBudget("memory"))
    }

    pub(crate) fn require_cpu_budget(&self) -> Result<f64, PlanError> {
        self.cpu_budget.ok_or(PlanError::NonPositiveBudget("CPU"))
    }
}

/// Keep-or-drop decisions, indexed like the instance's alphabet and queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralPlan {
    pub keep_event: Vec<bool>,
    pub keep_query: Vec<bool>,
}

/// Sampling rates in `[0, 1]`, indexed like the instance's alphabet and
/// queries.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPlan {
    pub sample_event: Vec<f64>,
    pub sample_query: Vec<f64>,
}

/// How query survival is tied to event survival.
///
/// `Equality` means a query runs exactly when all its event types survive
/// (the memory-shedding reading); `Inequality` additionally lets the plan
/// switch a covered query off (the dual-shedding reading).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Equality,
    Inequality,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridForm {
    /// Quantitative bound with the budget-scaling factor folded in.
    Scaled,
    /// Pure simplex case: no per-type bound binds.
    Unscaled,
    /// No quantitative bound applies to this instance shape.
    Heuristic,
}

/// What a solver promises about its result. `bound`'s meaning depends on the
/// kind:
///
/// - `Exact`: `bound` is the optimal objective itself.
/// - `Bicriteria`/`Tricriteria`: `bound` caps the lost utility, while the
///   budgets are honored only up to a `1/(1-tau)` stretch.
/// - `Ratio`: the result is at least `rho` times the optimum; `bound` is the
///   implied cap on the optimum.
/// - `Fptas`: the result is at least `(1-epsilon)` times the optimum;
///   `bound` again caps the optimum.
/// - `GridRelative`: `bound` is the guaranteed fraction of the fractional
///   optimum (zero when the instance shape supports no quantitative claim).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GuaranteeKind {
    Exact,
    Bicriteria { tau: f64 },
    Tricriteria { tau: f64 },
    Ratio { rho: f64 },
    Fptas { epsilon: f64 },
    GridRelative { k: usize, form: GridForm },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guarantee {
    #[serde(flatten)]
    pub kind: GuaranteeKind,
    pub bound: f64,
}

/// Discretization applied by a pseudo-polynomial solver: the grid step and
/// the worst absolute weight perturbation it introduced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rounding {
    pub resolution: f64,
    pub max_abs_error: f64,
}

/// What a plan delivers and what it consumes, per unit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEvaluation {
    pub expected_utility: f64,
    pub memory_use: f64,
    pub cpu_use: f64,
    pub feasible_memory: bool,
    pub feasible_cpu: bool,
    pub guarantee: Option<Guarantee>,
    pub rounding: Option<Rounding>,
}

fn check_shapes(inst: &ProblemInstance, events: usize, queries: usize) -> Result<(), PlanError> {
    if events != inst.alphabet.len() {
        return Err(PlanError::PlanShapeMismatch { expected: inst.alphabet.len(), got: events });
    }
    if queries != inst.queries.len() {
        return Err(PlanError::PlanShapeMismatch { expected: inst.queries.len(), got: queries });
    }
    Ok(())
}

/// Totals up an integral plan. `Equality` coupling demands `keep_query`
/// equal the conjunction of the kept event types; `Inequality` only forbids
/// running a query whose events are shed.
pub fn evaluate_integral(
    inst: &ProblemInstance,
    plan: &IntegralPlan,
    coupling: Coupling,
) -> Result<PlanEvaluation, PlanError> {
    check_shapes(inst, plan.keep_event.len(), plan.keep_query.len())?;
    for (i, q) in inst.queries.iter().enumerate() {
        let covered = q.pattern.iter().all(|&t| plan.keep_event[t]);
        let consistent = match coupling {
            Coupling::Equality => plan.keep_query[i] == covered,
            Coupling::Inequality => !plan.keep_query[i] || covered,
        };
        if !consistent {
            return Err(PlanError::CouplingViolation(q.id.clone()));
        }
    }
    let memory_use: f64 = (0..inst.alphabet.len())
        .filter(|&j| plan.keep_event[j])
        .map(|j| inst.alphabet.memory_rate(j))
        .sum();
    let expected_utility: f64 =
        (0..inst.queries.len()).filter(|&i| plan.keep_query[i]).map(|i| inst.value(i)).sum();
    let cpu_use: f64 =
        (0..inst.queries.len()).filter(|&i| plan.keep_query[i]).map(|i| inst.cpu_weight(i)).sum();
    Ok(PlanEvaluation {
        expected_utility,
        memory_use,
        cpu_use,
        feasible_memory: inst.memory_budget.map_or(true, |m| memory_use <= m + EVAL_TOL),
        feasible_cpu: inst.cpu_budget.map_or(true, |c| cpu_use <= c + EVAL_TOL),
        guarantee: None,
        rounding: None,
    })
}

/// Totals up a fractional plan. A query's expected survival is the product
/// of its pattern entries' sampling rates (with multiplicity); `Equality`
/// coupling pins `sample_query` to that product, `Inequality` allows
/// anything at or below it.
pub fn evaluate_fractional(
    inst: &ProblemInstance,
    plan: &FractionalPlan,
    coupling: Coupling,
) -> Result<PlanEvaluation, PlanError> {
    check_shapes(inst, plan.sample_event.len(), plan.sample_query.len())?;
    for (j, &x) in plan.sample_event.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) || x.is_nan() {
            return Err(PlanError::SampleOutOfRange { id: format!("event type {j}"), value: x });
        }
    }
    for (i, q) in inst.queries.iter().enumerate() {
        let y = plan.sample_query[i];
        if !(0.0..=1.0).contains(&y) || y.is_nan() {
            return Err(PlanError::SampleOutOfRange { id: q.id.clone(), value: y });
        }
        let product: f64 = q.pattern.iter().map(|&t| plan.sample_event[t]).product();
        let consistent = match coupling {
            Coupling::Equality => (y - product).abs() <= EVAL_TOL,
            Coupling::Inequality => y <= product + EVAL_TOL,
        };
        if !consistent {
            return Err(PlanError::CouplingViolation(q.id.clone()));
        }
    }
    let memory_use: f64 = (0..inst.alphabet.len())
        .map(|j| inst.alphabet.memory_rate(j) * plan.sample_event[j])
        .sum();
    let expected_utility: f64 =
        (0..inst.queries.len()).map(|i| inst.value(i) * plan.sample_query[i]).sum();
    let cpu_use: f64 =
        (0..inst.queries.len()).map(|i| inst.cpu_weight(i) * plan.sample_query[i]).sum();
    Ok(PlanEvaluation {
        expected_utility,
        memory_use,
        cpu_use,
        feasible_memory: inst.memory_budget.map_or(true, |m| memory_use <= m + EVAL_TOL),
        feasible_cpu: inst.cpu_budget.map_or(true, |c| cpu_use <= c + EVAL_TOL),
        guarantee: None,
        rounding: None,
    })
}

/// `keep_query` induced by a kept-event set under equality coupling: a query
/// runs exactly when every type it mentions is kept.
pub(crate) fn coverage(inst: &ProblemInstance, keep_event: &[bool]) -> Vec<bool> {
    inst.queries.iter().map(|q| q.pattern.iter().all(|&t| keep_event[t])).collect()
}
