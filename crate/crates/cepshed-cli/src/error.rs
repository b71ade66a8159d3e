//! Error plumbing shared by every subcommand: each failure carries a class
//! that fixes both the machine-parsable `error[<class>]:` stderr prefix and
//! the process exit code.

use std::fmt;

use cepshed::estimate::EstimateError;
use cepshed::matcher::MatchError;
use cepshed::model::ModelError;
use cepshed::plan::PlanError;
use cepshed::sim::SimError;

/// Failure classes. Usage, parse, and io problems exit 1; infeasible or
/// unsupported requests exit 2; numerical trouble and broken bound
/// certificates exit 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Parse,
    Io,
    Infeasible,
    Unsupported,
    IncompatiblePlan,
    Numerical,
    BoundViolation,
}

impl ErrorClass {
    fn code(self) -> &'static str {
        match self {
            ErrorClass::Usage => "usage",
            ErrorClass::Parse => "parse",
            ErrorClass::Io => "io",
            ErrorClass::Infeasible => "infeasible",
            ErrorClass::Unsupported => "unsupported",
            ErrorClass::IncompatiblePlan => "incompatible-plan",
            ErrorClass::Numerical => "numerical",
            ErrorClass::BoundViolation => "bound-violation",
        }
    }
}

/// A classified failure. `Display` renders the full single-line
/// `error[<class>]: <message>` form printed to stderr.
#[derive(Debug)]
pub struct CliError {
    class: ErrorClass,
    message: String,
}

impl CliError {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        CliError { class, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::Usage, message)
    }

    pub fn parse(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::Parse, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::Io, message)
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::Infeasible, message)
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::Unsupported, message)
    }

    pub fn incompatible(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::IncompatiblePlan, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::Numerical, message)
    }

    pub fn bound_violation(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::BoundViolation, message)
    }

    pub fn exit_code(&self) -> i32 {
        match self.class {
            ErrorClass::Usage | ErrorClass::Parse | ErrorClass::Io => 1,
            ErrorClass::Infeasible | ErrorClass::Unsupported | ErrorClass::IncompatiblePlan => 2,
            ErrorClass::Numerical | ErrorClass::BoundViolation => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.class.code(), self.message)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::parse(e.to_string())
    }
}

impl From<MatchError> for CliError {
    fn from(e: MatchError) -> Self {
        CliError::parse(e.to_string())
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        let class = match e {
            EstimateError::NonPositiveSpan(_) => ErrorClass::Usage,
            EstimateError::UnsupportedSemantics => ErrorClass::Unsupported,
            EstimateError::InvalidRate(_) | EstimateError::MissingRate(_) => ErrorClass::Numerical,
            EstimateError::Match(_) => ErrorClass::Parse,
        };
        CliError::new(class, e.to_string())
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        let class = match e {
            PlanError::NonPositiveBudget(_) | PlanError::QueryLargerThanBudget(_) => {
                ErrorClass::Infeasible
            }
            PlanError::InstanceTooLarge { .. }
            | PlanError::ComponentTooLarge { .. }
            | PlanError::GridTooLarge { .. }
            | PlanError::LatticeTooLarge { .. }
            | PlanError::AllQueriesLinear => ErrorClass::Unsupported,
            PlanError::LpFailure(_) | PlanError::RelaxationNotOptimal(_) => ErrorClass::Numerical,
            PlanError::InvalidTau(_)
            | PlanError::InvalidEpsilon(_)
            | PlanError::ZeroGridOrder
            | PlanError::NonPositiveResolution(_)
            | PlanError::NonIntegralBudget(_) => ErrorClass::Usage,
            _ => ErrorClass::Parse,
        };
        CliError::new(class, e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Plan(p) => p.into(),
            SimError::Match(m) => m.into(),
            other => {
                let class = match other {
                    SimError::UnknownEventType(_) => ErrorClass::Parse,
                    _ => ErrorClass::Usage,
                };
                CliError::new(class, other.to_string())
            }
        }
    }
}
