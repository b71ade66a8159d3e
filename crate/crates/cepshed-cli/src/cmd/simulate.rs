//! Replays a plan file against its workload and reports realized metrics.
//! After writing the report it cross-checks the plan's declared resource
//! use against the workload budgets, stretched by whatever slack the plan's
//! guarantee licenses, and fails the run if the plan oversteps.

use std::fmt::Write as _;

use serde::Serialize;

use cepshed::model::MatchSemantics;
use cepshed::plan::{
    evaluate_fractional, evaluate_integral, Coupling, GuaranteeKind, PlanEvaluation,
    ProblemInstance,
};
use cepshed::sim::{simulate, ShedPlan, SimulationConfig, SimulationReport};

use crate::cmd::write_out;
use crate::error::CliError;
use crate::files::{PlanFile, PlanVariant, WorkloadFile};
use crate::{ReportFormat, SimulateArgs, TOOL_VERSION};

const EVAL_TOL: f64 = 1e-9;

#[derive(Serialize)]
struct SimulateOutput {
    version: String,
    duration: f64,
    trials: u32,
    seed: u64,
    semantics: MatchSemantics,
    plan_variant: PlanVariant,
    plan_algorithm: String,
    report: SimulationReport,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let wl = WorkloadFile::load(&args.workload)?;
    let plan_file = PlanFile::load(&args.plan)?;
    let inst = wl.instance()?;
    let plan = plan_file.shed_plan(inst.alphabet(), inst.queries())?;
    let config = SimulationConfig::new(args.duration, args.trials, args.seed, wl.semantics)?;
    let report = simulate(&inst, &plan, &config)?;

    let output = SimulateOutput {
        version: TOOL_VERSION.to_string(),
        duration: args.duration,
        trials: args.trials,
        seed: args.seed,
        semantics: wl.semantics,
        plan_variant: plan_file.variant,
        plan_algorithm: plan_file.algorithm.clone(),
        report,
    };
    let text = match args.format {
        ReportFormat::Json => {
            let mut t = serde_json::to_string_pretty(&output).expect("report serializes");
            t.push('\n');
            t
        }
        ReportFormat::Csv => csv(&output),
    };
    write_out(args.out.as_deref(), &text)?;

    check_stated_budgets(&inst, &plan, &plan_file)
}

fn csv(out: &SimulateOutput) -> String {
    let mut t = String::from("key,value\n");
    let r = &out.report;
    let _ = writeln!(t, "version,{}", out.version);
    let _ = writeln!(t, "duration,{}", out.duration);
    let _ = writeln!(t, "trials,{}", out.trials);
    let _ = writeln!(t, "seed,{}", out.seed);
    let _ = writeln!(t, "semantics,{}", semantics_token(out.semantics));
    let _ = writeln!(t, "plan_variant,{}", out.plan_variant.token());
    let _ = writeln!(t, "plan_algorithm,{}", out.plan_algorithm);
    let _ = writeln!(t, "mean_utility_per_unit_time,{}", r.mean_utility_per_unit_time);
    let _ = writeln!(t, "utility_std_error,{}", r.utility_std_error);
    let _ = writeln!(t, "peak_memory_occupancy,{}", r.peak_memory_occupancy);
    let _ = writeln!(t, "cpu_consumed_per_unit_time,{}", r.cpu_consumed_per_unit_time);
    let _ = writeln!(t, "trials_run,{}", r.trials_run);
    for (id, rate) in &r.mean_matches_per_query {
        let _ = writeln!(t, "matches.{id},{rate}");
    }
    t
}

fn semantics_token(sem: MatchSemantics) -> &'static str {
    match sem {
        MatchSemantics::AnyMatch => "any_match",
        MatchSemantics::NextMatch => "next_match",
        MatchSemantics::Contiguity => "contiguity",
    }
}

/// Recomputes the plan's steady-state resource use and compares it against
/// the workload budgets. Bicriteria and tricriteria plans are licensed to
/// exceed a budget by 1/(1-tau); everything else must fit outright.
fn check_stated_budgets(
    inst: &ProblemInstance,
    plan: &ShedPlan,
    plan_file: &PlanFile,
) -> Result<(), CliError> {
    let eval: PlanEvaluation = match plan {
        ShedPlan::Integral(p) => evaluate_integral(inst, p, Coupling::Inequality)?,
        ShedPlan::Fractional(p) => evaluate_fractional(inst, p, Coupling::Inequality)?,
    };
    let guarantee = plan_file.guarantee.or(plan_file.evaluation.guarantee);
    let (mem_stretch, cpu_stretch) = match guarantee.map(|g| g.kind) {
        Some(GuaranteeKind::Bicriteria { tau }) => (stretch(tau), 1.0),
        Some(GuaranteeKind::Tricriteria { tau }) => (stretch(tau), stretch(tau)),
        _ => (1.0, 1.0),
    };
    if let Some(m) = inst.memory_budget() {
        let allowance = m * mem_stretch;
        if eval.memory_use > allowance + EVAL_TOL {
            return Err(CliError::infeasible(format!(
                "plan retains memory rate {} over its stated allowance {allowance}",
                eval.memory_use
            )));
        }
    }
    if let Some(c) = inst.cpu_budget() {
        let allowance = c * cpu_stretch;
        if eval.cpu_use > allowance + EVAL_TOL {
            return Err(CliError::infeasible(format!(
                "plan consumes CPU rate {} over its stated allowance {allowance}",
                eval.cpu_use
            )));
        }
    }
    Ok(())
}

fn stretch(tau: f64) -> f64 {
    if tau > 0.0 && tau < 1.0 {
        1.0 / (1.0 - tau)
    } else {
        1.0
    }
}
