//! Cross-checks every solver against independent references: the exhaustive
//! optimum, a fresh linear program, a finer grid sweep, and the budgets
//! themselves. Runs on one workload or on a sweep of random instances, and
//! exits nonzero if any guarantee fails to hold.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cepshed::lp::{solve_lp, LinearProgram, LpStatus};
use cepshed::plan::{
    brute_force_integral, fcls_greedy, fmls_grid_search, icls_dp, icls_fptas, idls_2d_knapsack,
    idls_tricriteria, imls_bicriteria, imls_knapsack_greedy, imls_multitenant_dp, GuaranteeKind,
    PlanError, PlanEvaluation, ProblemInstance, Variant,
};
use cepshed::synth::random_integer_instance;

use crate::error::CliError;
use crate::files::WorkloadFile;
use crate::{TableFormat, VerifyArgs, TOOL_VERSION};

const TOL: f64 = 1e-9;

/// Margin for `lhs >= rhs`: nonnegative means the check holds.
fn at_least(lhs: f64, rhs: f64) -> f64 {
    lhs - rhs + TOL
}

/// Margin for `lhs == rhs` up to tolerance.
fn equal(lhs: f64, rhs: f64) -> f64 {
    TOL - (lhs - rhs).abs()
}

#[derive(Debug, Clone, Copy)]
struct Row {
    runs: u64,
    failures: u64,
    worst: f64,
}

#[derive(Debug, Default)]
struct CheckTable {
    rows: BTreeMap<String, Row>,
}

impl CheckTable {
    /// A NaN margin counts as a failure, not a pass.
    fn record(&mut self, name: &str, margin: f64) {
        let row = self
            .rows
            .entry(name.to_string())
            .or_insert(Row { runs: 0, failures: 0, worst: f64::INFINITY });
        row.runs += 1;
        if !(margin >= 0.0) {
            row.failures += 1;
        }
        if !(margin >= row.worst) {
            row.worst = margin;
        }
    }

    fn totals(&self) -> (usize, u64, u64) {
        let runs = self.rows.values().map(|r| r.runs).sum();
        let failures = self.rows.values().map(|r| r.failures).sum();
        (self.rows.len(), runs, failures)
    }
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let mut table = CheckTable::default();
    let mut info = Vec::new();
    let heading = match (&args.workload, args.random) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("choose one of --workload or --random, not both"))
        }
        (None, None) => {
            return Err(CliError::usage("one of --workload or --random is required"))
        }
        (Some(path), None) => {
            let wl = WorkloadFile::load(path)?;
            if wl.queries.is_empty() {
                println!("no queries in {}: vacuously pass", path.display());
                return Ok(());
            }
            let inst = wl.instance()?;
            info = check_instance(&mut table, &inst, args)?;
            format!(
                "workload: {} ({} event types, {} queries)",
                path.display(),
                inst.alphabet().len(),
                inst.queries().len()
            )
        }
        (None, Some(count)) => {
            if count == 0 {
                return Err(CliError::usage("--random needs at least one instance"));
            }
            if args.max_types < 2 {
                return Err(CliError::usage("--max-types must be at least 2"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            for _ in 0..count {
                let inst = loop {
                    let cand = random_integer_instance(&mut rng);
                    if cand.alphabet().len() <= args.max_types {
                        break cand;
                    }
                };
                check_instance(&mut table, &inst, args)?;
            }
            format!(
                "random sweep: {count} instances, seed {}, at most {} event types",
                args.seed, args.max_types
            )
        }
    };
    render(args, &table, &heading, &info)
}

/// Every check that applies to this instance, keyed by a stable name so
/// repeated instances aggregate into one row per check.
fn check_instance(
    table: &mut CheckTable,
    inst: &ProblemInstance,
    args: &VerifyArgs,
) -> Result<Vec<String>, CliError> {
    let mut info = Vec::new();
    let total: f64 = inst
        .queries()
        .iter()
        .map(|q| q.expected_matches.unwrap_or(0.0) * q.utility_weight)
        .sum();
    let resolution = grid_resolution(inst, args.resolution);

    if let Some(m) = inst.memory_budget() {
        let (_, opt) = brute_force_integral(inst, Variant::Imls)?;
        info.push(format!("optimum imls (brute): {}", opt.expected_utility));

        let (_, dp) = imls_multitenant_dp(inst, resolution)?;
        if lossless(&dp) {
            table.record("imls dp matches brute optimum", equal(opt.expected_utility, dp.expected_utility));
            table.record("imls dp within memory budget", at_least(m, dp.memory_use));
        } else {
            let slack = rounding_slack(&dp, inst.alphabet().len());
            table.record("imls dp within rounded memory budget", at_least(m + slack, dp.memory_use));
        }

        match imls_knapsack_greedy(inst) {
            Err(PlanError::QueryLargerThanBudget(_)) => {}
            Err(e) => return Err(e.into()),
            Ok((_, g)) => {
                if let Some(GuaranteeKind::Ratio { rho }) = g.guarantee.map(|gu| gu.kind) {
                    table.record(
                        "imls greedy meets its ratio",
                        at_least(g.expected_utility, rho * opt.expected_utility),
                    );
                }
                table.record("imls greedy within memory budget", at_least(m, g.memory_use));
            }
        }

        for &tau in &args.tau {
            let (_, b) = imls_bicriteria(inst, tau)?;
            let bound = b.guarantee.map_or(f64::NAN, |gu| gu.bound);
            let loss = total - b.expected_utility;
            table.record(
                &format!("imls bicriteria(tau={tau}) loss within lp bound"),
                at_least(bound, loss),
            );
            table.record(
                &format!("imls bicriteria(tau={tau}) loss within optimum ratio"),
                at_least((total - opt.expected_utility) / tau, loss),
            );
            table.record(
                &format!("imls bicriteria(tau={tau}) memory within stretch"),
                at_least(m / (1.0 - tau), b.memory_use),
            );
        }

        for &k in &args.k {
            match fmls_grid_search(inst, k) {
                Err(PlanError::GridTooLarge { .. }) => {}
                Err(e) => return Err(e.into()),
                Ok((_, g)) => {
                    let guarantee = g.guarantee.expect("grid search reports a guarantee");
                    if let GuaranteeKind::GridRelative { .. } = guarantee.kind {
                        match fmls_grid_search(inst, 2 * k) {
                            Err(PlanError::GridTooLarge { .. }) => {}
                            Err(e) => return Err(e.into()),
                            Ok((_, g2)) => {
                                // The order-k grid nests inside the order-2k
                                // grid, so the finer sweep can never lose:
                                // exact in floating point, no tolerance.
                                table.record(
                                    &format!("fmls grid(k={k}) refinement monotone"),
                                    g2.expected_utility - g.expected_utility,
                                );
                                if guarantee.bound > 0.0 {
                                    table.record(
                                        &format!("fmls grid(k={k}) meets its bound against the finer sweep"),
                                        at_least(g.expected_utility, guarantee.bound * g2.expected_utility),
                                    );
                                }
                            }
                        }
                        table.record(
                            &format!("fmls grid(k={k}) within memory budget"),
                            at_least(m, g.memory_use),
                        );
                    } else {
                        table.record(
                            &format!("fmls grid(k={k}) degenerate full keep within budget"),
                            at_least(m, g.memory_use),
                        );
                    }
                }
            }
        }
    }

    if let Some(c) = inst.cpu_budget() {
        let (_, opt) = brute_force_integral(inst, Variant::Icls)?;
        info.push(format!("optimum icls (brute): {}", opt.expected_utility));

        let (_, dp) = icls_dp(inst, resolution)?;
        if lossless(&dp) {
            table.record("icls dp matches brute optimum", equal(opt.expected_utility, dp.expected_utility));
            table.record("icls dp within cpu budget", at_least(c, dp.cpu_use));
        } else {
            let slack = rounding_slack(&dp, inst.queries().len());
            table.record("icls dp within rounded cpu budget", at_least(c + slack, dp.cpu_use));
        }

        for &eps in &args.eps {
            let (_, f) = icls_fptas(inst, eps)?;
            table.record(
                &format!("icls fptas(eps={eps}) within epsilon of optimum"),
                at_least(f.expected_utility, (1.0 - eps) * opt.expected_utility),
            );
            table.record(&format!("icls fptas(eps={eps}) within cpu budget"), at_least(c, f.cpu_use));
        }

        let (_, fr) = fcls_greedy(inst)?;
        table.record(
            "fcls greedy equals its linear program",
            equal(fr.expected_utility, fcls_lp_optimum(inst, c)?),
        );
    }

    if let (Some(m), Some(c)) = (inst.memory_budget(), inst.cpu_budget()) {
        let (_, opt) = brute_force_integral(inst, Variant::Idls)?;
        info.push(format!("optimum idls (brute): {}", opt.expected_utility));

        for &tau in &args.tau {
            let (_, t) = idls_tricriteria(inst, tau)?;
            let bound = t.guarantee.map_or(f64::NAN, |gu| gu.bound);
            let loss = total - t.expected_utility;
            table.record(
                &format!("idls tricriteria(tau={tau}) loss within lp bound"),
                at_least(bound, loss),
            );
            table.record(
                &format!("idls tricriteria(tau={tau}) loss within optimum ratio"),
                at_least((total - opt.expected_utility) / tau, loss),
            );
            table.record(
                &format!("idls tricriteria(tau={tau}) memory within stretch"),
                at_least(m / (1.0 - tau), t.memory_use),
            );
            table.record(
                &format!("idls tricriteria(tau={tau}) cpu within stretch"),
                at_least(c / (1.0 - tau), t.cpu_use),
            );
        }

        match idls_2d_knapsack(inst, resolution) {
            Err(PlanError::QueryLargerThanBudget(_)) => {}
            Err(e) => return Err(e.into()),
            Ok((_, kp)) => {
                if let Some(GuaranteeKind::Ratio { rho }) = kp.guarantee.map(|gu| gu.kind) {
                    if lossless(&kp) && rho > 0.0 {
                        table.record(
                            "idls knapsack meets its ratio",
                            at_least(kp.expected_utility, rho * opt.expected_utility),
                        );
                    }
                }
                let slack = rounding_slack(&kp, inst.queries().len());
                table.record("idls knapsack within memory budget", at_least(m + slack, kp.memory_use));
                table.record("idls knapsack within cpu budget", at_least(c + slack, kp.cpu_use));
            }
        }
    }

    Ok(info)
}

/// The discretization introduced no error, so exact comparisons are fair.
fn lossless(eval: &PlanEvaluation) -> bool {
    eval.rounding.map_or(false, |r| r.max_abs_error == 0.0)
}

/// Worst-case real overshoot of a rounded-weight solution: each of `count`
/// summed weights may have been rounded down by the reported error.
fn rounding_slack(eval: &PlanEvaluation, count: usize) -> f64 {
    eval.rounding.map_or(0.0, |r| r.max_abs_error * count as f64)
}

/// Pseudo-polynomial solvers are exact on whole-number instances at step
/// one; anything else runs at the requested resolution.
fn grid_resolution(inst: &ProblemInstance, requested: f64) -> f64 {
    let whole = |x: f64| x.is_finite() && x.fract() == 0.0;
    let mut all = inst.alphabet().iter().all(|(t, _)| whole(inst.alphabet().memory_rate(t)));
    all &= inst
        .queries()
        .iter()
        .all(|q| whole(q.expected_matches.unwrap_or(f64::NAN) * q.cpu_cost_per_match));
    if let Some(m) = inst.memory_budget() {
        all &= whole(m);
    }
    if let Some(c) = inst.cpu_budget() {
        all &= whole(c);
    }
    if all {
        1.0
    } else {
        requested
    }
}

/// Independent reference for the fractional CPU problem: solve it as a
/// fresh linear program rather than through the planner's greedy.
fn fcls_lp_optimum(inst: &ProblemInstance, c: f64) -> Result<f64, CliError> {
    let values: Vec<f64> = inst
        .queries()
        .iter()
        .map(|q| q.expected_matches.unwrap_or(0.0) * q.utility_weight)
        .collect();
    let costs: Vec<f64> = inst
        .queries()
        .iter()
        .map(|q| q.expected_matches.unwrap_or(0.0) * q.cpu_cost_per_match)
        .collect();
    let n = values.len();
    let mut lp = LinearProgram::maximize(values);
    lp.le(costs, c);
    for i in 0..n {
        lp.bound(i, 0.0, 1.0);
    }
    let sol = solve_lp(&lp)
        .map_err(|e| CliError::numerical(format!("reference linear program failed: {e}")))?;
    if sol.status != LpStatus::Optimal {
        return Err(CliError::numerical(format!(
            "reference linear program ended {:?}, expected an optimum",
            sol.status
        )));
    }
    Ok(sol.objective_value)
}

fn render(
    args: &VerifyArgs,
    table: &CheckTable,
    heading: &str,
    info: &[String],
) -> Result<(), CliError> {
    let (checks, runs, failures) = table.totals();
    match args.format {
        TableFormat::Table => {
            println!("cepshed verify {TOOL_VERSION}");
            println!("{heading}");
            println!(
                "parameters: tau={} eps={} k={} resolution={}",
                join(&args.tau),
                join(&args.eps),
                join(&args.k),
                args.resolution
            );
            for line in info {
                println!("{line}");
            }
            println!();
            let width =
                table.rows.keys().map(|k| k.len()).max().unwrap_or(0).max("check".len());
            println!("{:<width$}  {:>6}  {:>12}  status", "check", "runs", "worst");
            for (name, row) in &table.rows {
                let status = if row.failures > 0 { "FAIL" } else { "pass" };
                println!("{name:<width$}  {:>6}  {:>+12.3e}  {status}", row.runs, row.worst);
            }
            println!();
            if failures == 0 {
                println!("overall: pass ({checks} checks, {runs} runs)");
            }
        }
        TableFormat::Csv => {
            let mut t = String::from("check,runs,worst_margin,status\n");
            for (name, row) in &table.rows {
                let status = if row.failures > 0 { "FAIL" } else { "pass" };
                let _ = writeln!(t, "{name},{},{},{status}", row.runs, row.worst);
            }
            print!("{t}");
        }
    }
    if failures > 0 {
        Err(CliError::bound_violation(format!("{failures} of {runs} checks failed")))
    } else {
        Ok(())
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    use cepshed::synth::{demo_dual_instance, demo_memory_instance};

    fn args() -> VerifyArgs {
        VerifyArgs {
            workload: None,
            random: None,
            max_types: 10,
            tau: vec![0.5],
            eps: vec![0.1],
            k: vec![8],
            resolution: 1e-3,
            seed: 0,
            format: TableFormat::Table,
        }
    }

    #[test]
    fn nan_margins_fail_instead_of_passing() {
        let mut table = CheckTable::default();
        table.record("x", f64::NAN);
        table.record("x", 1.0);
        let row = table.rows["x"];
        assert_eq!(row.failures, 1);
        assert_eq!(row.runs, 2);
    }

    #[test]
    fn worst_margin_tracks_the_minimum() {
        let mut table = CheckTable::default();
        table.record("x", 3.0);
        table.record("x", -2.0);
        table.record("x", 0.5);
        assert_eq!(table.rows["x"].worst, -2.0);
    }

    #[test]
    fn whole_number_instances_verify_at_unit_resolution() {
        assert_eq!(grid_resolution(&demo_memory_instance(), 1e-3), 1.0);
    }

    #[test]
    fn demo_instances_pass_every_check() {
        for inst in [demo_memory_instance(), demo_dual_instance()] {
            let mut table = CheckTable::default();
            check_instance(&mut table, &inst, &args()).unwrap();
            let (_, runs, failures) = table.totals();
            assert!(runs > 0);
            assert_eq!(failures, 0);
        }
    }

    #[test]
    fn random_integer_instances_pass_every_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut table = CheckTable::default();
        for _ in 0..40 {
            let inst = random_integer_instance(&mut rng);
            check_instance(&mut table, &inst, &args()).unwrap();
        }
        let (_, runs, failures) = table.totals();
        assert!(runs > 100, "expected a dense sweep, got {runs} runs");
        assert_eq!(failures, 0);
    }
}
