//! Runs one solver over a complete workload and writes the plan file.

use cepshed::plan::{
    brute_force_integral, fcls_greedy, fmls_grid_search, icls_dp, icls_fptas, idls_2d_knapsack,
    idls_tricriteria, imls_bicriteria, imls_knapsack_greedy, imls_multitenant_dp, FractionalPlan,
    IntegralPlan, PlanEvaluation, Variant,
};

use crate::cmd::write_out;
use crate::error::CliError;
use crate::files::{PlanFile, PlanParameters, PlanVariant, WorkloadFile};
use crate::{PlanArgs, VariantArg};

enum Outcome {
    Integral(IntegralPlan, PlanEvaluation),
    Fractional(FractionalPlan, PlanEvaluation),
}

pub fn run(args: &PlanArgs) -> Result<(), CliError> {
    let variant = match args.variant {
        VariantArg::Imls => PlanVariant::Imls,
        VariantArg::Fmls => PlanVariant::Fmls,
        VariantArg::Icls => PlanVariant::Icls,
        VariantArg::Fcls => PlanVariant::Fcls,
        VariantArg::Idls => PlanVariant::Idls,
        VariantArg::Fdls => {
            return Err(CliError::unsupported(
                "no solver synthesizes fractional dual-budget plans; write an `fdls-eval` \
                 plan file by hand and replay it with `simulate`",
            ))
        }
    };

    let wl = WorkloadFile::load(&args.workload)?;
    let inst = wl.instance()?;

    let algorithm = args.algorithm.as_deref().unwrap_or(match variant {
        PlanVariant::Imls => "bicriteria",
        PlanVariant::Fmls => "grid",
        PlanVariant::Icls => "dp",
        PlanVariant::Fcls => "greedy",
        PlanVariant::Idls => "tricriteria",
        PlanVariant::FdlsEval => unreachable!("rejected above"),
    });

    let mut params = PlanParameters::default();
    let outcome = match (variant, algorithm) {
        (PlanVariant::Imls, "bicriteria") => {
            params.tau = Some(args.tau);
            let (p, e) = imls_bicriteria(&inst, args.tau)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Imls, "brute") => {
            let (p, e) = brute_force_integral(&inst, Variant::Imls)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Imls, "dp") => {
            params.resolution = Some(args.resolution);
            let (p, e) = imls_multitenant_dp(&inst, args.resolution)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Imls, "greedy") => {
            let (p, e) = imls_knapsack_greedy(&inst)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Fmls, "grid") => {
            params.k = Some(args.k);
            let (p, e) = fmls_grid_search(&inst, args.k)?;
            Outcome::Fractional(p, e)
        }
        (PlanVariant::Icls, "dp") => {
            params.resolution = Some(args.resolution);
            let (p, e) = icls_dp(&inst, args.resolution)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Icls, "fptas") => {
            params.epsilon = Some(args.eps);
            let (p, e) = icls_fptas(&inst, args.eps)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Icls, "brute") => {
            let (p, e) = brute_force_integral(&inst, Variant::Icls)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Fcls, "greedy") => {
            let (p, e) = fcls_greedy(&inst)?;
            Outcome::Fractional(p, e)
        }
        (PlanVariant::Idls, "tricriteria") => {
            params.tau = Some(args.tau);
            let (p, e) = idls_tricriteria(&inst, args.tau)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Idls, "knapsack") => {
            params.resolution = Some(args.resolution);
            let (p, e) = idls_2d_knapsack(&inst, args.resolution)?;
            Outcome::Integral(p, e)
        }
        (PlanVariant::Idls, "brute") => {
            let (p, e) = brute_force_integral(&inst, Variant::Idls)?;
            Outcome::Integral(p, e)
        }
        (v, other) => {
            let list = match v {
                PlanVariant::Imls => "bicriteria, brute, dp, greedy",
                PlanVariant::Fmls => "grid",
                PlanVariant::Icls => "dp, brute, fptas",
                PlanVariant::Fcls => "greedy",
                PlanVariant::Idls => "tricriteria, brute, knapsack",
                PlanVariant::FdlsEval => unreachable!("rejected above"),
            };
            return Err(CliError::usage(format!(
                "variant `{}` has no algorithm `{other}`; expected one of {list}",
                v.token()
            )));
        }
    };

    let file = match outcome {
        Outcome::Integral(plan, eval) => PlanFile::from_integral(
            variant,
            algorithm,
            params,
            inst.alphabet(),
            inst.queries(),
            &plan,
            eval,
        ),
        Outcome::Fractional(plan, eval) => PlanFile::from_fractional(
            variant,
            algorithm,
            params,
            inst.alphabet(),
            inst.queries(),
            &plan,
            eval,
        ),
    };
    write_out(args.out.as_deref(), &file.emit())
}
