//! Dual-budget planners: memory and CPU constrained at once, inequality
//! coupling (a covered query may still be switched off to save CPU).

use super::memory::{check_tau, drop_relaxation};
use super::{
    evaluate_integral, Coupling, Guarantee, GuaranteeKind, IntegralPlan, PlanError,
    PlanEvaluation, ProblemInstance, Rounding,
};

const LATTICE_CAP: u64 = 20_000_000;
const MASK_LIMIT: usize = 64;

/// LP-relaxation rounding with both budget rows. Accepts queries whose
/// relaxed drop value is at most `tau`; lost utility stays within the
/// optimal loss over `tau` while memory and CPU stay within their budgets
/// over `1 - tau`.
pub fn idls_tricriteria(
    inst: &ProblemInstance,
    tau: f64,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    check_tau(tau)?;
    let m = inst.require_memory_budget()?;
    if m <= 0.0 {
        return Err(PlanError::NonPositiveBudget("memory"));
    }
    let c = inst.require_cpu_budget()?;
    let values = drop_relaxation(inst, m, Some(c))?;
    let s = inst.alphabet().len();

    let mut keep_event = vec![false; s];
    let mut keep_query = vec![false; inst.queries().len()];
    let mut lp_loss = 0.0;
    for (i, query) in inst.queries().iter().enumerate() {
        let yhat = values[s + i];
        lp_loss += inst.value(i) * yhat;
        if yhat <= tau {
            keep_query[i] = true;
            for t in query.distinct_types() {
                keep_event[t] = true;
            }
        }
    }
    let plan = IntegralPlan { keep_event, keep_query };
    let mut eval = evaluate_integral(inst, &plan, Coupling::Inequality)?;
    eval.guarantee =
        Some(Guarantee { kind: GuaranteeKind::Tricriteria { tau }, bound: lp_loss / tau });
    Ok((plan, eval))
}

/// Pseudo-polynomial dual-budget solver: 0-1 knapsack over queries on the
/// discretized (memory, CPU) lattice, counting each query's memory
/// footprint separately even where types are shared. The conservative
/// accounting is what the `(1 - f) / p` ratio pays for.
pub fn idls_2d_knapsack(
    inst: &ProblemInstance,
    resolution: f64,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(PlanError::NonPositiveResolution(resolution));
    }
    let m = inst.require_memory_budget()?;
    if m <= 0.0 {
        return Err(PlanError::NonPositiveBudget("memory"));
    }
    let c = inst.require_cpu_budget()?;
    let nq = inst.queries().len();
    if nq > MASK_LIMIT {
        return Err(PlanError::InstanceTooLarge { size: nq, limit: MASK_LIMIT });
    }
    for (i, query) in inst.queries().iter().enumerate() {
        if inst.memory_weight(i) >= m {
            return Err(PlanError::QueryLargerThanBudget(query.id.clone()));
        }
    }

    let mem_cap = (m / resolution + 1e-9).floor() as u64;
    let cpu_cap = (c / resolution + 1e-9).floor() as u64;
    let cells = (mem_cap as u128 + 1) * (cpu_cap as u128 + 1);
    if cells > LATTICE_CAP as u128 {
        return Err(PlanError::LatticeTooLarge { cells, cap: LATTICE_CAP });
    }

    let mut max_abs_error: f64 = 0.0;
    let mut items = Vec::with_capacity(nq);
    for i in 0..nq {
        let mem_real = inst.memory_weight(i);
        let cpu_real = inst.cpu_weight(i);
        let mem = (mem_real / resolution).round() as u64;
        let cpu = (cpu_real / resolution).round() as u64;
        max_abs_error = max_abs_error
            .max((mem as f64 * resolution - mem_real).abs())
            .max((cpu as f64 * resolution - cpu_real).abs());
        items.push((mem as usize, cpu as usize, inst.value(i)));
    }

    // dp over "at most (mem, cpu)" capacities; each cell carries the chosen
    // query set so ties can prefer dropping earlier queries. Comparing
    // bit-reversed masks orders sets like boolean keep-vectors.
    let w = cpu_cap as usize + 1;
    let mut value = vec![0.0f64; (mem_cap as usize + 1) * w];
    let mut mask = vec![0u64; value.len()];
    for (i, &(mem, cpu, v)) in items.iter().enumerate() {
        if mem > mem_cap as usize || cpu > cpu_cap as usize {
            continue; // cannot fit alone
        }
        let bit = 1u64 << i;
        for bm in (mem..=mem_cap as usize).rev() {
            for bc in (cpu..=cpu_cap as usize).rev() {
                let from = (bm - mem) * w + (bc - cpu);
                let to = bm * w + bc;
                let cand_v = value[from] + v;
                let cand_m = mask[from] | bit;
                if cand_v > value[to]
                    || (cand_v == value[to] && cand_m.reverse_bits() < mask[to].reverse_bits())
                {
                    value[to] = cand_v;
                    mask[to] = cand_m;
                }
            }
        }
    }
    let best = mask[value.len() - 1];
    let keep_query: Vec<bool> = (0..nq).map(|i| best >> i & 1 == 1).collect();

    let mut keep_event = vec![false; inst.alphabet().len()];
    for (i, query) in inst.queries().iter().enumerate() {
        if keep_query[i] {
            for t in query.distinct_types() {
                keep_event[t] = true;
            }
        }
    }
    let plan = IntegralPlan { keep_event, keep_query };
    let mut eval = evaluate_integral(inst, &plan, Coupling::Inequality)?;
    let f = inst.f().unwrap();
    let rho = (1.0 - f) / inst.p() as f64;
    eval.guarantee =
        Some(Guarantee { kind: GuaranteeKind::Ratio { rho }, bound: eval.expected_utility / rho });
    eval.rounding = Some(Rounding { resolution, max_abs_error });
    Ok((plan, eval))
}
