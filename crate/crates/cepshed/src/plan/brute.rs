//! Exhaustive reference solver.
//!
//! Enumerates raw subsets with no pruning beyond budget feasibility, on
//! purpose: it shares no code path with the real planners, so agreement
//! between the two is evidence, not tautology.

use super::{
    coverage, evaluate_integral, Coupling, Guarantee, GuaranteeKind, IntegralPlan, PlanError,
    PlanEvaluation, ProblemInstance, EVAL_TOL,
};

/// Default size ceiling for exhaustive enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Which resource the reference solver treats as binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Memory-bound, equality coupling: dropping events is the only lever.
    Imls,
    /// CPU-bound: all events kept, queries switched off to fit the budget.
    Icls,
    /// Both budgets, inequality coupling.
    Idls,
}

/// `brute_force_integral` with the default size limit.
pub fn brute_force_integral(
    inst: &ProblemInstance,
    variant: Variant,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    brute_force_integral_limited(inst, variant, BRUTE_FORCE_LIMIT)
}

/// True optimum by exhaustive search. Ties go to the lexicographically
/// smallest keep-vector (events first, then queries, drop < keep).
pub fn brute_force_integral_limited(
    inst: &ProblemInstance,
    variant: Variant,
    limit: usize,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    let n_types = inst.alphabet().len();
    let n_queries = inst.queries().len();
    if n_types > limit {
        return Err(PlanError::InstanceTooLarge { size: n_types, limit });
    }
    if n_queries > limit {
        return Err(PlanError::InstanceTooLarge { size: n_queries, limit });
    }

    let best = match variant {
        Variant::Imls => best_memory(inst)?,
        Variant::Icls => best_cpu(inst)?,
        Variant::Idls => best_dual(inst)?,
    };
    let coupling = if variant == Variant::Imls { Coupling::Equality } else { Coupling::Inequality };
    let mut eval = evaluate_integral(inst, &best, coupling)?;
    eval.guarantee = Some(Guarantee { kind: GuaranteeKind::Exact, bound: eval.expected_utility });
    Ok((best, eval))
}

fn keep_events_from_mask(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|j| mask >> j & 1 == 1).collect()
}

fn lex_improves(utility: f64, vec: &[bool], best_utility: f64, best_vec: &[bool]) -> bool {
    utility > best_utility || (utility == best_utility && vec < best_vec)
}

fn best_memory(inst: &ProblemInstance) -> Result<IntegralPlan, PlanError> {
    let m = inst.require_memory_budget()?;
    let n = inst.alphabet().len();
    let mut best: Option<(f64, Vec<bool>, Vec<bool>)> = None;
    for mask in 0..1u32 << n {
        let keep_event = keep_events_from_mask(mask, n);
        let memory: f64 = (0..n).filter(|&j| keep_event[j]).map(|j| inst.alphabet().memory_rate(j)).sum();
        if memory > m + EVAL_TOL {
            continue;
        }
        let keep_query = coverage(inst, &keep_event);
        let utility: f64 =
            (0..keep_query.len()).filter(|&i| keep_query[i]).map(|i| inst.value(i)).sum();
        let mut vec = keep_event.clone();
        vec.extend_from_slice(&keep_query);
        match &best {
            Some((bu, bv, _)) if !lex_improves(utility, &vec, *bu, bv) => {}
            _ => best = Some((utility, vec, keep_event)),
        }
    }
    let (_, _, keep_event) = best.ok_or(PlanError::NonPositiveBudget("memory"))?;
    let keep_query = coverage(inst, &keep_event);
    Ok(IntegralPlan { keep_event, keep_query })
}

fn best_cpu(inst: &ProblemInstance) -> Result<IntegralPlan, PlanError> {
    let c = inst.require_cpu_budget()?;
    let nq = inst.queries().len();
    let mut best: Option<(f64, Vec<bool>)> = None;
    for mask in 0..1u32 << nq {
        let keep_query: Vec<bool> = (0..nq).map(|i| mask >> i & 1 == 1).collect();
        let cpu: f64 =
            (0..nq).filter(|&i| keep_query[i]).map(|i| inst.cpu_weight(i)).sum();
        if cpu > c + EVAL_TOL {
            continue;
        }
        let utility: f64 =
            (0..nq).filter(|&i| keep_query[i]).map(|i| inst.value(i)).sum();
        match &best {
            Some((bu, bv)) if !lex_improves(utility, &keep_query, *bu, bv) => {}
            _ => best = Some((utility, keep_query)),
        }
    }
    let (_, keep_query) = best.unwrap();
    // Store only what the surviving queries read.
    let mut keep_event = vec![false; inst.alphabet().len()];
    for (i, q) in inst.queries().iter().enumerate() {
        if keep_query[i] {
            for t in q.distinct_types() {
                keep_event[t] = true;
            }
        }
    }
    Ok(IntegralPlan { keep_event, keep_query })
}

fn best_dual(inst: &ProblemInstance) -> Result<IntegralPlan, PlanError> {
    let m = inst.require_memory_budget()?;
    let c = inst.require_cpu_budget()?;
    let n = inst.alphabet().len();
    let nq = inst.queries().len();
    let mut best: Option<(f64, Vec<bool>, IntegralPlan)> = None;
    for mask in 0..1u32 << n {
        let keep_event = keep_events_from_mask(mask, n);
        let memory: f64 = (0..n).filter(|&j| keep_event[j]).map(|j| inst.alphabet().memory_rate(j)).sum();
        if memory > m + EVAL_TOL {
            continue;
        }
        let covered = coverage(inst, &keep_event);
        let covered_ix: Vec<usize> = (0..nq).filter(|&i| covered[i]).collect();
        for qmask in 0..1u32 << covered_ix.len() {
            let mut keep_query = vec![false; nq];
            for (bit, &i) in covered_ix.iter().enumerate() {
                keep_query[i] = qmask >> bit & 1 == 1;
            }
            let cpu: f64 =
                (0..nq).filter(|&i| keep_query[i]).map(|i| inst.cpu_weight(i)).sum();
            if cpu > c + EVAL_TOL {
                continue;
            }
            let utility: f64 =
                (0..nq).filter(|&i| keep_query[i]).map(|i| inst.value(i)).sum();
            let mut vec = keep_event.clone();
            vec.extend_from_slice(&keep_query);
            match &best {
                Some((bu, bv, _)) if !lex_improves(utility, &vec, *bu, bv) => {}
                _ => {
                    best = Some((
                        utility,
                        vec,
                        IntegralPlan { keep_event: keep_event.clone(), keep_query },
                    ));
                }
            }
        }
    }
    Ok(best.unwrap().2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alphabet, Query};
    use crate::synth::{demo_cpu_instance, demo_dual_instance, demo_memory_instance};
    use approx::assert_relative_eq;

    #[test]
    fn memory_demo_keeps_ace() {
        let (plan, eval) = brute_force_integral(&demo_memory_instance(), Variant::Imls).unwrap();
        assert_eq!(plan.keep_event, vec![true, false, true, false, true]);
        assert_eq!(plan.keep_query, vec![true, true, false]);
        assert_relative_eq!(eval.expected_utility, 6.0);
        assert!(eval.feasible_memory);
        assert_eq!(eval.guarantee.unwrap().kind, GuaranteeKind::Exact);
    }

    #[test]
    fn cpu_demo_runs_the_two_heaviest() {
        let (plan, eval) = brute_force_integral(&demo_cpu_instance(), Variant::Icls).unwrap();
        assert_eq!(plan.keep_query, vec![false, true, true]);
        assert_relative_eq!(eval.expected_utility, 1.0);
        assert!(eval.feasible_cpu);
    }

    #[test]
    fn dual_demo_drops_the_long_query() {
        let (plan, eval) = brute_force_integral(&demo_dual_instance(), Variant::Idls).unwrap();
        assert_eq!(plan.keep_event, vec![true, false, true, false, true]);
        assert_eq!(plan.keep_query, vec![true, true, false]);
        assert_relative_eq!(eval.expected_utility, 0.6);
        assert!(eval.feasible_memory && eval.feasible_cpu);
    }

    #[test]
    fn ties_prefer_dropping_early_types() {
        // Two interchangeable single-type queries, room for one.
        let mut al = Alphabet::new();
        al.add("A", 1.0, 1.0).unwrap();
        al.add("B", 1.0, 1.0).unwrap();
        let queries = vec![
            Query::with_match_rate("q0", vec![0], 1.0, 1.0, 1.0, 1.0).unwrap(),
            Query::with_match_rate("q1", vec![1], 1.0, 1.0, 1.0, 1.0).unwrap(),
        ];
        let inst = ProblemInstance::new(al, queries, Some(1.0), None).unwrap();
        let (plan, eval) = brute_force_integral(&inst, Variant::Imls).unwrap();
        assert_relative_eq!(eval.expected_utility, 1.0);
        // keep {B} = [false, true] sorts before keep {A} = [true, false].
        assert_eq!(plan.keep_event, vec![false, true]);
    }

    #[test]
    fn size_limit_is_enforced() {
        let mut al = Alphabet::new();
        for j in 0..3 {
            al.add(&format!("T{j}"), 1.0, 1.0).unwrap();
        }
        let q = Query::with_match_rate("q", vec![0], 1.0, 1.0, 1.0, 1.0).unwrap();
        let inst = ProblemInstance::new(al, vec![q], Some(1.0), None).unwrap();
        assert_eq!(
            brute_force_integral_limited(&inst, Variant::Imls, 2).unwrap_err(),
            PlanError::InstanceTooLarge { size: 3, limit: 2 }
        );
    }

    #[test]
    fn missing_budget_is_reported() {
        let inst = demo_cpu_instance(); // no memory budget
        assert_eq!(
            brute_force_integral(&inst, Variant::Imls).unwrap_err(),
            PlanError::NonPositiveBudget("memory")
        );
    }
}
