//! CPU-bound planners. Each query is an indivisible processing obligation
//! of `expected_matches * cpu_cost_per_match` per unit time; the integral
//! problem is a 0-1 knapsack over queries, the fractional one a plain
//! fractional knapsack.

use super::{
    evaluate_fractional, evaluate_integral, Coupling, FractionalPlan, Guarantee, GuaranteeKind,
    IntegralPlan, PlanError, PlanEvaluation, ProblemInstance, Rounding, EVAL_TOL,
};

const LATTICE_CAP: u64 = 50_000_000;

fn keep_events_of_selected(inst: &ProblemInstance, keep_query: &[bool]) -> Vec<bool> {
    let mut keep_event = vec![false; inst.alphabet().len()];
    for (i, q) in inst.queries().iter().enumerate() {
        if keep_query[i] {
            for t in q.distinct_types() {
                keep_event[t] = true;
            }
        }
    }
    keep_event
}

fn integral_cpu_result(
    inst: &ProblemInstance,
    keep_query: Vec<bool>,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    let keep_event = keep_events_of_selected(inst, &keep_query);
    let plan = IntegralPlan { keep_event, keep_query };
    let eval = evaluate_integral(inst, &plan, Coupling::Inequality)?;
    Ok((plan, eval))
}

/// Exact CPU-bound optimum: 0-1 knapsack over queries with the budget and
/// weights discretized at `resolution`. Ties prefer dropping
/// earlier-indexed queries.
pub fn icls_dp(
    inst: &ProblemInstance,
    resolution: f64,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(PlanError::NonPositiveResolution(resolution));
    }
    let c = inst.require_cpu_budget()?;
    let nq = inst.queries().len();
    if c <= 0.0 {
        let (plan, mut eval) = integral_cpu_result(inst, vec![false; nq])?;
        eval.guarantee = Some(Guarantee { kind: GuaranteeKind::Exact, bound: 0.0 });
        return Ok((plan, eval));
    }

    let capacity = (c / resolution + 1e-9).floor() as u64;
    if capacity + 1 > LATTICE_CAP / nq.max(1) as u64 {
        return Err(PlanError::LatticeTooLarge {
            cells: (capacity as u128 + 1) * nq as u128,
            cap: LATTICE_CAP,
        });
    }
    let mut weights = vec![0u64; nq];
    let mut max_abs_error: f64 = 0.0;
    for (i, w) in weights.iter_mut().enumerate() {
        let real = inst.cpu_weight(i);
        *w = (real / resolution).round() as u64;
        max_abs_error = max_abs_error.max((*w as f64 * resolution - real).abs());
    }

    // suffix[t][b]: best value from queries t.. within b budget steps.
    let nb = capacity as usize + 1;
    let mut suffix = vec![vec![0.0f64; nb]; nq + 1];
    for t in (0..nq).rev() {
        for b in 0..nb {
            let skip = suffix[t + 1][b];
            let w = weights[t] as usize;
            let take = if w <= b { inst.value(t) + suffix[t + 1][b - w] } else { f64::MIN };
            suffix[t][b] = skip.max(take);
        }
    }
    let mut keep_query = vec![false; nq];
    let mut b = capacity as usize;
    for t in 0..nq {
        let skip = suffix[t + 1][b];
        if skip == suffix[t][b] {
            continue; // dropping is lexicographically smaller
        }
        keep_query[t] = true;
        b -= weights[t] as usize;
    }

    let (plan, mut eval) = integral_cpu_result(inst, keep_query)?;
    eval.guarantee = Some(Guarantee { kind: GuaranteeKind::Exact, bound: eval.expected_utility });
    eval.rounding = Some(Rounding { resolution, max_abs_error });
    Ok((plan, eval))
}

/// Approximate CPU-bound plan within `1 - epsilon` of optimal: values are
/// scaled down and floored, then a minimum-weight-per-value dynamic program
/// runs on exact weights.
pub fn icls_fptas(
    inst: &ProblemInstance,
    epsilon: f64,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PlanError::InvalidEpsilon(epsilon));
    }
    let c = inst.require_cpu_budget()?;
    let nq = inst.queries().len();

    let fits = |i: usize| inst.cpu_weight(i) <= c + EVAL_TOL;
    let v_max = (0..nq).filter(|&i| fits(i)).map(|i| inst.value(i)).fold(0.0, f64::max);
    if c <= 0.0 || v_max <= 0.0 {
        let (plan, mut eval) = integral_cpu_result(inst, vec![false; nq])?;
        eval.guarantee =
            Some(Guarantee { kind: GuaranteeKind::Fptas { epsilon }, bound: 0.0 });
        return Ok((plan, eval));
    }

    let mu = epsilon * v_max / nq as f64;
    let scaled: Vec<u64> = (0..nq)
        .map(|i| if fits(i) { (inst.value(i) / mu).floor() as u64 } else { 0 })
        .collect();
    let v_total: u64 = scaled.iter().sum();
    if v_total as u128 + 1 > LATTICE_CAP as u128 / nq.max(1) as u128 {
        return Err(PlanError::LatticeTooLarge {
            cells: (v_total as u128 + 1) * nq as u128,
            cap: LATTICE_CAP,
        });
    }

    // minw[t][v]: least CPU the suffix t.. needs to bank exactly v scaled
    // value; oversized items are barred by an infinite weight.
    let nv = v_total as usize + 1;
    let mut minw = vec![vec![f64::INFINITY; nv]; nq + 1];
    minw[nq][0] = 0.0;
    for t in (0..nq).rev() {
        for v in 0..nv {
            let skip = minw[t + 1][v];
            let sv = scaled[t] as usize;
            let take = if fits(t) && sv <= v {
                inst.cpu_weight(t) + minw[t + 1][v - sv]
            } else {
                f64::INFINITY
            };
            minw[t][v] = skip.min(take);
        }
    }
    let best_v = (0..nv).rev().find(|&v| minw[0][v] <= c + EVAL_TOL).unwrap_or(0);

    let mut keep_query = vec![false; nq];
    let mut v = best_v;
    for t in 0..nq {
        let skip = minw[t + 1][v];
        let sv = scaled[t] as usize;
        let take = if fits(t) && sv <= v {
            inst.cpu_weight(t) + minw[t + 1][v - sv]
        } else {
            f64::INFINITY
        };
        if skip <= take {
            continue;
        }
        keep_query[t] = true;
        v -= sv;
    }

    let (plan, mut eval) = integral_cpu_result(inst, keep_query)?;
    eval.guarantee = Some(Guarantee {
        kind: GuaranteeKind::Fptas { epsilon },
        bound: eval.expected_utility / (1.0 - epsilon),
    });
    Ok((plan, eval))
}

/// Fractional CPU-bound optimum: greedy fill in descending utility-per-cost
/// order, with one fractional query at the boundary. This is the exact
/// optimum of the corresponding linear program.
pub fn fcls_greedy(inst: &ProblemInstance) -> Result<(FractionalPlan, PlanEvaluation), PlanError> {
    let c = inst.require_cpu_budget()?;
    let nq = inst.queries().len();
    let mut order: Vec<usize> = (0..nq).collect();
    order.sort_by(|&a, &b| {
        let qa = &inst.queries()[a];
        let qb = &inst.queries()[b];
        let ra = qa.utility_weight / qa.cpu_cost_per_match;
        let rb = qb.utility_weight / qb.cpu_cost_per_match;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });

    let mut sample_query = vec![0.0; nq];
    let mut remaining = c;
    for &i in &order {
        let w = inst.cpu_weight(i);
        if w <= remaining {
            sample_query[i] = 1.0;
            remaining -= w;
        } else if remaining > 0.0 {
            sample_query[i] = remaining / w;
            remaining = 0.0;
        } else {
            break;
        }
    }

    let plan = FractionalPlan { sample_event: vec![1.0; inst.alphabet().len()], sample_query };
    let mut eval = evaluate_fractional(inst, &plan, Coupling::Inequality)?;
    eval.guarantee = Some(Guarantee { kind: GuaranteeKind::Exact, bound: eval.expected_utility });
    Ok((plan, eval))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alphabet, Query};
    use crate::plan::brute::{brute_force_integral, Variant};
    use crate::synth::demo_cpu_instance;
    use approx::assert_relative_eq;

    fn uniform_instance(n: usize, budget: f64) -> ProblemInstance {
        let mut al = Alphabet::new();
        for j in 0..n {
            al.add(&format!("T{j}"), 1.0, 1.0).unwrap();
        }
        let queries = (0..n)
            .map(|i| Query::with_match_rate(&format!("q{i}"), vec![i], 1.0, 2.0, 1.0, 1.0).unwrap())
            .collect();
        ProblemInstance::new(al, queries, None, Some(budget)).unwrap()
    }

    #[test]
    fn dp_solves_the_demo() {
        let (plan, eval) = icls_dp(&demo_cpu_instance(), 1e-3).unwrap();
        assert_eq!(plan.keep_query, vec![false, true, true]);
        assert_relative_eq!(eval.expected_utility, 1.0);
        assert!(eval.feasible_cpu);
        // Q2 and Q3 together touch every type.
        assert_eq!(plan.keep_event, vec![true; 5]);
    }

    #[test]
    fn dp_extremes() {
        let inst = demo_cpu_instance();
        let loose =
            ProblemInstance::new(inst.alphabet().clone(), inst.queries().to_vec(), None, Some(10.0))
                .unwrap();
        let (plan, eval) = icls_dp(&loose, 1e-3).unwrap();
        assert_eq!(plan.keep_query, vec![true; 3]);
        assert_relative_eq!(eval.expected_utility, 1.2);

        let zero =
            ProblemInstance::new(inst.alphabet().clone(), inst.queries().to_vec(), None, Some(0.0))
                .unwrap();
        let (plan, eval) = icls_dp(&zero, 1e-3).unwrap();
        assert_eq!(plan.keep_query, vec![false; 3]);
        assert_eq!(eval.expected_utility, 0.0);
    }

    #[test]
    fn dp_matches_brute_force_on_demo() {
        let inst = demo_cpu_instance();
        let (_, dp) = icls_dp(&inst, 1e-3).unwrap();
        let (_, bf) = brute_force_integral(&inst, Variant::Icls).unwrap();
        assert_relative_eq!(dp.expected_utility, bf.expected_utility);
    }

    #[test]
    fn fptas_reaches_the_demo_optimum() {
        let (_, eval) = icls_fptas(&demo_cpu_instance(), 0.1).unwrap();
        assert!(eval.expected_utility >= 0.9);
        assert_relative_eq!(eval.expected_utility, 1.0);
        assert!(eval.feasible_cpu);
        let g = eval.guarantee.unwrap();
        assert_eq!(g.kind, GuaranteeKind::Fptas { epsilon: 0.1 });
        assert!(g.bound >= eval.expected_utility);
    }

    #[test]
    fn fptas_single_query_is_exact() {
        let mut al = Alphabet::new();
        al.add("A", 1.0, 1.0).unwrap();
        let queries = vec![Query::with_match_rate("q", vec![0], 1.0, 2.0, 1.0, 1.0).unwrap()];
        let inst = ProblemInstance::new(al, queries, None, Some(1.5)).unwrap();
        for eps in [0.01, 0.5, 0.9] {
            let (plan, eval) = icls_fptas(&inst, eps).unwrap();
            assert_eq!(plan.keep_query, vec![true]);
            assert_relative_eq!(eval.expected_utility, 2.0);
        }
    }

    #[test]
    fn fptas_uniform_items_fill_the_budget() {
        let inst = uniform_instance(5, 3.0);
        let (plan, eval) = icls_fptas(&inst, 0.2).unwrap();
        assert_eq!(plan.keep_query.iter().filter(|&&k| k).count(), 3);
        assert_relative_eq!(eval.expected_utility, 6.0);
    }

    #[test]
    fn fptas_rejects_bad_epsilon() {
        let inst = demo_cpu_instance();
        assert_eq!(icls_fptas(&inst, 0.0).unwrap_err(), PlanError::InvalidEpsilon(0.0));
        assert_eq!(icls_fptas(&inst, 1.0).unwrap_err(), PlanError::InvalidEpsilon(1.0));
    }

    #[test]
    fn greedy_fills_in_ratio_order() {
        let (plan, eval) = fcls_greedy(&demo_cpu_instance()).unwrap();
        assert_eq!(plan.sample_query, vec![0.0, 1.0, 1.0]);
        assert_relative_eq!(eval.expected_utility, 1.0);
        assert_relative_eq!(eval.cpu_use, 0.4);
    }

    #[test]
    fn greedy_splits_the_marginal_query() {
        let inst = demo_cpu_instance();
        let half = ProblemInstance::new(
            inst.alphabet().clone(),
            inst.queries().to_vec(),
            None,
            Some(0.3),
        )
        .unwrap();
        let (plan, eval) = fcls_greedy(&half).unwrap();
        // Q3 (w/c = 3) fills 0.2, Q2 (w/c = 2) gets half its 0.2 need.
        assert_eq!(plan.sample_query[0], 0.0);
        assert_relative_eq!(plan.sample_query[1], 0.5);
        assert_eq!(plan.sample_query[2], 1.0);
        assert_relative_eq!(eval.expected_utility, 0.6 + 0.2);
        assert_relative_eq!(eval.cpu_use, 0.3);
    }

    #[test]
    fn greedy_extremes() {
        let inst = demo_cpu_instance();
        let zero =
            ProblemInstance::new(inst.alphabet().clone(), inst.queries().to_vec(), None, Some(0.0))
                .unwrap();
        let (plan, _) = fcls_greedy(&zero).unwrap();
        assert_eq!(plan.sample_query, vec![0.0; 3]);

        let loose =
            ProblemInstance::new(inst.alphabet().clone(), inst.queries().to_vec(), None, Some(9.0))
                .unwrap();
        let (plan, eval) = fcls_greedy(&loose).unwrap();
        assert_eq!(plan.sample_query, vec![1.0; 3]);
        assert_relative_eq!(eval.expected_utility, 1.2);
    }

    #[test]
    fn missing_cpu_budget_is_reported() {
        let inst = crate::synth::demo_memory_instance();
        assert_eq!(icls_dp(&inst, 1e-3).unwrap_err(), PlanError::NonPositiveBudget("CPU"));
        assert_eq!(fcls_greedy(&inst).unwrap_err(), PlanError::NonPositiveBudget("CPU"));
    }
}
