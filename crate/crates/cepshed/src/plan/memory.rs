//! Memory-bound integral planners: LP rounding, ratio greedy, and the
//! exact per-component dynamic program.

use super::{
    coverage, evaluate_integral, Coupling, Guarantee, GuaranteeKind, IntegralPlan, PlanError,
    PlanEvaluation, ProblemInstance, Rounding, EVAL_TOL,
};
use crate::lp::{solve_lp, LinearProgram, LpStatus};

/// Largest event-sharing component the exact DP will enumerate.
pub const COMPONENT_LIMIT: usize = 16;

// Shared by the bicriteria and tricriteria planners: the drop-variable
// relaxation. Variables are [xhat_0..xhat_{s-1}, yhat_0..yhat_{q-1}] where
// xhat_j = 1 drops type j, yhat_i = 1 loses query i. Minimizes lost utility
// subject to yhat_i >= xhat_j for every type in the query and the retained
// memory fitting the budget; `cpu_budget` adds the analogous retained-CPU
// row.
pub(super) fn drop_relaxation(
    inst: &ProblemInstance,
    memory_budget: f64,
    cpu_budget: Option<f64>,
) -> Result<Vec<f64>, PlanError> {
    let s = inst.alphabet().len();
    let q = inst.queries().len();
    let n = s + q;

    let mut objective = vec![0.0; n];
    for i in 0..q {
        objective[s + i] = inst.value(i);
    }
    let mut lp = LinearProgram::minimize(objective);
    for j in 0..n {
        lp.bound(j, 0.0, 1.0);
    }
    for (i, query) in inst.queries().iter().enumerate() {
        for t in query.distinct_types() {
            let mut row = vec![0.0; n];
            row[s + i] = 1.0;
            row[t] = -1.0;
            lp.ge(row, 0.0);
        }
    }
    let total_memory: f64 = (0..s).map(|j| inst.alphabet().memory_rate(j)).sum();
    let mut mem_row = vec![0.0; n];
    for (j, slot) in mem_row.iter_mut().enumerate().take(s) {
        *slot = inst.alphabet().memory_rate(j);
    }
    lp.ge(mem_row, total_memory - memory_budget);
    if let Some(c) = cpu_budget {
        let total_cpu: f64 = (0..q).map(|i| inst.cpu_weight(i)).sum();
        let mut cpu_row = vec![0.0; n];
        for i in 0..q {
            cpu_row[s + i] = inst.cpu_weight(i);
        }
        lp.ge(cpu_row, total_cpu - c);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(PlanError::RelaxationNotOptimal(sol.status));
    }
    Ok(sol.values)
}

pub(super) fn check_tau(tau: f64) -> Result<(), PlanError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(PlanError::InvalidTau(tau));
    }
    Ok(())
}

/// LP-relaxation rounding for the memory-bound problem. Accepts every query
/// whose relaxed drop value is at most `tau` and keeps the union of their
/// event types. Lost utility is at most the optimal loss over `tau`;
/// retained memory is at most the budget over `1 - tau`.
pub fn imls_bicriteria(
    inst: &ProblemInstance,
    tau: f64,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    check_tau(tau)?;
    let m = inst.require_memory_budget()?;
    if m <= 0.0 {
        return Err(PlanError::NonPositiveBudget("memory"));
    }
    let values = drop_relaxation(inst, m, None)?;
    let s = inst.alphabet().len();

    let mut keep_event = vec![false; s];
    let mut lp_loss = 0.0;
    for (i, query) in inst.queries().iter().enumerate() {
        let yhat = values[s + i];
        lp_loss += inst.value(i) * yhat;
        if yhat <= tau {
            for t in query.distinct_types() {
                keep_event[t] = true;
            }
        }
    }
    let keep_query = coverage(inst, &keep_event);
    let plan = IntegralPlan { keep_event, keep_query };
    let mut eval = evaluate_integral(inst, &plan, Coupling::Equality)?;
    eval.guarantee =
        Some(Guarantee { kind: GuaranteeKind::Bicriteria { tau }, bound: lp_loss / tau });
    Ok((plan, eval))
}

/// Greedy knapsack over whole queries, ordered by utility per unit of
/// memory footprint. Stops at the first query that does not fit; the
/// leftover slack is what the `(1 - f) / p` ratio accounts for.
pub fn imls_knapsack_greedy(
    inst: &ProblemInstance,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    let m = inst.require_memory_budget()?;
    if m <= 0.0 {
        return Err(PlanError::NonPositiveBudget("memory"));
    }
    for (i, query) in inst.queries().iter().enumerate() {
        if inst.memory_weight(i) >= m {
            return Err(PlanError::QueryLargerThanBudget(query.id.clone()));
        }
    }
    let nq = inst.queries().len();
    let mut order: Vec<usize> = (0..nq).collect();
    order.sort_by(|&a, &b| {
        let ra = inst.value(a) / inst.memory_weight(a);
        let rb = inst.value(b) / inst.memory_weight(b);
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });

    let mut used = 0.0;
    let mut selected = vec![false; nq];
    for &i in &order {
        let w = inst.memory_weight(i);
        if used + w <= m + EVAL_TOL {
            selected[i] = true;
            used += w;
        } else {
            break;
        }
    }

    let mut keep_event = vec![false; inst.alphabet().len()];
    for (i, query) in inst.queries().iter().enumerate() {
        if selected[i] {
            for t in query.distinct_types() {
                keep_event[t] = true;
            }
        }
    }
    let keep_query = coverage(inst, &keep_event);
    let plan = IntegralPlan { keep_event, keep_query };
    let mut eval = evaluate_integral(inst, &plan, Coupling::Equality)?;
    let f = inst.f().unwrap();
    let rho = (1.0 - f) / inst.p() as f64;
    eval.guarantee =
        Some(Guarantee { kind: GuaranteeKind::Ratio { rho }, bound: eval.expected_utility / rho });
    Ok((plan, eval))
}

// Disjoint-set union over event types; queries glue their types together.
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// `imls_multitenant_dp` with the default component limit.
pub fn imls_multitenant_dp(
    inst: &ProblemInstance,
    resolution: f64,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    imls_multitenant_dp_limited(inst, resolution, COMPONENT_LIMIT)
}

/// Exact memory-bound optimum for workloads whose queries split into small
/// event-sharing components (independent tenants): enumerate each
/// component's event subsets, then combine components with an integer
/// knapsack over the discretized budget.
pub fn imls_multitenant_dp_limited(
    inst: &ProblemInstance,
    resolution: f64,
    component_limit: usize,
) -> Result<(IntegralPlan, PlanEvaluation), PlanError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(PlanError::NonPositiveResolution(resolution));
    }
    let m = inst.require_memory_budget()?;
    let budget_steps = m / resolution;
    if (budget_steps - budget_steps.round()).abs() > 1e-6 {
        return Err(PlanError::NonIntegralBudget(budget_steps));
    }
    let budget = budget_steps.round() as u64;

    let s = inst.alphabet().len();
    let mut weights = vec![0u64; s];
    let mut max_abs_error: f64 = 0.0;
    for (j, w) in weights.iter_mut().enumerate() {
        let real = inst.alphabet().memory_rate(j);
        *w = (real / resolution).round() as u64;
        max_abs_error = max_abs_error.max((*w as f64 * resolution - real).abs());
    }

    let mut dsu = Dsu::new(s);
    for query in inst.queries() {
        let ts = query.distinct_types();
        for w in ts.windows(2) {
            dsu.union(w[0], w[1]);
        }
    }
    // Components that hold at least one query, ordered by smallest member.
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; s];
    for j in 0..s {
        let root = dsu.find(j);
        let used = inst.queries().iter().any(|q| q.pattern.contains(&j));
        if !used {
            continue;
        }
        if root_slot[root] == usize::MAX {
            root_slot[root] = components.len();
            components.push(Vec::new());
        }
        components[root_slot[root]].push(j);
    }
    for comp in &components {
        if comp.len() > component_limit {
            return Err(PlanError::ComponentTooLarge { size: comp.len(), limit: component_limit });
        }
    }

    // Per component: every subset's (rounded memory, utility), plus a
    // Pareto list for the cross-component DP.
    struct CompOptions {
        types: Vec<usize>,
        subsets: Vec<(u64, f64, u32)>, // (memory, utility, member mask), lex order
        pareto: Vec<(u64, f64)>,
    }
    let mut options = Vec::with_capacity(components.len());
    for types in &components {
        let queries_here: Vec<usize> = inst
            .queries()
            .iter()
            .enumerate()
            .filter(|(_, q)| types.contains(&q.pattern[0]))
            .map(|(i, _)| i)
            .collect();
        let k = types.len();
        let mut subsets = Vec::with_capacity(1 << k);
        for mask in 0..1u32 << k {
            let mem: u64 = (0..k).filter(|&b| mask >> b & 1 == 1).map(|b| weights[types[b]]).sum();
            let utility: f64 = queries_here
                .iter()
                .filter(|&&i| {
                    inst.queries()[i]
                        .distinct_types()
                        .iter()
                        .all(|t| mask >> types.iter().position(|x| x == t).unwrap() & 1 == 1)
                })
                .map(|&i| inst.value(i))
                .sum();
            subsets.push((mem, utility, mask));
        }
        // Lex order over the member vector: drop-before-keep on the
        // earliest type. Bit b of the mask is the b-th smallest type, so
        // this is an unsigned compare of bit-reversed masks.
        subsets.sort_by_key(|&(_, _, mask)| mask.reverse_bits());
        let mut by_mem: Vec<(u64, f64)> = subsets.iter().map(|&(mem, u, _)| (mem, u)).collect();
        by_mem.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.partial_cmp(&a.1).unwrap()));
        let mut pareto: Vec<(u64, f64)> = Vec::new();
        for (mem, u) in by_mem {
            if pareto.last().map_or(true, |&(_, pu)| u > pu) {
                pareto.push((mem, u));
            }
        }
        options.push(CompOptions { types: types.clone(), subsets, pareto });
    }

    // suffix[t][b]: best utility components t.. can draw from b budget steps.
    let nb = budget as usize + 1;
    let mut suffix = vec![vec![0.0f64; nb]; options.len() + 1];
    for t in (0..options.len()).rev() {
        for b in 0..nb {
            let mut best = 0.0f64;
            for &(mem, u) in &options[t].pareto {
                if mem as usize > b {
                    break;
                }
                let cand = u + suffix[t + 1][b - mem as usize];
                if cand > best {
                    best = cand;
                }
            }
            suffix[t][b] = best;
        }
    }

    // Walk forward, taking per component the lex-smallest subset that still
    // reaches the overall optimum.
    let mut keep_event = vec![false; s];
    let mut remaining = budget as usize;
    for (t, comp) in options.iter().enumerate() {
        let target = suffix[t][remaining];
        let choice = comp
            .subsets
            .iter()
            .find(|&&(mem, u, _)| {
                mem as usize <= remaining && u + suffix[t + 1][remaining - mem as usize] == target
            })
            .expect("dp table inconsistent");
        for (b, &ty) in comp.types.iter().enumerate() {
            keep_event[ty] = choice.2 >> b & 1 == 1;
        }
        remaining -= choice.0 as usize;
    }

    let keep_query = coverage(inst, &keep_event);
    let plan = IntegralPlan { keep_event, keep_query };
    let mut eval = evaluate_integral(inst, &plan, Coupling::Equality)?;
    eval.guarantee = Some(Guarantee { kind: GuaranteeKind::Exact, bound: eval.expected_utility });
    eval.rounding = Some(Rounding { resolution, max_abs_error });
    Ok((plan, eval))
}
