//! Fractional memory-bound planning: per-type sampling rates instead of
//! keep/drop bits. The objective (utility as a product of survival rates)
//! is not concave, so rather than hill climbing the solver sweeps a finite
//! grid on the budget simplex and keeps the best point; the witness
//! operation demonstrates the non-concavity numerically.

use super::{
    evaluate_fractional, Coupling, FractionalPlan, GridForm, Guarantee, GuaranteeKind, PlanError,
    PlanEvaluation, ProblemInstance,
};

const GRID_POINT_CAP: u64 = 2_000_000;
const WITNESS_STEP: f64 = 1e-3;

/// The fractional memory problem rescaled so the budget constraint becomes
/// the standard simplex. Each sampling rate is reachable only up to
/// `min(1, budget / memory_rate)`; when the raw ratios sum below one the
/// budget already holds everything and no shedding is called for.
#[derive(Debug, Clone, PartialEq)]
pub struct FmlsNormalized {
    /// Per-type ratio of memory appetite to budget, unclamped.
    pub raw_bound: Vec<f64>,
    /// `min(1, raw_bound)`: the box the rescaled variables live in.
    pub box_bound: Vec<f64>,
    /// Budget at least the total appetite: keeping everything is optimal.
    pub degenerate: bool,
}

/// Rescales the memory-bound fractional problem onto the standard simplex.
pub fn fmls_normalize(inst: &ProblemInstance) -> Result<FmlsNormalized, PlanError> {
    let m = inst.require_memory_budget()?;
    if m <= 0.0 {
        return Err(PlanError::NonPositiveBudget("memory"));
    }
    let raw_bound: Vec<f64> =
        (0..inst.alphabet().len()).map(|j| inst.alphabet().memory_rate(j) / m).collect();
    let box_bound: Vec<f64> = raw_bound.iter().map(|&b| b.min(1.0)).collect();
    let degenerate = raw_bound.iter().sum::<f64>() < 1.0;
    Ok(FmlsNormalized { raw_bound, box_bound, degenerate })
}

/// Number of weak compositions of `k` into `vars` parts, saturating well
/// past any enforceable cap.
fn count_grid_points(vars: usize, k: u64) -> u128 {
    let mut c: u128 = 1;
    for i in 1..vars as u128 {
        c = c.saturating_mul(k as u128 + i);
        c /= i;
    }
    c
}

/// Advances `counts` to the lexicographically next weak composition of the
/// same total. Returns false once `counts` is the last one (all weight in
/// the first slot).
fn next_composition(counts: &mut [usize]) -> bool {
    let s = counts.len();
    if s <= 1 {
        return false;
    }
    let mut suffix = counts[s - 1];
    for j in (0..s - 1).rev() {
        if suffix > 0 {
            counts[j] += 1;
            for slot in &mut counts[j + 1..s - 1] {
                *slot = 0;
            }
            counts[s - 1] = suffix - 1;
            return true;
        }
        suffix += counts[j];
    }
    false
}

fn utility_at(inst: &ProblemInstance, x: &[f64]) -> f64 {
    inst.queries()
        .iter()
        .enumerate()
        .map(|(i, q)| inst.value(i) * q.pattern.iter().map(|&t| x[t]).product::<f64>())
        .sum()
}

/// Folds per-type sampling rates into a full plan: each query's rate is the
/// product of its pattern entries' rates.
fn fold_plan(inst: &ProblemInstance, x: Vec<f64>) -> FractionalPlan {
    let sample_query: Vec<f64> = inst
        .queries()
        .iter()
        .map(|q| q.pattern.iter().map(|&t| x[t]).product::<f64>())
        .collect();
    FractionalPlan { sample_event: x, sample_query }
}

fn guarantee_form(inst: &ProblemInstance, norm: &FmlsNormalized, k: usize) -> (GridForm, f64) {
    let d = inst.d();
    let regular = inst
        .queries()
        .iter()
        .all(|q| q.pattern.len() == d && q.distinct_types().len() == q.pattern.len());
    if regular && k > d {
        let min_raw = norm.raw_bound.iter().fold(f64::INFINITY, |acc, &r| acc.min(r));
        let beta = min_raw.min(1.0).powi(d as i32);
        let mut frac = 1.0;
        for t in 0..d {
            frac *= (k - t) as f64 / k as f64;
        }
        (GridForm::Scaled, beta * frac)
    } else if norm.raw_bound.iter().all(|&r| r >= 1.0) {
        (GridForm::Unscaled, 0.0)
    } else {
        (GridForm::Heuristic, 0.0)
    }
}

/// Sweeps the order-`k` grid on the budget simplex, mapping each grid point
/// to sampling rates by `x = min(1, share * budget / memory_rate)`, and
/// returns the best plan found. Ties keep the first maximizer in
/// lexicographic grid order. The guarantee reports which fraction of the
/// fractional optimum the sweep provably attains: a positive bound needs
/// every pattern to be the same length, free of repeated types, and shorter
/// than `k`; otherwise the form downgrades and the bound is zero.
pub fn fmls_grid_search(
    inst: &ProblemInstance,
    k: usize,
) -> Result<(FractionalPlan, PlanEvaluation), PlanError> {
    if k == 0 {
        return Err(PlanError::ZeroGridOrder);
    }
    let norm = fmls_normalize(inst)?;
    let m = inst.memory_budget().unwrap();
    let s = inst.alphabet().len();

    if norm.degenerate {
        let plan = fold_plan(inst, vec![1.0; s]);
        let mut eval = evaluate_fractional(inst, &plan, Coupling::Equality)?;
        eval.guarantee =
            Some(Guarantee { kind: GuaranteeKind::Exact, bound: eval.expected_utility });
        return Ok((plan, eval));
    }

    let points = count_grid_points(s, k as u64);
    if points > GRID_POINT_CAP as u128 {
        return Err(PlanError::GridTooLarge { points, cap: GRID_POINT_CAP });
    }

    let mut counts = vec![0usize; s];
    counts[s - 1] = k;
    let mut x = vec![0.0; s];
    let mut best_x = x.clone();
    let mut best_u = f64::NEG_INFINITY;
    loop {
        for j in 0..s {
            let share = counts[j] as f64 / k as f64;
            x[j] = (share * m / inst.alphabet().memory_rate(j)).min(1.0);
        }
        let u = utility_at(inst, &x);
        if u > best_u {
            best_u = u;
            best_x.copy_from_slice(&x);
        }
        if !next_composition(&mut counts) {
            break;
        }
    }

    let (form, bound) = guarantee_form(inst, &norm, k);
    let plan = fold_plan(inst, best_x);
    let mut eval = evaluate_fractional(inst, &plan, Coupling::Equality)?;
    eval.guarantee = Some(Guarantee { kind: GuaranteeKind::GridRelative { k, form }, bound });
    Ok((plan, eval))
}

/// Numeric evidence that the fractional objective is not concave along some
/// direction: a strictly positive second difference.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureWitness {
    /// Query whose pattern supplied the probing direction.
    pub query_id: String,
    /// Direction probed, as a vector over event types.
    pub direction: Vec<f64>,
    /// Central second difference of the utility at the barycenter along
    /// `direction`. Positive means convex there, so not concave.
    pub curvature: f64,
}

/// Probes the utility surface at the barycenter along the sum of the first
/// two distinct coordinates of the first multi-event query. Any query with
/// two or more pattern entries bends the surface upward along that
/// direction, which rules out concave-programming approaches.
pub fn nonconcavity_witness(inst: &ProblemInstance) -> Result<CurvatureWitness, PlanError> {
    let query = inst
        .queries()
        .iter()
        .find(|q| q.pattern.len() >= 2)
        .ok_or(PlanError::AllQueriesLinear)?;
    let a = query.pattern[0];
    let b = query.pattern.iter().copied().find(|&t| t != a).unwrap_or(query.pattern[1]);

    let s = inst.alphabet().len();
    let mut direction = vec![0.0; s];
    direction[a] += 1.0;
    direction[b] += 1.0;

    let center = vec![1.0 / s as f64; s];
    let h = WITNESS_STEP;
    let shifted = |sign: f64| -> f64 {
        let x: Vec<f64> =
            center.iter().zip(&direction).map(|(&c, &d)| c + sign * h * d).collect();
        utility_at(inst, &x)
    };
    let curvature = (shifted(1.0) - 2.0 * shifted(0.0) + shifted(-1.0)) / (h * h);
    Ok(CurvatureWitness { query_id: query.id.clone(), direction, curvature })
}
