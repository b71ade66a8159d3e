//! Dense two-phase primal simplex.
//!
//! The relaxation-and-rounding planners need exact, reproducible solutions
//! of tiny LPs (one variable per event type plus one per query), so this is
//! a from-scratch dense tableau solver: no sparsity, no revised simplex, no
//! warm starts. Dantzig pricing with a permanent switch to Bland's rule
//! after a stall guarantees termination; every returned optimum is
//! re-checked against the original constraints before it leaves the solver.

use thiserror::Error;

/// Residual tolerance for accepting a solution as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Magnitudes at or below this never pivot.
pub const PIVOT_TOL: f64 = 1e-12;
/// Reduced costs above this (toward improvement) keep iterating.
pub const REDUCED_COST_TOL: f64 = 1e-9;

const STALL_LIMIT: u32 = 100;
const ITERATION_CAP: u32 = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("constraint {0} has {1} coefficients, expected {2}")]
    DimensionMismatch(usize, usize, usize),
    #[error("variable {0} has invalid bounds [{1}, {2}]")]
    InvalidBounds(usize, f64, f64),
    #[error("non-finite coefficient in the program")]
    NonFiniteCoefficient,
    #[error("simplex lost numerical footing (degenerate pivots exhausted)")]
    NumericalInstability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over real variables with per-variable box bounds.
/// Default bounds are `[0, +inf)`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense: Sense::Min,
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        let mut lp = Self::minimize(objective);
        lp.sense = Sense::Max;
        lp
    }

    pub fn le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation: Relation::Le, rhs });
        self
    }

    pub fn ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation: Relation::Ge, rhs });
        self
    }

    pub fn eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation: Relation::Eq, rhs });
        self
    }

    pub fn bound(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver outcome. `values` and `objective_value` are meaningful only when
/// `status` is `Optimal`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        LpSolution { status, values: Vec::new(), objective_value: 0.0 }
    }
}

enum Pricing {
    Finished,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>, // m x (ncols + 1), rhs last
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), LpError> {
        let piv = self.rows[r][c];
        if piv.abs() <= PIVOT_TOL {
            return Err(LpError::NumericalInstability);
        }
        let inv = 1.0 / piv;
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            row[c] = 0.0; // exact elimination in the pivot column
        }
        self.basis[r] = c;
        Ok(())
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        self.basis.iter().zip(&self.rows).map(|(&b, row)| costs[b] * row[self.ncols]).sum()
    }

    // Runs simplex iterations to optimality for `costs`. Columns at or past
    // `banned_from` never enter the basis.
    fn optimize(&mut self, costs: &[f64], banned_from: usize) -> Result<Pricing, LpError> {
        let m = self.rows.len();
        let mut bland = false;
        let mut stall = 0u32;
        let mut best_z = self.objective(costs);
        for _ in 0..ITERATION_CAP {
            // Reduced costs priced against the current basis.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..banned_from {
                let mut rc = costs[j];
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    let cb = costs[b];
                    if cb != 0.0 {
                        rc -= cb * row[j];
                    }
                }
                if rc < -REDUCED_COST_TOL {
                    if bland {
                        entering = Some((j, rc));
                        break;
                    }
                    match entering {
                        Some((_, best)) if rc >= best => {}
                        _ => entering = Some((j, rc)),
                    }
                }
            }
            let Some((col, _)) = entering else {
                return Ok(Pricing::Finished);
            };
            // Ratio test; ties go to the smallest basis index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.rows[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    match leave {
                        Some((li, lr)) => {
                            if ratio < lr || (ratio == lr && self.basis[i] < self.basis[li]) {
                                leave = Some((i, ratio));
                            }
                        }
                        None => leave = Some((i, ratio)),
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(Pricing::Unbounded);
            };
            self.pivot(row, col)?;
            let z = self.objective(costs);
            if z < best_z - PIVOT_TOL {
                best_z = z;
                stall = 0;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }
        }
        Err(LpError::NumericalInstability)
    }
}

/// Solves the program. Optimal solutions are basic feasible points whose
/// residuals against the original constraints and bounds are within
/// [`FEASIBILITY_TOL`]; the reported objective is recomputed from the
/// original coefficients, not read off the tableau.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.objective.len();
    if lp.bounds.len() != n {
        return Err(LpError::DimensionMismatch(usize::MAX, lp.bounds.len(), n));
    }
    if !lp.objective.iter().all(|c| c.is_finite()) {
        return Err(LpError::NonFiniteCoefficient);
    }
    for (k, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(LpError::DimensionMismatch(k, c.coeffs.len(), n));
        }
        if !c.coeffs.iter().all(|v| v.is_finite()) || !c.rhs.is_finite() {
            return Err(LpError::NonFiniteCoefficient);
        }
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if !lo.is_finite() || hi < lo || hi.is_nan() {
            return Err(LpError::InvalidBounds(j, lo, hi));
        }
    }

    // Minimization over shifted variables u = x - lo >= 0; finite upper
    // bounds become ordinary rows.
    let min_costs: Vec<f64> = match lp.sense {
        Sense::Min => lp.objective.clone(),
        Sense::Max => lp.objective.iter().map(|c| -c).collect(),
    };
    let lows: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();

    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lows).map(|(a, l)| a * l).sum();
        rows.push((c.coeffs.clone(), c.relation, c.rhs - shift));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            rows.push((coeffs, Relation::Le, hi - lo));
        }
    }
    for (coeffs, relation, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            for v in coeffs.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *relation = match *relation {
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
                Relation::Ge => Relation::Le,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = n + n_slack;
    let ncols = n + n_slack + n_art;

    let mut tab = Tableau {
        rows: vec![vec![0.0; ncols + 1]; m],
        basis: vec![0; m],
        ncols,
    };
    let mut next_slack = n;
    let mut next_art = art_start;
    for (i, (coeffs, relation, rhs)) in rows.iter().enumerate() {
        tab.rows[i][..n].copy_from_slice(coeffs);
        tab.rows[i][ncols] = *rhs;
        match relation {
            Relation::Le => {
                tab.rows[i][next_slack] = 1.0;
                tab.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                tab.rows[i][next_slack] = -1.0;
                next_slack += 1;
                tab.rows[i][next_art] = 1.0;
                tab.basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                tab.rows[i][next_art] = 1.0;
                tab.basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        for c in phase1.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        match tab.optimize(&phase1, ncols)? {
            Pricing::Finished => {}
            Pricing::Unbounded => return Err(LpError::NumericalInstability),
        }
        if tab.objective(&phase1) > FEASIBILITY_TOL {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        // Swap still-basic artificials for real columns; rows that offer no
        // pivot are redundant and stay inert at zero.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| tab.rows[i][c].abs() > PIVOT_TOL) {
                    tab.pivot(i, c)?;
                }
            }
        }
    }

    let mut phase2 = vec![0.0; ncols];
    phase2[..n].copy_from_slice(&min_costs);
    match tab.optimize(&phase2, art_start)? {
        Pricing::Finished => {}
        Pricing::Unbounded => return Ok(LpSolution::non_optimal(LpStatus::Unbounded)),
    }

    let mut values = lows;
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            values[b] += tab.rhs(i);
        }
    }

    for c in &lp.constraints {
        let lhs: f64 = c.coeffs.iter().zip(&values).map(|(a, x)| a * x).sum();
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs + FEASIBILITY_TOL,
            Relation::Eq => (lhs - c.rhs).abs() <= FEASIBILITY_TOL,
            Relation::Ge => lhs >= c.rhs - FEASIBILITY_TOL,
        };
        if !ok {
            return Err(LpError::NumericalInstability);
        }
    }
    for (&x, &(lo, hi)) in values.iter().zip(&lp.bounds) {
        if x < lo - FEASIBILITY_TOL || x > hi + FEASIBILITY_TOL {
            return Err(LpError::NumericalInstability);
        }
    }

    let objective_value = lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
    Ok(LpSolution { status: LpStatus::Optimal, values, objective_value })
}
