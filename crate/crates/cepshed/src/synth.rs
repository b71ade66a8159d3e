//! Canned and randomized problem instances.
//!
//! The demo instances are small five-type workloads used across tests, the
//! verification command, and the guide. The random generators deliberately
//! emit integer-grid weights so the discretizing solvers are exact on them
//! and oracle comparisons are meaningful.

use rand::Rng;

use crate::model::{Alphabet, Query};
use crate::plan::ProblemInstance;

fn five_type_alphabet() -> Alphabet {
    let mut al = Alphabet::new();
    for name in ["A", "B", "C", "D", "E"] {
        al.add(name, 1.0, 1.0).unwrap();
    }
    al
}

fn three_queries(match_rate: f64) -> Vec<Query> {
    vec![
        Query::with_match_rate("Q1", vec![0, 2], 5.0, 1.0, 1.0, match_rate).unwrap(),
        Query::with_match_rate("Q2", vec![2, 4], 5.0, 2.0, 1.0, match_rate).unwrap(),
        Query::with_match_rate("Q3", vec![0, 1, 2, 3], 5.0, 3.0, 1.0, match_rate).unwrap(),
    ]
}

/// Memory-bound demo: five unit-weight types, three queries worth 2, 4, and
/// 6 utility per unit time, and room for only three types. The optimum keeps
/// types A, C, E and runs the first two queries for utility 6.
pub fn demo_memory_instance() -> ProblemInstance {
    ProblemInstance::new(five_type_alphabet(), three_queries(2.0), Some(3.0), None).unwrap()
}

/// CPU-bound demo: the same queries at 0.2 matches per unit time and unit
/// per-match cost, with CPU for only two of them. The optimum runs Q2 and
/// Q3 for utility 1.0 per unit time.
pub fn demo_cpu_instance() -> ProblemInstance {
    ProblemInstance::new(five_type_alphabet(), three_queries(0.2), None, Some(0.4)).unwrap()
}

/// Dual-bound demo: memory for three types and CPU for two queries. The
/// optimum keeps A, C, E and runs Q1 and Q2 for utility 0.6 per unit time.
pub fn demo_dual_instance() -> ProblemInstance {
    ProblemInstance::new(five_type_alphabet(), three_queries(0.2), Some(3.0), Some(0.4)).unwrap()
}

/// Random instance with small integer arrival rates, unit memory costs,
/// integer match rates and weights, and integer budgets: every weight the
/// planners see lands exactly on a unit grid.
pub fn random_integer_instance<R: Rng + ?Sized>(rng: &mut R) -> ProblemInstance {
    let n_types = rng.random_range(2..=10);
    let mut al = Alphabet::new();
    for j in 0..n_types {
        let rate = rng.random_range(1..=3) as f64;
        al.add(&format!("T{j}"), rate, 1.0).unwrap();
    }
    let n_queries = rng.random_range(1..=8);
    let mut queries = Vec::with_capacity(n_queries);
    for i in 0..n_queries {
        let len = rng.random_range(1..=3.min(n_types));
        let mut pattern = Vec::with_capacity(len);
        while pattern.len() < len {
            let t = rng.random_range(0..n_types);
            if !pattern.contains(&t) {
                pattern.push(t);
            }
        }
        let weight = rng.random_range(1..=5) as f64;
        let rate = rng.random_range(1..=3) as f64;
        queries.push(
            Query::with_match_rate(&format!("Q{i}"), pattern, 5.0, weight, 1.0, rate).unwrap(),
        );
    }
    let total_memory: f64 = (0..al.len()).map(|j| al.memory_rate(j)).sum();
    let total_cpu: f64 = queries.iter().map(|q| q.expected_matches.unwrap()).sum();
    let memory_budget = rng.random_range(1..=total_memory as u64 + 1) as f64;
    let cpu_budget = rng.random_range(0..=total_cpu as u64 + 1) as f64;
    ProblemInstance::new(al, queries, Some(memory_budget), Some(cpu_budget)).unwrap()
}

/// Random instance where every query has the same length `d` and no
/// repeated types: the shape for which the grid search carries a
/// quantitative bound.
pub fn random_regular_instance<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ProblemInstance {
    let n_types = rng.random_range(d.max(2)..=6.max(d));
    let mut al = Alphabet::new();
    for j in 0..n_types {
        let rate = rng.random_range(0.2..=2.0);
        let mem = rng.random_range(0.5..=2.0);
        al.add(&format!("T{j}"), rate, mem).unwrap();
    }
    let n_queries = rng.random_range(1..=4);
    let mut queries = Vec::with_capacity(n_queries);
    for i in 0..n_queries {
        let mut pattern = Vec::with_capacity(d);
        while pattern.len() < d {
            let t = rng.random_range(0..n_types);
            if !pattern.contains(&t) {
                pattern.push(t);
            }
        }
        let weight = rng.random_range(0.5..=3.0);
        let rate = rng.random_range(0.2..=2.0);
        queries.push(
            Query::with_match_rate(&format!("Q{i}"), pattern, 5.0, weight, 1.0, rate).unwrap(),
        );
    }
    let total_memory: f64 = (0..al.len()).map(|j| al.memory_rate(j)).sum();
    let memory_budget = rng.random_range(0.3..=1.2) * total_memory;
    ProblemInstance::new(al, queries, Some(memory_budget), None).unwrap()
}
