//! Helpers shared by the integration suites.
#![allow(dead_code)]

use cepshed::estimate::RateEstimate;
use cepshed::matcher::count_matches;
use cepshed::model::{Alphabet, MatchSemantics, Query};
use cepshed::plan::{IntegralPlan, ProblemInstance};
use cepshed::sim::{generate_stream, ShedPlan};
use cepshed::synth::random_integer_instance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded batch of integer-grid random instances.
pub fn random_suite(count: usize, seed: u64) -> Vec<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_integer_instance(&mut rng)).collect()
}

/// Keep every event type and every query.
pub fn full_keep(inst: &ProblemInstance) -> ShedPlan {
    ShedPlan::Integral(IntegralPlan {
        keep_event: vec![true; inst.alphabet().len()],
        keep_query: vec![true; inst.queries().len()],
    })
}

/// Utility rate with nothing shed: the loss baseline.
pub fn total_value(inst: &ProblemInstance) -> f64 {
    inst.queries().iter().map(|q| q.expected_matches.unwrap() * q.utility_weight).sum()
}

/// Mean and standard error of the per-window match rate of `query` over
/// independently seeded windows of its own length.
pub fn mc_window_rate(
    alphabet: &Alphabet,
    query: &Query,
    rates: &RateEstimate,
    windows: u32,
    seed: u64,
) -> (f64, f64) {
    let t = query.window;
    let mut samples = Vec::with_capacity(windows as usize);
    for w in 0..windows as u64 {
        let stream = generate_stream(rates, t, seed.wrapping_add(w));
        let n = count_matches(alphabet, &stream, query, MatchSemantics::AnyMatch).unwrap();
        samples.push(n as f64 / t);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// A workload whose analytic utility rate is exact: repeat-free patterns
/// and windows that divide the duration evenly.
pub struct Workload {
    pub name: &'static str,
    pub instance: ProblemInstance,
    pub duration: f64,
    pub expected_rate: f64,
}

/// Three fixed workloads for simulator consistency checks. Each query
/// carries its analytic match rate, so the full-keep expectation is just
/// the total value.
pub fn consistency_workloads() -> Vec<Workload> {
    // unit-rate pair: (T^2 / 2) / T = 1 per unit time
    let mut al1 = Alphabet::new();
    al1.add("A", 1.0, 1.0).unwrap();
    al1.add("B", 1.0, 1.0).unwrap();
    let q1 = Query::with_match_rate("Q1", vec![0, 1], 2.0, 1.0, 1.0, 1.0).unwrap();
    let w1 = ProblemInstance::new(al1, vec![q1], None, None).unwrap();

    // a pair and a triple over three unit-rate types
    let mut al2 = Alphabet::new();
    al2.add("A", 1.0, 1.0).unwrap();
    al2.add("B", 1.0, 1.0).unwrap();
    al2.add("C", 1.0, 1.0).unwrap();
    let q2a = Query::with_match_rate("Q1", vec![0, 1], 2.0, 2.0, 1.0, 1.0).unwrap();
    // (T^3 / 6) / T at T = 3: 1.5 per unit time
    let q2b = Query::with_match_rate("Q2", vec![0, 1, 2], 3.0, 2.0, 1.0, 1.5).unwrap();
    let w2 = ProblemInstance::new(al2, vec![q2a, q2b], None, None).unwrap();

    // uneven rates: (2T)(0.5T)/2/T at T = 4 is 2, plus a single-type query
    let mut al3 = Alphabet::new();
    al3.add("A", 2.0, 1.0).unwrap();
    al3.add("B", 0.5, 1.0).unwrap();
    let q3a = Query::with_match_rate("Q1", vec![0, 1], 4.0, 1.0, 1.0, 2.0).unwrap();
    let q3b = Query::with_match_rate("Q2", vec![1], 5.0, 2.0, 1.0, 0.5).unwrap();
    let w3 = ProblemInstance::new(al3, vec![q3a, q3b], None, None).unwrap();

    vec![
        Workload { name: "unit pair", instance: w1, duration: 1000.0, expected_rate: 1.0 },
        Workload { name: "pair and triple", instance: w2, duration: 600.0, expected_rate: 5.0 },
        Workload { name: "uneven rates", instance: w3, duration: 1000.0, expected_rate: 3.0 },
    ]
}
