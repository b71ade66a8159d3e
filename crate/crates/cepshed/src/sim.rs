//! Stream simulation: Poisson arrival generation, plan application, and
//! realized-metric measurement, plus the online-vs-offline adversarial
//! construction showing why competitive guarantees are hopeless here.
//!
//! Match counting follows the protocol the rate estimator defines: each
//! query's matches are tallied over consecutive disjoint windows of its own
//! length, and per-unit-time figures divide the totals by the simulated
//! duration. Under that protocol a full-keep simulation converges to the
//! analytic `sum n_i w_i`, which is what the consistency tests pin down.
//!
//! Randomness is drawn from ChaCha streams keyed by the user seed and
//! partitioned as `trial << 24 | role << 20 | lane`, where the roles are
//! arrivals, event sampling, match thinning, and the adversarial draws, and
//! the lane is a type or query index. Per-type arrival streams mean a plan
//! change never perturbs the arrivals themselves, so paired-seed runs are
//! directly comparable.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::RateEstimate;
use crate::matcher::{count_matches, MatchError};
use crate::model::{
    Alphabet, EventInstance, EventSequence, MatchSemantics, Query, TypeId,
};
use crate::plan::{
    evaluate_fractional, evaluate_integral, Coupling, FractionalPlan, IntegralPlan, PlanError,
    ProblemInstance,
};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("simulation duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("adversarial construction needs at least two indices, got {0}")]
    DegenerateUniverse(usize),
    #[error("event type handle {0} is outside the plan")]
    UnknownEventType(TypeId),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

const ROLE_ARRIVALS: u64 = 0;
const ROLE_EVENT_SAMPLING: u64 = 1;
const ROLE_MATCH_THINNING: u64 = 2;
const ROLE_ADVERSARY: u64 = 3;

fn stream_rng(seed: u64, trial: u64, role: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial << 24 | role << 20 | lane);
    rng
}

/// How long to run, how often, and under which match semantics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub duration: f64,
    pub trials: u32,
    pub seed: u64,
    pub semantics: MatchSemantics,
}

impl SimulationConfig {
    pub fn new(
        duration: f64,
        trials: u32,
        seed: u64,
        semantics: MatchSemantics,
    ) -> Result<Self, SimError> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(SimError::NonPositiveDuration(duration));
        }
        if trials == 0 {
            return Err(SimError::ZeroTrials);
        }
        Ok(SimulationConfig { duration, trials, seed, semantics })
    }
}

/// Realized metrics, averaged over trials. The peak occupancy is the worst
/// moment across all trials; everything else is a mean (the utility with
/// its standard error over trials).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mean_utility_per_unit_time: f64,
    pub utility_std_error: f64,
    pub mean_matches_per_query: BTreeMap<String, f64>,
    pub peak_memory_occupancy: f64,
    pub cpu_consumed_per_unit_time: f64,
    pub trials_run: u32,
}

/// A plan in either form, ready to be applied to a stream.
#[derive(Debug, Clone, PartialEq)]
pub enum ShedPlan {
    Integral(IntegralPlan),
    Fractional(FractionalPlan),
}

impl ShedPlan {
    fn event_width(&self) -> usize {
        match self {
            ShedPlan::Integral(p) => p.keep_event.len(),
            ShedPlan::Fractional(p) => p.sample_event.len(),
        }
    }
}

/// Merges independent per-type Poisson processes into one stream over
/// `[0, duration)`. Identical arguments give identical streams; coincident
/// timestamps are nudged up by the smallest representable step so the
/// result is strictly ordered. A non-positive duration yields an empty
/// stream.
pub fn generate_stream(rates: &RateEstimate, duration: f64, seed: u64) -> EventSequence {
    generate_stream_trial(rates, duration, seed, 0)
}

fn generate_stream_trial(
    rates: &RateEstimate,
    duration: f64,
    seed: u64,
    trial: u64,
) -> EventSequence {
    if !(duration > 0.0) || !duration.is_finite() {
        return EventSequence::default();
    }
    let mut events: Vec<EventInstance> = Vec::new();
    for (j, &rate) in rates.rates().iter().enumerate() {
        if rate <= 0.0 {
            continue;
        }
        let exp = Exp::new(rate).expect("positive rate");
        let mut rng = stream_rng(seed, trial, ROLE_ARRIVALS, j as u64);
        let mut t = exp.sample(&mut rng);
        while t < duration {
            events.push(EventInstance::new(j, t));
            t += exp.sample(&mut rng);
        }
    }
    merge_and_repair(events)
}

fn merge_and_repair(mut events: Vec<EventInstance>) -> EventSequence {
    events.sort_by(|a, b| {
        a.timestamp.partial_cmp(&b.timestamp).unwrap().then(a.type_id.cmp(&b.type_id))
    });
    for i in 1..events.len() {
        if events[i].timestamp <= events[i - 1].timestamp {
            events[i].timestamp = events[i - 1].timestamp.next_up();
        }
    }
    EventSequence::validate(events).expect("repaired sequence is strictly increasing")
}

/// Filters a stream through a plan: integral plans drop whole types,
/// fractional plans keep each instance of type `j` independently with
/// probability `sample_event[j]`. Seeded and reproducible.
pub fn apply_plan(
    stream: &EventSequence,
    plan: &ShedPlan,
    seed: u64,
) -> Result<EventSequence, SimError> {
    apply_plan_trial(stream, plan, seed, 0)
}

fn apply_plan_trial(
    stream: &EventSequence,
    plan: &ShedPlan,
    seed: u64,
    trial: u64,
) -> Result<EventSequence, SimError> {
    let width = plan.event_width();
    let mut samplers: Vec<Option<ChaCha8Rng>> = vec![None; width];
    let mut kept: Vec<EventInstance> = Vec::with_capacity(stream.len());
    for &e in stream.events() {
        if e.type_id >= width {
            return Err(SimError::UnknownEventType(e.type_id));
        }
        let keep = match plan {
            ShedPlan::Integral(p) => p.keep_event[e.type_id],
            ShedPlan::Fractional(p) => {
                let rng = samplers[e.type_id].get_or_insert_with(|| {
                    stream_rng(seed, trial, ROLE_EVENT_SAMPLING, e.type_id as u64)
                });
                rng.random::<f64>() < p.sample_event[e.type_id]
            }
        };
        if keep {
            kept.push(e);
        }
    }
    Ok(EventSequence::validate(kept).expect("subsequence of an ordered stream"))
}

/// Counts a query's matches over consecutive disjoint windows of its own
/// length covering `[0, duration)`, the same per-window protocol the rate
/// estimator's analytic figure describes.
fn tumbling_count(
    alphabet: &Alphabet,
    events: &[EventInstance],
    query: &Query,
    semantics: MatchSemantics,
    duration: f64,
) -> Result<u64, MatchError> {
    let window = query.window;
    let mut total: u64 = 0;
    let mut lo = 0;
    let mut chunk = 0u64;
    while (chunk as f64) * window < duration {
        let start = chunk as f64 * window;
        let end = (start + window).min(duration);
        while lo < events.len() && events[lo].timestamp < start {
            lo += 1;
        }
        let mut hi = lo;
        while hi < events.len() && events[hi].timestamp < end {
            hi += 1;
        }
        if hi > lo {
            let piece = EventSequence::validate(events[lo..hi].to_vec())
                .expect("slice of an ordered stream");
            let n = count_matches(alphabet, &piece, query, semantics)?;
            total = total.checked_add(n).ok_or(MatchError::CountOverflow)?;
        }
        lo = hi;
        chunk += 1;
    }
    Ok(total)
}

/// Per-type retention horizon: the largest window of any active query over
/// the type. Types no active query needs are not retained at all.
fn retention_horizons(inst: &ProblemInstance, active: &[bool]) -> Vec<f64> {
    let mut horizon = vec![0.0; inst.alphabet().len()];
    for (i, q) in inst.queries().iter().enumerate() {
        if !active[i] {
            continue;
        }
        for &t in &q.pattern {
            if q.window > horizon[t] {
                horizon[t] = q.window;
            }
        }
    }
    horizon
}

/// Peak total memory cost of simultaneously retained events. An event stays
/// resident for its type's horizon, inclusive at the boundary, so an event
/// arriving exactly when another expires sees it still in memory.
fn peak_occupancy(alphabet: &Alphabet, events: &[EventInstance], horizon: &[f64]) -> f64 {
    let mut deltas: Vec<(f64, bool, f64)> = Vec::with_capacity(2 * events.len());
    for e in events {
        let h = horizon[e.type_id];
        if h <= 0.0 {
            continue;
        }
        let cost = alphabet.get(e.type_id).expect("type checked by caller").memory_cost;
        deltas.push((e.timestamp, false, cost));
        deltas.push((e.timestamp + h, true, cost));
    }
    deltas.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut current = 0.0;
    let mut peak = 0.0f64;
    for (_, expiry, cost) in deltas {
        if expiry {
            current -= cost;
        } else {
            current += cost;
            if current > peak {
                peak = current;
            }
        }
    }
    peak
}

/// Match-level sampling for fractional plans: of the matches the thinned
/// stream produced, each survives independently with the residual
/// probability that brings the event-level survival product down to the
/// plan's per-query rate.
fn thin_matches(
    produced: u64,
    plan: &FractionalPlan,
    query: &Query,
    i: usize,
    seed: u64,
    trial: u64,
) -> u64 {
    if produced == 0 {
        return 0;
    }
    let event_share: f64 = query.pattern.iter().map(|&t| plan.sample_event[t]).product();
    if event_share <= 0.0 {
        return 0;
    }
    let residual = (plan.sample_query[i] / event_share).clamp(0.0, 1.0);
    if residual >= 1.0 {
        return produced;
    }
    if residual <= 0.0 {
        return 0;
    }
    let mut rng = stream_rng(seed, trial, ROLE_MATCH_THINNING, i as u64);
    Binomial::new(produced, residual).expect("probability in range").sample(&mut rng)
}

/// Runs the configured number of independent trials: generate a stream,
/// shed it per the plan, count matches of surviving queries, and aggregate.
/// Integral plans gate whole queries; fractional plans additionally thin
/// produced matches. Identical inputs give a bit-identical report.
pub fn simulate(
    inst: &ProblemInstance,
    plan: &ShedPlan,
    config: &SimulationConfig,
) -> Result<SimulationReport, SimError> {
    if !(config.duration > 0.0) || !config.duration.is_finite() {
        return Err(SimError::NonPositiveDuration(config.duration));
    }
    if config.trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    match plan {
        ShedPlan::Integral(p) => {
            evaluate_integral(inst, p, Coupling::Inequality)?;
        }
        ShedPlan::Fractional(p) => {
            evaluate_fractional(inst, p, Coupling::Inequality)?;
        }
    }

    let alphabet = inst.alphabet();
    let arrival_rates: Vec<f64> = alphabet.iter().map(|(_, t)| t.arrival_rate).collect();
    let rates = RateEstimate::new(arrival_rates, 1.0).expect("alphabet rates are positive");

    let active: Vec<bool> = match plan {
        ShedPlan::Integral(p) => p.keep_query.clone(),
        ShedPlan::Fractional(p) => p.sample_query.iter().map(|&y| y > 0.0).collect(),
    };
    let horizon = retention_horizons(inst, &active);

    let nq = inst.queries().len();
    let mut utility_rates = Vec::with_capacity(config.trials as usize);
    let mut cpu_total = 0.0;
    let mut match_totals = vec![0.0f64; nq];
    let mut peak = 0.0f64;

    for trial in 0..config.trials as u64 {
        let stream = generate_stream_trial(&rates, config.duration, config.seed, trial);
        let shed = apply_plan_trial(&stream, plan, config.seed, trial)?;

        let mut trial_utility = 0.0;
        let mut trial_cpu = 0.0;
        for (i, q) in inst.queries().iter().enumerate() {
            if !active[i] {
                continue;
            }
            let produced =
                tumbling_count(alphabet, shed.events(), q, config.semantics, config.duration)?;
            let kept = match plan {
                ShedPlan::Integral(_) => produced,
                ShedPlan::Fractional(p) => thin_matches(produced, p, q, i, config.seed, trial),
            };
            match_totals[i] += kept as f64;
            trial_utility += q.utility_weight * kept as f64;
            trial_cpu += q.cpu_cost_per_match * kept as f64;
        }
        utility_rates.push(trial_utility / config.duration);
        cpu_total += trial_cpu / config.duration;

        let trial_peak = peak_occupancy(alphabet, shed.events(), &horizon);
        if trial_peak > peak {
            peak = trial_peak;
        }
    }

    let trials = config.trials as f64;
    let mean = utility_rates.iter().sum::<f64>() / trials;
    let variance = if config.trials > 1 {
        utility_rates.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / (trials - 1.0)
    } else {
        0.0
    };

    let mean_matches_per_query = inst
        .queries()
        .iter()
        .enumerate()
        .map(|(i, q)| (q.id.clone(), match_totals[i] / trials))
        .collect();

    Ok(SimulationReport {
        mean_utility_per_unit_time: mean,
        utility_std_error: (variance / trials).sqrt(),
        mean_matches_per_query,
        peak_memory_occupancy: peak,
        cpu_consumed_per_unit_time: cpu_total / trials,
        trials_run: config.trials,
    })
}

/// Empirical means of the offline and online policies on the adversarial
/// stream family, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversarialReport {
    pub offline_mean_utility: f64,
    pub online_mean_utility: f64,
    pub ratio: f64,
}

/// The construction that defeats every online shedder: `3m` event types
/// `E_i`, `E'_i`, `E''_i` and `2m` unit-weight pair queries
/// `SEQ(E_i, E''_i)`, `SEQ(E'_i, E''_i)`. Each trial draws a prefix
/// `e_1..e_m` (each `e_i` is the plain or primed variant of index `i` by a
/// fair coin) followed by one closer `X` of uniformly random index. Memory
/// holds two events. The offline policy inspects `X` and keeps the matching
/// prefix event, scoring 1 every time; the online policy must commit to one
/// stored prefix event before `X` arrives and scores only when the indices
/// coincide, which happens with probability `1/m`.
pub fn adversarial_demo(m: usize, trials: u32, seed: u64) -> Result<AdversarialReport, SimError> {
    if m < 2 {
        return Err(SimError::DegenerateUniverse(m));
    }
    if trials == 0 {
        return Err(SimError::ZeroTrials);
    }

    let mut alphabet = Alphabet::new();
    for i in 0..m {
        alphabet.add(&format!("E{i}"), 1.0, 1.0).unwrap();
        alphabet.add(&format!("E'{i}"), 1.0, 1.0).unwrap();
        alphabet.add(&format!("E''{i}"), 1.0, 1.0).unwrap();
    }
    let window = (m + 1) as f64;
    let mut queries = Vec::with_capacity(2 * m);
    for i in 0..m {
        let (plain, primed, closer) = (3 * i, 3 * i + 1, 3 * i + 2);
        queries
            .push(Query::new(&format!("Q{i}"), vec![plain, closer], window, 1.0, 1.0).unwrap());
        queries
            .push(Query::new(&format!("Q'{i}"), vec![primed, closer], window, 1.0, 1.0).unwrap());
    }

    let mut offline_total = 0.0;
    let mut online_total = 0.0;
    for trial in 0..trials as u64 {
        let mut rng = stream_rng(seed, trial, ROLE_ADVERSARY, 0);
        let coins: Vec<bool> = (0..m).map(|_| rng.random::<bool>()).collect();
        let closing = rng.random_range(0..m);
        let stored = rng.random_range(0..m);

        let prefix_type = |i: usize| if coins[i] { 3 * i + 1 } else { 3 * i };
        let closer = EventInstance::new(3 * closing + 2, (m + 1) as f64);

        let offline_memory = EventSequence::validate(vec![
            EventInstance::new(prefix_type(closing), (closing + 1) as f64),
            closer,
        ])
        .unwrap();
        let online_memory = EventSequence::validate(vec![
            EventInstance::new(prefix_type(stored), (stored + 1) as f64),
            closer,
        ])
        .unwrap();

        offline_total += memory_utility(&alphabet, &offline_memory, &queries)?;
        online_total += memory_utility(&alphabet, &online_memory, &queries)?;
    }

    let offline_mean_utility = offline_total / trials as f64;
    let online_mean_utility = online_total / trials as f64;
    Ok(AdversarialReport {
        offline_mean_utility,
        online_mean_utility,
        ratio: online_mean_utility / offline_mean_utility,
    })
}

fn memory_utility(
    alphabet: &Alphabet,
    memory: &EventSequence,
    queries: &[Query],
) -> Result<f64, SimError> {
    let mut total = 0.0;
    for q in queries {
        let n = count_matches(alphabet, memory, q, MatchSemantics::AnyMatch)?;
        total += q.utility_weight * n as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn uniform_rates(rates: Vec<f64>) -> RateEstimate {
        RateEstimate::new(rates, 1.0).unwrap()
    }

    fn demo_full_keep() -> ShedPlan {
        ShedPlan::Integral(IntegralPlan {
            keep_event: vec![true; 5],
            keep_query: vec![true; 3],
        })
    }

    fn quick_config(seed: u64) -> SimulationConfig {
        SimulationConfig::new(50.0, 4, seed, MatchSemantics::AnyMatch).unwrap()
    }

    #[test]
    fn config_rejects_bad_parameters() {
        let err = SimulationConfig::new(0.0, 1, 0, MatchSemantics::AnyMatch).unwrap_err();
        assert_eq!(err, SimError::NonPositiveDuration(0.0));
        assert!(matches!(
            SimulationConfig::new(f64::NAN, 1, 0, MatchSemantics::AnyMatch),
            Err(SimError::NonPositiveDuration(_))
        ));
        let err = SimulationConfig::new(1.0, 0, 0, MatchSemantics::AnyMatch).unwrap_err();
        assert_eq!(err, SimError::ZeroTrials);
    }

    #[test]
    fn poisson_counts_land_in_band() {
        let stream = generate_stream(&uniform_rates(vec![2.0]), 1000.0, 7);
        // Poisson(2000): 3 sigma is about 134
        let n = stream.len();
        assert!((1900..=2100).contains(&n), "count {n} outside the band");
        assert!(stream.events().iter().all(|e| e.timestamp < 1000.0));
    }

    #[test]
    fn zero_rates_make_empty_streams() {
        let stream = generate_stream(&uniform_rates(vec![0.0, 0.0]), 100.0, 3);
        assert!(stream.is_empty());
    }

    #[test]
    fn identical_seeds_reproduce_streams() {
        let rates = uniform_rates(vec![1.0, 0.5]);
        let a = generate_stream(&rates, 200.0, 42);
        let b = generate_stream(&rates, 200.0, 42);
        assert_eq!(a, b);
        let c = generate_stream(&rates, 200.0, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn collision_repair_bumps_timestamps() {
        let seq = merge_and_repair(vec![
            EventInstance::new(1, 1.0),
            EventInstance::new(0, 1.0),
            EventInstance::new(2, 1.0),
        ]);
        let ts: Vec<f64> = seq.events().iter().map(|e| e.timestamp).collect();
        assert_eq!(seq.events()[0].type_id, 0);
        assert_eq!(ts[0], 1.0);
        assert!(ts[1] > ts[0] && ts[2] > ts[1]);
        assert!(ts[2] < 1.0 + 1e-9);
    }

    #[test]
    fn integral_plan_filters_types() {
        let rates = uniform_rates(vec![1.0; 5]);
        let stream = generate_stream(&rates, 100.0, 5);
        let plan = ShedPlan::Integral(IntegralPlan {
            keep_event: vec![true, false, true, false, true],
            keep_query: vec![true, true, false],
        });
        let shed = apply_plan(&stream, &plan, 5).unwrap();
        assert!(shed.events().iter().all(|e| e.type_id % 2 == 0));
        let expected: Vec<EventInstance> =
            stream.events().iter().copied().filter(|e| e.type_id % 2 == 0).collect();
        assert_eq!(shed.events(), expected.as_slice());

        let keep_all = ShedPlan::Integral(IntegralPlan {
            keep_event: vec![true; 5],
            keep_query: vec![true; 3],
        });
        assert_eq!(apply_plan(&stream, &keep_all, 5).unwrap(), stream);
    }

    #[test]
    fn fractional_sampling_hits_its_rate() {
        let events: Vec<EventInstance> =
            (0..10_000).map(|i| EventInstance::new(0, (i + 1) as f64)).collect();
        let stream = EventSequence::validate(events).unwrap();
        let plan = ShedPlan::Fractional(FractionalPlan {
            sample_event: vec![0.5],
            sample_query: vec![],
        });
        let shed = apply_plan(&stream, &plan, 90).unwrap();
        // binomial(10^4, 1/2): 3 sigma is 150
        let kept = shed.len();
        assert!((4850..=5150).contains(&kept), "kept {kept} outside the band");
    }

    #[test]
    fn apply_rejects_unknown_types() {
        let stream =
            EventSequence::validate(vec![EventInstance::new(3, 1.0)]).unwrap();
        let plan = ShedPlan::Integral(IntegralPlan {
            keep_event: vec![true, true],
            keep_query: vec![],
        });
        assert_eq!(apply_plan(&stream, &plan, 0).unwrap_err(), SimError::UnknownEventType(3));
    }

    #[test]
    fn tumbling_windows_do_not_straddle() {
        let mut al = Alphabet::new();
        al.add("A", 1.0, 1.0).unwrap();
        let q = Query::new("Q1", vec![0, 0], 1.0, 1.0, 1.0).unwrap();

        // one event per window: the cross-window pair does not count
        let split = vec![EventInstance::new(0, 0.5), EventInstance::new(0, 1.5)];
        assert_eq!(
            tumbling_count(&al, &split, &q, MatchSemantics::AnyMatch, 2.0).unwrap(),
            0
        );

        // both events in the first window: one pair
        let joint = vec![EventInstance::new(0, 0.25), EventInstance::new(0, 0.75)];
        assert_eq!(
            tumbling_count(&al, &joint, &q, MatchSemantics::AnyMatch, 1.0).unwrap(),
            1
        );
    }

    #[test]
    fn occupancy_peaks_where_retentions_overlap() {
        let mut al = Alphabet::new();
        al.add("A", 1.0, 1.0).unwrap();
        let events = vec![EventInstance::new(0, 0.0), EventInstance::new(0, 1.0)];
        assert_eq!(peak_occupancy(&al, &events, &[1.5]), 2.0);
        assert_eq!(peak_occupancy(&al, &events, &[0.5]), 1.0);
        // inclusive boundary: expiring exactly at the next arrival still counts
        assert_eq!(peak_occupancy(&al, &events, &[1.0]), 2.0);
        assert_eq!(peak_occupancy(&al, &events, &[0.0]), 0.0);
    }

    #[test]
    fn keep_nothing_plan_scores_zero() {
        let inst = synth::demo_memory_instance();
        let plan = ShedPlan::Integral(IntegralPlan {
            keep_event: vec![false; 5],
            keep_query: vec![false; 3],
        });
        let report = simulate(&inst, &plan, &quick_config(1)).unwrap();
        assert_eq!(report.mean_utility_per_unit_time, 0.0);
        assert_eq!(report.utility_std_error, 0.0);
        assert_eq!(report.cpu_consumed_per_unit_time, 0.0);
        assert_eq!(report.peak_memory_occupancy, 0.0);
        assert!(report.mean_matches_per_query.values().all(|&v| v == 0.0));
        assert_eq!(report.trials_run, 4);
    }

    #[test]
    fn shedding_b_and_d_silences_only_the_long_query() {
        let inst = synth::demo_memory_instance();
        let full = simulate(&inst, &demo_full_keep(), &quick_config(9)).unwrap();
        let plan = ShedPlan::Integral(IntegralPlan {
            keep_event: vec![true, false, true, false, true],
            keep_query: vec![true, true, false],
        });
        let shed = simulate(&inst, &plan, &quick_config(9)).unwrap();
        assert_eq!(shed.mean_matches_per_query["Q3"], 0.0);
        // arrivals draw from per-type streams, so the kept types see the
        // exact same events and the short queries the exact same counts
        assert_eq!(shed.mean_matches_per_query["Q1"], full.mean_matches_per_query["Q1"]);
        assert_eq!(shed.mean_matches_per_query["Q2"], full.mean_matches_per_query["Q2"]);
        assert!(full.mean_matches_per_query["Q3"] > 0.0);
    }

    #[test]
    fn match_thinning_scales_one_query() {
        let inst = synth::demo_memory_instance();
        let full = simulate(&inst, &demo_full_keep(), &quick_config(33)).unwrap();
        let plan = ShedPlan::Fractional(FractionalPlan {
            sample_event: vec![1.0; 5],
            sample_query: vec![0.5, 1.0, 0.0],
        });
        let thinned = simulate(&inst, &plan, &quick_config(33)).unwrap();
        assert_eq!(thinned.mean_matches_per_query["Q2"], full.mean_matches_per_query["Q2"]);
        assert_eq!(thinned.mean_matches_per_query["Q3"], 0.0);
        let q1_full = full.mean_matches_per_query["Q1"];
        let q1_thin = thinned.mean_matches_per_query["Q1"];
        assert!(q1_thin > 0.0 && q1_thin < q1_full, "thinned {q1_thin} vs full {q1_full}");
    }

    #[test]
    fn reports_reproduce_bit_identically() {
        let inst = synth::demo_memory_instance();
        let a = simulate(&inst, &demo_full_keep(), &quick_config(77)).unwrap();
        let b = simulate(&inst, &demo_full_keep(), &quick_config(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_type_rate_matches_the_arrival_rate() {
        let mut al = Alphabet::new();
        al.add("A", 2.0, 1.0).unwrap();
        let q = Query::with_match_rate("Q1", vec![0], 1.0, 1.0, 1.0, 2.0).unwrap();
        let inst = ProblemInstance::new(al, vec![q], Some(10.0), None).unwrap();
        let plan = ShedPlan::Integral(IntegralPlan {
            keep_event: vec![true],
            keep_query: vec![true],
        });
        let config = SimulationConfig::new(200.0, 20, 101, MatchSemantics::AnyMatch).unwrap();
        let report = simulate(&inst, &plan, &config).unwrap();
        let band = 3.0 * report.utility_std_error;
        let got = report.mean_utility_per_unit_time;
        assert!((got - 2.0).abs() <= band, "mean {got} not within {band} of 2.0");
    }

    #[test]
    fn adversarial_demo_validates_inputs() {
        assert_eq!(adversarial_demo(1, 10, 0).unwrap_err(), SimError::DegenerateUniverse(1));
        assert_eq!(adversarial_demo(4, 0, 0).unwrap_err(), SimError::ZeroTrials);
    }

    #[test]
    fn adversary_beats_online_by_the_index_count() {
        let report = adversarial_demo(2, 4000, 11).unwrap();
        assert_eq!(report.offline_mean_utility, 1.0);
        // Bernoulli(1/2) over 4000 trials: 3 sigma is about 0.024
        assert!((report.online_mean_utility - 0.5).abs() <= 0.024);
        assert_eq!(report.ratio, report.online_mean_utility);
    }

    #[test]
    fn single_adversarial_trial_is_all_or_nothing() {
        let report = adversarial_demo(3, 1, 5).unwrap();
        assert!(report.ratio == 0.0 || report.ratio == 1.0);
        assert_eq!(report.offline_mean_utility, 1.0);
    }
}
