//! Fills in missing `expected_matches` fields and reprints the workload.
//! Declared arrival rates drive the estimate: analytically where the
//! semantics admit a closed form, by Monte Carlo otherwise.

use cepshed::estimate::{expected_matches_analytic, RateEstimate};
use cepshed::matcher::count_matches;
use cepshed::model::{Alphabet, MatchSemantics, Query};
use cepshed::sim::generate_stream;

use crate::cmd::write_out;
use crate::error::CliError;
use crate::files::WorkloadFile;
use crate::EstimateArgs;

pub fn run(args: &EstimateArgs) -> Result<(), CliError> {
    if !(args.duration.is_finite() && args.duration > 0.0) {
        return Err(CliError::usage(format!(
            "--duration must be positive and finite, got {}",
            args.duration
        )));
    }
    let mut wl = WorkloadFile::load(&args.workload)?;
    let al = wl.alphabet()?;
    let queries = wl.resolved_queries(&al)?;
    let declared =
        RateEstimate::new(al.iter().map(|(_, ty)| ty.arrival_rate).collect(), args.duration)?;

    let sem = wl.semantics;
    for (qi, spec) in wl.queries.iter_mut().enumerate() {
        if spec.expected_matches.is_some() {
            continue;
        }
        let n = match sem {
            MatchSemantics::AnyMatch => expected_matches_analytic(&queries[qi], &declared, sem)?,
            _ => measured_rate(&al, &queries[qi], &declared, sem, args.duration, args.seed, qi)?,
        };
        spec.expected_matches = Some(n);
    }

    write_out(args.out.as_deref(), &wl.emit())
}

/// Per-window match rate measured over independent window-sized streams.
/// Any match in a stream of duration `T` lies within one window of it, so
/// each stream counts as exactly one tumbling window.
fn measured_rate(
    al: &Alphabet,
    query: &Query,
    rates: &RateEstimate,
    sem: MatchSemantics,
    duration: f64,
    seed: u64,
    qi: usize,
) -> Result<f64, CliError> {
    let windows = ((duration / query.window).floor() as u64).max(1);
    let mut total = 0u64;
    for w in 0..windows {
        let stream = generate_stream(rates, query.window, window_seed(seed, qi, w));
        total += count_matches(al, &stream, query, sem)?;
    }
    Ok(total as f64 / (windows as f64 * query.window))
}

/// Decorrelates windows across queries so reordering the query list does
/// not shift any other query's sample.
fn window_seed(seed: u64, qi: usize, w: u64) -> u64 {
    seed ^ ((qi as u64 + 1) << 40) ^ w
}
