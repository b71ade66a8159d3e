//! Match enumeration, match counting, and utility accounting over event
//! sequences.
//!
//! Enumeration materializes index tuples and is meant for validation on
//! short sequences; counting uses a sliding-window dynamic program whose
//! state is proportional to the window content, so it handles long streams
//! and combinatorial any-match counts without enumerating them.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use thiserror::Error;

use crate::model::{Alphabet, EventSequence, MatchSemantics, Query, TypeId};

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("event type handle {0} is not in the alphabet")]
    UnknownEventType(TypeId),
    #[error("match count exceeds the 64-bit counter")]
    CountOverflow,
}

/// One distinct match: the picked positions (strictly increasing) and the
/// time span between the first and last picked events.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMatch {
    pub query_id: String,
    pub indices: Vec<usize>,
    pub span: f64,
}

/// Per-query match counts and weighted utilities for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityReport {
    pub per_query_counts: BTreeMap<String, u64>,
    pub per_query_utility: BTreeMap<String, f64>,
    pub total_utility: f64,
}

fn check_types(alphabet: &Alphabet, seq: &EventSequence, query: &Query) -> Result<(), MatchError> {
    if let Some(&t) = query.pattern.iter().find(|&&t| t >= alphabet.len()) {
        return Err(MatchError::UnknownEventType(t));
    }
    if let Some(e) = seq.events().iter().find(|e| e.type_id >= alphabet.len()) {
        return Err(MatchError::UnknownEventType(e.type_id));
    }
    Ok(())
}

/// Enumerates the distinct matches of `query` in `seq` under `sem`, in
/// lexicographic order of index tuples. Distinctness is by index tuple.
pub fn enumerate_matches(
    alphabet: &Alphabet,
    seq: &EventSequence,
    query: &Query,
    sem: MatchSemantics,
) -> Result<Vec<QueryMatch>, MatchError> {
    check_types(alphabet, seq, query)?;
    let tuples = match sem {
        MatchSemantics::AnyMatch => enumerate_any(seq, &query.pattern, query.window),
        MatchSemantics::NextMatch => enumerate_next(seq, &query.pattern, query.window),
        MatchSemantics::Contiguity => enumerate_contiguous(seq, &query.pattern, query.window),
    };
    let events = seq.events();
    Ok(tuples
        .into_iter()
        .map(|indices| {
            let span = events[*indices.last().unwrap()].timestamp - events[indices[0]].timestamp;
            QueryMatch { query_id: query.id.clone(), indices, span }
        })
        .collect())
}

fn enumerate_any(seq: &EventSequence, pattern: &[TypeId], window: f64) -> Vec<Vec<usize>> {
    let events = seq.events();
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(pattern.len());

    fn dfs(
        events: &[crate::model::EventInstance],
        pattern: &[TypeId],
        window: f64,
        level: usize,
        start: usize,
        first_ts: f64,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if level == pattern.len() {
            out.push(stack.clone());
            return;
        }
        for (off, e) in events[start..].iter().enumerate() {
            let i = start + off;
            if level > 0 && e.timestamp - first_ts > window {
                break; // events are time-ordered; nothing later can fit
            }
            if e.type_id != pattern[level] {
                continue;
            }
            stack.push(i);
            let first = if level == 0 { e.timestamp } else { first_ts };
            dfs(events, pattern, window, level + 1, i + 1, first, stack, out);
            stack.pop();
        }
    }

    dfs(events, pattern, window, 0, 0, 0.0, &mut stack, &mut out);
    out
}

// Type-contiguity pins each step to the first later event of the required
// type: picking any later occurrence would skip one of that very type. So
// each start position extends into at most one candidate tuple.
fn enumerate_next(seq: &EventSequence, pattern: &[TypeId], window: f64) -> Vec<Vec<usize>> {
    let events = seq.events();
    let mut out = Vec::new();
    'starts: for (i, e0) in events.iter().enumerate() {
        if e0.type_id != pattern[0] {
            continue;
        }
        let deadline = e0.timestamp + window;
        let mut tuple = vec![i];
        let mut pos = i;
        for &want in &pattern[1..] {
            let mut found = None;
            for (off, e) in events[pos + 1..].iter().enumerate() {
                if e.timestamp > deadline {
                    break;
                }
                if e.type_id == want {
                    found = Some(pos + 1 + off);
                    break;
                }
            }
            match found {
                Some(k) => {
                    tuple.push(k);
                    pos = k;
                }
                None => continue 'starts,
            }
        }
        out.push(tuple);
    }
    out
}

fn enumerate_contiguous(seq: &EventSequence, pattern: &[TypeId], window: f64) -> Vec<Vec<usize>> {
    let events = seq.events();
    let n = pattern.len();
    let mut out = Vec::new();
    if events.len() < n {
        return out;
    }
    for i in 0..=events.len() - n {
        if events[i + n - 1].timestamp - events[i].timestamp > window {
            continue;
        }
        if (0..n).all(|j| events[i + j].type_id == pattern[j]) {
            out.push((i..i + n).collect());
        }
    }
    out
}

/// Counts distinct matches without materializing them. Agrees with
/// `enumerate_matches(..).len()` wherever enumeration is feasible.
pub fn count_matches(
    alphabet: &Alphabet,
    seq: &EventSequence,
    query: &Query,
    sem: MatchSemantics,
) -> Result<u64, MatchError> {
    check_types(alphabet, seq, query)?;
    match sem {
        MatchSemantics::AnyMatch => count_any(seq, &query.pattern, query.window),
        MatchSemantics::NextMatch => Ok(enumerate_next(seq, &query.pattern, query.window).len() as u64),
        MatchSemantics::Contiguity => {
            Ok(enumerate_contiguous(seq, &query.pattern, query.window).len() as u64)
        }
    }
}

// Sliding-window counting DP. levels[l] holds the partial matches of
// pattern[..=l], aggregated as (timestamp of first picked event, count)
// in ascending timestamp order. Processing events in time order keeps
// every list sorted; entries older than the window are evicted before use.
fn count_any(seq: &EventSequence, pattern: &[TypeId], window: f64) -> Result<u64, MatchError> {
    let n = pattern.len();
    let mut levels: Vec<VecDeque<(f64, u64)>> = vec![VecDeque::new(); n];
    let mut total: u64 = 0;
    let mut scratch: Vec<(f64, u64)> = Vec::new();

    for e in seq.events() {
        let lower = e.timestamp - window;
        for lvl in levels.iter_mut() {
            while let Some(&(ts, _)) = lvl.front() {
                if ts < lower {
                    lvl.pop_front();
                } else {
                    break;
                }
            }
        }
        // Extend deeper levels first so the event never chains onto a
        // partial that already contains it.
        for l in (1..n).rev() {
            if e.type_id != pattern[l] {
                continue;
            }
            let (below, at) = levels.split_at_mut(l);
            let prev = &below[l - 1];
            if prev.is_empty() {
                continue;
            }
            if l == n - 1 {
                for &(_, c) in prev.iter() {
                    total = total.checked_add(c).ok_or(MatchError::CountOverflow)?;
                }
            } else {
                merge_counts(&mut at[0], prev, &mut scratch)?;
            }
        }
        if e.type_id == pattern[0] {
            if n == 1 {
                total = total.checked_add(1).ok_or(MatchError::CountOverflow)?;
            } else {
                levels[0].push_back((e.timestamp, 1));
            }
        }
    }
    Ok(total)
}

// Merges `add` into `into`; both are sorted ascending by timestamp, and
// equal timestamps (same first event) combine by adding counts.
fn merge_counts(
    into: &mut VecDeque<(f64, u64)>,
    add: &VecDeque<(f64, u64)>,
    scratch: &mut Vec<(f64, u64)>,
) -> Result<(), MatchError> {
    scratch.clear();
    let mut ai = into.iter().peekable();
    let mut bi = add.iter().peekable();
    loop {
        match (ai.peek(), bi.peek()) {
            (Some(&&(ta, ca)), Some(&&(tb, cb))) => {
                if ta < tb {
                    scratch.push((ta, ca));
                    ai.next();
                } else if tb < ta {
                    scratch.push((tb, cb));
                    bi.next();
                } else {
                    scratch.push((ta, ca.checked_add(cb).ok_or(MatchError::CountOverflow)?));
                    ai.next();
                    bi.next();
                }
            }
            (Some(&&x), None) => {
                scratch.push(x);
                ai.next();
            }
            (None, Some(&&x)) => {
                scratch.push(x);
                bi.next();
            }
            (None, None) => break,
        }
    }
    into.clear();
    into.extend(scratch.iter().copied());
    Ok(())
}

/// Counts every query and applies the utility weights: per-query utility is
/// `weight * count`, the total is their sum.
pub fn utility(
    alphabet: &Alphabet,
    seq: &EventSequence,
    queries: &[Query],
    sem: MatchSemantics,
) -> Result<UtilityReport, MatchError> {
    let mut per_query_counts = BTreeMap::new();
    let mut per_query_utility = BTreeMap::new();
    let mut total = 0.0;
    for q in queries {
        let c = count_matches(alphabet, seq, q, sem)?;
        let u = q.utility_weight * c as f64;
        per_query_counts.insert(q.id.clone(), c);
        per_query_utility.insert(q.id.clone(), u);
        total += u;
    }
    Ok(UtilityReport {
        per_query_counts,
        per_query_utility,
        total_utility: total,
    })
}
