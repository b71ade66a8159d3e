//! Load shedding for complex event processing.
//!
//! The pipeline: describe an event alphabet and a set of sliding-window
//! pattern queries ([`model`]), count or enumerate their matches over a
//! concrete stream ([`matcher`]), estimate arrival and match rates
//! ([`estimate`]), plan which events or queries to shed so a memory or CPU
//! budget holds ([`plan`], backed by the linear-program solver in [`lp`]),
//! and replay plans against synthetic streams to measure what the shedding
//! actually cost ([`sim`]).

pub mod estimate;
pub mod lp;
pub mod matcher;
pub mod model;
pub mod plan;
pub mod sim;
pub mod synth;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

// The guide's code blocks compile and run as doc-tests through these
// includes; one module per chapter so a failure names its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/event-model.md")]
    pub mod event_model {}
    #[doc = include_str!("../../../book/src/matching.md")]
    pub mod matching {}
    #[doc = include_str!("../../../book/src/rate-estimation.md")]
    pub mod rate_estimation {}
    #[doc = include_str!("../../../book/src/memory-planning.md")]
    pub mod memory_planning {}
    #[doc = include_str!("../../../book/src/cpu-dual-planning.md")]
    pub mod cpu_dual_planning {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
}
