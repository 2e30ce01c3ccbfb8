//! Deterministic, seedable discrete-event simulator for opportunistic
//! (store-carry-forward) networks, plus closed-form mobility analytics.
//!
//! Two static endpoints at opposite corners of a square field exchange
//! ping-pong traffic through mobile helpers. Helpers follow the random
//! waypoint model; optional satellite nodes bias their waypoints toward a
//! region around an endpoint, which is the knob under study. Three routers
//! ship: epidemic, binary spray-and-wait and PRoPHET.
//!
//! A run is a pure function of its [`scenario::ScenarioConfig`]: same
//! config, same seed, bit-identical event log on any platform.
//!
//! ```
//! use opnet_sim::{config, engine};
//!
//! let text = std::fs::read_to_string("../../scenarios/smoke.cfg").unwrap();
//! let cfg = config::parse_scenario(&text).unwrap();
//! let (report, _log) = engine::run(&cfg).unwrap();
//! assert!(report.created > 0);
//! ```

// Validations write `!(x > 0.0)` so that NaN fails them; the suggested
// `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod config;
pub mod engine;
pub mod mobility;
pub mod rng;
pub mod routing;
pub mod scenario;

#[cfg(test)]
pub(crate) mod testutil;

pub use engine::{run, run_with_contact_schedule, EventLog, MetricsReport};
pub use scenario::{validate_scenario, ScenarioConfig};
