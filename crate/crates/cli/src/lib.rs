//! Scenario and trace driver for the DRAM Trojan model: trace replay, the
//! scripted leak exploit, parameter sweeps, Monte-Carlo runs and defense
//! evaluation. Every command produces a [`report::Report`].

pub mod defense_eval;
pub mod error;
pub mod exploit;
pub mod mc;
pub mod memmap;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;
pub mod trace;

pub use error::{HarnessError, Result};

/// Hammer pattern with the default access budget.
pub fn trigger_pattern(t_on: u64, t_off: u64) -> dramtrojan_core::trigger::HammerPattern {
    dramtrojan_core::trigger::HammerPattern { t_on, t_off, ..Default::default() }
}
