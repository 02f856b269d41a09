//! Behavioral model of a 1T1C DRAM array carrying a capacitor-triggered
//! hardware Trojan.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical and
//! event-driven machinery:
//!
//! - [`cell`]: leakage and retention of a single cell.
//! - [`trigger`]: the charge-accumulating trigger with its SR latch.
//! - [`array`]: a lazily evolved DRAM array with refresh and sensing.
//! - [`payload`]: WL/BL shorting and wordline retention tamper.
//! - [`variation`]: Monte-Carlo retention failure rates.
//! - [`defense`]: SECDED, CRC, dummy bits and attack classification.
//!
//! File formats, traces and the command line live in the `dramtrojan` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod array;
pub mod cell;
pub mod defense;
mod error;
mod math;
pub mod payload;
pub mod trigger;
pub mod variation;

pub use error::{Error, Result};
