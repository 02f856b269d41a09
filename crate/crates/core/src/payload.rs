//! Trojan payloads and the trigger unit that arms them.
//!
//! The array calls into this module on every activation. Payloads only act
//! while the trigger is latched.

use alloc::vec::Vec;

use crate::cell::{V_DD, V_WL_MIN};
use crate::error::{check_range, Error, Result};
use crate::trigger::{idle, reset_trigger, step_access, TriggerParams, TriggerState};

/// Sense margin developed before the short engages, as a function of the
/// shorting delay. Linear through the origin, saturating at the full
/// differential of a rail cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmCurve {
    /// V per ps.
    pub slope: f64,
    /// V.
    pub full: f64,
}

impl SmCurve {
    pub fn sm(&self, delay_ps: f64) -> f64 {
        if !(delay_ps > 0.0) {
            return 0.0;
        }
        (self.slope * delay_ps).min(self.full)
    }
}

impl Default for SmCurve {
    /// 69 mV at 40 ps; saturates at the 250 mV swing of a rail cell with
    /// c_bl = c_s.
    fn default() -> Self {
        SmCurve { slope: 0.069 / 40.0, full: 0.25 * V_DD }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PayloadKind {
    /// Victim and adversary wordlines shorted after the sense amp fires.
    WlShort { victim_row: usize, adversary_row: usize, delay_ps: f64 },
    /// Victim and adversary bitlines shorted within one row.
    BlShort { row: usize, victim_col: usize, adversary_col: usize, delay_ps: f64 },
    /// Retention wordline level of `target_rows` pulled to `v_override`.
    WlTamper { target_rows: Vec<usize>, v_override: f64 },
}

impl PayloadKind {
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let row_ok = |r: usize| if r < rows { Ok(()) } else { Err(Error::RowRange { row: r, rows }) };
        match self {
            PayloadKind::WlShort { victim_row, adversary_row, delay_ps } => {
                row_ok(*victim_row)?;
                row_ok(*adversary_row)?;
                if victim_row == adversary_row {
                    return Err(Error::InvalidParam("victim and adversary rows must differ"));
                }
                check_delay(*delay_ps)
            }
            PayloadKind::BlShort { row, victim_col, adversary_col, delay_ps } => {
                row_ok(*row)?;
                if *victim_col >= cols || *adversary_col >= cols {
                    return Err(Error::InvalidParam("shorted column out of range"));
                }
                if victim_col == adversary_col {
                    return Err(Error::InvalidParam("victim and adversary columns must differ"));
                }
                check_delay(*delay_ps)
            }
            PayloadKind::WlTamper { target_rows, v_override } => {
                target_rows.iter().try_for_each(|r| row_ok(*r))?;
                check_range("v_override", *v_override, V_WL_MIN, V_DD)
            }
        }
    }
}

fn check_delay(delay_ps: f64) -> Result<()> {
    if delay_ps.is_finite() && delay_ps >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam("shorting delay must be a finite non-negative value"))
    }
}

/// Outcome of one shorted column pair on a victim activation.
///
/// `written` is true when the write driver forces the victim bitline.
/// Returns `(victim, adversary)` as restored.
pub fn resolve_short(victim: bool, adversary: bool, written: bool, sm: f64) -> (bool, bool) {
    if written || sm > 0.0 {
        (victim, victim)
    } else {
        (adversary, adversary)
    }
}

/// Where the trigger taps the address path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriggerSite {
    pub row: usize,
    /// Word within the row; `None` matches any access to the row.
    pub word: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TriggerUnit {
    /// The analog capacitor trigger, one pulse of `t_on` ns per access.
    Analog { params: TriggerParams, state: TriggerState, t_on: u64, last_pulse_end: Option<u64> },
    /// Architectural access counter. Enables at `n_set` and, when
    /// `disable_after` is set, disables that many accesses later.
    Counter { n_set: u64, disable_after: Option<u64>, count: u64 },
}

impl TriggerUnit {
    pub fn analog(params: TriggerParams) -> Self {
        TriggerUnit::Analog { params, state: TriggerState::default(), t_on: 10, last_pulse_end: None }
    }

    pub fn counter(n_set: u64, disable_after: Option<u64>) -> Self {
        TriggerUnit::Counter { n_set, disable_after, count: 0 }
    }

    pub fn latched(&self) -> bool {
        match self {
            TriggerUnit::Analog { state, .. } => state.latched,
            TriggerUnit::Counter { n_set, disable_after, count } => {
                *count >= *n_set && disable_after.is_none_or(|d| *count < n_set + d)
            }
        }
    }

    pub fn accesses(&self) -> u64 {
        match self {
            TriggerUnit::Analog { state, .. } => state.access_count,
            TriggerUnit::Counter { count, .. } => *count,
        }
    }

    fn access(&mut self, now: u64) {
        match self {
            TriggerUnit::Analog { params, state, t_on, last_pulse_end } => {
                let mut s = *state;
                if let Some(end) = *last_pulse_end {
                    s = idle(&s, params, now.saturating_sub(end) as f64);
                }
                *state = step_access(&s, params, *t_on as f64);
                *last_pulse_end = Some(now + *t_on);
            }
            TriggerUnit::Counter { count, .. } => *count += 1,
        }
    }

    fn reset(&mut self) {
        match self {
            TriggerUnit::Analog { state, last_pulse_end, .. } => {
                *state = reset_trigger(state);
                *last_pulse_end = None;
            }
            TriggerUnit::Counter { count, .. } => *count = 0,
        }
    }
}

/// Change in the latch caused by one trigger access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    None,
    Latched,
    Released,
}

/// A trigger bound to one payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Trojan {
    pub site: TriggerSite,
    pub trigger: TriggerUnit,
    pub payload: PayloadKind,
    pub sm_curve: SmCurve,
}

impl Trojan {
    pub fn new(site: TriggerSite, trigger: TriggerUnit, payload: PayloadKind) -> Self {
        Trojan { site, trigger, payload, sm_curve: SmCurve::default() }
    }

    pub fn latched(&self) -> bool {
        self.trigger.latched()
    }

    pub fn hits(&self, row: usize, word: Option<usize>) -> bool {
        row == self.site.row && (self.site.word.is_none() || word.is_none() || word == self.site.word)
    }

    /// Steps the trigger for an access at `now` and reports the latch change.
    pub fn on_trigger_access(&mut self, now: u64) -> Transition {
        let before = self.latched();
        self.trigger.access(now);
        match (before, self.latched()) {
            (false, true) => Transition::Latched,
            (true, false) => Transition::Released,
            _ => Transition::None,
        }
    }

    /// Clears the trigger. Returns true if it was latched.
    pub fn reset(&mut self) -> bool {
        let was = self.latched();
        self.trigger.reset();
        was
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sm_curve_anchors() {
        let c = SmCurve::default();
        assert_eq!(c.sm(0.0), 0.0);
        assert!((c.sm(40.0) - 0.069).abs() < 1e-12);
        assert!(c.sm(45.0) >= 0.070);
        assert_eq!(c.sm(1e6), 0.25);
    }

    #[test]
    fn short_truth_table() {
        for v in [false, true] {
            for a in [false, true] {
                assert_eq!(resolve_short(v, a, false, 0.069), (v, v));
                assert_eq!(resolve_short(v, a, false, 0.0), (a, a));
                assert_eq!(resolve_short(v, a, true, 0.0), (v, v));
            }
        }
    }

    #[test]
    fn counter_enables_and_disables() {
        let mut t = Trojan::new(
            TriggerSite { row: 0, word: Some(1) },
            TriggerUnit::counter(3, Some(2)),
            PayloadKind::WlTamper { target_rows: Vec::new(), v_override: 0.4 },
        );
        let seq: Vec<_> = (0..6).map(|i| t.on_trigger_access(i)).collect();
        use Transition::*;
        assert_eq!(seq, [None, None, Latched, None, Released, None]);
    }

    #[test]
    fn hits_respects_word() {
        let t = Trojan::new(
            TriggerSite { row: 4, word: Some(2) },
            TriggerUnit::counter(1, None),
            PayloadKind::WlTamper { target_rows: Vec::new(), v_override: 0.4 },
        );
        assert!(t.hits(4, Some(2)) && t.hits(4, None));
        assert!(!t.hits(4, Some(3)) && !t.hits(5, Some(2)));
    }

    #[test]
    fn payload_validation() {
        let bad = PayloadKind::WlShort { victim_row: 1, adversary_row: 1, delay_ps: 40.0 };
        assert!(bad.validate(8, 64).is_err());
        let bad = PayloadKind::WlTamper { target_rows: alloc::vec![0], v_override: 1.2 };
        assert!(bad.validate(8, 64).is_err());
        let ok = PayloadKind::BlShort { row: 2, victim_col: 0, adversary_col: 5, delay_ps: 0.0 };
        assert!(ok.validate(8, 64).is_ok());
    }
}
