//! Capacitor-based Trojan trigger.
//!
//! Every assertion of the trigger address tunnels charge from `P_SET` onto
//! node X2. Between assertions X2 leaks toward the leakage-only floor. X4
//! follows a steep monotone map of X2 while the address is asserted and holds
//! its peak with a slower decay afterwards; the SR latch sets once X4 reaches
//! 0.5 V.
//!
//! At the falling edge of each pulse a fraction of the charge just delivered
//! couples back out through M2. A continuous assertion therefore charges X2
//! more efficiently than the same on-time split into discrete pulses.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln, sqrt};

/// Latch threshold on X4 (V).
pub const V_X4_FIRE: f64 = 0.5;
/// Steady-state X2 voltage from leakage alone with `P_SET` at 1 V.
pub const V_LEAK_FLOOR: f64 = 0.125;

/// Two published worst-case N_SET figures that disagree; neither is
/// modeled, see [`TriggerParams::corner_scale`].
pub const WORST_CASE_N_SET_PROSE: u32 = 68;
pub const WORST_CASE_N_SET_TABLE: u32 = 1502;

/// Measured circuit figures of the trigger. Reported, never computed.
pub mod table {
    pub const DYNAMIC_POWER_UW: f64 = 3.781;
    pub const STATIC_POWER_UW: f64 = 0.589;
    pub const ENERGY_PER_HAMMER_NJ: f64 = 2.059;
    pub const AREA_UM2: f64 = 42.95;
    pub const TARGET_N_SET: u32 = 1837;
}

/// Logistic X2 -> X4 map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMap {
    /// X2 voltage that maps to half swing (V).
    pub center: f64,
    /// Logistic width (V); smaller is steeper.
    pub width: f64,
}

impl GainMap {
    pub fn eval(&self, v_x2: f64) -> f64 {
        1.0 / (1.0 + exp(-(v_x2 - self.center) / self.width))
    }
}

impl Default for GainMap {
    fn default() -> Self {
        GainMap { center: 0.5, width: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerParams {
    /// Trigger capacitance (fF).
    pub c_trigger: f64,
    /// `P_SET` source voltage (V).
    pub v_pset: f64,
    /// Tunneling current at full drive (A), device sizing folded in.
    pub k_charge: f64,
    /// X2 leak time constant (µs).
    pub tau_leak: f64,
    /// X4 hold time constant once the address is released (µs).
    pub tau_x4: f64,
    /// Fraction of each pulse's charge lost at its falling edge.
    pub feedthrough: f64,
    pub v_x4_fire: f64,
    pub v_leak_floor: f64,
    pub x2_to_x4_gain: GainMap,
    /// Process/temperature corner multiplier on `k_charge`.
    pub corner_scale: f64,
}

/// Tunneling current fitted to N_SET = 1837 at 20 fF, 10/1 ns.
const K_CHARGE_NOMINAL: f64 = 8.01e-10;
/// X4 hold constant fitted to 163.73 µs after an 18 µs assertion.
const TAU_X4_NOMINAL: f64 = 348.0;

impl TriggerParams {
    /// Nominal 20 fF trigger. Use [`calibrate`] for exact anchor values.
    pub fn nominal() -> Self {
        TriggerParams {
            c_trigger: 20.0,
            v_pset: 1.0,
            k_charge: K_CHARGE_NOMINAL,
            tau_leak: 80.0,
            tau_x4: TAU_X4_NOMINAL,
            feedthrough: 0.05,
            v_x4_fire: V_X4_FIRE,
            v_leak_floor: V_LEAK_FLOOR,
            x2_to_x4_gain: GainMap::default(),
            corner_scale: 1.0,
        }
    }

    pub fn with_capacitance(self, c_trigger: f64) -> Self {
        TriggerParams { c_trigger, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.c_trigger, self.v_pset, self.k_charge, self.tau_leak, self.tau_x4, self.corner_scale];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParam("trigger capacitance, rates and time constants must be positive"));
        }
        if self.v_x4_fire != V_X4_FIRE {
            return Err(Error::InvalidParam("X4 fire threshold is fixed at 0.5 V"));
        }
        if !(0.0..1.0).contains(&self.feedthrough) {
            return Err(Error::InvalidParam("feedthrough must lie in [0, 1)"));
        }
        if !(self.v_leak_floor >= 0.0 && self.v_leak_floor < self.v_pset) {
            return Err(Error::InvalidParam("leak floor must lie in [0, v_pset)"));
        }
        if !(self.x2_to_x4_gain.width > 0.0) {
            return Err(Error::InvalidParam("gain width must be positive"));
        }
        if self.x2_to_x4_gain.eval(self.v_leak_floor) >= self.v_x4_fire {
            return Err(Error::InvalidParam("leakage floor alone would fire the trigger"));
        }
        Ok(())
    }

    fn gain(&self, v_x2: f64) -> f64 {
        self.x2_to_x4_gain.eval(v_x2)
    }

    /// Dimensionless charging exponent for `t` ns of drive.
    fn charge_exponent(&self, t_ns: f64) -> f64 {
        // A * ns / (fF * V) = 1e-9 / 1e-15
        self.k_charge * self.corner_scale * t_ns * 1e6 / (self.c_trigger * self.v_pset)
    }
}

impl Default for TriggerParams {
    fn default() -> Self {
        Self::nominal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriggerState {
    pub v_x2: f64,
    pub v_x4: f64,
    pub latched: bool,
    pub access_count: u64,
}

fn charge(state: &mut TriggerState, params: &TriggerParams, t_ns: f64) -> f64 {
    let before = state.v_x2;
    let gained = (params.v_pset - before) * (1.0 - exp(-params.charge_exponent(t_ns)));
    state.v_x2 = (before + gained).clamp(0.0, 1.0);
    state.v_x4 = state.v_x4.max(params.gain(state.v_x2)).clamp(0.0, 1.0);
    if state.v_x4 >= params.v_x4_fire {
        state.latched = true;
    }
    gained
}

/// Holds the trigger address asserted for `t_on` ns. The falling edge is
/// applied by [`release`] or implicitly by [`step_access`].
pub fn drive(state: &TriggerState, params: &TriggerParams, t_on: f64) -> TriggerState {
    let mut s = *state;
    charge(&mut s, params, t_on.max(0.0));
    s
}

/// One access: a `t_on` ns pulse followed by its falling edge.
pub fn step_access(state: &TriggerState, params: &TriggerParams, t_on: f64) -> TriggerState {
    let mut s = *state;
    let gained = charge(&mut s, params, t_on.max(0.0));
    s.v_x2 = (s.v_x2 - params.feedthrough * gained).max(0.0);
    s.access_count += 1;
    s
}

/// Falling edge after a continuous assertion that delivered X2 from `start`.
pub fn release(state: &TriggerState, params: &TriggerParams, start: &TriggerState) -> TriggerState {
    let gained = (state.v_x2 - start.v_x2).max(0.0);
    TriggerState { v_x2: (state.v_x2 - params.feedthrough * gained).max(0.0), ..*state }
}

/// Address idle for `dt` ns. X2 relaxes toward the leak floor and X4 decays
/// toward the floor's image under the gain map. The latch is untouched.
pub fn idle(state: &TriggerState, params: &TriggerParams, dt: f64) -> TriggerState {
    if !(dt > 0.0) {
        return *state;
    }
    let floor = params.v_leak_floor;
    let g_floor = params.gain(floor);
    let a2 = exp(-dt / (params.tau_leak * 1e3));
    let a4 = exp(-dt / (params.tau_x4 * 1e3));
    TriggerState { v_x2: floor + (state.v_x2 - floor) * a2, v_x4: g_floor + (state.v_x4 - g_floor) * a4, ..*state }
}

/// Clears the latch and both internal nodes.
pub fn reset_trigger(state: &TriggerState) -> TriggerState {
    TriggerState { v_x2: 0.0, v_x4: 0.0, latched: false, access_count: state.access_count }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HammerPattern {
    pub t_on: u64,
    pub t_off: u64,
    pub max_accesses: u64,
}

impl HammerPattern {
    pub fn new(t_on: u64, t_off: u64, max_accesses: u64) -> Self {
        HammerPattern { t_on, t_off, max_accesses }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_on == 0 {
            return Err(Error::InvalidParam("t_on must be positive"));
        }
        Ok(())
    }

    /// ON fraction of one access period.
    pub fn duty(&self) -> f64 {
        self.t_on as f64 / (self.t_on + self.t_off) as f64
    }
}

impl Default for HammerPattern {
    fn default() -> Self {
        HammerPattern { t_on: 10, t_off: 1, max_accesses: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub access: u64,
    /// X2 and X4 right after the falling edge.
    pub v_x2: f64,
    pub v_x4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HammerResult {
    /// First access at which the latch set, if any.
    pub n_set: Option<u64>,
    pub trace: Vec<TracePoint>,
}

/// Hammers a reset trigger with `pattern` until it latches.
pub fn simulate_hammer(params: &TriggerParams, pattern: &HammerPattern) -> Result<HammerResult> {
    params.validate()?;
    pattern.validate()?;
    let mut s = TriggerState::default();
    let mut trace = Vec::new();
    for i in 1..=pattern.max_accesses {
        s = step_access(&s, params, pattern.t_on as f64);
        trace.push(TracePoint { access: i, v_x2: s.v_x2, v_x4: s.v_x4 });
        if s.latched {
            return Ok(HammerResult { n_set: Some(i), trace });
        }
        s = idle(&s, params, pattern.t_off as f64);
    }
    Ok(HammerResult { n_set: None, trace })
}

/// N_SET only, without keeping the trace.
pub fn n_set(params: &TriggerParams, pattern: &HammerPattern) -> Result<Option<u64>> {
    params.validate()?;
    pattern.validate()?;
    let mut s = TriggerState::default();
    for i in 1..=pattern.max_accesses {
        s = step_access(&s, params, pattern.t_on as f64);
        if s.latched {
            return Ok(Some(i));
        }
        s = idle(&s, params, pattern.t_off as f64);
    }
    Ok(None)
}

/// How long X4 stays at or above the fire level after the trigger address
/// is held for `drive_ns` and then released, ignoring the latch (µs).
pub fn persistence(params: &TriggerParams, drive_ns: f64) -> Result<f64> {
    params.validate()?;
    let start = TriggerState::default();
    let held = release(&drive(&start, params, drive_ns), params, &start);
    Ok(hold_time(params, held.v_x4))
}

fn hold_time(params: &TriggerParams, peak: f64) -> f64 {
    let g_floor = params.gain(params.v_leak_floor);
    if peak < params.v_x4_fire {
        return 0.0;
    }
    params.tau_x4 * ln((peak - g_floor) / (params.v_x4_fire - g_floor))
}

/// Anchor points the trigger is fitted to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTargets {
    /// Capacitance (fF) and N_SET of the main anchor.
    pub c_trigger: f64,
    pub n_set: u64,
    pub pattern: HammerPattern,
    /// Assertion length (ns) and resulting X4 hold (µs).
    pub persistence: Option<(f64, f64)>,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            c_trigger: 20.0,
            n_set: 1837,
            pattern: HammerPattern::default(),
            persistence: Some((18_000.0, 163.73)),
        }
    }
}

/// Fits `k_charge` (and `tau_x4`, when a persistence anchor is given) starting
/// from `base`. Deterministic: fixed bracket, fixed iteration count.
pub fn calibrate(base: &TriggerParams, targets: &CalibrationTargets) -> Result<TriggerParams> {
    if targets.n_set == 0 {
        return Err(Error::Calibration { reason: "N_SET anchor must be at least 1", residual: 0.0 });
    }
    let mut p = TriggerParams { c_trigger: targets.c_trigger, ..*base };
    p.validate()?;
    let pattern = HammerPattern { max_accesses: targets.n_set.saturating_mul(4).max(16), ..targets.pattern };
    pattern.validate()?;

    for _ in 0..4 {
        p.k_charge = fit_k(&p, &pattern, targets.n_set)?;
        if let Some((drive_ns, hold_us)) = targets.persistence {
            let start = TriggerState::default();
            let peak = release(&drive(&start, &p, drive_ns), &p, &start).v_x4;
            let g_floor = p.gain(p.v_leak_floor);
            if peak <= p.v_x4_fire {
                return Err(Error::Calibration {
                    reason: "persistence drive does not reach the fire level",
                    residual: p.v_x4_fire - peak,
                });
            }
            p.tau_x4 = hold_us / ln((peak - g_floor) / (p.v_x4_fire - g_floor));
        }
    }

    let got = n_set(&p, &pattern)?;
    if got != Some(targets.n_set) {
        return Err(Error::Calibration {
            reason: "N_SET anchor not reproduced",
            residual: got.map_or(f64::INFINITY, |n| n as f64 - targets.n_set as f64),
        });
    }
    if let Some((drive_ns, hold_us)) = targets.persistence {
        let residual = persistence(&p, drive_ns)? - hold_us;
        if residual.abs() > 1e-6 * hold_us {
            return Err(Error::Calibration { reason: "persistence anchor not reproduced", residual });
        }
    }
    Ok(p)
}

/// Geometric midpoint of the `k_charge` interval that yields exactly `target`.
fn fit_k(p: &TriggerParams, pattern: &HammerPattern, target: u64) -> Result<f64> {
    let fires_within = |k: f64, n: u64| -> Result<bool> {
        let q = TriggerParams { k_charge: k, ..*p };
        Ok(matches!(n_set(&q, pattern)?, Some(m) if m <= n))
    };
    // smallest k firing within n accesses, bracketed in [1e-15, 1e-3] A
    let threshold = |n: u64| -> Result<f64> {
        let (mut lo, mut hi) = (1e-15f64, 1e-3f64);
        if !fires_within(hi, n)? {
            return Err(Error::Calibration { reason: "N_SET anchor unreachable", residual: n as f64 });
        }
        for _ in 0..200 {
            let mid = sqrt(lo * hi);
            if fires_within(mid, n)? {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi / lo < 1.0 + 1e-13 {
                break;
            }
        }
        Ok(hi)
    };
    let k_at = threshold(target)?;
    if target == 1 {
        return Ok(k_at * 2.0);
    }
    let k_next = threshold(target - 1)?;
    Ok(sqrt(k_at * k_next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn calibrated() -> TriggerParams {
        calibrate(&TriggerParams::nominal(), &CalibrationTargets::default()).unwrap()
    }

    #[test]
    fn nominal_is_close_to_calibrated() {
        let p = calibrated();
        assert!((p.k_charge / K_CHARGE_NOMINAL - 1.0).abs() < 0.01, "{}", p.k_charge);
        assert!((p.tau_x4 / TAU_X4_NOMINAL - 1.0).abs() < 0.01, "{}", p.tau_x4);
    }

    #[test]
    fn saturated_x2_gains_nothing() {
        let p = TriggerParams::nominal();
        let s = TriggerState { v_x2: p.v_pset, ..Default::default() };
        assert_eq!(step_access(&s, &p, 10.0).v_x2, p.v_pset);
    }

    #[test]
    fn anchor_is_exact_and_one_short_is_not() {
        let p = calibrated();
        let pat = HammerPattern::default();
        assert_eq!(n_set(&p, &pat).unwrap(), Some(1837));
        let short = HammerPattern { max_accesses: 1836, ..pat };
        assert_eq!(n_set(&p, &short).unwrap(), None);
    }

    #[test]
    fn zero_idle_is_identity() {
        let p = TriggerParams::nominal();
        let s = TriggerState { v_x2: 0.3, v_x4: 0.01, latched: false, access_count: 5 };
        assert_eq!(idle(&s, &p, 0.0), s);
    }

    #[test]
    fn leakage_alone_settles_at_floor() {
        let p = calibrated();
        let s = idle(&TriggerState::default(), &p, 1e9);
        assert!((s.v_x2 - 0.125).abs() < 1e-9);
        assert!(!s.latched);
    }

    #[test]
    fn reset_then_rehammer_fires_at_same_count() {
        let p = calibrated();
        let pat = HammerPattern::default();
        let mut s = TriggerState::default();
        for _ in 0..1837 {
            s = idle(&step_access(&s, &p, 10.0), &p, 1.0);
        }
        assert!(s.latched);
        let r = reset_trigger(&s);
        assert!(!r.latched && r.v_x2 == 0.0 && r.v_x4 == 0.0);
        assert_eq!(reset_trigger(&TriggerState::default()), TriggerState::default());
        assert_eq!(simulate_hammer(&p, &pat).unwrap().n_set, Some(1837));
    }

    #[test]
    fn persistence_matches_fitted_hold() {
        let p = calibrated();
        let t = persistence(&p, 18_000.0).unwrap();
        assert!((t - 163.73).abs() < 1e-3);
    }

    #[test]
    fn infeasible_anchor_reports_residual() {
        let targets = CalibrationTargets { persistence: Some((100.0, 163.73)), ..Default::default() };
        assert!(matches!(calibrate(&TriggerParams::nominal(), &targets), Err(Error::Calibration { .. })));
    }

    #[test]
    fn floor_that_fires_is_rejected() {
        let p = TriggerParams { v_leak_floor: 0.6, ..TriggerParams::nominal() };
        assert!(p.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn latch_only_cleared_by_reset(ops in proptest::collection::vec((any::<bool>(), 0.0f64..5e5), 1..50)) {
            let p = TriggerParams::nominal();
            let mut s = TriggerState { v_x2: 0.9, v_x4: 0.9, latched: true, access_count: 0 };
            for (access, t) in ops {
                s = if access { step_access(&s, &p, t.min(100.0)) } else { idle(&s, &p, t) };
                prop_assert!(s.latched);
                prop_assert!((0.0..=1.0).contains(&s.v_x2) && (0.0..=1.0).contains(&s.v_x4));
            }
        }

        #[test]
        fn idle_below_floor_never_latches(v0 in 0.0f64..=0.125, dts in proptest::collection::vec(0.0f64..1e9, 1..20)) {
            let p = TriggerParams::nominal();
            let mut s = TriggerState { v_x2: v0, v_x4: p.x2_to_x4_gain.eval(v0), latched: false, access_count: 0 };
            for dt in dts {
                s = idle(&s, &p, dt);
                prop_assert!(!s.latched);
                prop_assert!(s.v_x2 <= 0.125 + 1e-12);
                prop_assert!(s.v_x4 < 0.5);
            }
        }

        #[test]
        fn smaller_capacitor_fires_no_later(c1 in 0.5f64..30.0, c2 in 0.5f64..30.0) {
            let p = TriggerParams::nominal();
            let pat = HammerPattern::default();
            let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
            let a = n_set(&p.with_capacitance(lo), &pat).unwrap().unwrap();
            let b = n_set(&p.with_capacitance(hi), &pat).unwrap().unwrap();
            prop_assert!(a <= b);
        }

        #[test]
        fn longer_off_time_needs_no_fewer_accesses(t1 in 0u64..30, t2 in 0u64..30) {
            let p = TriggerParams::nominal();
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let a = n_set(&p, &HammerPattern::new(10, lo, 100_000)).unwrap().unwrap();
            let b = n_set(&p, &HammerPattern::new(10, hi, 100_000)).unwrap().unwrap();
            prop_assert!(a <= b);
        }
    }
}
