//! Charge dynamics of a single 1T1C cell.
//!
//! Leakage is a sum of closed-form exponential components. For a stored `1`
//! the net current is proportional to the stored voltage, so the cell decays
//! exponentially toward 0 V. A stored `0` is charged by sub-threshold leakage
//! only and relaxes toward a small equilibrium voltage where charging and
//! discharging balance. Both cases have exact solutions, which [`evolve`] and
//! [`retention_time`] use directly.

use crate::error::{check_range, Error, Result};
use crate::math::{exp, ln, pow10};

/// Supply voltage (V). A stored `1` is written at this level.
pub const V_DD: f64 = 1.0;
/// Lowest wordline voltage available on chip (V).
pub const V_WL_MIN: f64 = -0.2;
/// Highest wordline voltage (the write boost level, V).
pub const V_WL_MAX: f64 = 1.6;
pub const TEMP_MIN_C: f64 = -10.0;
pub const TEMP_MAX_C: f64 = 90.0;
/// Reference temperature of the leakage prefactors (°C).
pub const TEMP_REF_C: f64 = 25.0;

/// Nominal refresh window the cells are designed against (ms).
pub const REFRESH_WINDOW_MS: f64 = 64.0;
/// Lowest stored `1` that still leaves a 70 mV sense margin (V).
pub const SENSE_LIMIT_V: f64 = 0.64;
/// Wordline voltage at which sub-threshold leakage equals the other components.
pub const SUBTHRESHOLD_KNEE_V: f64 = 0.3;

/// Leakage-model coefficients of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    /// Storage capacitance (fF).
    pub c_s: f64,
    /// Sub-threshold prefactor at `v_wl == vth` (A).
    pub i_sub0: f64,
    /// Access-transistor threshold (V).
    pub vth: f64,
    /// Sub-threshold swing (V/decade).
    pub ss: f64,
    /// Junction leakage (A).
    pub i_j0: f64,
    /// Gate leakage (A).
    pub i_g0: f64,
    /// GIDL prefactor at `v_wl == -0.2 V` (A).
    pub gidl0: f64,
    /// GIDL slope (V/decade).
    pub gidl_slope: f64,
    /// Temperature activation coefficient (1/K).
    pub temp_act: f64,
    /// Equilibrium voltage of a stored `0` (V).
    pub v_eq_data0: f64,
}

impl CellParams {
    /// Nominal cell, calibrated so that at the hot corner (-0.2 V, 90 °C) a
    /// stored `1` is still at [`SENSE_LIMIT_V`] after [`REFRESH_WINDOW_MS`], and
    /// so that sub-threshold leakage equals the remaining components at
    /// [`SUBTHRESHOLD_KNEE_V`].
    pub fn nominal() -> Self {
        const C_S: f64 = 25.0;
        const VTH: f64 = 0.5;
        const SS: f64 = 0.07;
        const GIDL_SLOPE: f64 = 0.1;
        const TEMP_ACT: f64 = 0.01;
        // split of the non-sub-threshold leakage at -0.2 V
        const JUNCTION: f64 = 0.6;
        const GATE: f64 = 0.3;
        const GIDL: f64 = 0.1;

        let gidl_at_knee = GIDL * pow10(-(SUBTHRESHOLD_KNEE_V - V_WL_MIN) / GIDL_SLOPE);
        // sub-threshold, in units of the base leakage, as a function of v_wl
        let sub_rel = |v_wl: f64| (JUNCTION + GATE + gidl_at_knee) * pow10((v_wl - SUBTHRESHOLD_KNEE_V) / SS);
        let total_rel_min_wl = JUNCTION + GATE + GIDL + sub_rel(V_WL_MIN);

        // coefficient (A at v_cell = V_DD) that decays 1.0 V -> SENSE_LIMIT_V in one window
        let window_s = REFRESH_WINDOW_MS * 1e-3;
        let i_hot = C_S * 1e-15 * V_DD * ln(V_DD / SENSE_LIMIT_V) / window_s;
        let hot_scale = exp(TEMP_ACT * (TEMP_MAX_C - TEMP_REF_C));
        let base = i_hot / (hot_scale * total_rel_min_wl);

        CellParams {
            c_s: C_S,
            i_sub0: base * sub_rel(VTH),
            vth: VTH,
            ss: SS,
            i_j0: JUNCTION * base,
            i_g0: GATE * base,
            gidl0: GIDL * base,
            gidl_slope: GIDL_SLOPE,
            temp_act: TEMP_ACT,
            v_eq_data0: 0.030,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.c_s, self.i_sub0, self.i_j0, self.i_g0, self.gidl0, self.gidl_slope];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParam("capacitances and currents must be positive"));
        }
        if !(self.vth > 0.0 && self.vth < 1.6) {
            return Err(Error::Domain { what: "vth", value: self.vth, min: 0.0, max: 1.6 });
        }
        if !(self.ss > 0.06 && self.ss < 0.2) {
            return Err(Error::Domain { what: "ss", value: self.ss, min: 0.06, max: 0.2 });
        }
        if !(self.v_eq_data0 > 0.0 && self.v_eq_data0 < 0.5 * V_DD) {
            return Err(Error::InvalidParam("data-0 equilibrium must lie in (0, Vdd/2)"));
        }
        Ok(())
    }

    /// Sub-threshold current at the given wordline voltage, 25 °C (A).
    pub fn subthreshold(&self, v_wl: f64) -> f64 {
        self.i_sub0 * pow10((v_wl - self.vth) / self.ss)
    }

    /// GIDL current at the given wordline voltage, 25 °C (A).
    pub fn gidl(&self, v_wl: f64) -> f64 {
        self.gidl0 * pow10(-(v_wl - V_WL_MIN) / self.gidl_slope)
    }

    fn temp_scale(&self, temp: f64) -> f64 {
        exp(self.temp_act * (temp - TEMP_REF_C))
    }
}

impl Default for CellParams {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Logical polarity of the stored value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Stored `1`; leaks toward 0 V.
    One,
    /// Stored `0`; charges toward the data-0 equilibrium.
    Zero,
}

impl Polarity {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Polarity::One
        } else {
            Polarity::Zero
        }
    }

    pub fn bit(self) -> bool {
        matches!(self, Polarity::One)
    }

    /// Full-rail voltage written for this polarity.
    pub fn rail(self) -> f64 {
        match self {
            Polarity::One => V_DD,
            Polarity::Zero => 0.0,
        }
    }
}

/// Retention environment of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakEnv {
    /// Wordline voltage during retention (V).
    pub v_wl: f64,
    /// Temperature (°C).
    pub temp: f64,
    pub polarity: Polarity,
}

impl LeakEnv {
    pub fn new(v_wl: f64, temp: f64, polarity: Polarity) -> Self {
        LeakEnv { v_wl, temp, polarity }
    }

    /// Underdriven wordline at room temperature.
    pub fn nominal(polarity: Polarity) -> Self {
        LeakEnv::new(V_WL_MIN, TEMP_REF_C, polarity)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("v_wl", self.v_wl, V_WL_MIN, V_WL_MAX)?;
        check_range("temp", self.temp, TEMP_MIN_C, TEMP_MAX_C)
    }
}

/// Stored voltage of one cell and the time it was last brought up to date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    /// Voltage on the storage capacitor (V).
    pub v_cell: f64,
    /// Simulation time of the last update (ns).
    pub last_update: u64,
}

impl CellState {
    pub fn new(v_cell: f64, last_update: u64) -> Self {
        CellState { v_cell, last_update }
    }

    fn validate(&self) -> Result<()> {
        check_range("v_cell", self.v_cell, 0.0, V_DD)
    }
}

/// Outcome of a retention-time query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Retention {
    /// Time to cross the failure level (ms).
    Finite(f64),
    /// The cell never reaches the failure level.
    Never,
}

impl Retention {
    pub fn ms(self) -> Option<f64> {
        match self {
            Retention::Finite(t) => Some(t),
            Retention::Never => None,
        }
    }

    /// True when the cell fails strictly before `threshold_ms`.
    pub fn fails_before(self, threshold_ms: f64) -> bool {
        matches!(self, Retention::Finite(t) if t < threshold_ms)
    }
}

/// Discharge coefficient of a stored `1`: current (A) at `v_cell == V_DD`.
fn data1_coefficient(env: &LeakEnv, params: &CellParams) -> f64 {
    let sum = params.subthreshold(env.v_wl) + params.i_j0 + params.i_g0 + params.gidl(env.v_wl);
    sum * params.temp_scale(env.temp)
}

/// Sub-threshold charging current of a stored `0` at 0 V (A).
fn data0_coefficient(env: &LeakEnv, params: &CellParams) -> f64 {
    params.subthreshold(env.v_wl) * params.temp_scale(env.temp)
}

/// Converts a current coefficient (A) into a relaxation rate (1/ns) for a
/// voltage swing of `v_span` volts.
fn rate_per_ns(current: f64, c_s_ff: f64, v_span: f64) -> f64 {
    current * 1e6 / (c_s_ff * v_span)
}

/// Net leakage current out of the storage node (A); positive discharges the cell.
pub fn leakage_current(state: &CellState, env: &LeakEnv, params: &CellParams) -> Result<f64> {
    state.validate()?;
    env.validate()?;
    params.validate()?;
    Ok(match env.polarity {
        Polarity::One => data1_coefficient(env, params) * state.v_cell / V_DD,
        Polarity::Zero => -data0_coefficient(env, params) * (1.0 - state.v_cell / params.v_eq_data0),
    })
}

/// Advances a cell by `dt` nanoseconds.
pub fn evolve(state: &CellState, env: &LeakEnv, params: &CellParams, dt: u64) -> Result<CellState> {
    state.validate()?;
    env.validate()?;
    params.validate()?;
    if dt == 0 {
        return Ok(*state);
    }
    let t = dt as f64;
    let v = match env.polarity {
        Polarity::One => {
            let k = rate_per_ns(data1_coefficient(env, params), params.c_s, V_DD);
            state.v_cell * exp(-k * t)
        }
        Polarity::Zero => {
            let eq = params.v_eq_data0;
            let k = rate_per_ns(data0_coefficient(env, params), params.c_s, eq);
            eq + (state.v_cell - eq) * exp(-k * t)
        }
    };
    Ok(CellState { v_cell: v.clamp(0.0, V_DD), last_update: state.last_update + dt })
}

/// Earliest time for a cell starting at `v_start` to cross `v_fail`.
///
/// A stored `1` fails when it decays below `v_fail`; a stored `0` fails when
/// it charges above it.
pub fn retention_time(env: &LeakEnv, params: &CellParams, v_start: f64, v_fail: f64) -> Result<Retention> {
    env.validate()?;
    params.validate()?;
    check_range("v_start", v_start, 0.0, V_DD)?;
    check_range("v_fail", v_fail, 0.0, V_DD)?;
    match env.polarity {
        Polarity::One => {
            if v_start <= v_fail {
                return Err(Error::InvalidParam("data-1 retention needs v_start > v_fail"));
            }
            if v_fail <= 0.0 {
                return Ok(Retention::Never);
            }
            let k = rate_per_ns(data1_coefficient(env, params), params.c_s, V_DD);
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Numeric { context: "data-1 discharge rate", rate: k });
            }
            Ok(Retention::Finite(ln(v_start / v_fail) / k * 1e-6))
        }
        Polarity::Zero => {
            let eq = params.v_eq_data0;
            if v_start >= v_fail {
                return Ok(Retention::Finite(0.0));
            }
            if v_fail >= eq {
                return Ok(Retention::Never);
            }
            let k = rate_per_ns(data0_coefficient(env, params), params.c_s, eq);
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Numeric { context: "data-0 charging rate", rate: k });
            }
            Ok(Retention::Finite(ln((eq - v_start) / (eq - v_fail)) / k * 1e-6))
        }
    }
}

/// Retention of a freshly written `1` to the Vdd/2 failure level (ms).
pub fn data1_retention_ms(v_wl: f64, temp: f64, params: &CellParams) -> Result<f64> {
    let env = LeakEnv::new(v_wl, temp, Polarity::One);
    match retention_time(&env, params, V_DD, 0.5 * V_DD)? {
        Retention::Finite(t) => Ok(t),
        Retention::Never => Err(Error::Numeric { context: "data-1 retention", rate: 0.0 }),
    }
}
