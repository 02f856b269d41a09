//! Event-driven DRAM array.
//!
//! Cells are evolved lazily: a row is brought up to the current clock only
//! when it is activated. Refresh is a staggered sequential sweep, one row
//! every `interval / rows`, so every row is restored exactly once per
//! interval. Rows that were never written are not materialized; they read as
//! zero and are skipped by refresh.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::cell::{evolve, CellParams, CellState, LeakEnv, Polarity, V_DD, V_WL_MAX, V_WL_MIN};
use crate::error::{check_range, Error, Result};
use crate::payload::{resolve_short, PayloadKind, Transition, Trojan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    pub word_bits: usize,
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize, word_bits: usize) -> Result<Self> {
        let g = ArrayGeometry { rows, cols, word_bits };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::Config("array needs at least 2 rows and 2 columns"));
        }
        if self.word_bits == 0 || self.word_bits > 64 || !self.cols.is_multiple_of(self.word_bits) {
            return Err(Error::Config("cols must be a multiple of word_bits (1..=64)"));
        }
        Ok(())
    }

    pub fn words_per_row(&self) -> usize {
        self.cols / self.word_bits
    }
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        ArrayGeometry { rows: 64, cols: 512, word_bits: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeripheralConfig {
    pub v_dd: f64,
    pub v_wl_boost: f64,
    pub v_wl_underdrive: f64,
    pub v_precharge: f64,
    /// Bitline capacitance (fF).
    pub c_bl: f64,
    pub sm_min: f64,
    pub sa_fire_delay: f64,
}

impl PeripheralConfig {
    pub fn validate(&self) -> Result<()> {
        if self.v_dd != V_DD {
            return Err(Error::Config("supply is fixed at 1.0 V"));
        }
        if (self.v_precharge - self.v_dd / 2.0).abs() > 1e-12 {
            return Err(Error::Config("precharge must be Vdd/2"));
        }
        if (self.sm_min - 0.070).abs() > 1e-12 {
            return Err(Error::Config("required sense margin is 70 mV"));
        }
        check_range("v_wl_underdrive", self.v_wl_underdrive, V_WL_MIN, V_WL_MAX)?;
        check_range("v_wl_boost", self.v_wl_boost, V_WL_MIN, V_WL_MAX)?;
        if !(self.c_bl > 0.0 && self.sa_fire_delay >= 0.0) {
            return Err(Error::Config("c_bl must be positive and sa_fire_delay non-negative"));
        }
        Ok(())
    }
}

impl Default for PeripheralConfig {
    fn default() -> Self {
        PeripheralConfig {
            v_dd: V_DD,
            v_wl_boost: 1.6,
            v_wl_underdrive: -0.2,
            v_precharge: 0.5,
            c_bl: CellParams::nominal().c_s,
            sm_min: 0.070,
            sa_fire_delay: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefreshPolicy {
    pub interval_ms: f64,
    /// When false no refresh is scheduled; rows can still be refreshed
    /// explicitly.
    pub enabled: bool,
}

impl RefreshPolicy {
    pub fn interval_ns(&self) -> u64 {
        (self.interval_ms * 1e6).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.interval_ms.is_finite() && self.interval_ms > 0.0) || self.interval_ns() == 0 {
            return Err(Error::Config("refresh interval must be positive"));
        }
        Ok(())
    }
}

impl Default for RefreshPolicy {
    fn default() -> Self {
        RefreshPolicy { interval_ms: 64.0, enabled: true }
    }
}

/// Retention environment of one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowEnv {
    pub v_wl: f64,
    pub temp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
    Refresh,
}

/// Entries of the array's event log. Everything is integral so logs compare
/// and print exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    /// Cells sensed with less than the required margin.
    MarginViolation {
        time: u64,
        row: usize,
        cells: usize,
    },
    /// Cells that resolved opposite to what was stored.
    RetentionFailure {
        time: u64,
        row: usize,
        ones_lost: usize,
        zeros_lost: usize,
    },
    /// Victim data copied into adversary cells.
    Leak {
        time: u64,
        victim_row: usize,
        adversary_row: usize,
        cells: usize,
    },
    /// Victim cells overwritten with adversary data.
    PayloadFault {
        time: u64,
        row: usize,
        ones_lost: usize,
        zeros_lost: usize,
    },
    TriggerLatched {
        time: u64,
        accesses: u64,
    },
    TriggerReleased {
        time: u64,
        accesses: u64,
    },
}

#[derive(Debug, Clone)]
struct Row {
    v: Vec<f64>,
    data: Vec<bool>,
    last_update: u64,
    last_restore: u64,
}

/// Result of sensing one row.
struct Sensed {
    bits: Vec<bool>,
    violations: usize,
    ones_lost: usize,
    zeros_lost: usize,
}

#[derive(Debug, Clone)]
pub struct DramArray {
    geometry: ArrayGeometry,
    periph: PeripheralConfig,
    refresh: RefreshPolicy,
    cell: CellParams,
    cell_overrides: BTreeMap<(usize, usize), CellParams>,
    rows: BTreeMap<usize, Row>,
    env: Vec<RowEnv>,
    clock: u64,
    refresh_epoch: u64,
    refresh_done: u64,
    trojan: Option<Trojan>,
    log: Vec<Event>,
}

impl DramArray {
    pub fn new(
        geometry: ArrayGeometry,
        periph: PeripheralConfig,
        refresh: RefreshPolicy,
        cell: CellParams,
        temp: f64,
    ) -> Result<Self> {
        geometry.validate()?;
        periph.validate()?;
        refresh.validate()?;
        cell.validate()?;
        LeakEnv::new(periph.v_wl_underdrive, temp, Polarity::One).validate()?;
        Ok(DramArray {
            geometry,
            periph,
            refresh,
            cell,
            cell_overrides: BTreeMap::new(),
            rows: BTreeMap::new(),
            env: vec![RowEnv { v_wl: periph.v_wl_underdrive, temp }; geometry.rows],
            clock: 0,
            refresh_epoch: 0,
            refresh_done: 0,
            trojan: None,
            log: Vec::new(),
        })
    }

    /// Default geometry and peripherals, nominal cells at 25 °C.
    pub fn with_defaults() -> Self {
        Self::new(
            ArrayGeometry::default(),
            PeripheralConfig::default(),
            RefreshPolicy::default(),
            CellParams::nominal(),
            25.0,
        )
        .expect("defaults are valid")
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn peripherals(&self) -> &PeripheralConfig {
        &self.periph
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<Event> {
        core::mem::take(&mut self.log)
    }

    pub fn trojan(&self) -> Option<&Trojan> {
        self.trojan.as_ref()
    }

    pub fn install_trojan(&mut self, trojan: Trojan) -> Result<()> {
        trojan.payload.validate(self.geometry.rows, self.geometry.cols)?;
        self.check_row(trojan.site.row)?;
        if trojan.site.word.is_some_and(|w| w >= self.geometry.words_per_row()) {
            return Err(Error::InvalidParam("trigger word out of range"));
        }
        self.trojan = Some(trojan);
        if self.trojan.as_ref().is_some_and(Trojan::latched) {
            self.apply_retention_override()?;
        }
        Ok(())
    }

    /// Resets the trigger and undoes any retention override.
    pub fn reset_trojan(&mut self) -> Result<()> {
        let was = match self.trojan.as_mut() {
            Some(t) => t.reset(),
            None => return Ok(()),
        };
        if was {
            self.log.push(Event::TriggerReleased { time: self.clock, accesses: 0 });
            self.restore_retention_wl()?;
        }
        Ok(())
    }

    pub fn row_env(&self, row: usize) -> Result<RowEnv> {
        self.check_row(row)?;
        Ok(self.env[row])
    }

    /// Changes the retention wordline level of `row`, first bringing its
    /// cells up to date under the old level.
    pub fn set_row_wl(&mut self, row: usize, v_wl: f64) -> Result<()> {
        self.check_row(row)?;
        check_range("v_wl", v_wl, V_WL_MIN, V_WL_MAX)?;
        self.sync_row(row)?;
        self.env[row].v_wl = v_wl;
        Ok(())
    }

    pub fn set_temperature(&mut self, temp: f64) -> Result<()> {
        LeakEnv::new(self.periph.v_wl_underdrive, temp, Polarity::One).validate()?;
        let rows: Vec<usize> = self.rows.keys().copied().collect();
        for r in rows {
            self.sync_row(r)?;
        }
        self.env.iter_mut().for_each(|e| e.temp = temp);
        Ok(())
    }

    /// Replaces the leakage parameters of a single cell.
    pub fn set_cell_params(&mut self, row: usize, col: usize, params: CellParams) -> Result<()> {
        self.check_row(row)?;
        self.check_col(col)?;
        params.validate()?;
        self.sync_row(row)?;
        self.cell_overrides.insert((row, col), params);
        Ok(())
    }

    /// Applies the WL-tamper override if the trigger is latched.
    pub fn apply_retention_override(&mut self) -> Result<()> {
        let (rows, v) = match &self.trojan {
            Some(t) if t.latched() => match &t.payload {
                PayloadKind::WlTamper { target_rows, v_override } => (target_rows.clone(), *v_override),
                _ => return Ok(()),
            },
            _ => return Ok(()),
        };
        for r in rows {
            self.set_row_wl(r, v)?;
        }
        Ok(())
    }

    fn restore_retention_wl(&mut self) -> Result<()> {
        if let Some(PayloadKind::WlTamper { target_rows, .. }) = self.trojan.as_ref().map(|t| &t.payload) {
            let rows = target_rows.clone();
            for r in rows {
                self.set_row_wl(r, self.periph.v_wl_underdrive)?;
            }
        }
        Ok(())
    }

    /// Stored voltage of a cell at the current clock, without side effects.
    pub fn cell_voltage(&self, row: usize, col: usize) -> Result<f64> {
        self.check_row(row)?;
        self.check_col(col)?;
        let Some(r) = self.rows.get(&row) else { return Ok(0.0) };
        let state = CellState::new(r.v[col], r.last_update);
        let env = LeakEnv::new(self.env[row].v_wl, self.env[row].temp, Polarity::from_bit(r.data[col]));
        Ok(evolve(&state, &env, self.params(row, col), self.clock - r.last_update)?.v_cell)
    }

    /// Last restored logical contents of a row, without sensing.
    pub fn stored_row(&self, row: usize) -> Result<Vec<bool>> {
        self.check_row(row)?;
        Ok(self.rows.get(&row).map_or_else(|| vec![false; self.geometry.cols], |r| r.data.clone()))
    }

    pub fn is_materialized(&self, row: usize) -> bool {
        self.rows.contains_key(&row)
    }

    /// Activates `row`, senses it, writes it back and returns the bits.
    pub fn read(&mut self, row: usize) -> Result<Vec<bool>> {
        self.activate(row, AccessKind::Read, None, None)
    }

    /// Drives a whole row to full rail.
    pub fn write(&mut self, row: usize, data: &[bool]) -> Result<()> {
        if data.len() != self.geometry.cols {
            return Err(Error::Width { got: data.len(), expected: self.geometry.cols });
        }
        self.activate(row, AccessKind::Write, None, Some((0, data))).map(|_| ())
    }

    /// Reads one word of a row (the whole row is activated).
    pub fn read_word(&mut self, row: usize, word: usize) -> Result<u64> {
        self.check_word(word)?;
        let bits = self.activate(row, AccessKind::Read, Some(word), None)?;
        Ok(self.pack(&bits, word))
    }

    /// Writes one word of a row; the other columns are sensed and restored.
    pub fn write_word(&mut self, row: usize, word: usize, value: u64) -> Result<()> {
        self.check_word(word)?;
        let wb = self.geometry.word_bits;
        let bits: Vec<bool> = (0..wb).map(|i| (value >> i) & 1 == 1).collect();
        self.activate(row, AccessKind::Write, Some(word), Some((word * wb, &bits))).map(|_| ())
    }

    pub fn refresh(&mut self, row: usize) -> Result<()> {
        self.check_row(row)?;
        if self.rows.contains_key(&row) {
            self.activate(row, AccessKind::Refresh, None, None)?;
        }
        Ok(())
    }

    /// Materialized rows not restored within the last refresh interval.
    pub fn refresh_due(&self) -> Vec<usize> {
        let t = self.refresh.interval_ns();
        self.rows.iter().filter(|(_, r)| r.last_restore + t <= self.clock).map(|(i, _)| *i).collect()
    }

    /// Refreshes every row now and restarts the sweep.
    pub fn refresh_all(&mut self) -> Result<()> {
        let rows: Vec<usize> = self.rows.keys().copied().collect();
        for r in rows {
            self.refresh(r)?;
        }
        self.refresh_epoch = self.clock;
        self.refresh_done = 0;
        Ok(())
    }

    fn next_refresh(&self) -> Option<u64> {
        if !self.refresh.enabled {
            return None;
        }
        let step = (self.refresh_done + 1) as u128 * self.refresh.interval_ns() as u128 / self.geometry.rows as u128;
        Some(self.refresh_epoch + step as u64)
    }

    /// Moves the clock forward, executing scheduled refreshes at their due times.
    pub fn advance_time(&mut self, dt: u64) -> Result<()> {
        let target = self.clock + dt;
        while let Some(due) = self.next_refresh().filter(|d| *d <= target) {
            self.clock = due;
            let row = (self.refresh_done % self.geometry.rows as u64) as usize;
            self.refresh_done += 1;
            self.refresh(row)?;
        }
        self.clock = target;
        Ok(())
    }

    pub fn advance_to(&mut self, time: u64) -> Result<()> {
        if time < self.clock {
            return Err(Error::InvalidParam("time runs backwards"));
        }
        self.advance_time(time - self.clock)
    }

    fn params(&self, row: usize, col: usize) -> &CellParams {
        self.cell_overrides.get(&(row, col)).unwrap_or(&self.cell)
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row < self.geometry.rows {
            Ok(())
        } else {
            Err(Error::RowRange { row, rows: self.geometry.rows })
        }
    }

    fn check_col(&self, col: usize) -> Result<()> {
        if col < self.geometry.cols {
            Ok(())
        } else {
            Err(Error::InvalidParam("column out of range"))
        }
    }

    fn check_word(&self, word: usize) -> Result<()> {
        if word < self.geometry.words_per_row() {
            Ok(())
        } else {
            Err(Error::InvalidParam("word out of range"))
        }
    }

    fn pack(&self, bits: &[bool], word: usize) -> u64 {
        let wb = self.geometry.word_bits;
        bits[word * wb..(word + 1) * wb].iter().enumerate().fold(0u64, |acc, (i, b)| acc | ((*b as u64) << i))
    }

    fn materialize(&mut self, row: usize) -> &mut Row {
        let cols = self.geometry.cols;
        let now = self.clock;
        self.rows.entry(row).or_insert_with(|| Row {
            v: vec![0.0; cols],
            data: vec![false; cols],
            last_update: now,
            last_restore: now,
        })
    }

    fn sync_row(&mut self, row: usize) -> Result<()> {
        let Some(r) = self.rows.get(&row) else { return Ok(()) };
        let dt = self.clock - r.last_update;
        if dt == 0 {
            return Ok(());
        }
        let env = self.env[row];
        let mut v = r.v.clone();
        for (col, vc) in v.iter_mut().enumerate() {
            let leak = LeakEnv::new(env.v_wl, env.temp, Polarity::from_bit(r.data[col]));
            *vc = evolve(&CellState::new(*vc, r.last_update), &leak, self.params(row, col), dt)?.v_cell;
        }
        let now = self.clock;
        let r = self.rows.get_mut(&row).expect("row present");
        r.v = v;
        r.last_update = now;
        Ok(())
    }

    /// Charge-shares every cell of a (synced, materialized) row onto its bitline.
    fn sense(&self, row: usize) -> Sensed {
        let r = &self.rows[&row];
        let mut out = Sensed { bits: Vec::with_capacity(r.v.len()), violations: 0, ones_lost: 0, zeros_lost: 0 };
        for (col, v) in r.v.iter().enumerate() {
            let c_s = self.params(row, col).c_s;
            let dv = (v - self.periph.v_precharge) * c_s / (c_s + self.periph.c_bl);
            let bit = dv > 0.0;
            if dv.abs() < self.periph.sm_min {
                out.violations += 1;
            }
            match (r.data[col], bit) {
                (true, false) => out.ones_lost += 1,
                (false, true) => out.zeros_lost += 1,
                _ => {}
            }
            out.bits.push(bit);
        }
        out
    }

    fn restore(&mut self, row: usize, bits: Vec<bool>) {
        let now = self.clock;
        let r = self.materialize(row);
        r.v = bits.iter().map(|b| Polarity::from_bit(*b).rail()).collect();
        r.data = bits;
        r.last_update = now;
        r.last_restore = now;
    }

    fn step_trigger(&mut self, row: usize, word: Option<usize>) -> Result<()> {
        let now = self.clock;
        let Some(t) = self.trojan.as_mut().filter(|t| t.hits(row, word)) else { return Ok(()) };
        match t.on_trigger_access(now) {
            Transition::Latched => {
                let accesses = t.trigger.accesses();
                self.log.push(Event::TriggerLatched { time: now, accesses });
                self.apply_retention_override()
            }
            Transition::Released => {
                let accesses = t.trigger.accesses();
                self.log.push(Event::TriggerReleased { time: now, accesses });
                self.restore_retention_wl()
            }
            Transition::None => Ok(()),
        }
    }

    fn activate(
        &mut self,
        row: usize,
        kind: AccessKind,
        word: Option<usize>,
        write: Option<(usize, &[bool])>,
    ) -> Result<Vec<bool>> {
        self.check_row(row)?;
        if kind != AccessKind::Refresh {
            self.step_trigger(row, word)?;
        }
        self.materialize(row);
        self.sync_row(row)?;

        let mut written = vec![false; self.geometry.cols];
        let mut bits = if matches!(write, Some((0, d)) if d.len() == self.geometry.cols) {
            vec![false; self.geometry.cols]
        } else {
            let s = self.sense(row);
            self.log_sensing(row, &s);
            s.bits
        };
        if let Some((start, data)) = write {
            bits[start..start + data.len()].copy_from_slice(data);
            written[start..start + data.len()].iter_mut().for_each(|w| *w = true);
        }

        if self.trojan.as_ref().is_some_and(Trojan::latched) {
            self.apply_short(row, &mut bits, &written)?;
        }
        self.restore(row, bits.clone());
        Ok(bits)
    }

    fn log_sensing(&mut self, row: usize, s: &Sensed) {
        let time = self.clock;
        if s.violations > 0 {
            self.log.push(Event::MarginViolation { time, row, cells: s.violations });
        }
        if s.ones_lost + s.zeros_lost > 0 {
            self.log.push(Event::RetentionFailure { time, row, ones_lost: s.ones_lost, zeros_lost: s.zeros_lost });
        }
    }

    fn apply_short(&mut self, row: usize, bits: &mut [bool], written: &[bool]) -> Result<()> {
        let Some(t) = self.trojan.as_ref() else { return Ok(()) };
        let curve = t.sm_curve;
        match t.payload.clone() {
            PayloadKind::WlShort { victim_row, adversary_row, delay_ps } if victim_row == row => {
                let pairs: Vec<(usize, usize)> = (0..self.geometry.cols).map(|c| (c, c)).collect();
                self.short_cells(row, adversary_row, &pairs, bits, written, curve.sm(delay_ps))
            }
            PayloadKind::BlShort { row: r, victim_col, adversary_col, delay_ps } if r == row => {
                self.short_cells(row, row, &[(victim_col, adversary_col)], bits, written, curve.sm(delay_ps))
            }
            _ => Ok(()),
        }
    }

    /// Resolves shorted (victim col, adversary col) pairs. The adversary
    /// cells live in `adv_row`, which may be the victim row itself.
    fn short_cells(
        &mut self,
        row: usize,
        adv_row: usize,
        pairs: &[(usize, usize)],
        bits: &mut [bool],
        written: &[bool],
        sm: f64,
    ) -> Result<()> {
        let prior_victim: Vec<bool> = bits.to_vec();
        let mut adv_bits = if adv_row == row {
            bits.to_vec()
        } else {
            self.materialize(adv_row);
            self.sync_row(adv_row)?;
            self.sense(adv_row).bits
        };

        let (mut copied, mut marginal, mut ones_lost, mut zeros_lost) = (0, 0, 0, 0);
        for &(vc, ac) in pairs {
            let (v, a) = resolve_short(bits[vc], adv_bits[ac], written[vc], sm);
            if written[vc] || sm > 0.0 {
                copied += 1;
                if !written[vc] && sm < self.periph.sm_min {
                    marginal += 1;
                }
            }
            match (prior_victim[vc], v) {
                (true, false) => ones_lost += 1,
                (false, true) => zeros_lost += 1,
                _ => {}
            }
            bits[vc] = v;
            adv_bits[ac] = a;
            if adv_row == row {
                bits[ac] = a;
            }
        }

        let time = self.clock;
        if marginal > 0 {
            self.log.push(Event::MarginViolation { time, row, cells: marginal });
        }
        if copied > 0 {
            self.log.push(Event::Leak { time, victim_row: row, adversary_row: adv_row, cells: copied });
        }
        if ones_lost + zeros_lost > 0 {
            self.log.push(Event::PayloadFault { time, row, ones_lost, zeros_lost });
        }
        if adv_row != row {
            self.restore(adv_row, adv_bits);
        }
        Ok(())
    }
}
