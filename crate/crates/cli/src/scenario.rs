//! Scenario files (TOML).
//!
//! ```toml
//! [geometry]
//! rows = 4096
//!
//! [trojan]
//! mode = "counter"
//! trigger_addr = 0x80022328
//!
//! [trojan.payload]
//! kind = "wl-short"
//! victim_addr = 0x800222A8
//! adversary_addr = 0x800222E8
//! delay_ps = 45.0
//! ```
//!
//! Every section and key is optional; missing values take the defaults below.

use std::path::Path;

use dramtrojan_core::array::{ArrayGeometry, DramArray, PeripheralConfig, RefreshPolicy};
use dramtrojan_core::cell::CellParams;
use dramtrojan_core::defense::{CrcConfig, DefenseConfig, DummyBitsConfig, EccConfig, Placement, RowLayout};
use dramtrojan_core::payload::{PayloadKind, TriggerSite, TriggerUnit, Trojan};
use dramtrojan_core::trigger::{calibrate, CalibrationTargets, TriggerParams};
use dramtrojan_core::variation::VariationSpec;
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::memmap::{MemoryMap, DRAM_BASE};

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub geometry: GeometrySection,
    pub peripherals: PeripheralSection,
    pub refresh: RefreshSection,
    pub env: EnvSection,
    pub trojan: TrojanSection,
    pub defenses: DefenseSection,
    pub variation: VariationSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub rows: usize,
    pub cols: usize,
    pub word_bits: usize,
    pub dram_base: u64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = ArrayGeometry::default();
        GeometrySection { rows: g.rows, cols: g.cols, word_bits: g.word_bits, dram_base: DRAM_BASE }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeripheralSection {
    pub v_wl_boost: f64,
    pub v_wl_underdrive: f64,
    /// fF
    pub c_bl: f64,
    pub sa_fire_delay: f64,
}

impl Default for PeripheralSection {
    fn default() -> Self {
        let p = PeripheralConfig::default();
        PeripheralSection {
            v_wl_boost: p.v_wl_boost,
            v_wl_underdrive: p.v_wl_underdrive,
            c_bl: p.c_bl,
            sa_fire_delay: p.sa_fire_delay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefreshSection {
    pub interval_ms: f64,
    pub enabled: bool,
}

impl Default for RefreshSection {
    fn default() -> Self {
        RefreshSection { interval_ms: 64.0, enabled: true }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvSection {
    pub temp: f64,
}

impl Default for EnvSection {
    fn default() -> Self {
        EnvSection { temp: 25.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriggerMode {
    Counter,
    Analog,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrojanSection {
    pub enabled: bool,
    pub mode: TriggerMode,
    pub trigger_addr: u64,
    pub n_set: u64,
    /// Counter mode: accesses after enabling at which the trigger disables.
    pub disable_after: Option<u64>,
    /// Analog mode.
    pub c_trigger: f64,
    pub corner_scale: f64,
    pub payload: PayloadSection,
}

impl Default for TrojanSection {
    fn default() -> Self {
        TrojanSection {
            enabled: false,
            mode: TriggerMode::Counter,
            trigger_addr: crate::exploit::TRIGGER_ADDR,
            n_set: 1837,
            disable_after: Some(163),
            c_trigger: 20.0,
            corner_scale: 1.0,
            payload: PayloadSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadName {
    WlShort,
    BlShort,
    WlTamper,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PayloadSection {
    pub kind: PayloadName,
    pub victim_addr: u64,
    pub adversary_addr: u64,
    pub delay_ps: f64,
    /// BL short: columns within the victim row.
    pub victim_col: usize,
    pub adversary_col: usize,
    /// WL tamper.
    pub target_addrs: Vec<u64>,
    pub v_override: f64,
}

impl Default for PayloadSection {
    fn default() -> Self {
        PayloadSection {
            kind: PayloadName::WlShort,
            victim_addr: crate::exploit::VICTIM_ADDR,
            adversary_addr: crate::exploit::ADVERSARY_ADDR,
            delay_ps: 45.0,
            victim_col: 0,
            adversary_col: 1,
            target_addrs: Vec::new(),
            v_override: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefenseSection {
    pub ecc: bool,
    pub check_bits: usize,
    pub placement: PlacementName,
    pub crc_width: usize,
    /// Including the `x^width` term; 0 picks CRC-8 (0x107).
    pub crc_poly: u64,
    pub dummy_bits: usize,
    /// The Trojan rewrites inline check bits of the rows it corrupts.
    pub reencode: bool,
}

impl Default for DefenseSection {
    fn default() -> Self {
        DefenseSection {
            ecc: false,
            check_bits: 8,
            placement: PlacementName::Inline,
            crc_width: 0,
            crc_poly: 0,
            dummy_bits: 0,
            reencode: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementName {
    Inline,
    Trusted,
}

impl From<PlacementName> for Placement {
    fn from(p: PlacementName) -> Self {
        match p {
            PlacementName::Inline => Placement::Inline,
            PlacementName::Trusted => Placement::Trusted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariationSection {
    /// `None` calibrates sigma against `calibrate_rate` at `calibrate_v_wl`.
    pub sigma_vth: Option<f64>,
    pub n_trials: u64,
    pub fail_threshold_ms: f64,
    pub calibrate_v_wl: f64,
    pub calibrate_rate: f64,
}

impl Default for VariationSection {
    fn default() -> Self {
        VariationSection {
            sigma_vth: None,
            n_trials: 1000,
            fail_threshold_ms: 5.0,
            calibrate_v_wl: 0.4,
            calibrate_rate: 0.436,
        }
    }
}

impl VariationSection {
    pub fn spec(&self, sigma: f64, seed: u64) -> VariationSpec {
        VariationSpec {
            sigma_vth: sigma,
            n_trials: self.n_trials,
            seed,
            fail_threshold: self.fail_threshold_ms,
            base: CellParams::nominal(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnError {
    /// Record the failing event and keep going.
    Continue,
    Abort,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub on_error: OnError,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { on_error: OnError::Continue }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Geometry large enough for the default exploit addresses.
    pub fn exploit() -> Self {
        let mut s = Scenario::default();
        s.geometry.rows = 4096;
        s.trojan.enabled = true;
        s
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        Ok(ArrayGeometry::new(self.geometry.rows, self.geometry.cols, self.geometry.word_bits)?)
    }

    pub fn memory_map(&self) -> Result<MemoryMap> {
        Ok(MemoryMap::new(self.geometry.dram_base, &self.geometry()?))
    }

    /// Array with no Trojan installed.
    pub fn build_clean_array(&self) -> Result<DramArray> {
        let periph = PeripheralConfig {
            v_wl_boost: self.peripherals.v_wl_boost,
            v_wl_underdrive: self.peripherals.v_wl_underdrive,
            c_bl: self.peripherals.c_bl,
            sa_fire_delay: self.peripherals.sa_fire_delay,
            ..PeripheralConfig::default()
        };
        let refresh = RefreshPolicy { interval_ms: self.refresh.interval_ms, enabled: self.refresh.enabled };
        Ok(DramArray::new(self.geometry()?, periph, refresh, CellParams::nominal(), self.env.temp)?)
    }

    /// Array with the scenario's Trojan, if enabled.
    pub fn build_array(&self) -> Result<DramArray> {
        let mut a = self.build_clean_array()?;
        if let Some(t) = self.trojan()? {
            a.install_trojan(t)?;
        }
        Ok(a)
    }

    pub fn trigger_params(&self) -> Result<TriggerParams> {
        let calibrated = calibrate(&TriggerParams::nominal(), &CalibrationTargets::default())?;
        Ok(TriggerParams { c_trigger: self.trojan.c_trigger, corner_scale: self.trojan.corner_scale, ..calibrated })
    }

    pub fn trojan(&self) -> Result<Option<Trojan>> {
        let t = &self.trojan;
        if !t.enabled {
            return Ok(None);
        }
        let map = self.memory_map()?;
        let (row, word) = map.cell_of(t.trigger_addr)?;
        let trigger = match t.mode {
            TriggerMode::Counter => {
                if t.n_set == 0 {
                    return Err(HarnessError::Scenario("n_set must be at least 1".into()));
                }
                TriggerUnit::counter(t.n_set, t.disable_after)
            }
            TriggerMode::Analog => TriggerUnit::analog(self.trigger_params()?),
        };
        let p = &t.payload;
        let payload = match p.kind {
            PayloadName::WlShort => PayloadKind::WlShort {
                victim_row: map.cell_of(p.victim_addr)?.0,
                adversary_row: map.cell_of(p.adversary_addr)?.0,
                delay_ps: p.delay_ps,
            },
            PayloadName::BlShort => PayloadKind::BlShort {
                row: map.cell_of(p.victim_addr)?.0,
                victim_col: p.victim_col,
                adversary_col: p.adversary_col,
                delay_ps: p.delay_ps,
            },
            PayloadName::WlTamper => PayloadKind::WlTamper {
                target_rows: p.target_addrs.iter().map(|a| map.cell_of(*a).map(|c| c.0)).collect::<Result<_>>()?,
                v_override: p.v_override,
            },
        };
        Ok(Some(Trojan::new(TriggerSite { row, word: Some(word) }, trigger, payload)))
    }

    pub fn defense_config(&self) -> Result<DefenseConfig> {
        let d = &self.defenses;
        let placement = Placement::from(d.placement);
        Ok(DefenseConfig {
            ecc: d.ecc.then_some(EccConfig { data_bits: self.geometry.word_bits, check_bits: d.check_bits, placement }),
            crc: (d.crc_width > 0).then_some(CrcConfig {
                polynomial: if d.crc_poly == 0 { 0x107 } else { d.crc_poly },
                width: d.crc_width,
                placement,
            }),
            dummy: (d.dummy_bits > 0).then(|| DummyBitsConfig::alternating(d.dummy_bits)),
        })
    }

    pub fn row_layout(&self) -> Result<RowLayout> {
        Ok(RowLayout::fit(self.geometry.cols, self.geometry.word_bits, self.defense_config()?)?)
    }
}
