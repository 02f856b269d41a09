//! Scripted end-to-end information-leak exploit.

use dramtrojan_core::array::DramArray;

use crate::error::Result;
use crate::memmap::MemoryMap;
use crate::report::{Report, Table};
use crate::scenario::{Scenario, TriggerMode};
use crate::trace::{Op, TraceEvent};

pub const TRIGGER_ADDR: u64 = 0x8002_2328;
pub const ADVERSARY_ADDR: u64 = 0x8002_22E8;
pub const VICTIM_ADDR: u64 = 0x8002_22A8;
pub const DEFAULT_SECRET: u64 = 8_575_309;
/// The same secret as it is sometimes quoted.
pub const ALTERNATE_SECRET: u64 = 8_675_309;
/// Spacing of back-to-back trigger accesses: 10 ns on, 1 ns off.
pub const ACCESS_PERIOD_NS: u64 = 11;

#[derive(Debug, Clone, PartialEq)]
pub struct ExploitConfig {
    pub trigger_addr: u64,
    pub adversary_addr: u64,
    pub victim_addr: u64,
    pub n_set: u64,
    pub extra_accesses_to_disable: u64,
    pub secret: u64,
    pub mode: TriggerMode,
    /// Trigger accesses the adversary actually makes before reading.
    pub trigger_accesses: u64,
}

impl Default for ExploitConfig {
    fn default() -> Self {
        ExploitConfig {
            trigger_addr: TRIGGER_ADDR,
            adversary_addr: ADVERSARY_ADDR,
            victim_addr: VICTIM_ADDR,
            n_set: 1837,
            extra_accesses_to_disable: 163,
            secret: DEFAULT_SECRET,
            mode: TriggerMode::Counter,
            trigger_accesses: 1837,
        }
    }
}

impl ExploitConfig {
    pub fn scenario(&self) -> Scenario {
        let mut s = Scenario::exploit();
        s.trojan.mode = self.mode;
        s.trojan.trigger_addr = self.trigger_addr;
        s.trojan.n_set = self.n_set;
        s.trojan.disable_after = Some(self.extra_accesses_to_disable);
        s.trojan.payload.victim_addr = self.victim_addr;
        s.trojan.payload.adversary_addr = self.adversary_addr;
        s
    }

    fn interval_ns(&self) -> u64 {
        (self.scenario().refresh.interval_ms * 1e6).round() as u64
    }
}

/// The victim's second value, written after the trigger is disabled.
pub fn post_disable_value(secret: u64) -> u64 {
    secret ^ 0x5a5a_5a5a
}

/// Phases of the exploit as trace events.
pub fn exploit_phases(cfg: &ExploitConfig) -> Vec<(&'static str, Vec<TraceEvent>)> {
    let interval = cfg.interval_ns();
    let hammer = |start: u64, n: u64| -> Vec<TraceEvent> {
        (0..n).map(|i| TraceEvent::read(start + i * ACCESS_PERIOD_NS, cfg.trigger_addr)).collect()
    };
    let init = vec![
        TraceEvent::write(0, cfg.adversary_addr, 0),
        TraceEvent::write(ACCESS_PERIOD_NS, cfg.victim_addr, cfg.secret),
    ];
    let t0 = 2 * ACCESS_PERIOD_NS;
    let arm = hammer(t0, cfg.trigger_accesses);
    let t1 = t0 + cfg.trigger_accesses * ACCESS_PERIOD_NS;
    // one refresh interval lets the victim row's refresh perform the copy
    let t2 = t1 + interval;
    let leak = vec![TraceEvent::read(t2, cfg.adversary_addr)];
    let disarm = hammer(t2 + ACCESS_PERIOD_NS, cfg.extra_accesses_to_disable);
    let t3 = t2 + (cfg.extra_accesses_to_disable + 1) * ACCESS_PERIOD_NS;
    let after = vec![
        TraceEvent::write(t3, cfg.victim_addr, post_disable_value(cfg.secret)),
        TraceEvent::read(t3 + interval, cfg.adversary_addr),
    ];
    let mut phases = vec![("init", init), ("arm", arm), ("leak", leak)];
    if cfg.trigger_accesses >= cfg.n_set {
        phases.push(("disarm", disarm));
        phases.push(("after", after));
    }
    phases
}

/// The whole exploit as one trace.
pub fn exploit_trace(cfg: &ExploitConfig) -> Vec<TraceEvent> {
    exploit_phases(cfg).into_iter().flat_map(|(_, e)| e).collect()
}

fn play(array: &mut DramArray, map: &MemoryMap, events: &[TraceEvent]) -> Result<Option<u64>> {
    let mut last = None;
    for e in events {
        array.advance_to(e.time)?;
        let (row, word) = map.cell_of(e.addr)?;
        match e.op {
            Op::Write => array.write_word(row, word, e.data.unwrap_or(0))?,
            Op::Read => last = Some(array.read_word(row, word)?),
        }
    }
    Ok(last)
}

pub fn exploit_demo(cfg: &ExploitConfig) -> Result<Report> {
    let scenario = cfg.scenario();
    let map = scenario.memory_map()?;
    let mut array = scenario.build_array()?;
    let mut report = Report::new("exploit-demo");
    let mut steps = Table::new("exploit", &["phase", "time_ns", "trigger_accesses", "trigger_en", "readout"]);

    let latched = |a: &DramArray| a.trojan().is_some_and(|t| t.latched());
    let accesses = |a: &DramArray| a.trojan().map_or(0, |t| t.trigger.accesses());
    let mut readouts = Vec::new();
    let mut enabled_after_arm = false;
    let mut enabled_after_disarm = false;
    for (name, events) in exploit_phases(cfg) {
        let r = play(&mut array, &map, &events)?;
        readouts.push(r);
        match name {
            "arm" => enabled_after_arm = latched(&array),
            "disarm" => enabled_after_disarm = latched(&array),
            _ => {}
        }
        steps.push([
            name.to_string(),
            array.clock().to_string(),
            accesses(&array).to_string(),
            (latched(&array) as u8).to_string(),
            r.map_or(String::new(), |v| v.to_string()),
        ]);
    }
    let leaked = readouts[2].unwrap_or(0);
    let after = readouts.get(4).copied().flatten();

    report.table(steps);
    report.summary("mode", if cfg.mode == TriggerMode::Counter { "counter" } else { "analog" });
    report.summary("secret", cfg.secret);
    report.summary("trigger_accesses", cfg.trigger_accesses);
    report.summary("adversary_readout", leaked);
    if let Some(a) = after {
        report.summary("post_disable_readout", a);
    }
    report.note(format!(
        "alternate secret {ALTERNATE_SECRET} is also quoted for this exploit; the secret is configurable"
    ));
    report.note(format!(
        "disable after {}+{}={} trigger accesses (a count of 1999 is also quoted)",
        cfg.n_set,
        cfg.extra_accesses_to_disable,
        cfg.n_set + cfg.extra_accesses_to_disable
    ));
    if cfg.secret == 0 {
        report.summary("degenerate", true);
        report.note("degenerate demo: secret equals the adversary's initial value, leak is indistinguishable");
    }

    let armed = cfg.trigger_accesses >= cfg.n_set;
    report.check(
        "trigger_en",
        enabled_after_arm == armed,
        format!("after {} accesses trigger_en={}", cfg.trigger_accesses, enabled_after_arm as u8),
    );
    let expected = if armed { cfg.secret } else { 0 };
    report.check("adversary_readout", leaked == expected, format!("read {leaked} expected {expected}"));
    if let (TriggerMode::Counter, true, Some(after)) = (cfg.mode, armed, after) {
        report.check(
            "trigger_disabled",
            !enabled_after_disarm,
            format!("after {} more accesses trigger_en={}", cfg.extra_accesses_to_disable, enabled_after_disarm as u8),
        );
        report.check(
            "post_disable_no_leak",
            after != post_disable_value(cfg.secret) || cfg.secret == post_disable_value(cfg.secret),
            format!("adversary reads {after} after victim rewrite"),
        );
    } else if cfg.mode == TriggerMode::Analog {
        report.note("analog latch holds until reset; the access counter disable does not apply");
    }
    Ok(report)
}
