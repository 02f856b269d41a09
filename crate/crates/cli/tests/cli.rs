use std::path::PathBuf;

use dramtrojan::exploit::{exploit_trace, ExploitConfig, ADVERSARY_ADDR, DEFAULT_SECRET};
use dramtrojan::memmap::MemoryMap;
use dramtrojan::run::{replay, run_trace};
use dramtrojan::scenario::{OnError, PayloadName, Scenario, TriggerMode};
use dramtrojan::trace::{format_trace, parse_trace, Op, TraceEvent};
use dramtrojan::{mc, sweep, trigger_pattern, HarnessError};
use dramtrojan_core::array::ArrayGeometry;
use proptest::prelude::*;

fn scenario_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// Events up to and including the adversary readout.
fn leak_trace(accesses: u64) -> Vec<TraceEvent> {
    let cfg = ExploitConfig { trigger_accesses: accesses, ..Default::default() };
    let mut t = exploit_trace(&cfg);
    let readout = t.iter().position(|e| e.op == Op::Read && e.addr == ADVERSARY_ADDR).unwrap();
    t.truncate(readout + 1);
    t
}

fn last_result(report: &dramtrojan::report::Report) -> String {
    report.find_table("events").unwrap().column("result").last().unwrap().to_string()
}

proptest! {
    #[test]
    fn address_map_round_trips(rows in 2usize..5000, words in 1usize..16, pick in any::<u64>()) {
        let g = ArrayGeometry::new(rows, words * 64, 64).unwrap();
        let map = MemoryMap::new(0x8000_0000, &g);
        let a = 0x8000_0000 + (pick % (map.capacity_bytes() / 8)) * 8;
        let (r, w) = map.cell_of(a).unwrap();
        prop_assert_eq!(map.addr_of(r, w).unwrap(), a);
    }

    #[test]
    fn trace_text_round_trips(ops in proptest::collection::vec((0u64..100, any::<bool>(), any::<u64>(), any::<u64>()), 0..40)) {
        let mut t = 0;
        let events: Vec<TraceEvent> = ops
            .into_iter()
            .map(|(dt, w, a, d)| {
                t += dt;
                if w { TraceEvent::write(t, a, d) } else { TraceEvent::read(t, a) }
            })
            .collect();
        prop_assert_eq!(parse_trace(&format_trace(&events)).unwrap(), events);
    }
}

#[test]
fn out_of_range_addresses_rejected() {
    let map = MemoryMap::new(0x8000_0000, &ArrayGeometry::default());
    assert!(map.cell_of(0x7fff_fff8).is_err());
    assert!(map.cell_of(0x8000_0000 + map.capacity_bytes()).is_err());
    assert!(map.cell_of(0x8000_0004).is_err());
    assert!(map.addr_of(64, 0).is_err());
}

#[test]
fn scenario_files_parse() {
    for f in ["exploit.toml", "tamper-trusted-ecc.toml", "short-dummy-bits.toml"] {
        let s = Scenario::load(&scenario_file(f)).unwrap();
        assert!(s.trojan.enabled, "{f}");
        s.build_array().unwrap();
    }
    let s = Scenario::load(&scenario_file("exploit.toml")).unwrap();
    let mut e = Scenario::exploit();
    e.trojan.disable_after = Some(163);
    assert_eq!(s, e);
}

#[test]
fn scenario_rejects_unknown_keys_and_bad_values() {
    assert!(matches!(Scenario::from_toml("[geometry]\nrowz = 4"), Err(HarnessError::Toml(_))));
    assert!(matches!(Scenario::from_toml("[trojan]\nmode = \"digital\""), Err(HarnessError::Toml(_))));
    let s = Scenario::from_toml("[trojan]\nenabled = true\ntrigger_addr = 0x90000000").unwrap();
    assert!(matches!(s.build_array(), Err(HarnessError::Address { .. })));
    let s = Scenario::from_toml("[defenses]\necc = true\ncheck_bits = 5").unwrap();
    assert!(s.row_layout().is_err());
}

#[test]
fn empty_trace_is_clean() {
    let r = run_trace(&Scenario::exploit(), &[]).unwrap();
    assert_eq!(r.find_table("log").unwrap().rows.len(), 0);
    assert_eq!(r.get("classification"), Some("clean"));
    assert!(r.all_pass());
}

#[test]
fn trace_at_threshold_leaks_secret() {
    let r = run_trace(&Scenario::exploit(), &leak_trace(1837)).unwrap();
    assert_eq!(last_result(&r), format!("{DEFAULT_SECRET:#x}"));
    assert_eq!(r.get("classification"), Some("information-leakage"));
}

#[test]
fn trace_one_below_threshold_reads_zero() {
    let r = run_trace(&Scenario::exploit(), &leak_trace(1836)).unwrap();
    assert_eq!(last_result(&r), "0x0");
    assert_eq!(r.get("trigger_latched"), Some("false"));
}

#[test]
fn analog_trigger_agrees_with_counter() {
    let mut s = Scenario::exploit();
    s.trojan.mode = TriggerMode::Analog;
    for (n, want) in [(1836, "0x0".to_string()), (1837, format!("{DEFAULT_SECRET:#x}"))] {
        let r = run_trace(&s, &leak_trace(n)).unwrap();
        assert_eq!(last_result(&r), want, "{n} accesses");
    }
}

#[test]
fn bad_events_follow_error_policy() {
    let mut s = Scenario::default();
    let events =
        [TraceEvent::write(0, 0x8000_0000, 1), TraceEvent::read(1, 0x9000_0000), TraceEvent::read(2, 0x8000_0000)];
    let r = run_trace(&s, &events).unwrap();
    assert_eq!(r.get("event_errors"), Some("1"));
    assert_eq!(r.find_table("events").unwrap().rows.len(), 3);
    assert_eq!(r.exit_code(), 1);

    s.run.on_error = OnError::Abort;
    let map = s.memory_map().unwrap();
    let r = replay(&mut s.build_array().unwrap(), &map, &events, OnError::Abort).unwrap();
    assert_eq!(r.find_table("events").unwrap().rows.len(), 2);
}

#[test]
fn empty_sweeps_are_config_errors() {
    let cfg = |r: dramtrojan::Result<_>| matches!(r, Err(HarnessError::Config(_)));
    assert!(cfg(sweep::trigger_capacitance(&[], trigger_pattern(10, 1), None)));
    assert!(cfg(sweep::duty_cycle(10, &[], 1000, None)));
    assert!(cfg(sweep::retention_voltage(&[], 25.0)));
    assert!(cfg(mc::mc_sweep(&[], 25.0, &Scenario::default().variation, 0, None)));
}

#[test]
fn missed_fire_fails_duty_check() {
    let r = sweep::duty_cycle(1, &[1, 30], 500, None).unwrap();
    assert_eq!(r.find_table("duty-cycle").unwrap().column("n_set"), vec!["none", "none"]);
    let failed: Vec<&str> = r.asserts.iter().filter(|a| !a.pass).map(|a| a.name.as_str()).collect();
    assert_eq!(failed, vec!["fires_at_duty_30pct"]);
}

#[test]
fn bl_short_scenario_without_defenses() {
    let s = dramtrojan::defense_eval::matrix_scenario(PayloadName::BlShort);
    let ev = dramtrojan::defense_eval::evaluate(&s).unwrap();
    assert_eq!(ev.latched_after, Some(1837));
    assert_eq!(ev.rows.len(), 1);
}
