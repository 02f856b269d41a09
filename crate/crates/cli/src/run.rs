//! Trace replay through the array.

use dramtrojan_core::array::{DramArray, Event};
use dramtrojan_core::defense::{classify_attack, AttackClass, RunLog};

use crate::error::{HarnessError, Result};
use crate::memmap::MemoryMap;
use crate::report::{Report, Table};
use crate::scenario::{OnError, Scenario};
use crate::trace::{Op, TraceEvent};

pub fn attack_name(c: AttackClass) -> &'static str {
    match c {
        AttackClass::Clean => "clean",
        AttackClass::FaultInjection => "fault-injection",
        AttackClass::Dos => "dos",
        AttackClass::InformationLeakage => "information-leakage",
    }
}

/// Log entries as `time_ns,kind,row,detail` records.
pub fn log_table(events: &[Event]) -> Table {
    let mut t = Table::new("log", &["time_ns", "kind", "row", "detail"]);
    for e in events {
        let (time, kind, row, detail) = match e {
            Event::MarginViolation { time, row, cells } => (time, "margin-violation", *row, format!("cells={cells}")),
            Event::RetentionFailure { time, row, ones_lost, zeros_lost } => {
                (time, "retention-failure", *row, format!("ones_lost={ones_lost} zeros_lost={zeros_lost}"))
            }
            Event::Leak { time, victim_row, adversary_row, cells } => {
                (time, "leak", *victim_row, format!("to_row={adversary_row} cells={cells}"))
            }
            Event::PayloadFault { time, row, ones_lost, zeros_lost } => {
                (time, "payload-fault", *row, format!("ones_lost={ones_lost} zeros_lost={zeros_lost}"))
            }
            Event::TriggerLatched { time, accesses } => (time, "trigger-latched", 0, format!("accesses={accesses}")),
            Event::TriggerReleased { time, accesses } => (time, "trigger-released", 0, format!("accesses={accesses}")),
        };
        t.push([time.to_string(), kind.to_string(), row.to_string(), detail]);
    }
    t
}

fn apply(array: &mut DramArray, map: &MemoryMap, e: &TraceEvent) -> Result<String> {
    array.advance_to(e.time.max(array.clock()))?;
    let (row, word) = map.cell_of(e.addr)?;
    Ok(match e.op {
        Op::Read => format!("{:#x}", array.read_word(row, word)?),
        Op::Write => {
            array.write_word(row, word, e.data.unwrap_or(0))?;
            "ok".into()
        }
    })
}

/// Replays `events` on an already built array.
pub fn replay(array: &mut DramArray, map: &MemoryMap, events: &[TraceEvent], on_error: OnError) -> Result<Report> {
    let mut report = Report::new("run");
    let mut table = Table::new("events", &["time_ns", "op", "addr", "data", "result"]);
    let mut errors = 0usize;
    for e in events {
        let result = match apply(array, map, e) {
            Ok(r) => r,
            Err(err @ (HarnessError::Address { .. } | HarnessError::Model(_))) => {
                errors += 1;
                format!("error: {err}")
            }
            Err(other) => return Err(other),
        };
        let op = if e.op == Op::Read { "R" } else { "W" };
        let data = e.data.map_or(String::new(), |d| format!("{d:#x}"));
        let failed = result.starts_with("error");
        table.push([e.time.to_string(), op.to_string(), format!("{:#x}", e.addr), data, result]);
        if failed && on_error == OnError::Abort {
            break;
        }
    }
    let log = array.log().to_vec();
    let run_log = RunLog::from_events(&log);
    report.table(table);
    report.table(log_table(&log));
    report.summary("events", events.len());
    report.summary("event_errors", errors);
    report.summary("ones_lost", run_log.ones_lost);
    report.summary("zeros_lost", run_log.zeros_lost);
    report.summary("leaks", run_log.leaks);
    report.summary("classification", attack_name(classify_attack(&run_log)));
    if let Some(t) = array.trojan() {
        report.summary("trigger_accesses", t.trigger.accesses());
        report.summary("trigger_latched", t.latched());
    }
    report.check("trace_applied", errors == 0, format!("{errors} event errors"));
    Ok(report)
}

pub fn run_trace(scenario: &Scenario, events: &[TraceEvent]) -> Result<Report> {
    let mut array = scenario.build_array()?;
    replay(&mut array, &scenario.memory_map()?, events, scenario.run.on_error)
}
