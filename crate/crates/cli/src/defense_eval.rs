//! Runs a payload against protected rows and scores what the defenses see.

use std::collections::BTreeSet;

use dramtrojan_core::array::{DramArray, Event};
use dramtrojan_core::defense::{
    check_row, classify_attack, AttackClass, CheckContext, DetectionOutcome, RowLayout, RunLog, WordChecks,
};
use dramtrojan_core::payload::PayloadKind;

use crate::error::{HarnessError, Result};
use crate::exploit::ACCESS_PERIOD_NS;
use crate::report::{Report, Table};
use crate::run::{attack_name, log_table};
use crate::scenario::{PayloadName, PlacementName, Scenario, TriggerMode};

/// Refresh intervals to wait after the trigger latches.
pub const SETTLE_INTERVALS: u64 = 2;

pub fn outcome_name(o: DetectionOutcome) -> &'static str {
    match o {
        DetectionOutcome::Clean => "clean",
        DetectionOutcome::Corrected => "corrected",
        DetectionOutcome::Detected => "detected",
        DetectionOutcome::UndetectedCorruption => "undetected-corruption",
        DetectionOutcome::LeakageUndetected => "leakage-undetected",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowOutcome {
    pub row: usize,
    pub role: &'static str,
    pub outcome: DetectionOutcome,
    pub words_changed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rows: Vec<RowOutcome>,
    pub class: AttackClass,
    pub latched_after: Option<u64>,
    pub log: Vec<Event>,
}

impl Evaluation {
    pub fn outcome(&self, role: &str) -> Option<DetectionOutcome> {
        self.rows.iter().find(|r| r.role == role).map(|r| r.outcome)
    }
}

/// Owner data of a provisioned row: alternating bits, distinct per word.
pub fn owner_words(layout: &RowLayout, seed: u64) -> Vec<u64> {
    let mask = if layout.word_bits == 64 { u64::MAX } else { (1u64 << layout.word_bits) - 1 };
    (0..layout.data_words as u64).map(|i| (0x5555_5555_5555_5555 ^ ((seed + i) << 8)) & mask).collect()
}

fn rows_of_interest(payload: &PayloadKind) -> Vec<(usize, &'static str)> {
    match payload {
        PayloadKind::WlShort { victim_row, adversary_row, .. } => {
            vec![(*victim_row, "victim"), (*adversary_row, "adversary")]
        }
        PayloadKind::BlShort { row, .. } => vec![(*row, "victim")],
        PayloadKind::WlTamper { target_rows, .. } => target_rows.iter().map(|r| (*r, "target")).collect(),
    }
}

fn hammer_until_latched(array: &mut DramArray, row: usize, word: usize, limit: u64) -> Result<Option<u64>> {
    for i in 1..=limit {
        let t = array.clock() + ACCESS_PERIOD_NS;
        array.advance_to(t)?;
        array.read_word(row, word)?;
        if array.trojan().is_some_and(|t| t.latched()) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

pub fn evaluate(scenario: &Scenario) -> Result<Evaluation> {
    let trojan = scenario
        .trojan()?
        .ok_or_else(|| HarnessError::Scenario("defense evaluation needs an enabled trojan".into()))?;
    let layout = scenario.row_layout()?;
    let mut array = scenario.build_array()?;
    let targets = rows_of_interest(&trojan.payload);

    let mut provisioned: Vec<(usize, &'static str, Vec<u64>, Vec<WordChecks>)> = Vec::new();
    for (i, (row, role)) in targets.iter().enumerate() {
        let words = if *role == "adversary" { vec![0; layout.data_words] } else { owner_words(&layout, i as u64) };
        array.write(*row, &layout.provision(&words)?)?;
        let checks = layout.checks(&words)?;
        provisioned.push((*row, role, words, checks));
    }

    let limit = match scenario.trojan.mode {
        TriggerMode::Counter => scenario.trojan.n_set,
        TriggerMode::Analog => 100_000,
    };
    let latched_after = hammer_until_latched(&mut array, trojan.site.row, trojan.site.word.unwrap_or(0), limit)?;
    let interval = (scenario.refresh.interval_ms * 1e6).round() as u64;
    array.advance_time(SETTLE_INTERVALS * interval)?;

    let mut outcomes = Vec::new();
    let reencode = scenario.defenses.reencode;
    let trusted_placement = scenario.defenses.placement == PlacementName::Trusted;
    for (row, role, words, checks) in &provisioned {
        let mut bits = array.read(*row)?;
        if reencode {
            layout.write_inline_checks(&mut bits)?;
        }
        let leaked_into: BTreeSet<usize> = array
            .log()
            .iter()
            .filter_map(|e| match e {
                Event::Leak { adversary_row, .. } => Some(*adversary_row),
                _ => None,
            })
            .collect();
        let ctx = CheckContext {
            expected: Some(words),
            trusted: trusted_placement.then_some(&checks[..]),
            leaked_into: leaked_into.contains(row),
        };
        let outcome = check_row(&bits, &layout, &ctx)?;
        let now = layout.words(&bits);
        let words_changed = now.iter().zip(words).filter(|(a, b)| a != b).count();
        outcomes.push(RowOutcome { row: *row, role, outcome, words_changed });
    }
    let log = array.log().to_vec();
    Ok(Evaluation { rows: outcomes, class: classify_attack(&RunLog::from_events(&log)), latched_after, log })
}

pub fn defense_eval(scenario: &Scenario) -> Result<Report> {
    let ev = evaluate(scenario)?;
    let mut report = Report::new("defense-eval");
    let mut t = Table::new("detection", &["row", "role", "outcome", "words_changed"]);
    for r in &ev.rows {
        t.push([
            r.row.to_string(),
            r.role.to_string(),
            outcome_name(r.outcome).to_string(),
            r.words_changed.to_string(),
        ]);
    }
    report.table(t);
    report.table(log_table(&ev.log));
    report.summary("trigger_latched_after", ev.latched_after.map_or("never".into(), |n| n.to_string()));
    report.summary("classification", attack_name(ev.class));
    if scenario.defenses.reencode {
        report.note("inline check bits rewritten by the trojan before readout");
    }
    Ok(report)
}

/// Small array scenario for the matrix, rows 3 (victim) and 4 (adversary),
/// trigger at row 10.
pub fn matrix_scenario(payload: PayloadName) -> Scenario {
    let mut s = Scenario::default();
    let map = s.memory_map().expect("default geometry is valid");
    let addr = |row: usize| map.addr_of(row, 0).expect("row inside the default array");
    s.trojan.enabled = true;
    s.trojan.trigger_addr = addr(10);
    s.trojan.payload.kind = payload;
    s.trojan.payload.victim_addr = addr(3);
    s.trojan.payload.adversary_addr = addr(4);
    s.trojan.payload.target_addrs = vec![addr(3)];
    s
}

struct Case {
    name: &'static str,
    scenario: Scenario,
    role: &'static str,
    expect: fn(DetectionOutcome) -> bool,
    want: &'static str,
}

fn cases() -> Vec<Case> {
    let mut v = Vec::new();

    // delay 0 pulls the adversary bit into the victim column: one flipped bit
    let mut s = matrix_scenario(PayloadName::BlShort);
    s.trojan.payload.delay_ps = 0.0;
    s.defenses.ecc = true;
    v.push(Case {
        name: "single_bit_fault_inline_secded",
        scenario: s,
        role: "victim",
        expect: |o| o == DetectionOutcome::Corrected,
        want: "corrected",
    });

    let mut s = matrix_scenario(PayloadName::WlTamper);
    s.defenses.ecc = true;
    s.defenses.reencode = true;
    v.push(Case {
        name: "reencoded_tamper_inline_secded",
        scenario: s.clone(),
        role: "target",
        expect: |o| o == DetectionOutcome::UndetectedCorruption,
        want: "undetected-corruption",
    });
    s.defenses.placement = PlacementName::Trusted;
    v.push(Case {
        name: "reencoded_tamper_trusted_secded",
        scenario: s,
        role: "target",
        expect: |o| o == DetectionOutcome::Detected,
        want: "detected",
    });

    let mut s = matrix_scenario(PayloadName::WlTamper);
    s.defenses.dummy_bits = 8;
    v.push(Case {
        name: "dummy_bits_wl_tamper",
        scenario: s,
        role: "target",
        expect: |o| o == DetectionOutcome::Detected,
        want: "detected",
    });

    let mut s = matrix_scenario(PayloadName::WlShort);
    s.defenses.dummy_bits = 8;
    v.push(Case {
        name: "dummy_bits_wl_short",
        scenario: s,
        role: "adversary",
        expect: |o| o == DetectionOutcome::LeakageUndetected,
        want: "leakage-undetected",
    });
    v
}

/// The fixed set of payload/defense pairings with expected outcomes.
pub fn defense_matrix() -> Result<Report> {
    let mut report = Report::new("defense-matrix");
    let mut t = Table::new("matrix", &["case", "role", "outcome", "expected", "classification"]);
    let mut results = Vec::new();
    for c in cases() {
        let ev = evaluate(&c.scenario)?;
        let got = ev.outcome(c.role);
        let ok = got.is_some_and(c.expect);
        let got_name = got.map_or("missing", outcome_name);
        t.push([c.name, c.role, got_name, c.want, attack_name(ev.class)]);
        results.push((c.name, ok, format!("got {got_name} expected {}", c.want)));
    }
    report.table(t);
    for (name, ok, detail) in results {
        report.check(name, ok, detail);
    }
    Ok(report)
}
