//! Parameter sweeps. One record per point; points run in parallel and are
//! reported in input order.

use dramtrojan_core::cell::{data1_retention_ms, CellParams, REFRESH_WINDOW_MS, V_WL_MIN};
use dramtrojan_core::trigger::{calibrate, n_set, CalibrationTargets, HammerPattern, TriggerParams};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::mc::with_threads;
use crate::report::{num, Report, Table};

fn nonempty<T>(xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(HarnessError::Config("empty sweep range".into()));
    }
    Ok(())
}

fn n_set_cell(n: Option<u64>) -> String {
    n.map_or("none".into(), |n| n.to_string())
}

fn nondecreasing(ns: &[Option<u64>]) -> bool {
    // a point that never fires counts as infinitely many accesses
    ns.windows(2).all(|w| w[0].unwrap_or(u64::MAX) <= w[1].unwrap_or(u64::MAX))
}

/// Trigger fitted at the default anchor only.
pub fn calibrated_trigger() -> Result<TriggerParams> {
    Ok(calibrate(&TriggerParams::nominal(), &CalibrationTargets::default())?)
}

pub fn trigger_capacitance(caps: &[f64], pattern: HammerPattern, threads: Option<usize>) -> Result<Report> {
    nonempty(caps)?;
    let base = calibrated_trigger()?;
    let ns = with_threads(threads, || {
        caps.par_iter().map(|&c| n_set(&base.with_capacitance(c), &pattern)).collect::<std::result::Result<Vec<_>, _>>()
    })??;

    let mut report = Report::new("sweep trigger-capacitance");
    let mut table = Table::new("trigger-capacitance", &["c_trigger_fF", "t_on_ns", "t_off_ns", "n_set"]);
    for (c, n) in caps.iter().zip(&ns) {
        table.push([num(*c, 2), pattern.t_on.to_string(), pattern.t_off.to_string(), n_set_cell(*n)]);
    }
    report.table(table);
    report.summary("k_charge", format!("{:e}", base.k_charge));
    report.summary("tau_x4_us", num(base.tau_x4, 3));

    let mut pairs: Vec<(f64, Option<u64>)> = caps.iter().copied().zip(ns).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sorted: Vec<Option<u64>> = pairs.iter().map(|p| p.1).collect();
    report.check(
        "n_set_monotone_in_capacitance",
        nondecreasing(&sorted),
        "larger capacitor needs at least as many accesses",
    );
    Ok(report)
}

pub fn duty_cycle(t_on: u64, t_offs: &[u64], max_accesses: u64, threads: Option<usize>) -> Result<Report> {
    nonempty(t_offs)?;
    let base = calibrated_trigger()?;
    let patterns: Vec<HammerPattern> = t_offs.iter().map(|&t| HammerPattern::new(t_on, t, max_accesses)).collect();
    let ns = with_threads(threads, || {
        patterns.par_iter().map(|p| n_set(&base, p)).collect::<std::result::Result<Vec<_>, _>>()
    })??;

    let mut report = Report::new("sweep duty-cycle");
    let mut table = Table::new("duty-cycle", &["c_trigger_fF", "t_on_ns", "t_off_ns", "n_set"]);
    for (p, n) in patterns.iter().zip(&ns) {
        table.push([num(base.c_trigger, 2), p.t_on.to_string(), p.t_off.to_string(), n_set_cell(*n)]);
    }
    report.table(table);

    let mut pairs: Vec<(HammerPattern, Option<u64>)> = patterns.into_iter().zip(ns).collect();
    pairs.sort_by_key(|p| p.0.t_off);
    let sorted: Vec<Option<u64>> = pairs.iter().map(|p| p.1).collect();
    report.check("n_set_monotone_in_t_off", nondecreasing(&sorted), "longer off time needs at least as many accesses");
    let misses: Vec<String> =
        pairs.iter().filter(|(p, n)| p.duty() >= 0.3 && n.is_none()).map(|(p, _)| p.t_off.to_string()).collect();
    report.check(
        "fires_at_duty_30pct",
        misses.is_empty(),
        if misses.is_empty() {
            "every point with duty >= 30% fires".to_string()
        } else {
            format!("no fire at t_off {}", misses.join(" "))
        },
    );
    Ok(report)
}

/// Nominal data-1 retention against wordline voltage.
pub fn retention_voltage(v_wls: &[f64], temp: f64) -> Result<Report> {
    nonempty(v_wls)?;
    let params = CellParams::nominal();
    let mut report = Report::new("sweep retention-voltage");
    let mut table = Table::new("retention-voltage", &["v_wl", "temp", "retention_ms"]);
    let mut at_min = None;
    for &v in v_wls {
        let t = data1_retention_ms(v, temp, &params)?;
        if v == V_WL_MIN {
            at_min = Some(t);
        }
        table.push([num(v, 3), num(temp, 1), num(t, 3)]);
    }
    report.table(table);
    if let Some(t) = at_min {
        report.check("underdrive_outlasts_refresh", t > REFRESH_WINDOW_MS, format!("{} ms at {V_WL_MIN} V", num(t, 1)));
    }
    Ok(report)
}
