//! Parallel Monte-Carlo runs. Trials are independent streams collected in
//! trial order, so the thread count never changes the result.

use dramtrojan_core::variation::{aggregate, calibrate_sigma, trial_retention, MCResult, VariationSpec};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::report::{num, Report, Table};
use crate::scenario::VariationSection;

/// Runs `f` on a pool of `threads` workers, or the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn failure_rate_par(v_wl: f64, temp: f64, spec: &VariationSpec, threads: Option<usize>) -> Result<MCResult> {
    spec.validate()?;
    let samples = with_threads(threads, || {
        (0..spec.n_trials)
            .into_par_iter()
            .map(|i| trial_retention(spec, v_wl, temp, i))
            .collect::<std::result::Result<Vec<_>, _>>()
    })??;
    Ok(aggregate(spec, samples))
}

/// The section's sigma, or one calibrated against its anchor point.
pub fn resolve_sigma(section: &VariationSection, seed: u64) -> Result<f64> {
    match section.sigma_vth {
        Some(s) => Ok(s),
        None => {
            let spec = section.spec(0.0, seed);
            Ok(calibrate_sigma(section.calibrate_v_wl, 25.0, section.calibrate_rate, &spec)?)
        }
    }
}

/// One `v_wl,temp,sigma,n,failure_rate` record per wordline voltage.
pub fn mc_sweep(
    v_wls: &[f64],
    temp: f64,
    section: &VariationSection,
    seed: u64,
    threads: Option<usize>,
) -> Result<Report> {
    if v_wls.is_empty() {
        return Err(HarnessError::Config("empty sweep range".into()));
    }
    let sigma = resolve_sigma(section, seed)?;
    let spec = section.spec(sigma, seed);
    let mut report = Report::new("mc");
    let mut table = Table::new("mc", &["v_wl", "temp", "sigma", "n", "failure_rate"]);
    let mut rates = Vec::new();
    for &v in v_wls {
        let r = failure_rate_par(v, temp, &spec, threads)?;
        table.push([num(v, 3), num(temp, 1), num(sigma, 6), spec.n_trials.to_string(), num(r.failure_rate, 4)]);
        rates.push((v, r.failure_rate));
    }
    report.table(table);
    report.summary("seed", seed);
    report.summary("sigma_vth", num(sigma, 6));
    if section.sigma_vth.is_none() {
        report.note(format!(
            "sigma fitted to {} failures at {} V",
            num(section.calibrate_rate, 3),
            num(section.calibrate_v_wl, 2)
        ));
    }
    let mut sorted = rates.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[0].1 <= w[1].1);
    report.check("rate_monotone_in_v_wl", monotone, "failure rate nondecreasing with wordline voltage");
    Ok(report)
}
