//! Replicated runs over a worker pool and the artifacts they produce.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use lnat_core::{run_experiment, RegretTrace};
use serde::Serialize;

use crate::config::{Plan, RawConfig};
use crate::CliError;

/// Runs `work(seed)` for every seed on at most `workers` threads. Results
/// come back in seed order; the first failure (by seed order) wins.
fn fan_out<T: Send>(
    seeds: &[u64],
    workers: usize,
    work: impl Fn(u64) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T, CliError>>>> = Mutex::new((0..seeds.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, seeds.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= seeds.len() {
                    break;
                }
                let r = work(seeds[k]);
                slots.lock().expect("no worker panics while holding the lock")[k] = Some(r);
            });
        }
    });
    slots.into_inner().expect("workers have joined").into_iter().map(|r| r.expect("every slot is filled")).collect()
}

fn run_seed(plan: &Plan, horizon: usize, seed: u64) -> Result<RegretTrace, CliError> {
    let fail = |e: lnat_core::Error| CliError::Runtime(format!("seed {seed}: {e}"));
    let seq = plan.adversary.sequence(horizon, seed).map_err(fail)?;
    run_experiment(&plan.options, &seq, seed).map_err(fail)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    meta: &'a lnat_core::TraceMeta,
    best_fixed_point: &'a Option<Vec<i64>>,
    best_fixed_loss: Option<f64>,
    regret: Option<f64>,
    total_loss: f64,
    seeds: &'a [u64],
    config: &'a RawConfig,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn emit_trace(plan: &Plan, trace: &RegretTrace) -> Result<(), CliError> {
    let seed = trace.meta.seed;
    write(&plan.output.join(format!("trace_seed{seed}.csv")), &trace.to_csv())?;
    let sidecar = Sidecar {
        meta: &trace.meta,
        best_fixed_point: &trace.best_fixed_point,
        best_fixed_loss: trace.best_fixed_loss,
        regret: trace.regret,
        total_loss: trace.total_loss(),
        seeds: &plan.seeds,
        config: &plan.echo,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecars serialize");
    write(&plan.output.join(format!("trace_seed{seed}.json")), &(json + "\n"))
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRegret {
    pub seed: u64,
    pub regret: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub algorithm: lnat_core::Algorithm,
    pub horizon: usize,
    pub dim: usize,
    pub width: i64,
    pub lipschitz: f64,
    pub bound: f64,
    pub eta: f64,
    pub delta: Option<f64>,
    pub delta_clamped: bool,
    pub seeds: usize,
    /// Seeds whose regret could not be computed (domain too large).
    pub regret_omitted: usize,
    pub mean_regret: Option<f64>,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev_regret: Option<f64>,
    pub theoretical_bound: f64,
    /// `mean_regret / theoretical_bound`.
    pub ratio: Option<f64>,
    pub wall_time_seconds: f64,
    pub per_seed: Vec<SeedRegret>,
}

fn mean_std(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std =
        if v.len() > 1 { Some((v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()) } else { None };
    (Some(mean), std)
}

fn summarize(traces: &[RegretTrace], started: Instant) -> Summary {
    let m = &traces[0].meta;
    let regrets: Vec<f64> = traces.iter().filter_map(|t| t.regret).collect();
    let (mean, std) = mean_std(&regrets);
    Summary {
        algorithm: m.algorithm,
        horizon: m.horizon,
        dim: m.dim,
        width: m.width,
        lipschitz: traces.iter().map(|t| t.meta.lipschitz).fold(0.0, f64::max),
        bound: traces.iter().map(|t| t.meta.bound).fold(0.0, f64::max),
        eta: m.eta,
        delta: m.delta,
        delta_clamped: m.delta_clamped,
        seeds: traces.len(),
        regret_omitted: traces.len() - regrets.len(),
        mean_regret: mean,
        stddev_regret: std,
        theoretical_bound: traces.iter().map(|t| t.meta.theoretical_bound).fold(0.0, f64::max),
        ratio: mean.map(|v| v / m.theoretical_bound),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        per_seed: traces.iter().map(|t| SeedRegret { seed: t.meta.seed, regret: t.regret }).collect(),
    }
}

fn create_output(plan: &Plan) -> Result<(), CliError> {
    std::fs::create_dir_all(&plan.output)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", plan.output.display())))
}

/// Runs every seed, writes one trace and sidecar per seed as it finishes,
/// then the summary.
pub fn run(plan: &Plan) -> Result<Summary, CliError> {
    create_output(plan)?;
    let started = Instant::now();
    let traces = fan_out(&plan.seeds, plan.workers, |seed| {
        let trace = run_seed(plan, plan.horizon, seed)?;
        emit_trace(plan, &trace)?;
        Ok(trace)
    })?;
    let summary = summarize(&traces, started);
    let json = serde_json::to_string_pretty(&summary).expect("summaries serialize");
    write(&plan.output.join("summary.json"), &(json + "\n"))?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub horizon: usize,
    pub mean_regret: Option<f64>,
    pub stddev_regret: Option<f64>,
    pub theoretical_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `ln(mean R_T)` against `ln T`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub wall_time_seconds: f64,
}

/// Least-squares line through `(x, y)`; `None` with fewer than two
/// distinct `x`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Mean regret at each horizon of `grid` and the fitted log-log slope.
/// No per-seed traces are written.
pub fn sweep(plan: &Plan, grid: &[usize]) -> Result<SweepReport, CliError> {
    create_output(plan)?;
    let started = Instant::now();
    let mut points = Vec::with_capacity(grid.len());
    for &horizon in grid {
        let traces = fan_out(&plan.seeds, plan.workers, |seed| run_seed(plan, horizon, seed))?;
        let regrets: Vec<f64> = traces.iter().filter_map(|t| t.regret).collect();
        let (mean, std) = mean_std(&regrets);
        points.push(SweepPoint {
            horizon,
            mean_regret: mean,
            stddev_regret: std,
            theoretical_bound: traces[0].meta.theoretical_bound,
        });
    }
    let logs: Option<Vec<(f64, f64)>> =
        points.iter().map(|p| p.mean_regret.filter(|&m| m > 0.0).map(|m| ((p.horizon as f64).ln(), m.ln()))).collect();
    let fit = logs.and_then(|l| fit_line(&l));
    let report = SweepReport {
        points,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    write(&plan.output.join("sweep.json"), &(json + "\n"))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_slope() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 3.0].iter().map(|&x| (x, 0.5 * x + 2.0)).collect();
        let (s, c) = fit_line(&pts).unwrap();
        assert!((s - 0.5).abs() < 1e-12 && (c - 2.0).abs() < 1e-12);
        assert!(fit_line(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn sample_deviation_uses_n_minus_one() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[4.0]).1, None);
    }

    #[test]
    fn fan_out_keeps_seed_order_and_first_error() {
        let out = fan_out(&[5, 6, 7, 8], 3, |s| Ok(s * 2)).unwrap();
        assert_eq!(out, vec![10, 12, 14, 16]);
        let err = fan_out(&[1, 2, 3], 2, |s| if s >= 2 { Err(CliError::Runtime(format!("seed {s}"))) } else { Ok(s) });
        assert!(matches!(err, Err(CliError::Runtime(m)) if m == "seed 2"));
    }
}
