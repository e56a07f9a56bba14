use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use guided_mh::diagnostics::{ess, summarize, EssReport, TraceSummary};
use guided_mh::prims::RngStream;
use guided_mh::samplers::{run_chain_with, ChainOptions, KernelRegistry, KernelSpec, TraceMeta};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, PreparedTarget};
use crate::error::{BenchError, BenchResult};
use crate::tuning::{burn_in, chain_error, stream_id, tuned_spec, BurnIn, RhoSearch};

/// One row of `aggregate.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub kernel: String,
    pub replication: usize,
    pub ess: f64,
    pub ess_per_sec: f64,
    pub accept_rate: f64,
    pub mean_inner_tries: Option<f64>,
    pub direction_balance: Option<f64>,
}

impl AggregateRow {
    pub fn ess_per_iter(&self, measured: usize) -> f64 {
        self.ess / measured as f64
    }
}

/// All rows for one point of the sweep (or the whole run without a sweep).
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub xi: Option<f64>,
    pub dir: PathBuf,
    pub rows: Vec<AggregateRow>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    /// Kernel labels in config order.
    pub kernels: Vec<String>,
    /// Measured steps per chain.
    pub measured: usize,
    pub sweeps: Vec<SweepResult>,
}

/// JSON sidecar written next to every trace.
#[derive(Serialize)]
struct Sidecar<'a> {
    meta: TraceMeta,
    spec: &'a KernelSpec,
    xi: Option<f64>,
    replication: usize,
    burnin: &'a BurnIn,
    rho_search: Option<&'a RhoSearch>,
    ess: Option<&'a EssReport>,
    summary: &'a TraceSummary,
}

/// Directory name for a sweep point.
pub fn sweep_dir_name(xi: f64) -> String {
    format!("xi-{xi}")
}

fn write_json(path: &Path, value: &impl Serialize) -> BenchResult<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| BenchError::Output(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

fn create_dir(path: &Path) -> BenchResult<()> {
    std::fs::create_dir_all(path).map_err(|e| BenchError::io(path, e))
}

/// Runs every kernel × replication (× sweep point) and writes the traces,
/// sidecars and aggregates under `config.out`.
pub fn run_experiment(
    config: &ExperimentConfig,
    target: &PreparedTarget,
) -> BenchResult<ExperimentResult> {
    config.check()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Invalid(format!("thread pool: {e}")))?;
    create_dir(&config.out)?;
    let points = config.sweep_points();
    let dirs: Vec<PathBuf> = points
        .iter()
        .map(|p| match p {
            Some(xi) => config.out.join(sweep_dir_name(*xi)),
            None => config.out.clone(),
        })
        .collect();
    for dir in &dirs {
        create_dir(dir)?;
    }
    let text = toml::to_string(config).map_err(|e| BenchError::Output(e.to_string()))?;
    let resolved = config.out.join("experiment.toml");
    std::fs::write(&resolved, text).map_err(|e| BenchError::io(&resolved, e))?;

    let r = config.replications;
    let burns: Vec<BurnIn> = pool.install(|| {
        (0..points.len() * r)
            .into_par_iter()
            .map(|job| burn_in(config, target, job % r, points[job / r]))
            .collect::<BenchResult<_>>()
    })?;

    let nk = config.kernels.len();
    let mut rows: Vec<(usize, usize, usize, AggregateRow)> = pool.install(|| {
        (0..points.len() * nk * r)
            .into_par_iter()
            .map(|job| {
                let (p, rest) = (job / (nk * r), job % (nk * r));
                let (k, rep) = (rest / r, rest % r);
                let burn = &burns[p * r + rep];
                let row = run_one(config, target, k, rep, points[p], burn, &dirs[p])?;
                Ok((p, k, rep, row))
            })
            .collect::<BenchResult<_>>()
    })?;
    rows.sort_by_key(|(p, k, rep, _)| (*p, *k, *rep));

    let mut sweeps: Vec<SweepResult> = points
        .iter()
        .zip(&dirs)
        .map(|(xi, dir)| SweepResult {
            xi: *xi,
            dir: dir.clone(),
            rows: Vec::new(),
        })
        .collect();
    for (p, _, _, row) in rows {
        sweeps[p].rows.push(row);
    }
    for sweep in &sweeps {
        write_aggregate(&sweep.dir.join("aggregate.csv"), &sweep.rows)?;
    }
    let result = ExperimentResult {
        kernels: config
            .kernels
            .iter()
            .map(|k| k.display_name().to_string())
            .collect(),
        measured: config.iters - config.burnin,
        sweeps,
    };
    if config.sweep.is_some() {
        let table = emit_table(&result, Metric::EssPerSec);
        let path = config.out.join("table.txt");
        std::fs::write(&path, table).map_err(|e| BenchError::io(&path, e))?;
    }
    Ok(result)
}

fn run_one(
    config: &ExperimentConfig,
    target: &PreparedTarget,
    k: usize,
    replication: usize,
    xi: Option<f64>,
    burn: &BurnIn,
    dir: &Path,
) -> BenchResult<AggregateRow> {
    let spec = &config.kernels[k];
    let label = spec.display_name();
    let (spec_run, search) = tuned_spec(config, target, spec, burn, replication, k)?;
    let kernel = KernelRegistry::standard().build(&spec_run, &burn.context(target.dim()))?;
    let stream = stream_id(replication, k as u64, 0);
    let mut init_rng = RngStream::new(config.seed, stream | (1 << 63));
    let mut chain_target = target.chain_target(&burn.start, &mut init_rng)?;
    let mut opts = ChainOptions::new(config.iters, config.burnin);
    if config.record_states {
        opts = opts.thinned(config.thin);
    }
    let trace = run_chain_with(
        kernel.as_ref(),
        chain_target.as_mut(),
        burn.start.clone(),
        &opts,
        config.seed,
        stream,
    )
    .map_err(chain_error(label, replication))?;

    let summary = summarize(&trace)?;
    let report = match ess(&trace.log_targets(), trace.wall_time) {
        Ok(r) => Some(r),
        Err(guided_mh::Error::ConstantSeries) => None,
        Err(e) => return Err(e.into()),
    };
    let stem = format!("{label}-r{replication:03}");
    let csv_path = dir.join(format!("{stem}.csv"));
    trace.write_csv(&csv_path)?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &Sidecar {
            meta: trace.meta(),
            spec: &spec_run,
            xi,
            replication,
            burnin: burn,
            rho_search: search.as_ref(),
            ess: report.as_ref(),
            summary: &summary,
        },
    )?;
    Ok(AggregateRow {
        kernel: label.to_string(),
        replication,
        ess: report.as_ref().map_or(0.0, |r| r.ess),
        ess_per_sec: report.as_ref().map_or(0.0, |r| r.ess_per_second),
        accept_rate: summary.accept_rate,
        mean_inner_tries: summary.mean_inner_tries,
        direction_balance: summary.direction_balance,
    })
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> BenchResult<()> {
    let out = |e: csv::Error| BenchError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(out)?;
    for row in rows {
        w.serialize(row).map_err(out)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_aggregate(path: &Path) -> BenchResult<Vec<AggregateRow>> {
    let err = |e: csv::Error| BenchError::Output(format!("{}: {e}", path.display()));
    csv::Reader::from_path(path)
        .map_err(err)?
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(err)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    EssPerSec,
    EssPerIter,
}

/// Mean of `metric` over replications for each kernel and sweep point.
pub fn grid(result: &ExperimentResult, metric: Metric) -> Vec<Vec<f64>> {
    result
        .kernels
        .iter()
        .map(|kernel| {
            result
                .sweeps
                .iter()
                .map(|s| {
                    let vals: Vec<f64> = s
                        .rows
                        .iter()
                        .filter(|r| &r.kernel == kernel)
                        .map(|r| match metric {
                            Metric::EssPerSec => r.ess_per_sec,
                            Metric::EssPerIter => r.ess_per_iter(result.measured),
                        })
                        .collect();
                    vals.iter().sum::<f64>() / vals.len().max(1) as f64
                })
                .collect()
        })
        .collect()
}

/// Kernels × sweep points table of replication means.
pub fn emit_table(result: &ExperimentResult, metric: Metric) -> String {
    let values = grid(result, metric);
    let header: Vec<String> = result
        .sweeps
        .iter()
        .map(|s| match s.xi {
            Some(xi) => format!("xi={xi}"),
            None => "all".to_string(),
        })
        .collect();
    let name_w = result
        .kernels
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(6)
        .max(6);
    let col_w = header.iter().map(String::len).max().unwrap_or(0).max(12);
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "kernel");
    for h in &header {
        let _ = write!(out, "  {h:>col_w$}");
    }
    out.push('\n');
    for (kernel, row) in result.kernels.iter().zip(&values) {
        let _ = write!(out, "{kernel:<name_w$}");
        for v in row {
            let cell = match metric {
                Metric::EssPerSec => format!("{v:.2}"),
                Metric::EssPerIter => format!("{v:.5}"),
            };
            let _ = write!(out, "  {cell:>col_w$}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(kernel: &str, replication: usize, ess: f64) -> AggregateRow {
        AggregateRow {
            kernel: kernel.into(),
            replication,
            ess,
            ess_per_sec: 10.0 * ess,
            accept_rate: 0.5,
            mean_inner_tries: None,
            direction_balance: None,
        }
    }

    fn result() -> ExperimentResult {
        let xis = [0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0];
        ExperimentResult {
            kernels: vec!["mpcn".into(), "gmpcn".into()],
            measured: 1000,
            sweeps: xis
                .iter()
                .enumerate()
                .map(|(i, &xi)| SweepResult {
                    xi: Some(xi),
                    dir: PathBuf::new(),
                    rows: vec![
                        row("mpcn", 0, 100.0),
                        row("mpcn", 1, 200.0),
                        row("gmpcn", 0, 1000.0 / (i + 1) as f64),
                    ],
                })
                .collect(),
        }
    }

    #[test]
    fn table_is_kernels_by_xi() {
        let table = emit_table(&result(), Metric::EssPerSec);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0].split_whitespace().count(), 7);
        assert!(lines[0].contains("xi=0.001") && lines[0].contains("xi=10"));
        let mpcn: Vec<&str> = lines[1].split_whitespace().collect();
        assert_eq!(mpcn.len(), 7);
        assert_eq!(mpcn[0], "mpcn");
        assert_eq!(mpcn[1], "1500.00");
        assert!(lines[2].starts_with("gmpcn"));
    }

    #[test]
    fn grid_averages_replications() {
        let g = grid(&result(), Metric::EssPerIter);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].len(), 6);
        assert!((g[0][0] - 0.15).abs() < 1e-12);
        assert!((g[1][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn aggregate_round_trip_and_blank_options() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("aggregate.csv");
        let mut rows = vec![row("rwm", 0, 12.5)];
        rows.push(AggregateRow {
            mean_inner_tries: Some(2.01),
            direction_balance: Some(0.5),
            ..row("label, with comma", 1, 3.0)
        });
        write_aggregate(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "kernel,replication,ess,ess_per_sec,accept_rate,mean_inner_tries,direction_balance"
        );
        assert_eq!(lines.next().unwrap(), "rwm,0,12.5,125.0,0.5,,");
        assert!(lines
            .next()
            .unwrap()
            .starts_with("\"label, with comma\",1,"));
        assert_eq!(read_aggregate(&path).unwrap(), rows);
    }
}
