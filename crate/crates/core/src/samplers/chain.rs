use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::{ChainState, ChainTarget, Kernel};
use crate::error::{check_param, Error, Result};
use crate::group::Direction;
use crate::prims::RngStream;
use crate::targets::TargetModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainOptions {
    /// Total number of steps, burn-in included.
    pub iters: usize,
    pub burnin: usize,
    /// Keep every `thin`-th measured state.
    pub thin: usize,
    pub record_states: bool,
}

impl ChainOptions {
    pub fn new(iters: usize, burnin: usize) -> Self {
        Self {
            iters,
            burnin,
            thin: 1,
            record_states: false,
        }
    }

    pub fn thinned(mut self, thin: usize) -> Self {
        self.thin = thin;
        self.record_states = true;
        self
    }

    pub fn recording(mut self, record: bool) -> Self {
        self.record_states = record;
        self
    }

    pub fn measured(&self) -> usize {
        self.iters - self.burnin
    }

    fn validate(&self) -> Result<()> {
        check_param(
            "iters",
            self.iters > self.burnin,
            format!("{} must exceed burnin {}", self.iters, self.burnin),
        )?;
        check_param("thin", self.thin >= 1, "must be at least 1")
    }
}

/// One measured step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    /// Absolute step index, counting burn-in, starting at 1.
    pub iter: usize,
    /// Lebesgue log-density of the target after the step.
    pub log_target: f64,
    pub accepted: bool,
    /// Direction after the step; `None` for non-guided kernels.
    pub direction: Option<Direction>,
    pub inner_tries: u32,
}

/// Sidecar metadata of a trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceMeta {
    pub kernel: String,
    pub target: String,
    pub seed: u64,
    pub stream_id: u64,
    pub dim: usize,
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub records: usize,
    pub wall_time: f64,
}

/// Output of one chain. Records cover the measured steps only.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace {
    pub kernel: String,
    pub target: String,
    pub seed: u64,
    pub stream_id: u64,
    pub dim: usize,
    pub options: ChainOptions,
    pub records: Vec<StepRecord>,
    /// States after measured steps `0, thin, 2·thin, …`, if recorded.
    pub states: Vec<Vec<f64>>,
    /// Seconds spent in the measured loop.
    pub wall_time: f64,
    pub final_state: Option<ChainState>,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_guided(&self) -> bool {
        self.records.first().is_some_and(|r| r.direction.is_some())
    }

    pub fn log_targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.log_target).collect()
    }

    /// Thinned values of coordinate `i`.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    pub fn meta(&self) -> TraceMeta {
        TraceMeta {
            kernel: self.kernel.clone(),
            target: self.target.clone(),
            seed: self.seed,
            stream_id: self.stream_id,
            dim: self.dim,
            iters: self.options.iters,
            burnin: self.options.burnin,
            thin: self.options.thin,
            records: self.records.len(),
            wall_time: self.wall_time,
        }
    }

    /// CSV with header `iter,log_target,accepted,direction,inner_tries` and,
    /// when states were kept, `x1..xd` (blank on thinned-out rows).
    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let with_states = !self.states.is_empty();
        let mut header: Vec<String> =
            ["iter", "log_target", "accepted", "direction", "inner_tries"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        if with_states {
            header.extend((1..=self.dim).map(|i| format!("x{i}")));
        }
        w.write_record(&header)?;
        let thin = self.options.thin;
        for (j, r) in self.records.iter().enumerate() {
            let mut row = vec![
                r.iter.to_string(),
                r.log_target.to_string(),
                (r.accepted as u8).to_string(),
                match r.direction {
                    Some(Direction::Plus) => "+".into(),
                    Some(Direction::Minus) => "-".into(),
                    None => String::new(),
                },
                r.inner_tries.to_string(),
            ];
            if with_states {
                match (j % thin == 0).then(|| self.states.get(j / thin)).flatten() {
                    Some(s) => row.extend(s.iter().map(|v| v.to_string())),
                    None => row.extend(std::iter::repeat_n(String::new(), self.dim)),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }
}

/// A chain that stopped on an error, with everything recorded up to it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("chain aborted after {} measured steps: {error}", trace.records.len())]
pub struct ChainFailure {
    pub error: Error,
    pub trace: ChainTrace,
}

/// Wraps a fixed [`TargetModel`] as a [`ChainTarget`].
pub struct FixedTarget<'a>(pub &'a dyn TargetModel);

impl ChainTarget for FixedTarget<'_> {
    fn model(&self) -> &dyn TargetModel {
        self.0
    }
}

pub fn run_chain(
    kernel: &dyn Kernel,
    target: &dyn TargetModel,
    start: Vec<f64>,
    opts: &ChainOptions,
    seed: u64,
    stream_id: u64,
) -> Result<ChainTrace, ChainFailure> {
    run_chain_with(
        kernel,
        &mut FixedTarget(target),
        start,
        opts,
        seed,
        stream_id,
    )
}

/// Runs `opts.iters` steps from `start`; guided kernels start in direction `+`.
/// Deterministic given `(seed, stream_id)`.
pub fn run_chain_with(
    kernel: &dyn Kernel,
    target: &mut dyn ChainTarget,
    start: Vec<f64>,
    opts: &ChainOptions,
    seed: u64,
    stream_id: u64,
) -> Result<ChainTrace, ChainFailure> {
    let mut trace = ChainTrace {
        kernel: kernel.name().to_string(),
        target: target.model().name().to_string(),
        seed,
        stream_id,
        dim: start.len(),
        options: *opts,
        records: Vec::with_capacity(opts.iters.saturating_sub(opts.burnin)),
        states: Vec::new(),
        wall_time: 0.0,
        final_state: None,
    };
    let setup = opts
        .validate()
        .and_then(|_| kernel.init(target.model(), start, Direction::Plus));
    let mut state = match setup {
        Ok(s) => s,
        Err(error) => return Err(ChainFailure { error, trace }),
    };
    let mut rng = RngStream::new(seed, stream_id);
    let guided = kernel.is_guided();
    let mut clock = Instant::now();
    for it in 1..=opts.iters {
        if it == opts.burnin + 1 {
            clock = Instant::now();
        }
        let result = kernel
            .step(&mut state, target.model(), &mut rng)
            .and_then(|out| {
                if target.refresh(&state.x, &mut rng)? {
                    state = kernel.init(target.model(), state.x.clone(), state.direction)?;
                }
                Ok(out)
            });
        let outcome = match result {
            Ok(o) => o,
            Err(error) => {
                trace.wall_time = clock.elapsed().as_secs_f64();
                trace.final_state = Some(state);
                return Err(ChainFailure { error, trace });
            }
        };
        if it <= opts.burnin {
            continue;
        }
        let j = it - opts.burnin - 1;
        trace.records.push(StepRecord {
            iter: it,
            log_target: state.log_density,
            accepted: outcome.accepted,
            direction: guided.then_some(state.direction),
            inner_tries: outcome.inner_tries,
        });
        if opts.record_states && j % opts.thin == 0 {
            trace.states.push(state.x.clone());
        }
    }
    trace.wall_time = clock.elapsed().as_secs_f64();
    trace.final_state = Some(state);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Autoregressive;
    use crate::prims::CholFactor;
    use crate::samplers::{GuidedMetropolisHaar, Rwm, DEFAULT_MAX_TRIES};
    use crate::targets::Gaussian;
    use std::sync::Arc;

    fn guided(d: usize) -> GuidedMetropolisHaar {
        let fam = Autoregressive::new(0.5, vec![0.0; d], CholFactor::identity(d)).unwrap();
        GuidedMetropolisHaar::new("gmpcn", Arc::new(fam), DEFAULT_MAX_TRIES).unwrap()
    }

    #[test]
    fn same_seed_same_trace() {
        let target = Gaussian::standard(3);
        let kernel = guided(3);
        let opts = ChainOptions::new(3000, 500).thinned(7);
        let a = run_chain(&kernel, &target, vec![1.0; 3], &opts, 9, 2).unwrap();
        let b = run_chain(&kernel, &target, vec![1.0; 3], &opts, 9, 2).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.states, b.states);
        let c = run_chain(&kernel, &target, vec![1.0; 3], &opts, 9, 3).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn thinning_counts() {
        let target = Gaussian::standard(2);
        let kernel = Rwm::new("rwm", 1.0, None).unwrap();
        for (iters, burnin, thin) in [(1000, 0, 10), (1005, 0, 10), (1000, 1, 10), (57, 3, 1)] {
            let opts = ChainOptions::new(iters, burnin).thinned(thin);
            let t = run_chain(&kernel, &target, vec![0.0; 2], &opts, 1, 0).unwrap();
            assert_eq!(t.len(), iters - burnin);
            assert_eq!(t.states.len(), (iters - burnin).div_ceil(thin));
        }
    }

    #[test]
    fn burnin_excluded_from_records() {
        let target = Gaussian::standard(2);
        let kernel = guided(2);
        let full = run_chain(
            &kernel,
            &target,
            vec![1.0; 2],
            &ChainOptions::new(400, 0),
            4,
            0,
        )
        .unwrap();
        let cut = run_chain(
            &kernel,
            &target,
            vec![1.0; 2],
            &ChainOptions::new(400, 150),
            4,
            0,
        )
        .unwrap();
        assert_eq!(cut.records[..], full.records[150..]);
        assert_eq!(cut.records[0].iter, 151);
        assert!(cut.records.iter().all(|r| r.direction.is_some()));
    }

    #[test]
    fn invalid_options_and_start() {
        let target = Gaussian::standard(2);
        let kernel = guided(2);
        let err = run_chain(
            &kernel,
            &target,
            vec![1.0; 2],
            &ChainOptions::new(10, 10),
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(
            err.error,
            Error::InvalidParameter { name: "iters", .. }
        ));
        let err = run_chain(
            &kernel,
            &target,
            vec![0.0; 2],
            &ChainOptions::new(10, 0),
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(err.error, Error::Degenerate(_)));
    }

    #[test]
    fn failure_keeps_partial_trace() {
        let target = Gaussian::standard(2);
        let fam = Autoregressive::new(0.5, vec![0.0; 2], CholFactor::identity(2)).unwrap();
        let kernel = GuidedMetropolisHaar::new("g", Arc::new(fam), 1).unwrap();
        let err = run_chain(
            &kernel,
            &target,
            vec![1.0; 2],
            &ChainOptions::new(10_000, 0),
            1,
            0,
        )
        .unwrap_err();
        assert_eq!(err.error, Error::MaxTriesExceeded { max_tries: 1 });
        assert!(err.trace.len() < 10_000);
        assert!(err.trace.final_state.is_some());
    }

    #[test]
    fn csv_layout() {
        let target = Gaussian::standard(2);
        let kernel = guided(2);
        let opts = ChainOptions::new(12, 2).thinned(5);
        let t = run_chain(&kernel, &target, vec![1.0; 2], &opts, 3, 0).unwrap();
        let mut buf = Vec::new();
        t.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "iter,log_target,accepted,direction,inner_tries,x1,x2"
        );
        assert_eq!(lines.len(), 11);
        assert!(lines[1].starts_with("3,"));
        assert!(lines[2].ends_with(",,"));
        let fields: Vec<&str> = lines[6].split(',').collect();
        assert_eq!(fields.len(), 7);
        assert!(fields[5].parse::<f64>().is_ok());
        assert!(matches!(fields[3], "+" | "-"));
    }
}
