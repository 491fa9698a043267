//! Seeded benchmark suites, CSV records, the hypercube scaling study and the
//! primitive-method meta-analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::environments::{EnvironmentSpec, PlanningProblem, ProblemError};
use crate::heuristics::{ImportanceKind, MetricKind};
use crate::planners::{plan, ConfigError, PlanStatus, PlannerConfig, PlannerName};
use crate::samplers::GraphSampling;

pub const CSV_HEADER: [&str; 9] = [
    "planner",
    "environment",
    "params_hash",
    "run",
    "seed",
    "time_s",
    "status",
    "cost",
    "vertices_per_level",
];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid suite: {0}")]
    Suite(String),
    #[error("planner config: {0}")]
    Config(#[from] ConfigError),
    #[error("environment {label}: {source}")]
    Problem {
        label: String,
        #[source]
        source: ProblemError,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv line {line}: {message}")]
    Record { line: u64, message: String },
}

/// One environment with the planners to run on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub problem: EnvironmentSpec,
    pub planners: Vec<PlannerConfig>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Seconds per run; overrides the planner configs.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
}

fn default_runs() -> usize {
    10
}

fn default_time_limit() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker threads; 1 runs everything sequentially.
    #[serde(default = "default_parallel")]
    pub parallel: usize,
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
}

fn default_parallel() -> usize {
    1
}

impl BenchSuite {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.parallel == 0 {
            return Err(BenchError::Suite("parallel must be at least 1".into()));
        }
        for (i, e) in self.experiments.iter().enumerate() {
            if e.runs == 0 {
                return Err(BenchError::Suite(format!("experiments[{i}].runs must be >= 1")));
            }
            if !(e.time_limit > 0.0 && e.time_limit.is_finite()) {
                return Err(BenchError::Suite(format!(
                    "experiments[{i}].time_limit must be positive"
                )));
            }
            for p in &e.planners {
                p.validate()?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Solved,
    TimedOut,
    Infeasible,
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Solved => "solved",
            RunStatus::TimedOut => "timed_out",
            RunStatus::Infeasible => "infeasible",
            RunStatus::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<RunStatus> {
        [
            RunStatus::Solved,
            RunStatus::TimedOut,
            RunStatus::Infeasible,
            RunStatus::Error,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }

    /// Runs that count at the time limit in aggregates.
    pub fn is_failure(self) -> bool {
        matches!(self, RunStatus::TimedOut | RunStatus::Error)
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub planner: String,
    pub environment: String,
    pub params_hash: String,
    pub run: usize,
    pub seed: u64,
    /// Wall time; failed runs are recorded at the time limit.
    pub time_s: f64,
    pub status: RunStatus,
    pub cost: Option<f64>,
    pub vertices_per_level: Vec<usize>,
}

/// Short digest of a planner configuration, ignoring the seed.
pub fn params_hash(config: &PlannerConfig) -> String {
    let mut c = config.clone();
    c.seed = 0;
    let json = serde_json::to_string(&c).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

struct Cell<'a> {
    problem: &'a PlanningProblem,
    label: String,
    config: PlannerConfig,
    hash: String,
    run: usize,
    time_limit: f64,
}

fn run_cell(cell: &Cell<'_>) -> RunRecord {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| plan(cell.problem, &cell.config)));
    let elapsed = started.elapsed().as_secs_f64();
    let (status, cost, vertices) = match outcome {
        Ok(Ok(o)) => {
            let status = match o.status {
                PlanStatus::Solved => RunStatus::Solved,
                PlanStatus::TimedOut => RunStatus::TimedOut,
                PlanStatus::Infeasible { .. } => RunStatus::Infeasible,
            };
            (status, o.cost, o.vertices_per_level)
        }
        Ok(Err(e)) => {
            log::warn!("{} on {}: {e}", cell.config.planner, cell.label);
            (RunStatus::Error, None, Vec::new())
        }
        Err(_) => {
            log::warn!("{} on {} panicked", cell.config.planner, cell.label);
            (RunStatus::Error, None, Vec::new())
        }
    };
    RunRecord {
        planner: cell.config.planner.to_string(),
        environment: cell.label.clone(),
        params_hash: cell.hash.clone(),
        run: cell.run,
        seed: cell.config.seed,
        time_s: if status.is_failure() {
            cell.time_limit
        } else {
            elapsed
        },
        status,
        cost: if status == RunStatus::Solved { cost } else { None },
        vertices_per_level: vertices,
    }
}

/// Runs every (experiment, planner, run) cell with seed `base_seed + run`.
/// Records come back in suite order regardless of parallelism.
pub fn run_suite(suite: &BenchSuite) -> Result<Vec<RunRecord>, BenchError> {
    suite.validate()?;
    let problems = suite
        .experiments
        .iter()
        .map(|e| {
            e.problem.build().map_err(|source| BenchError::Problem {
                label: e.problem.label(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells = Vec::new();
    for (e, problem) in suite.experiments.iter().zip(&problems) {
        for base in &e.planners {
            let mut config = base.clone();
            config.time_limit = e.time_limit;
            let hash = params_hash(&config);
            for run in 0..e.runs {
                config.seed = suite.base_seed.wrapping_add(run as u64);
                cells.push(Cell {
                    problem,
                    label: e.problem.label(),
                    config: config.clone(),
                    hash: hash.clone(),
                    run,
                    time_limit: e.time_limit,
                });
            }
        }
    }
    if suite.parallel == 1 {
        return Ok(cells.iter().map(run_cell).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(suite.parallel)
        .build()
        .map_err(|e| BenchError::Suite(e.to_string()))?;
    Ok(pool.install(|| cells.par_iter().map(run_cell).collect()))
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let vertices = r
            .vertices_per_level
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.planner.clone(),
            r.environment.clone(),
            r.params_hash.clone(),
            r.run.to_string(),
            r.seed.to_string(),
            r.time_s.to_string(),
            r.status.to_string(),
            r.cost.map(|c| c.to_string()).unwrap_or_default(),
            vertices,
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(BenchError::Record {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |field: &str| BenchError::Record {
            line,
            message: format!("bad {field}"),
        };
        let cost = match &row[7] {
            "" => None,
            c => Some(c.parse().map_err(|_| bad("cost"))?),
        };
        let vertices = if row[8].is_empty() {
            Vec::new()
        } else {
            row[8]
                .split(';')
                .map(|v| v.parse().map_err(|_| bad("vertices_per_level")))
                .collect::<Result<_, _>>()?
        };
        out.push(RunRecord {
            planner: row[0].to_string(),
            environment: row[1].to_string(),
            params_hash: row[2].to_string(),
            run: row[3].parse().map_err(|_| bad("run"))?,
            seed: row[4].parse().map_err(|_| bad("seed"))?,
            time_s: row[5].parse().map_err(|_| bad("time_s"))?,
            status: RunStatus::parse(&row[6]).ok_or_else(|| bad("status"))?,
            cost,
            vertices_per_level: vertices,
        });
    }
    Ok(out)
}

/// Aggregate of one (planner, environment, parameters) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub planner: String,
    pub environment: String,
    pub params_hash: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_time: f64,
    pub median_time: f64,
    pub min_time: f64,
    pub max_time: f64,
    /// Some run timed out or errored, so the times include the time limit.
    pub flagged: bool,
}

/// Groups records by cell in first-appearance order.
pub fn aggregate(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut order: Vec<(String, String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.planner.clone(), r.environment.clone(), r.params_hash.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let mut times: Vec<f64> = rs.iter().map(|r| r.time_s).collect();
            times.sort_by(f64::total_cmp);
            let n = times.len();
            let median = if n % 2 == 1 {
                times[n / 2]
            } else {
                0.5 * (times[n / 2 - 1] + times[n / 2])
            };
            let successes = rs.iter().filter(|r| r.status == RunStatus::Solved).count();
            CellSummary {
                planner: key.0,
                environment: key.1,
                params_hash: key.2,
                runs: n,
                successes,
                success_rate: successes as f64 / n as f64,
                mean_time: rs.iter().map(|r| r.time_s).sum::<f64>() / n as f64,
                median_time: median,
                min_time: times[0],
                max_time: times[n - 1],
                flagged: rs.iter().any(|r| r.status.is_failure()),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(cells: &[CellSummary], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "planner",
        "environment",
        "params_hash",
        "runs",
        "successes",
        "success_rate",
        "mean_time",
        "median_time",
        "min_time",
        "max_time",
        "flagged",
    ])?;
    for c in cells {
        w.write_record([
            c.planner.clone(),
            c.environment.clone(),
            c.params_hash.clone(),
            c.runs.to_string(),
            c.successes.to_string(),
            c.success_rate.to_string(),
            c.mean_time.to_string(),
            c.median_time.to_string(),
            c.min_time.to_string(),
            c.max_time.to_string(),
            c.flagged.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    #[default]
    Time,
    LogTime,
}

/// Least-squares cubic `c0 + c1 n + c2 n^2 + c3 n^3` through `(n, y)` where
/// `y` is the time or its natural log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicFit {
    pub mode: FitMode,
    pub coefficients: [f64; 4],
    /// Root of the summed squared residuals in the fitted quantity.
    pub residual: f64,
}

impl CubicFit {
    pub fn fit(points: &[(f64, f64)], mode: FitMode) -> Option<CubicFit> {
        if points.len() < 4 {
            return None;
        }
        let ys: Vec<f64> = points
            .iter()
            .map(|&(_, t)| match mode {
                FitMode::Time => t,
                FitMode::LogTime => t.ln(),
            })
            .collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return None;
        }
        let a = DMatrix::from_fn(points.len(), 4, |i, j| points[i].0.powi(j as i32));
        let b = DVector::from_vec(ys);
        let c = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
        let residual = (&a * &c - &b).norm();
        Some(CubicFit {
            mode,
            coefficients: [c[0], c[1], c[2], c[3]],
            residual,
        })
    }

    /// Fitted value in the fitted quantity.
    pub fn polynomial(&self, n: f64) -> f64 {
        let c = self.coefficients;
        c[0] + n * (c[1] + n * (c[2] + n * c[3]))
    }

    /// Predicted time in seconds.
    pub fn predict(&self, n: f64) -> f64 {
        match self.mode {
            FitMode::Time => self.polynomial(n),
            FitMode::LogTime => self.polynomial(n).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub mean_time: f64,
    pub successes: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTable {
    pub planner: PlannerName,
    pub rows: Vec<ScalingRow>,
    pub fit: Option<CubicFit>,
}

/// Runs `config` on the hypercube for each `n` and fits a cubic to the mean
/// times. Failed runs count at the time limit.
#[allow(clippy::too_many_arguments)]
pub fn scaling_study(
    config: &PlannerConfig,
    n_list: &[usize],
    runs: usize,
    time_limit: f64,
    base_seed: u64,
    parallel: usize,
    mode: FitMode,
) -> Result<(ScalingTable, Vec<RunRecord>), BenchError> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::Suite("n_list must be strictly ascending".into()));
    }
    let suite = BenchSuite {
        experiments: n_list
            .iter()
            .map(|&n| Experiment {
                problem: EnvironmentSpec::Hypercube { n },
                planners: vec![config.clone()],
                runs,
                time_limit,
            })
            .collect(),
        base_seed,
        parallel,
        csv: None,
        svg: None,
    };
    let records = run_suite(&suite)?;
    let cells = aggregate(&records);
    let rows: Vec<ScalingRow> = n_list
        .iter()
        .zip(&cells)
        .map(|(&n, c)| ScalingRow {
            n,
            mean_time: c.mean_time,
            successes: c.successes,
            runs: c.runs,
        })
        .collect();
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mean_time)).collect();
    Ok((
        ScalingTable {
            planner: config.planner,
            fit: CubicFit::fit(&points, mode),
            rows,
        },
        records,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaAxis {
    Metric,
    Importance,
    Sampling,
    FindSection,
}

impl MetaAxis {
    pub const ALL: [MetaAxis; 4] = [
        MetaAxis::Metric,
        MetaAxis::Importance,
        MetaAxis::Sampling,
        MetaAxis::FindSection,
    ];

    /// Labelled variants of `base` along this axis.
    pub fn variants(self, base: &PlannerConfig) -> Vec<(&'static str, PlannerConfig)> {
        let with = |f: &dyn Fn(&mut PlannerConfig)| {
            let mut c = base.clone();
            f(&mut c);
            c
        };
        match self {
            MetaAxis::Metric => vec![
                ("intrinsic", with(&|c| c.metric = MetricKind::Intrinsic)),
                ("quotient", with(&|c| c.metric = MetricKind::QuotientSpace)),
            ],
            MetaAxis::Importance => vec![
                ("uniform", with(&|c| c.importance = Some(ImportanceKind::Uniform))),
                (
                    "exponential",
                    with(&|c| c.importance = Some(ImportanceKind::Exponential)),
                ),
                (
                    "greedy",
                    with(&|c| c.importance = Some(ImportanceKind::EpsilonGreedy { epsilon: 0.1 })),
                ),
            ],
            MetaAxis::Sampling => [
                GraphSampling::RandomVertex,
                GraphSampling::RandomEdge,
                GraphSampling::RandomDegreeVertex,
            ]
            .into_iter()
            .map(|s| (s.name(), with(&|c| c.sampler.strategy = s)))
            .collect(),
            MetaAxis::FindSection => vec![
                ("on", with(&|c| c.find_section = true)),
                ("off", with(&|c| c.find_section = false)),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaRow {
    pub planner: PlannerName,
    pub axis: MetaAxis,
    pub variant: String,
    /// Mean runtime averaged over the environments.
    pub mean_time: f64,
    /// `mean_time` over the best variant on the same axis.
    pub ratio: f64,
}

/// Environments used by the meta-analysis.
pub fn meta_environments() -> Vec<EnvironmentSpec> {
    vec![
        EnvironmentSpec::Hypercube { n: 20 },
        EnvironmentSpec::DiskCrossing { robots: 4 },
        EnvironmentSpec::WallGap { gap_width: 1.2 },
    ]
}

/// Normalizes per-axis means so the best variant has ratio exactly 1.
pub fn normalize_axis(means: &[f64]) -> Vec<f64> {
    let best = means.iter().copied().fold(f64::INFINITY, f64::min);
    means
        .iter()
        .map(|&m| if m == best { 1.0 } else { m / best })
        .collect()
}

/// Ratio table of primitive-method variants for each planner and axis.
pub fn meta_analysis(
    planners: &[PlannerName],
    environments: &[EnvironmentSpec],
    runs: usize,
    time_limit: f64,
    base_seed: u64,
    parallel: usize,
) -> Result<(Vec<MetaRow>, Vec<RunRecord>), BenchError> {
    let mut variants = Vec::new();
    for &p in planners {
        let base = PlannerConfig::new(p);
        for axis in MetaAxis::ALL {
            for (label, config) in axis.variants(&base) {
                variants.push((p, axis, label, config));
            }
        }
    }
    let suite = BenchSuite {
        experiments: environments
            .iter()
            .map(|env| Experiment {
                problem: env.clone(),
                planners: variants.iter().map(|v| v.3.clone()).collect(),
                runs,
                time_limit,
            })
            .collect(),
        base_seed,
        parallel,
        csv: None,
        svg: None,
    };
    let records = run_suite(&suite)?;
    let per_env = variants.len() * runs;
    let mut means = vec![0.0; variants.len()];
    for chunk in records.chunks(per_env) {
        for (i, cell) in chunk.chunks(runs).enumerate() {
            let mean = cell.iter().map(|r| r.time_s).sum::<f64>() / runs as f64;
            means[i] += mean / environments.len() as f64;
        }
    }
    let mut rows = Vec::with_capacity(variants.len());
    let mut i = 0;
    while i < variants.len() {
        let (p, axis) = (variants[i].0, variants[i].1);
        let mut j = i;
        while j < variants.len() && variants[j].0 == p && variants[j].1 == axis {
            j += 1;
        }
        let ratios = normalize_axis(&means[i..j]);
        for (k, ratio) in (i..j).zip(ratios) {
            rows.push(MetaRow {
                planner: p,
                axis,
                variant: variants[k].2.to_string(),
                mean_time: means[k],
                ratio,
            });
        }
        i = j;
    }
    Ok((rows, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_suite(runs: usize) -> BenchSuite {
        BenchSuite {
            experiments: vec![Experiment {
                problem: EnvironmentSpec::Hypercube { n: 3 },
                planners: vec![PlannerConfig::new(PlannerName::Qrrt)],
                runs,
                time_limit: 5.0,
            }],
            base_seed: 40,
            parallel: 1,
            csv: None,
            svg: None,
        }
    }

    fn blank_times(csv: &[u8]) -> String {
        String::from_utf8(csv.to_vec())
            .unwrap()
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f[5] = "";
                f.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn three_runs_three_records() {
        let records = run_suite(&tiny_suite(3)).unwrap();
        assert_eq!(records.len(), 3);
        let seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![40, 41, 42]);
        assert!(records.iter().all(|r| r.status == RunStatus::Solved));
        assert!(records.iter().all(|r| r.cost.unwrap().is_finite()));
    }

    #[test]
    fn csv_round_trip_and_determinism() {
        let a = run_suite(&tiny_suite(4)).unwrap();
        let b = run_suite(&tiny_suite(4)).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_csv(&a, &mut ca).unwrap();
        write_csv(&b, &mut cb).unwrap();
        assert_eq!(blank_times(&ca), blank_times(&cb));
        let back = read_csv(ca.as_slice()).unwrap();
        assert_eq!(back, a);
        let from_csv = aggregate(&back);
        let direct = aggregate(&a);
        assert!((from_csv[0].mean_time - direct[0].mean_time).abs() <= 1e-12);
    }

    #[test]
    fn parallel_matches_sequential_order() {
        let mut suite = tiny_suite(4);
        suite.parallel = 2;
        let par = run_suite(&suite).unwrap();
        let seq = run_suite(&tiny_suite(4)).unwrap();
        let key = |r: &RunRecord| (r.run, r.seed, r.cost.map(f64::to_bits));
        assert_eq!(
            par.iter().map(key).collect::<Vec<_>>(),
            seq.iter().map(key).collect::<Vec<_>>()
        );
    }

    #[test]
    fn failures_count_at_the_limit() {
        let suite = BenchSuite {
            experiments: vec![Experiment {
                problem: EnvironmentSpec::Hypercube { n: 9 },
                planners: vec![PlannerConfig::new(PlannerName::Rrt)],
                runs: 2,
                time_limit: 0.05,
            }],
            base_seed: 0,
            parallel: 1,
            csv: None,
            svg: None,
        };
        let records = run_suite(&suite).unwrap();
        assert!(records.iter().all(|r| r.status == RunStatus::TimedOut));
        assert!(records.iter().all(|r| r.time_s == 0.05 && r.cost.is_none()));
        let cell = &aggregate(&records)[0];
        assert!(cell.flagged);
        assert_eq!(cell.successes, 0);
    }

    #[test]
    fn invalid_suites_rejected() {
        let mut s = tiny_suite(0);
        assert!(run_suite(&s).is_err());
        s.experiments[0].runs = 1;
        s.experiments[0].time_limit = 0.0;
        assert!(run_suite(&s).is_err());
    }

    #[test]
    fn cubic_through_four_points_is_exact() {
        let pts = [(1.0, 2.0), (2.0, 3.0), (4.0, -1.0), (7.0, 10.0)];
        let fit = CubicFit::fit(&pts, FitMode::Time).unwrap();
        assert!(fit.residual < 1e-9, "{}", fit.residual);
        for (x, y) in pts {
            assert!((fit.predict(x) - y).abs() < 1e-8);
        }
        let exp = [(1.0, 1.0), (2.0, 10.0), (3.0, 100.0), (4.0, 1000.0), (5.0, 1e4)];
        let lf = CubicFit::fit(&exp, FitMode::LogTime).unwrap();
        assert!((lf.predict(6.0) / 1e5 - 1.0).abs() < 1e-6);
        assert!(CubicFit::fit(&pts[..3], FitMode::Time).is_none());
    }

    #[test]
    fn normalization_has_unit_minimum() {
        let r = normalize_axis(&[0.3, 0.1, 0.2, 0.1]);
        assert_eq!((r[1], r[3]), (1.0, 1.0));
        assert!((r[0] - 3.0).abs() < 1e-12 && (r[2] - 2.0).abs() < 1e-12);
        assert!(r.iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn hash_ignores_seed() {
        let a = PlannerConfig::new(PlannerName::Qmp);
        let mut b = a.clone();
        b.seed = 99;
        assert_eq!(params_hash(&a), params_hash(&b));
        b.goal_bias = 0.1;
        assert_ne!(params_hash(&a), params_hash(&b));
        assert_eq!(params_hash(&a).len(), 16);
    }

    #[test]
    fn scaling_rejects_unsorted() {
        let c = PlannerConfig::new(PlannerName::Qrrt);
        assert!(scaling_study(&c, &[5, 3], 1, 1.0, 0, 1, FitMode::Time).is_err());
    }

    #[test]
    fn axes_have_two_or_more_variants() {
        let base = PlannerConfig::default();
        for axis in MetaAxis::ALL {
            assert!(axis.variants(&base).len() >= 2);
        }
    }
}
