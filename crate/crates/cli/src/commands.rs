//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fiberplan::bench::{
    aggregate, meta_analysis, meta_environments, read_csv, run_suite, scaling_study, write_csv,
    write_summary_csv, CellSummary, FitMode, RunRecord,
};
use fiberplan::planners::{plan, PlanOutcome, PlanStatus, PlannerConfig, PlannerName};
use fiberplan::svg::{box_plot, line_plot, Series};
use serde::{Deserialize, Serialize};

use crate::config::{parse_document, Document, ProblemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_TIMED_OUT: i32 = 3;

/// Solution file written by `plan`. Carries no timing, so identical runs
/// produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub planner: PlannerName,
    pub environment: String,
    pub seed: u64,
    #[serde(flatten)]
    pub status: PlanStatus,
    pub cost: Option<f64>,
    pub vertices_per_level: Vec<usize>,
    pub path: Vec<Vec<f64>>,
}

impl Solution {
    pub fn new(config: &ProblemConfig, outcome: &PlanOutcome) -> Self {
        Solution {
            planner: config.planner.planner,
            environment: config.environment.label(),
            seed: config.planner.seed,
            status: outcome.status,
            cost: outcome.cost,
            vertices_per_level: outcome.vertices_per_level.clone(),
            path: outcome
                .path
                .as_ref()
                .map(|p| p.waypoints().iter().map(|s| s.values().to_vec()).collect())
                .unwrap_or_default(),
        }
    }
}

pub fn exit_code(status: PlanStatus) -> i32 {
    match status {
        PlanStatus::Solved => EXIT_OK,
        PlanStatus::Infeasible { .. } => EXIT_INFEASIBLE,
        PlanStatus::TimedOut => EXIT_TIMED_OUT,
    }
}

/// Command-line overrides shared by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub planner: Option<PlannerName>,
    pub seed: Option<u64>,
    pub time_limit: Option<f64>,
    pub runs: Option<usize>,
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub parallel: Option<usize>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn summary_line(config: &ProblemConfig, outcome: &PlanOutcome) -> String {
    let mut line = format!(
        "{} on {}: {}",
        config.planner.planner,
        config.environment.label(),
        outcome.status
    );
    if let Some(c) = outcome.cost {
        line += &format!(", cost {c:.4}");
    }
    if let Some(k) = outcome.infeasible_level {
        line += &format!(", level {k}");
    }
    line += &format!(
        ", vertices {:?}, {:.3} s",
        outcome.vertices_per_level,
        outcome.elapsed.as_secs_f64()
    );
    line
}

/// Runs one planning problem; returns the exit code.
pub fn run_plan(config_path: &Path, o: &Overrides) -> Result<i32> {
    let Document::Problem(mut config) = parse_document(&read(config_path)?)? else {
        anyhow::bail!("{} is a suite; use `bench`", config_path.display());
    };
    if let Some(p) = o.planner {
        config.planner.planner = p;
    }
    if let Some(s) = o.seed {
        config.planner.seed = s;
    }
    if let Some(t) = o.time_limit {
        config.planner.time_limit = t;
    }
    config.planner.validate()?;
    log::info!("effective config: {}", config.to_value());
    let problem = config.build()?;
    let outcome = plan(&problem, &config.planner)?;
    let out = o
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("solution.json"));
    let solution = Solution::new(&config, &outcome);
    let mut json = serde_json::to_string_pretty(&solution)?;
    json.push('\n');
    write(&out, json.as_bytes())?;
    if o.plot && !solution.path.is_empty() {
        let points = solution
            .path
            .iter()
            .map(|w| (w[0], w.get(1).copied().unwrap_or(0.0)))
            .collect();
        let svg = line_plot(
            &config.environment.label(),
            "x0",
            "x1",
            &[Series {
                label: config.planner.planner.to_string(),
                points,
            }],
            false,
        );
        write(&out.with_extension("svg"), svg.as_bytes())?;
    }
    println!("{}", summary_line(&config, &outcome));
    Ok(exit_code(outcome.status))
}

fn print_cells(cells: &[CellSummary]) {
    for c in cells {
        println!(
            "{:<10} {:<18} {}/{} solved  mean {:.4} s  median {:.4} s  [{:.4}, {:.4}]{}",
            c.planner,
            c.environment,
            c.successes,
            c.runs,
            c.mean_time,
            c.median_time,
            c.min_time,
            c.max_time,
            if c.flagged {
                "  (failures counted at the time limit)"
            } else {
                ""
            }
        );
    }
}

fn write_records(records: &[RunRecord], out: &Path) -> Result<Vec<CellSummary>> {
    let mut bytes = Vec::new();
    write_csv(records, &mut bytes)?;
    write(out, &bytes)?;
    // re-read what was written so the summary reflects the file
    let cells = aggregate(&read_csv(bytes.as_slice())?);
    let mut summary = Vec::new();
    write_summary_csv(&cells, &mut summary)?;
    write(&sibling(out, ".summary.csv"), &summary)?;
    Ok(cells)
}

fn run_box_plot(records: &[RunRecord], title: &str) -> String {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in records {
        let label = format!("{} {}", r.planner, r.environment);
        match groups.iter_mut().find(|g| g.0 == label) {
            Some(g) => g.1.push(r.time_s),
            None => groups.push((label, vec![r.time_s])),
        }
    }
    box_plot(title, "time [s]", &groups, true)
}

pub fn run_bench(config_path: &Path, o: &Overrides) -> Result<i32> {
    let Document::Suite(mut suite) = parse_document(&read(config_path)?)? else {
        anyhow::bail!("{} is a single problem; use `plan`", config_path.display());
    };
    for e in &mut suite.experiments {
        if let Some(r) = o.runs {
            e.runs = r;
        }
        if let Some(t) = o.time_limit {
            e.time_limit = t;
        }
        if let Some(p) = o.planner {
            e.planners = vec![PlannerConfig::new(p)];
        }
    }
    if let Some(s) = o.seed {
        suite.base_seed = s;
    }
    if let Some(p) = o.parallel {
        suite.parallel = p;
    }
    let records = run_suite(&suite)?;
    let out = o
        .out
        .clone()
        .or_else(|| suite.csv.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bench.csv"));
    let cells = write_records(&records, &out)?;
    print_cells(&cells);
    if o.plot || suite.svg.is_some() {
        let svg_path = suite
            .svg
            .as_ref()
            .map(PathBuf::from)
            .unwrap_or_else(|| out.with_extension("svg"));
        write(&svg_path, run_box_plot(&records, "benchmark").as_bytes())?;
    }
    Ok(EXIT_OK)
}

pub fn run_meta(o: &Overrides) -> Result<i32> {
    let planners = match o.planner {
        Some(p) => vec![p],
        None => vec![
            PlannerName::Qrrt,
            PlannerName::QrrtStar,
            PlannerName::Qmp,
            PlannerName::QmpStar,
        ],
    };
    let (rows, records) = meta_analysis(
        &planners,
        &meta_environments(),
        o.runs.unwrap_or(10),
        o.time_limit.unwrap_or(60.0),
        o.seed.unwrap_or(0),
        o.parallel.unwrap_or(1),
    )?;
    let out = o.out.clone().unwrap_or_else(|| PathBuf::from("meta.csv"));
    let mut w = String::new();
    w.push_str("planner,axis,variant,mean_time,ratio\n");
    for r in &rows {
        let axis = serde_json::to_value(r.axis)?;
        w.push_str(&format!(
            "{},{},{},{},{}\n",
            r.planner,
            axis.as_str().unwrap_or_default(),
            r.variant,
            r.mean_time,
            r.ratio
        ));
        println!(
            "{:<10} {:<12} {:<12} ratio {:.3}  ({:.4} s)",
            r.planner.to_string(),
            axis.as_str().unwrap_or_default(),
            r.variant,
            r.ratio,
            r.mean_time
        );
    }
    write(&out, w.as_bytes())?;
    write_records(&records, &sibling(&out, ".runs.csv"))?;
    if o.plot {
        let groups: Vec<(String, Vec<f64>)> = rows
            .iter()
            .map(|r| {
                let axis = serde_json::to_value(r.axis).unwrap();
                (
                    format!("{} {}", axis.as_str().unwrap_or_default(), r.variant),
                    vec![r.ratio],
                )
            })
            .collect();
        write(
            &out.with_extension("svg"),
            box_plot("runtime ratio per variant", "ratio", &groups, false).as_bytes(),
        )?;
    }
    Ok(EXIT_OK)
}

pub fn run_scaling(n_list: &[usize], fit: FitMode, o: &Overrides) -> Result<i32> {
    let planner = o.planner.unwrap_or(PlannerName::Rrt);
    let config = PlannerConfig::new(planner);
    let (table, records) = scaling_study(
        &config,
        n_list,
        o.runs.unwrap_or(10),
        o.time_limit.unwrap_or(60.0),
        o.seed.unwrap_or(0),
        o.parallel.unwrap_or(1),
        fit,
    )?;
    let out = o.out.clone().unwrap_or_else(|| PathBuf::from("scaling.csv"));
    let mut text = String::from("n,mean_time,successes,runs\n");
    for r in &table.rows {
        text += &format!("{},{},{},{}\n", r.n, r.mean_time, r.successes, r.runs);
        println!("n = {:<4} mean {:.4} s  {}/{} solved", r.n, r.mean_time, r.successes, r.runs);
    }
    write(&out, text.as_bytes())?;
    write_records(&records, &sibling(&out, ".runs.csv"))?;
    match &table.fit {
        Some(f) => println!(
            "cubic fit ({:?}): coefficients {:?}, residual {:.3e}",
            f.mode, f.coefficients, f.residual
        ),
        None => println!("cubic fit needs at least four sizes"),
    }
    if o.plot {
        let series = vec![Series {
            label: planner.to_string(),
            points: table
                .rows
                .iter()
                .map(|r| (r.n as f64, r.mean_time))
                .collect(),
        }];
        write(
            &out.with_extension("svg"),
            line_plot("hypercube scaling", "dimension", "mean time [s]", &series, true)
                .as_bytes(),
        )?;
    }
    Ok(EXIT_OK)
}
