//! Experiment dispatch. Every experiment is a pure function of its config:
//! rerunning a config reproduces its CSV byte for byte.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use percaniso_core::coupling::{
    coupled_size_pmf, merge_last_two, run_coupled_exploration, verify_trace, Termination,
};
use percaniso_core::explore::{
    cluster_size_pmf, crossing_probability, estimate_pc_bisection, estimate_theta,
    exact_singleton_probability,
};
use percaniso_core::partition::{
    check_theorem1, derive_constants, min_theorem1_dimension, pc_expansion, planar_note,
    theorem2_partition, Verdict, DEFAULT_C1,
};
use percaniso_core::stats::{binomial_std_error, two_sample_chi_square};
use percaniso_core::{BoxLimits, Exec, Params, Seed};
use thiserror::Error;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{fmt_num, line_plot, Series, Table};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] percaniso_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("thread pool: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub svg: Option<String>,
    /// Invariant violations found (coupling-verify only).
    pub violations: u64,
}

/// Minimum pooled count per bin in the two-sample chi-square test.
pub const MIN_POOLED_COUNT: u64 = 10;

fn params_of(cfg: &ExperimentConfig) -> &Params {
    cfg.params.as_ref().expect("validated by parse_config")
}

fn base_table(cfg: &ExperimentConfig, columns: &[&str]) -> Table {
    let mut t = Table::new(columns);
    t.echo("experiment", cfg.experiment.name());
    match &cfg.params {
        Some(p) => t.echo("params", p),
        None => t.echo("d", cfg.d.map(|d| d.to_string()).unwrap_or_default()),
    }
    t.echo("master_seed", cfg.master_seed);
    t.echo("trials", cfg.trials);
    t.echo("max_vertices", cfg.limits.max_vertices);
    t.echo("radius", cfg.limits.radius);
    t
}

fn outcome(table: Table) -> Outcome {
    Outcome { csv: table.to_csv(), svg: None, violations: 0 }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    with_threads(cfg.threads, || match cfg.experiment {
        Experiment::Theta => run_theta(cfg),
        Experiment::Pmf => run_pmf(cfg),
        Experiment::CouplingVerify => run_coupling_verify(cfg),
        Experiment::CouplingLaw => run_coupling_law(cfg),
        Experiment::Crossing => run_crossing(cfg),
        Experiment::PcBisect => run_pc_bisect(cfg),
        Experiment::Verdict => run_verdict(cfg),
        Experiment::Constants => run_constants(cfg),
    })
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, RunError> + Send,
) -> Result<T, RunError> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Threads(e.to_string()))?
            .install(f),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    _threads: Option<usize>,
    f: impl FnOnce() -> Result<T, RunError> + Send,
) -> Result<T, RunError> {
    f()
}

/// Parameter vectors to evaluate: the base params, or one per grid value.
fn sweep(cfg: &ExperimentConfig) -> Result<Vec<Params>, RunError> {
    let base = params_of(cfg);
    match cfg.grid {
        None => Ok(vec![base.clone()]),
        Some(grid) => grid
            .values()
            .into_iter()
            .map(|v| {
                let mut p = base.p().to_vec();
                p[grid.axis] = v;
                Params::new(p).map_err(RunError::from)
            })
            .collect(),
    }
}

fn p_columns(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("p{i}")).collect()
}

fn run_theta(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let d = params_of(cfg).d();
    let mut cols = p_columns(d);
    cols.extend(["trials", "survived", "theta", "std_err"].map(String::from));
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut table = base_table(cfg, &cols);
    let mut points = Vec::new();
    for params in sweep(cfg)? {
        let est = estimate_theta(&params, cfg.trials, cfg.limits, cfg.master_seed)?;
        let mut row: Vec<String> = params.p().iter().map(|&x| fmt_num(x)).collect();
        row.push(est.trials.to_string());
        row.push(est.survived.to_string());
        row.push(fmt_num(est.point_estimate));
        row.push(fmt_num(est.std_error));
        table.push(row);
        if let Some(grid) = cfg.grid {
            points.push((params.axis_p(grid.axis), est.point_estimate));
        }
    }
    let mut out = outcome(table);
    if let Some(grid) = cfg.grid {
        out.svg = Some(line_plot(
            "survival frequency",
            &format!("p{}", grid.axis + 1),
            "fraction reaching the truncation limit",
            &[Series { label: format!("R={}", cfg.limits.radius), points }],
        ));
    }
    Ok(out)
}

fn run_pmf(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let params = params_of(cfg);
    let pmf = cluster_size_pmf(params, cfg.trials, cfg.cutoff, cfg.master_seed)?;
    let mut table = base_table(cfg, &["size", "count", "mass"]);
    table.echo("cutoff", cfg.cutoff);
    table.echo("exact_singleton", fmt_num(exact_singleton_probability(params)));
    for (k, (&count, mass)) in pmf.counts().iter().zip(pmf.masses()).enumerate() {
        let label = if k == cfg.cutoff { "overflow".to_string() } else { (k + 1).to_string() };
        table.push(vec![label, count.to_string(), fmt_num(mass)]);
    }
    Ok(outcome(table))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyCounts {
    pub traces: u64,
    pub injective_fail: u64,
    pub coords_fail: u64,
    pub image_open_fail: u64,
    pub requery_fail: u64,
    pub domination_fail: u64,
    pub accounting_fail: u64,
    pub truncated: u64,
    pub infected_total: u64,
}

impl VerifyCounts {
    pub fn violations(&self) -> u64 {
        self.injective_fail
            + self.coords_fail
            + self.image_open_fail
            + self.requery_fail
            + self.domination_fail
            + self.accounting_fail
    }

    pub fn merge(self, o: VerifyCounts) -> VerifyCounts {
        VerifyCounts {
            traces: self.traces + o.traces,
            injective_fail: self.injective_fail + o.injective_fail,
            coords_fail: self.coords_fail + o.coords_fail,
            image_open_fail: self.image_open_fail + o.image_open_fail,
            requery_fail: self.requery_fail + o.requery_fail,
            domination_fail: self.domination_fail + o.domination_fail,
            accounting_fail: self.accounting_fail + o.accounting_fail,
            truncated: self.truncated + o.truncated,
            infected_total: self.infected_total + o.infected_total,
        }
    }
}

/// Runs and verifies one coupled trace.
pub fn verify_one(params_high: &Params, seed: Seed, limits: BoxLimits) -> Result<VerifyCounts, RunError> {
    let trace = run_coupled_exploration(params_high, seed, limits)?;
    let report = verify_trace(&trace, params_high, seed);
    let (expected, actual) = trace.query_accounting();
    Ok(VerifyCounts {
        traces: 1,
        injective_fail: !report.injective as u64,
        coords_fail: !report.coords_match as u64,
        image_open_fail: !report.image_open as u64,
        requery_fail: !report.no_requery as u64,
        domination_fail: !report.dominated() as u64,
        accounting_fail: (expected != actual) as u64,
        truncated: (trace.terminated_by == Termination::Truncation) as u64,
        infected_total: trace.infected.len() as u64,
    })
}

fn run_coupling_verify(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let params = params_of(cfg);
    let counts = Exec::default().fold_trials(
        cfg.trials,
        || Ok(VerifyCounts::default()),
        |acc: Result<VerifyCounts, RunError>, t| {
            let one = verify_one(params, Seed::new(cfg.master_seed, t), cfg.limits)?;
            Ok(acc?.merge(one))
        },
        |a, b| Ok(a?.merge(b?)),
    )?;
    let mut table = base_table(
        cfg,
        &[
            "traces",
            "injective_fail",
            "coords_fail",
            "image_open_fail",
            "requery_fail",
            "domination_fail",
            "accounting_fail",
            "truncated",
            "mean_infected",
            "violations",
        ],
    );
    table.push(vec![
        counts.traces.to_string(),
        counts.injective_fail.to_string(),
        counts.coords_fail.to_string(),
        counts.image_open_fail.to_string(),
        counts.requery_fail.to_string(),
        counts.domination_fail.to_string(),
        counts.accounting_fail.to_string(),
        counts.truncated.to_string(),
        fmt_num(counts.infected_total as f64 / counts.traces as f64),
        counts.violations().to_string(),
    ]);
    let mut out = outcome(table);
    out.violations = counts.violations();
    Ok(out)
}

fn run_coupling_law(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let high = params_of(cfg);
    let low = merge_last_two(high)?;
    let coupled = coupled_size_pmf(high, cfg.trials, cfg.cutoff, cfg.master_seed)?;
    let direct = cluster_size_pmf(&low, cfg.trials, cfg.cutoff, cfg.direct_seed)?;
    let test = two_sample_chi_square(coupled.counts(), direct.counts(), MIN_POOLED_COUNT);
    let mut table = base_table(cfg, &["size", "coupled_count", "direct_count"]);
    table.echo("direct_params", &low);
    table.echo("direct_seed", cfg.direct_seed);
    table.echo("cutoff", cfg.cutoff);
    table.echo("chi2", fmt_num(test.statistic));
    table.echo("dof", test.dof);
    table.echo("p_value", fmt_num(test.p_value));
    for k in 0..=cfg.cutoff {
        let label = if k == cfg.cutoff { "overflow".to_string() } else { (k + 1).to_string() };
        table.push(vec![label, coupled.counts()[k].to_string(), direct.counts()[k].to_string()]);
    }
    Ok(outcome(table))
}

fn run_crossing(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let mut table = base_table(cfg, &["p1", "p2", "L", "trials", "crossing_freq", "std_err"]);
    let sweep = sweep(cfg)?;
    let mut series = Vec::new();
    for &l in &cfg.box_sizes {
        let mut points = Vec::new();
        for params in &sweep {
            let freq = crossing_probability(params, l, cfg.trials, cfg.master_seed)?;
            table.push(vec![
                fmt_num(params.axis_p(0)),
                fmt_num(params.axis_p(1)),
                l.to_string(),
                cfg.trials.to_string(),
                fmt_num(freq),
                fmt_num(binomial_std_error(freq, cfg.trials)),
            ]);
            if let Some(grid) = cfg.grid {
                points.push((params.axis_p(grid.axis), freq));
            }
        }
        series.push(Series { label: format!("L={l}"), points });
    }
    let mut out = outcome(table);
    if let Some(grid) = cfg.grid {
        out.svg = Some(line_plot(
            "left-right crossing probability",
            &format!("p{}", grid.axis + 1),
            "crossing frequency",
            &series,
        ));
    }
    Ok(out)
}

fn run_pc_bisect(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let d = cfg.d.expect("validated by parse_config");
    let est = estimate_pc_bisection(d, cfg.limits.radius, cfg.trials, cfg.tolerance, cfg.master_seed)?;
    let mut table = base_table(
        cfg,
        &["d", "L", "trials", "tolerance", "pc_estimate", "lo", "hi", "pc_expansion"],
    );
    for (k, (p, f)) in est.evaluations.iter().enumerate() {
        table.echo(&format!("eval_{k}"), format!("p = {}, survival = {}", fmt_num(*p), fmt_num(*f)));
    }
    table.push(vec![
        d.to_string(),
        cfg.limits.radius.to_string(),
        cfg.trials.to_string(),
        fmt_num(cfg.tolerance),
        fmt_num(est.estimate),
        fmt_num(est.lo),
        fmt_num(est.hi),
        fmt_num(pc_expansion(d)),
    ]);
    Ok(outcome(table))
}

/// Theorem-1, theorem-2 and (for `d = 2`) planar rows for one parameter vector.
pub fn verdict_rows(params: &Params, c1: f64) -> Result<Vec<(String, Verdict)>, RunError> {
    let bundle = derive_constants(c1)?;
    let mut rows = vec![
        ("theorem1".to_string(), check_theorem1(params, &bundle)),
        ("theorem2".to_string(), theorem2_partition(params)?),
    ];
    if let Some(note) = planar_note(params) {
        rows.push((
            "planar".to_string(),
            Verdict {
                delta: params.sum() - 0.5,
                applicable: percaniso_core::partition::Applicable::None,
                witness: None,
                reduced: None,
                explanation: note,
            },
        ));
    }
    Ok(rows)
}

fn run_verdict(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let params = params_of(cfg);
    let c1 = cfg.c1.unwrap_or(DEFAULT_C1);
    let mut table = base_table(cfg, &["check", "applicable", "delta", "m", "blocks", "reduced", "explanation"]);
    table.echo("c1", fmt_num(c1));
    for (check, v) in verdict_rows(params, c1)? {
        table.push(vec![
            check,
            v.applicable.to_string(),
            fmt_num(v.delta),
            v.witness.as_ref().map(|w| w.m().to_string()).unwrap_or_default(),
            v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default(),
            v.reduced
                .as_ref()
                .map(|r| r.p().iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" "))
                .unwrap_or_default(),
            v.explanation,
        ]);
    }
    Ok(outcome(table))
}

fn run_constants(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let b = derive_constants(cfg.c1.unwrap_or(DEFAULT_C1))?;
    let mut table = Table::new(&["c1", "lambda", "c2", "c3", "c", "residual", "min_dimension"]);
    table.echo("experiment", cfg.experiment.name());
    table.push(vec![
        fmt_num(b.c1),
        fmt_num(b.lambda),
        fmt_num(b.c2),
        fmt_num(b.c3),
        fmt_num(b.c),
        fmt_num(b.residual()),
        min_theorem1_dimension(&b).to_string(),
    ]);
    Ok(outcome(table))
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

/// Writes the CSV to `output` (stdout when unset) and the SVG, if any, next
/// to it with an `.svg` extension.
pub fn write_outcome(cfg: &ExperimentConfig, out: &Outcome) -> Result<(), RunError> {
    match &cfg.output_path {
        Some(path) => {
            write_file(path, &out.csv)?;
            if let Some(svg) = &out.svg {
                write_file(&path.with_extension("svg"), svg)?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(out.csv.as_bytes())
                .map_err(|source| RunError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(())
}
