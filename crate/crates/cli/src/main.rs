use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use percaniso::exit::{CONFIG_ERROR, INVARIANT_VIOLATION, SUCCESS};
use percaniso::experiments::{verdict_rows, verify_one, VerifyCounts};
use percaniso::report::fmt_num;
use percaniso::{parse_config, run_experiment, write_outcome};
use percaniso_core::coupling::{run_coupled_exploration, write_trace};
use percaniso_core::partition::DEFAULT_C1;
use percaniso_core::{BoxLimits, Params, Seed};

#[derive(Parser)]
#[command(name = "percaniso", version, about = "Anisotropic bond percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Report which sufficient criteria certify percolation for p.
    Verdict {
        #[arg(short = 'd')]
        d: usize,
        #[arg(short = 'p', value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_C1)]
        c1: f64,
    },
    /// Run and verify coupled explorations from Z^d into Z^(d+1).
    Couple {
        #[arg(long, value_delimiter = ',', required = true)]
        params: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_vertices: usize,
        #[arg(long, default_value_t = 64)]
        radius: i64,
        /// Write every trace to this file.
        #[arg(long)]
        dump_trace: Option<PathBuf>,
    },
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("percaniso: {msg}");
    code
}

fn cmd_run(path: &PathBuf) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(CONFIG_ERROR, format!("{}: {e}", path.display())),
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(CONFIG_ERROR, format!("{}: {e}", path.display())),
    };
    let out = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(CONFIG_ERROR, e),
    };
    if let Err(e) = write_outcome(&cfg, &out) {
        return fail(CONFIG_ERROR, e);
    }
    if out.violations > 0 {
        return fail(INVARIANT_VIOLATION, format!("{} invariant violations", out.violations));
    }
    SUCCESS
}

fn cmd_verdict(d: usize, p: Vec<f64>, c1: f64) -> i32 {
    if p.len() != d {
        return fail(CONFIG_ERROR, format!("-d {d} but {} probabilities given", p.len()));
    }
    let params = match Params::new(p) {
        Ok(p) => p,
        Err(e) => return fail(CONFIG_ERROR, e),
    };
    let rows = match verdict_rows(&params, c1) {
        Ok(r) => r,
        Err(e) => return fail(CONFIG_ERROR, e),
    };
    println!("p = ({params})  delta = {}", fmt_num(params.sum() - 0.5));
    for (check, v) in rows {
        print!("{check}: {}", v.applicable);
        if let Some(w) = &v.witness {
            print!("  partition {w} (m = {})", w.m());
        }
        if let Some(r) = &v.reduced {
            print!("  reduced ({r})");
        }
        println!();
        println!("  {}", v.explanation);
    }
    SUCCESS
}

fn cmd_couple(
    params: Vec<f64>,
    trials: u64,
    master: u64,
    max_vertices: usize,
    radius: i64,
    dump: Option<PathBuf>,
) -> i32 {
    let params = match Params::new(params) {
        Ok(p) => p,
        Err(e) => return fail(CONFIG_ERROR, e),
    };
    let limits = match BoxLimits::new(max_vertices, radius) {
        Ok(l) => l,
        Err(e) => return fail(CONFIG_ERROR, e),
    };
    if trials == 0 {
        return fail(CONFIG_ERROR, "--trials must be at least 1");
    }
    let mut sink = match &dump {
        None => None,
        Some(path) => match File::create(path) {
            Ok(f) => Some(BufWriter::new(f)),
            Err(e) => return fail(CONFIG_ERROR, format!("{}: {e}", path.display())),
        },
    };
    let mut total = VerifyCounts::default();
    for t in 0..trials {
        let seed = Seed::new(master, t);
        let counts = match verify_one(&params, seed, limits) {
            Ok(c) => c,
            Err(e) => return fail(CONFIG_ERROR, e),
        };
        if let Some(w) = sink.as_mut() {
            let trace = run_coupled_exploration(&params, seed, limits).expect("ran above");
            if let Err(e) = write_trace(w, &trace, &params, seed, limits) {
                return fail(CONFIG_ERROR, e);
            }
        }
        total = total.merge(counts);
    }
    if let Some(mut w) = sink {
        if let Err(e) = w.flush() {
            return fail(CONFIG_ERROR, e);
        }
    }
    println!("traces: {}", total.traces);
    println!("truncated: {}", total.truncated);
    println!("mean_infected: {}", fmt_num(total.infected_total as f64 / total.traces as f64));
    println!("injective_fail: {}", total.injective_fail);
    println!("coords_fail: {}", total.coords_fail);
    println!("image_open_fail: {}", total.image_open_fail);
    println!("requery_fail: {}", total.requery_fail);
    println!("domination_fail: {}", total.domination_fail);
    println!("accounting_fail: {}", total.accounting_fail);
    if total.violations() > 0 {
        return fail(INVARIANT_VIOLATION, format!("{} invariant violations", total.violations()));
    }
    SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Verdict { d, p, c1 } => cmd_verdict(d, p, c1),
        Command::Couple { params, trials, seed, max_vertices, radius, dump_trace } => {
            cmd_couple(params, trials, seed, max_vertices, radius, dump_trace)
        }
    };
    ExitCode::from(code as u8)
}
