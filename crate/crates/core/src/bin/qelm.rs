use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qelm::experiment::{
    append_result, emit_report, parse_override, read_results_csv, run_classical_baselines,
    run_single, run_sweep, ExperimentConfig, GroupKey, ResultRow, SweepSpec, DATA_DIR_ENV,
    RESULTS_HEADER,
};
use qelm::Result;

#[derive(Parser)]
#[command(name = "qelm", version, about = "Quantum extreme learning machine workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and append its row to <output_dir>/results.csv.
    Run(ConfigArgs),
    /// Run every cell of a grid file, resuming from existing results.
    Sweep(ConfigArgs),
    /// Softmax baselines on raw pixels and on the latents.
    Baseline(ConfigArgs),
    /// Write CSV, JSON summary and per-group series from a results file.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Key-value config file (a grid file for `sweep`).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory holding the dataset directories.
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    n_qubits: Option<usize>,
    #[arg(long)]
    encoding: Option<String>,
    #[arg(long)]
    reduction: Option<String>,
    #[arg(long)]
    hamiltonian: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use every image instead of the desk-scale subsample.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    save_model: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV to report on.
    results: PathBuf,
    #[arg(short, long, default_value = "report")]
    out: PathBuf,
    #[arg(short, long, default_value = "reduction")]
    group_by: GroupKey,
}

impl ConfigArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("data_dir", self.data_dir.as_ref().map(|p| toml_str(&p.to_string_lossy())));
        push("output_dir", self.output_dir.as_ref().map(|p| toml_str(&p.to_string_lossy())));
        push("n_qubits", self.n_qubits.map(|v| v.to_string()));
        push("encoding", self.encoding.clone());
        push("reduction", self.reduction.clone());
        push("hamiltonian", self.hamiltonian.clone());
        push("seed", self.seed.map(|v| v.to_string()));
        if self.full {
            push("train_size", Some("0".into()));
            push("test_size", Some("0".into()));
        }
        if self.save_model {
            push("save_model", Some("true".into()));
        }
        for s in &self.overrides {
            out.push(parse_override(s)?);
        }
        Ok(out)
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::load(self.config.as_deref(), &self.overrides()?)
    }
}

fn toml_str(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn print_rows(rows: &[ResultRow]) {
    println!("{RESULTS_HEADER}");
    for r in rows {
        println!("{}", r.to_csv());
    }
}

fn append_rows(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| qelm::QelmError::Config(format!("{}: {e}", cfg.output_dir.display())))?;
    let path = cfg.output_dir.join("results.csv");
    rows.iter().try_for_each(|r| append_result(&path, r))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.experiment()?;
            let outcome = run_single(&cfg)?;
            append_rows(&cfg, std::slice::from_ref(&outcome.row))?;
            print_rows(&[outcome.row]);
        }
        Command::Baseline(args) => {
            let cfg = args.experiment()?;
            let rows = run_classical_baselines(&cfg)?;
            append_rows(&cfg, &rows)?;
            print_rows(&rows);
        }
        Command::Sweep(args) => {
            let path = args
                .config
                .as_deref()
                .ok_or_else(|| qelm::QelmError::Config("sweep needs --config <grid file>".into()))?;
            let spec = SweepSpec::load(path, &args.overrides()?)?;
            let outcome = run_sweep(&spec)?;
            eprintln!(
                "{} cells: {} ran, {} already done, {} failed",
                spec.len(),
                outcome.ran,
                outcome.skipped,
                outcome.failures.len()
            );
            for f in &outcome.failures {
                eprintln!("failed: {} ({})", f.cell, f.error);
            }
            print_rows(&outcome.rows);
        }
        Command::Report(args) => {
            let rows = read_results_csv(&args.results)?;
            let files = emit_report(&rows, &args.out, args.group_by)?;
            println!("{}", files.csv.display());
            println!("{}", files.summary.display());
            for s in files.series {
                println!("{}", s.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
