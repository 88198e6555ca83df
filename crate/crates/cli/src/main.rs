use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bhdephase_cli::config::Origin;
use bhdephase_cli::{
    compare_methods, run_scenario, run_sweep, CliError, Method, RawConfig, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "bhdephase",
    version,
    about = "Impurity dephasing in a 1D Bose-Hubbard gas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Superfluid regime, Bogoliubov phonons.
    Sf(Overrides),
    /// Mott regime, doublon-holon pairs.
    Mott(Overrides),
    /// Exact diagonalization and propagation.
    Ed(Overrides),
    /// Sweep U/J with one method and normalize the BLP measure.
    Sweep(SweepArgs),
    /// Exact echo against the correlator route and the analytic model.
    Compare(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "U")]
    u: Option<String>,
    #[arg(long = "J")]
    j: Option<String>,
    #[arg(long = "Ue")]
    ue: Option<String>,
    #[arg(long = "Ns")]
    ns: Option<String>,
    #[arg(long)]
    nbar: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Time horizon, or `auto` for the method default.
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    kcount: Option<String>,
    /// `thermodynamic` or `lattice`.
    #[arg(long)]
    momentum: Option<String>,
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// `sf`, `mott` or `ed`.
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated U/J values.
    #[arg(long)]
    sweep: Option<String>,
}

impl Overrides {
    fn load(&self, extra: &[(&str, &Option<String>)]) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        let flags = [
            ("U", &self.u),
            ("J", &self.j),
            ("Ue", &self.ue),
            ("Ns", &self.ns),
            ("nbar", &self.nbar),
            ("nmax", &self.nmax),
            ("dt", &self.dt),
            ("T", &self.t),
            ("kcount", &self.kcount),
            ("momentum", &self.momentum),
            ("boundary", &self.boundary),
            ("tol", &self.tol),
            ("out", &self.out),
            ("workers", &self.workers),
        ];
        for (key, value) in flags.iter().chain(extra) {
            if let Some(v) = value {
                raw.set(key, v.clone(), Origin::Flag)?;
            }
        }
        Ok(raw)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sf(o) => single(&o, Method::Sf),
        Command::Mott(o) => single(&o, Method::Mott),
        Command::Ed(o) => single(&o, Method::Ed),
        Command::Sweep(s) => {
            let raw = s
                .overrides
                .load(&[("method", &s.method), ("sweep", &s.sweep)])?;
            let cfg = ScenarioConfig::resolve(&raw, None)?;
            let summary = run_sweep(&cfg)?;
            let failed = summary.rows.iter().filter(|r| !r.error.is_empty()).count();
            println!(
                "{} points ({failed} failed) -> {}",
                summary.rows.len(),
                cfg.out.join("sweep.csv").display()
            );
            Ok(())
        }
        Command::Compare(o) => {
            let cfg = ScenarioConfig::resolve(&o.load(&[])?, Some(Method::Ed))?;
            let r = compare_methods(&cfg)?;
            println!(
                "analytic = {}, TCL metric = {:.3e}, max |dev| = {}, breakdown = {}",
                r.analytic.as_deref().unwrap_or("none"),
                r.tcl_metric,
                r.max_abs_deviation
                    .map_or("n/a".to_string(), |d| format!("{d:.3e}")),
                r.breakdown
            );
            Ok(())
        }
    }
}

fn single(o: &Overrides, method: Method) -> Result<(), CliError> {
    let cfg = ScenarioConfig::resolve(&o.load(&[])?, Some(method))?;
    let eval = run_scenario(&cfg)?;
    println!(
        "{}: N = {:.6e} over T = {} -> {}",
        eval.report.tag,
        eval.report.measure,
        eval.report.horizon,
        cfg.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
