//! `ness`: run steady-state response scenarios from TOML files.

mod config;
mod matrix;
mod output;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ness_core::gaussian::{figure2, figure3, TwoOscillatorParams};

use config::{Diagnostic, Severity};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "ness", version, about = "Linear response around nonequilibrium steady states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Exit with status 4 when any equivalence check fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Override the absolute tolerance for exactly equivalent forms.
    #[arg(long, global = true, value_name = "FLOAT")]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the requested response forms and write the outputs.
    Run { config: PathBuf },
    /// Check a scenario without running any solver.
    Validate { config: PathBuf },
    /// Tabulate a closed-form figure of the two-oscillator model.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 401)]
        points: usize,
        /// Defaults to 8/γ.
        #[arg(long)]
        t_max: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureName {
    Fig2,
    Fig3,
}

struct Failure(u8, String);

fn print_diagnostics(diags: &[Diagnostic]) -> bool {
    for d in diags {
        eprintln!("{d}");
    }
    diags.iter().any(|d| d.severity == Severity::Error)
}

fn load_scenario(path: &Path, tolerance: Option<f64>) -> Result<config::Scenario, Failure> {
    let cfg = config::load(path).map_err(|e| Failure(EXIT_CONFIG, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (scenario, diags) = config::resolve(&cfg, base);
    print_diagnostics(&diags);
    let mut scenario = scenario.ok_or_else(|| Failure(EXIT_CONFIG, format!("{} is not a valid scenario", path.display())))?;
    if let Some(t) = tolerance {
        scenario.tolerances.exact = t;
        for (k, v) in &mut scenario.meta {
            if k == "tolerances.exact" {
                *v = format!("{t:?}");
            }
        }
    }
    Ok(scenario)
}

fn run(path: &Path, cli: &Cli) -> Result<(), Failure> {
    let scenario = load_scenario(path, cli.tolerance)?;
    if let config::ModelKind::TwoOscillator { truncations: (n1, n2), .. } = scenario.kind {
        println!("Fock truncation {n1} x {n2}");
    }
    let result = scenario::run(&scenario).map_err(|e| Failure(EXIT_SOLVER, format!("solver error: {e}")))?;

    let mut files = vec![
        ("response.csv", output::response_csv(&result.curves)),
        ("report.txt", result.report.render()),
    ];
    let mut meta = scenario.meta.clone();
    if let Some(traj) = &result.trajectory {
        files.push(("trajectory.csv", output::trajectory_csv(traj)));
        meta.push(("trajectory.source".into(), traj.source.id().into()));
    }
    files.push(("meta.txt", output::meta_txt(&meta)));
    output::write_all(&scenario.output, &files)
        .map_err(|e| Failure(EXIT_CONFIG, format!("cannot write {}: {e}", scenario.output.display())))?;

    print!("{}", result.report.render());
    println!("outputs written to {}", scenario.output.display());
    if cli.strict && !result.report.passed() {
        return Err(Failure(EXIT_TOLERANCE, "equivalence checks failed".into()));
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let cfg = config::load(path).map_err(|e| Failure(EXIT_CONFIG, e))?;
    let (_, diags) = config::resolve(&cfg, path.parent().unwrap_or(Path::new(".")));
    let failed = print_diagnostics(&diags);
    println!("{} diagnostic(s)", diags.len());
    if failed {
        return Err(Failure(EXIT_CONFIG, format!("{} is not a valid scenario", path.display())));
    }
    Ok(())
}

fn figure(name: FigureName, out: &Path, points: usize, t_max: Option<f64>) -> Result<(), Failure> {
    let (params, file) = match name {
        FigureName::Fig2 => (TwoOscillatorParams::fig2(), "fig2.csv"),
        FigureName::Fig3 => (TwoOscillatorParams::fig3(), "fig3.csv"),
    };
    let t_max = t_max.unwrap_or(8.0 / params.gamma);
    if points < 2 || !(t_max > 0.0) {
        return Err(Failure(EXIT_CONFIG, format!("need points >= 2 and t_max > 0, got {points} and {t_max}")));
    }
    let times: Vec<f64> = (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect();
    let table = match name {
        FigureName::Fig2 => figure2(&params, &times),
        FigureName::Fig3 => figure3(&params, &times),
    }
    .map_err(|e| Failure(EXIT_SOLVER, format!("solver error: {e}")))?;
    output::write_all(out, &[(file, output::figure_csv(&table))])
        .map_err(|e| Failure(EXIT_CONFIG, format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {}", out.join(file).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.tolerance {
        if !(t > 0.0) {
            eprintln!("error: --tolerance must be positive, got {t}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    if let Some(n) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        if n == 0 || pool.is_err() {
            eprintln!("error: cannot start {n} worker threads");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match &cli.command {
        Command::Run { config } => run(config, &cli),
        Command::Validate { config } => validate(config),
        Command::Figure { name, out, points, t_max } => figure(*name, out, *points, *t_max),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
