use clap::{Parser, Subcommand};
use potopt_cli::config::{parse_config, parse_values_list};
use potopt_cli::recipes::{run_recipe, RECIPE_NAMES};
use potopt_cli::runner::run_config;
use potopt_cli::sweep::run_sweep;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Optimal potentials for −Δ+V: batch experiment runner.
///
/// Potential values admitted in config files (`problem.potential.values`)
/// may contain the token `inf`; such entries are clamped to 1e12 and act as
/// hard walls. The output directory defaults to the working directory and
/// may be overridden with POTOPT_OUT_DIR.
#[derive(Parser)]
#[command(name = "potopt", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its artifacts.
    Run {
        /// path to a key-value config file
        config: PathBuf,
    },
    /// Re-run a config over a list of values for one numeric field.
    Sweep {
        config: PathBuf,
        /// numeric config key, e.g. problem.constraint.p
        #[arg(long)]
        param: String,
        /// comma-separated values, e.g. 1.1,1.5,2,4
        #[arg(long)]
        values: String,
        /// worker threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a pinned named experiment: examdelta, figure1, figure2,
    /// counterexample, twoball.
    Recipe { name: String },
}

fn out_dir() -> PathBuf {
    std::env::var_os("POTOPT_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(converged) => {
            if converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("solver did not converge; artifacts carry the best iterate");
                ExitCode::from(2)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, String> {
    let dir = out_dir();
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let cfg = parse_config(&text).map_err(|e| e.to_string())?;
            let out = run_config(&cfg).map_err(|e| e.to_string())?;
            let stem = stem_of(&config);
            emit_run(&dir, &stem, &out)?;
            print!("{}", out.summary);
            Ok(out.converged)
        }
        Command::Sweep {
            config,
            param,
            values,
            jobs,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let values = parse_values_list(&values).map_err(|e| e.to_string())?;
            let out = run_sweep(&text, &param, &values, jobs).map_err(|e| e.to_string())?;
            let stem = stem_of(&config);
            for (v, run) in &out.runs {
                emit_run(&dir, &format!("{stem}__{param}_{v}"), run)?;
            }
            write_artifact(&dir, &format!("{stem}__sweep.csv"), &out.aggregate_csv)
                .map_err(|e| e.to_string())?;
            print!("{}", out.aggregate_csv);
            Ok(out.all_converged)
        }
        Command::Recipe { name } => {
            if !RECIPE_NAMES.contains(&name.as_str()) {
                return Err(format!(
                    "unknown recipe `{name}`; available: {}",
                    RECIPE_NAMES.join(", ")
                ));
            }
            let out = run_recipe(&name).map_err(|e| e.to_string())?;
            for (fname, contents) in &out.files {
                write_artifact(&dir, fname, contents).map_err(|e| e.to_string())?;
            }
            print!("{}", out.summary);
            Ok(out.converged)
        }
    }
}

fn emit_run(dir: &Path, stem: &str, out: &potopt_cli::runner::RunOutput) -> Result<(), String> {
    let json =
        serde_json::to_string_pretty(&out.record).map_err(|e| e.to_string())? + "\n";
    write_artifact(dir, &format!("{stem}__result.json"), &json).map_err(|e| e.to_string())?;
    if let Some(csv) = &out.csv {
        write_artifact(dir, &format!("{stem}__profile.csv"), csv).map_err(|e| e.to_string())?;
    }
    write_artifact(dir, &format!("{stem}__summary.txt"), &out.summary)
        .map_err(|e| e.to_string())?;
    Ok(())
}
