use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bco_core::envs::io as env_io;
use bco_core::harness::{
    self, apply_overrides, build_env, config::apply, emit, parse_config_text, realized_budgets, sweep,
    threads_from_env, RunConfig,
};
use bco_core::schedule;

#[derive(Parser)]
#[command(name = "bco", version, about = "Non-stationary bandit convex optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one run and write its per-round CSV and JSON summary.
    Run {
        #[command(flatten)]
        run: RunArgs,
        /// CSV output path; `-` writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON summary path; defaults to the CSV path with a `.json` extension.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run a horizon x seed grid and fit the regret growth rate.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated horizons.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<u64>,
        /// Number of seeds; seeds are `seed, seed+1, ...`.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// JSON output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive checks of the interval schedule.
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// Export or import environment files.
    Env {
        #[command(subcommand)]
        what: EnvCommand,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Active-set sizes for t <= max-t and covering partitions inside [1, partition-max].
    Gc {
        #[arg(long = "max-t")]
        max_t: u64,
        /// Defaults to min(max-t, 2048).
        #[arg(long = "partition-max")]
        partition_max: Option<u64>,
    },
}

#[derive(Subcommand)]
enum EnvCommand {
    /// Build the environment described by the flags and write it to PATH.
    Export {
        path: PathBuf,
        #[command(flatten)]
        run: Box<RunArgs>,
    },
    /// Validate an environment file and print its budgets.
    Import { path: PathBuf },
}

/// Flags shared by every command that builds a run configuration.
#[derive(Args, Clone, Default)]
struct RunArgs {
    /// `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// tewa | bob-tewa
    #[arg(long)]
    algo: Option<String>,
    /// switching | drift | path | hard | hard-path
    #[arg(long)]
    env: Option<String>,
    /// quadratic | capped-abs
    #[arg(long)]
    family: Option<String>,
    /// ball | cube
    #[arg(long)]
    domain: Option<String>,
    #[arg(long = "T")]
    horizon: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    sigma: Option<String>,
    /// Explicit interval length.
    #[arg(long = "B")]
    b: Option<u64>,
    /// Switch budget used for tuning (and for the environment unless env.S is set).
    #[arg(long = "S")]
    s: Option<u64>,
    #[arg(long = "Delta")]
    delta: Option<String>,
    #[arg(long = "P")]
    p: Option<String>,
    /// convex | sc
    #[arg(long)]
    curvature: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// static | minimizers
    #[arg(long)]
    comparator: Option<String>,
    /// Any configuration key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, String> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let pairs = parse_config_text(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            apply_overrides(&mut c, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).map_err(|e| e.to_string())?;
        }
        let numbers = [
            ("T", self.horizon.map(|v| v.to_string())),
            ("d", self.d.map(|v| v.to_string())),
            ("algo.B", self.b.map(|v| v.to_string())),
            ("algo.S", self.s.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        let texts = [
            ("algo", &self.algo),
            ("env", &self.env),
            ("env.family", &self.family),
            ("env.domain", &self.domain),
            ("sigma", &self.sigma),
            ("algo.Delta", &self.delta),
            ("algo.P", &self.p),
            ("algo.curvature", &self.curvature),
            ("comparator", &self.comparator),
        ];
        for (k, v) in numbers.iter().map(|(k, v)| (*k, v.clone())).chain(texts.iter().map(|(k, v)| (*k, (*v).clone())))
        {
            if let Some(v) = v {
                apply(&mut c, k, &v).map_err(|e| e.to_string())?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
            apply(&mut c, k.trim(), v.trim()).map_err(|e| e.to_string())?;
        }
        Ok(c)
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) if p != Path::new("-") => emit::write_text(p, text).map_err(|e| e.to_string()),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Run { run, out, summary } => {
            let config = run.config()?;
            let result = harness::run(&config).map_err(|e| e.to_string())?;
            let csv = emit::csv_string(&result.trace);
            write_or_print(out.as_deref(), &csv)?;
            let summary_path =
                summary.or_else(|| out.filter(|p| p != Path::new("-")).map(|p| p.with_extension("json")));
            if let Some(p) = summary_path {
                emit::write_summary(&result, &p).map_err(|e| e.to_string())?;
            }
            eprintln!(
                "T={} final dynamic regret {:.6}, comparator regret {:.6}",
                config.horizon,
                result.trace.final_regret_dyn(),
                result.trace.final_regret_comp()
            );
            Ok(true)
        }
        Command::Sweep { run, horizons, seeds, out } => {
            let config = run.config()?;
            let seed_list: Vec<u64> = (0..seeds).map(|k| config.seed + k).collect();
            let result = sweep(&config, &horizons, &seed_list, threads_from_env()).map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&result).map_err(|e| e.to_string())? + "\n";
            write_or_print(out.as_deref(), &json)?;
            eprintln!("slope {:.4}, r^2 {:.4}", result.fit.slope, result.fit.r_squared);
            Ok(true)
        }
        Command::Check { what: CheckCommand::Gc { max_t, partition_max } } => {
            let pmax = partition_max.unwrap_or(max_t.min(2048));
            let audit = schedule::audit(max_t, pmax);
            println!("{}", serde_json::to_string_pretty(&audit).map_err(|e| e.to_string())?);
            Ok(audit.violations.is_empty())
        }
        Command::Env { what: EnvCommand::Export { path, run } } => {
            let config = run.config()?;
            let env = build_env(&config).map_err(|e| e.to_string())?;
            env_io::export(&env, &path).map_err(|e| e.to_string())?;
            eprintln!("wrote {} segments to {}", env.segments.len(), path.display());
            Ok(true)
        }
        Command::Env { what: EnvCommand::Import { path } } => {
            let env = env_io::import(&path).map_err(|e| e.to_string())?;
            let report = serde_json::json!({
                "kind": env.kind.name(),
                "T": env.horizon,
                "d": env.d,
                "segments": env.segments.len(),
                "declared": env.declared,
                "realized": realized_budgets(&env),
            });
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
