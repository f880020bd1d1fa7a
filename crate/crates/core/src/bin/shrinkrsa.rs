use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use shrinking_rsa::config::{Figure, RunConfig};
use shrinking_rsa::execute::execute;

/// Environment variable that overrides the output directory.
const OUT_ENV: &str = "SHRINKRSA_OUT";

#[derive(Parser)]
#[command(name = "shrinkrsa", version, about = "Random sequential adsorption of shrinking segments and disks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo deposition of segments on a line.
    Sim1d(Common),
    /// Monte Carlo deposition of disks on a square.
    Sim2d(Common),
    /// Deterministic gap-density solver.
    Kinetics(Common),
    /// Exact solution for segments of constant length.
    Exact(Common),
    /// Fit peak heights against ln t.
    Analyze {
        /// A `peaks.csv` file or the directory holding it.
        input: Option<PathBuf>,
        /// Earliest snapshot time included in the fit.
        #[arg(long)]
        t_min: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a figure preset.
    Figure {
        /// One of fig2..fig7.
        name: Figure,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; required here or in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Smaller boxes and replica counts.
    #[arg(long)]
    desk_scale: bool,
}

fn build_config(mode: &str, common: &Common, extra: Map<String, Value>) -> Result<RunConfig, String> {
    let mut doc = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            match serde_json::from_str::<Value>(&text).map_err(|e| format!("{}: {e}", path.display()))? {
                Value::Object(m) => m,
                _ => return Err(format!("{}: expected a JSON object", path.display())),
            }
        }
        None => Map::new(),
    };
    if let Some(Value::String(m)) = doc.get("mode") {
        if m != mode {
            return Err(format!("config mode `{m}` does not match subcommand `{mode}`"));
        }
    }
    doc.insert("mode".into(), json!(mode));
    if let Some(seed) = common.seed {
        doc.insert("seed".into(), json!(seed));
    }
    if let Some(threads) = common.threads {
        doc.insert("threads".into(), json!(threads));
    }
    if let Some(out) = &common.out {
        doc.insert("out_dir".into(), json!(out));
    }
    if common.desk_scale {
        doc.insert("desk_scale".into(), json!(true));
    }
    for (k, v) in extra {
        if k == "analysis" {
            let entry = doc.entry("analysis").or_insert_with(|| json!({}));
            if let (Some(dst), Value::Object(src)) = (entry.as_object_mut(), v) {
                dst.extend(src);
            }
        } else {
            doc.insert(k, v);
        }
    }
    RunConfig::from_json(&Value::Object(doc).to_string()).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (mode, common, extra) = match &cli.command {
        Command::Sim1d(c) => ("sim1d", c, Map::new()),
        Command::Sim2d(c) => ("sim2d", c, Map::new()),
        Command::Kinetics(c) => ("kinetics", c, Map::new()),
        Command::Exact(c) => ("exact", c, Map::new()),
        Command::Analyze { input, t_min, common } => {
            let mut analysis = Map::new();
            if let Some(p) = input {
                analysis.insert("input".into(), json!(p));
            }
            if let Some(t) = t_min {
                analysis.insert("t_min".into(), json!(t));
            }
            let mut extra = Map::new();
            extra.insert("analysis".into(), Value::Object(analysis));
            ("analyze", common, extra)
        }
        Command::Figure { name, common } => {
            let mut extra = Map::new();
            extra.insert("figure".into(), json!(name));
            ("figure", common, extra)
        }
    };
    let config = match build_config(mode, common, extra) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&config) {
        Ok(manifest) => {
            println!(
                "wrote {} files to {} in {:.1} s",
                manifest.files.len() + 1,
                config.out_dir.display(),
                manifest.wall_time_seconds
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
