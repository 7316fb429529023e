mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Map, Value};

use config::{Command, Reader, COMMANDS};
use error::CliError;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "critprobe", version, about = "Probe metrology near a dissipative Ising critical point")]
struct Args {
    /// One of: single-qubit-dynamics, sse-check, two-qubit-qfi, optimize,
    /// ising-scan, h-scan, size-scan, delta-g, gap.
    command: String,
    /// TOML or JSON configuration; a previous run's JSON sidecar also works.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for `<command>.csv` and `<command>.json`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for scans (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config `seed` (sse-check only).
    #[arg(long)]
    seed: Option<u64>,
    /// With `optimize`: reproduce the optimal-time table for the Ising probe.
    #[arg(long)]
    table1: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {detail}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let cmd = Command::parse(&args.command).ok_or_else(|| {
        let names: Vec<_> = COMMANDS.iter().map(|c| c.name()).collect();
        CliError::Usage(format!("unknown command {:?} (expected one of {})", args.command, names.join(", ")))
    })?;
    if args.table1 && cmd != Command::Optimize {
        return Err(CliError::Usage("--table1 only applies to `optimize`".into()));
    }
    if args.seed.is_some() && cmd != Command::SseCheck {
        return Err(CliError::Usage("--seed only applies to `sse-check`".into()));
    }

    let mut map = match &args.config {
        Some(path) => config::load_file(path)?,
        None if args.table1 => {
            let mut m = Map::new();
            m.insert("command".into(), json!(cmd.name()));
            m
        }
        None => return Err(CliError::Usage(format!("`{}` needs --config <file>", cmd.name()))),
    };
    if let Some(seed) = args.seed {
        map.insert("seed".into(), json!(seed));
    }
    let mut reader = Reader::new(map);
    match reader.command() {
        Some(c) if c != cmd => {
            return Err(CliError::Validation(vec![format!(
                "config is for `{}` but the command line asks for `{}`",
                c.name(),
                cmd.name()
            )]))
        }
        Some(_) => {}
        None => return Err(reader.finish().expect_err("command() recorded an error")),
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    // a second build only fails if a pool already exists
    let _ = pool.build_global();
    critprobe_core::use_sequential_kernels();

    let start = Instant::now();
    let out = commands::execute(cmd, &mut reader, args.table1)?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    let sidecar = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "critprobe",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "table1": args.table1,
        "config": Value::Object(reader.resolved().clone()),
        "defaults_applied": reader.defaults(),
        "units": out.units,
        "t_opt": out.t_opt,
        "csv_columns": out.table.header,
        "results": out.results,
        "wall_time_s": wall,
    });
    let json_text = serde_json::to_string_pretty(&sidecar).expect("sidecar is plain JSON") + "\n";
    output::write_atomic(&path(&args.out, &out.stem, "csv"), &out.table.to_csv())?;
    output::write_atomic(&path(&args.out, &out.stem, "json"), &json_text)?;
    Ok(())
}

fn path(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    dir.join(format!("{stem}.{ext}"))
}
