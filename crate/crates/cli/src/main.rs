mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use commands::{CliError, Command, Output};
use config::Config;

/// Kirchhoff plate with delayed boundary feedback: experiment driver.
///
/// Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "platelab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs and the run manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads, 0 = automatic. Falls back to PLATELAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("PLATELAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| {
            CliError::Config(format!(
                "PLATELAB_THREADS='{v}' is not a nonnegative integer"
            ))
        }),
        _ => Ok(0),
    }
}

fn manifest(args: &Args, cfg: &Config, threads: usize, seconds: f64, files: &[String]) -> String {
    let mut m =
        String::from("# platelab run manifest; pass it back with --config to reproduce the CSVs\n");
    m += &format!("manifest.version = {}\n", env!("CARGO_PKG_VERSION"));
    m += &format!("manifest.command = {}\n", args.command.name());
    m += &format!("manifest.threads = {threads}\n");
    m += &format!("manifest.wall_time_s = {seconds:.3}\n");
    m += &format!("manifest.outputs = [{}]\n", files.join(", "));
    m += &cfg.echo();
    m
}

fn run(args: &Args) -> Result<(), CliError> {
    let threads = thread_count(args.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Io(format!("cannot start thread pool: {e}")))?;
    let cfg = Config::load(&args.config)?;
    std::fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Io(format!(
            "cannot create output directory {}: {e}",
            args.out.display()
        ))
    })?;
    let start = Instant::now();
    let mut out = Output {
        dir: &args.out,
        files: Vec::new(),
    };
    commands::run(args.command, &cfg, &mut out)?;
    let text = manifest(
        args,
        &cfg,
        rayon::current_num_threads(),
        start.elapsed().as_secs_f64(),
        &out.files,
    );
    let path = args.out.join("manifest.txt");
    std::fs::write(&path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("platelab {}: {e}", args.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
