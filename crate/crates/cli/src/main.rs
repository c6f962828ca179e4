use std::path::PathBuf;
use std::process::ExitCode;

use plurigreen_cli::config::{self, Command};
use plurigreen_cli::{runner, thread_count};

fn usage() -> String {
    "usage: plurigreen <green|torus|ray|blowup|verify> --config <path> [--out <dir>] [--seed <u64>]"
        .to_string()
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match real_main(&args) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("{}", usage());
            ExitCode::from(2)
        }
    }
}

fn real_main(args: &[String]) -> Result<u8, String> {
    if args.is_empty() {
        return Err("missing command".into());
    }
    let command = Command::parse(&args[0]).ok_or_else(|| format!("unknown command {:?}", args[0]))?;
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut seed: Option<u64> = None;
    let mut i = 1;
    while i < args.len() {
        match args[i].as_str() {
            "--config" => {
                i += 1;
                config_path = Some(PathBuf::from(args.get(i).ok_or("--config needs a path")?));
            }
            "--out" => {
                i += 1;
                out_dir = Some(PathBuf::from(args.get(i).ok_or("--out needs a directory")?));
            }
            "--seed" => {
                i += 1;
                seed = Some(
                    args.get(i)
                        .ok_or("--seed needs an integer")?
                        .parse::<u64>()
                        .map_err(|e| format!("bad seed: {e}"))?,
                );
            }
            other => return Err(format!("unknown argument {other:?}")),
        }
        i += 1;
    }
    // the thread override must be sane before any work starts
    let _threads = thread_count().map_err(|e| e)?;
    let path = config_path.ok_or("missing --config")?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg = match config::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Ok(2);
        }
    };
    if cfg.command != command {
        eprintln!(
            "error: config declares command {} but the command line says {}",
            cfg.command.name(),
            command.name()
        );
        return Ok(2);
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let code = runner::run(&cfg, out_dir.as_deref());
    Ok(code.clamp(0, 255) as u8)
}
