use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use plurikit_cli::commands::{self, exit_code, COMMANDS};
use plurikit_cli::config::RunConfig;

/// Lelong mass profiles, slices and growth orders of positive currents.
#[derive(Parser, Debug)]
#[command(name = "plurikit", version)]
struct Cli {
    /// One of: profile, slice, order, chi, crofton, theorem1, ratios,
    /// directional, survey, plot.
    command: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage() -> String {
    Cli::command().render_help().to_string()
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("plurikit: {msg}");
    if code == 1 {
        eprintln!("\n{}", usage());
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if !COMMANDS.contains(&cli.command.as_str()) {
        return fail(1, &format!("unknown command '{}'", cli.command));
    }
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => return fail(1, &e.to_string()),
    };
    if let Some(s) = cli.seed {
        cfg.mc.seed = s;
    }
    if let Some(b) = cli.budget {
        cfg.mc.budget = b;
    }
    if let (Some(f), Some(g)) = (cli.frames, cfg.grassmannian.as_mut()) {
        g.frames = f;
    }
    if let Err(e) = cfg.validate() {
        return fail(1, &e.to_string());
    }
    let Some(out) = cli.out.clone().or_else(|| cfg.out.clone()) else {
        return fail(1, "no output directory: pass --out or set out in the config");
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(1, "--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(2, &e.to_string());
        }
    }
    match commands::run(&cli.command, &cfg, &out) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => {
            eprintln!("plurikit: more than half of the frames are degenerate");
            ExitCode::from(code as u8)
        }
        Err(e) => fail(exit_code(&e) as u8, &e.to_string()),
    }
}
