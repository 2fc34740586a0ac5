mod args;
mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use manifest::{manifest_path, RunManifest};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

fn parse(argv: Vec<OsString>) -> Result<Cli, ExitCode> {
    let argv = match (config::config_path(&argv), config::subcommand_position(&argv)) {
        (Some(path), Some(pos)) => {
            let sub = argv[pos].to_string_lossy().into_owned();
            match config::config_args(path.as_ref(), &sub) {
                Ok(extra) => config::merge(&argv, pos, extra),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Err(ExitCode::from(EXIT_USAGE));
                }
            }
        }
        _ => argv,
    };
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
            _ => ExitCode::from(EXIT_USAGE),
        }
    })
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        pool = pool.num_threads(jobs);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    };

    let result = pool.install(|| {
        let produced = commands::run(&cli.command, cli.seed)?;
        if let Some(p) = produced {
            RunManifest::new(&cli.command, cli.seed, &p.inputs, &p.outputs)?.write(&manifest_path(&p.primary))?;
        }
        anyhow::Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
