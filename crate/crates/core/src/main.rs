use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use ivd::cli::{execute, exit_code, render_human, Cli, EXIT_RUNTIME};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match execute(&cli).context("command failed") {
        Ok(summary) => {
            if cli.json_logs {
                println!("{summary}");
            } else {
                println!("{}", render_human(&summary));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = e.downcast_ref::<ivd::Error>().map_or(EXIT_RUNTIME, exit_code);
            if cli.json_logs {
                println!("{}", serde_json::json!({"error": format!("{e:#}"), "exit_code": code}));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(code as u8)
        }
    }
}
