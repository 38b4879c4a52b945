use std::process::ExitCode;

use clap::Parser;
use v2v_fading::commands::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.common.log_level).format_timestamp(None).init();
    let outcome = run(&cli, &mut std::io::stdout().lock());
    if let Err(e) = &outcome {
        log::error!("{e}");
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
