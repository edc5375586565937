mod args;
mod commands;
mod kola;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{confid, copula, model, monitor, synth, usage, CmdResult, Ctx, Failure};

const THREADS_VAR: &str = "HJORTIC_THREADS";

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_VAR}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Run(e.into()))
}

fn dispatch(cli: &Cli) -> CmdResult {
    let ctx = Ctx {
        out: cli.out.clone(),
        seed: cli.seed,
    };
    match &cli.command {
        Command::Fit(a) => model::run_fit(a, &ctx),
        Command::Forecast(a) => model::run_forecast(a, &ctx),
        Command::Select(a) => model::run_select(a, &ctx),
        Command::Fic(a) => model::run_fic(a, &ctx),
        Command::Reconstruct(a) => model::run_reconstruct(a, &ctx),
        Command::Monitor(a) => monitor::run_monitor(a, &ctx),
        Command::Bridge(a) => monitor::run_bridge(a, &ctx),
        Command::Adf(a) => monitor::run_adf(a, &ctx),
        Command::Rollsd(a) => monitor::run_rollsd(a, &ctx),
        Command::Tvar(a) => monitor::run_tvar(a, &ctx),
        Command::Combine(a) => confid::run_combine(a, &ctx),
        Command::Copula(c) => copula::run(c, &ctx),
        Command::KolaWinter(a) => synth::run_kola(a, &ctx),
        Command::Synth(a) => synth::run_synth(a, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let result = configure_threads().and_then(|()| dispatch(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hjortic: {f}");
            match f {
                Failure::Usage(_) => ExitCode::from(2),
                Failure::Run(_) => ExitCode::from(1),
            }
        }
    }
}
