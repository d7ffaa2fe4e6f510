use std::process::ExitCode;

use mrf_bench::cli::{self, Command};
use mrf_bench::{dump_grid, run_grid};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match cli::parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => match e.downcast::<clap::Error>() {
            Ok(clap_err) => clap_err.exit(),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Run(args) => {
            if let Some(threads) = args.threads {
                rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
            }
            let grid = args.grid_config();
            let records = run_grid(&grid, &args.out)?;
            let failed = records.iter().filter(|r| !r.is_ok()).count();
            eprintln!(
                "wrote {} rows to {} ({} failed)",
                records.len(),
                args.out.display(),
                failed
            );
            Ok(failed == 0)
        }
        Command::Datagen(args) => {
            let paths = dump_grid(&args.grid_config(), &args.out_dir)?;
            eprintln!("wrote {} datasets to {}", paths.len(), args.out_dir.display());
            Ok(true)
        }
    }
}
