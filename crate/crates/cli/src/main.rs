use std::process::ExitCode;

use clap::Parser;

use fts_bands_cli::args::{Cli, Command};
use fts_bands_cli::{commands, format::number, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze(args) => {
            let cfg = args.resolve()?;
            let out = commands::analyze(&cfg)?;
            let a = &out.analysis;
            println!("cycles: {}, grid points: {}", out.data.series.len(), out.data.series.grid_len());
            println!("change points (cycle): {:?}", a.change_points.indices);
            println!("delta: {}, relevant segments: {:?}", number(a.relevant.delta), a.relevant.indices);
            println!("quantile q* (level {}): {}", number(a.bootstrap.level), number(a.bands.quantile));
            println!("wrote {}", out.artifacts.changepoints.display());
            println!("wrote {}", out.artifacts.bands.display());
            println!("wrote {}", out.artifacts.diagnostics.display());
        }
        Command::Simulate(args) => {
            let mut spec = commands::load_scenario(&args.scenario)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            for path in commands::simulate(&spec, &args.output)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Coverage(args) => {
            let cfg = args.resolve()?;
            let mut spec = commands::load_scenario(&args.scenario)?;
            if let Some(seed) = args.scenario_seed {
                spec.seed = seed;
            }
            let r = commands::coverage(&spec, &cfg, args.monte_carlo, args.output.as_deref())?;
            println!("replications: {} ({} failed)", r.replications, r.failures);
            println!("coverage: {}", number(r.coverage));
            println!("mean half-width: {}", number(r.mean_half_width));
            println!("m_hat = m rate: {}", number(r.change_count_rate));
            println!("relevant set match rate: {}", number(r.relevant_set_rate));
            println!("mean location error: {}", number(r.mean_location_error));
        }
        Command::Version => {
            println!("ftsbands {}", fts_bands::VERSION);
            println!("rng: {}", fts_bands::rng::ALGORITHM);
        }
    }
    Ok(())
}
