use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nhgwp_cli::run::{run, RunError};
use nhgwp_cli::scenario::{parse_scenario, GridSpec, Mode};

/// Non-Hermitian Gaussian wavepacket dynamics runner.
#[derive(Parser)]
#[command(name = "nhgwp", disable_help_subcommand = true)]
struct Cli {
    /// What to run: gwd, grid, compare, or analytic.
    #[arg(value_parser = ["gwd", "grid", "compare", "analytic"])]
    mode: String,

    /// Scenario file (flat key = value format).
    #[arg(long)]
    scenario: PathBuf,

    /// Output directory (default: $NHGWP_OUT, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the scenario's time step.
    #[arg(long)]
    dt: Option<f64>,

    /// Override the scenario's final time.
    #[arg(long = "t-final")]
    t_final: Option<f64>,

    /// Override the grid point count.
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,

    /// Override the grid box length.
    #[arg(long = "grid-L")]
    grid_l: Option<f64>,
}

fn main() -> ExitCode {
    // 0 success, 1 argument/scenario validation failure, 2 numerical failure.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap reserves exit code 2 for usage errors; this tool uses 1
            // for every validation failure, numerical failures get 2.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mode = Mode::from_name(&cli.mode).expect("mode validated by clap");

    let text = match std::fs::read_to_string(&cli.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("scenario '{}': {e}", cli.scenario.display());
            return ExitCode::from(1);
        }
    };
    let mut scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("scenario '{}': {e}", cli.scenario.display());
            return ExitCode::from(1);
        }
    };

    // Flag overrides beat file values.
    if let Some(dt) = cli.dt {
        scenario.dt = dt;
    }
    if let Some(t_final) = cli.t_final {
        scenario.t_final = t_final;
    }
    if !(scenario.dt > 0.0 && scenario.dt < scenario.t_final) {
        eprintln!("scenario '{}': key 'dt': must be positive and smaller than t_final", cli.scenario.display());
        return ExitCode::from(1);
    }
    if cli.grid_n.is_some() || cli.grid_l.is_some() {
        let g = scenario.grid.get_or_insert_with(GridSpec::default);
        if let Some(n) = cli.grid_n {
            g.n = n;
        }
        if let Some(length) = cli.grid_l {
            g.length = length;
        }
    }

    let out_dir = cli
        .out
        .or_else(|| std::env::var_os("NHGWP_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    match run(mode, &scenario, &out_dir) {
        Ok(report) => {
            println!("mode: {}", report.mode.name());
            println!("gwd steps: {}, grid steps: {}", report.gwd_steps, report.grid_steps);
            println!("wall time: {} ms", report.wall_ms);
            if report.error_flags.is_empty() {
                println!("error_flags: none");
            } else {
                println!("error_flags: {}", report.error_flags.join(", "));
            }
            for (name, value) in &report.metrics {
                println!("{name} = {value:.6e}");
            }
            for path in &report.artifacts {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Numerics(e)) => {
            eprintln!("scenario '{}': numerical failure: {e}", cli.scenario.display());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("scenario '{}': {e}", cli.scenario.display());
            ExitCode::from(1)
        }
    }
}
