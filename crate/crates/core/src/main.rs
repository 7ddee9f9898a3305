use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use shocklayer::experiments::{
    self, sweep_summary_json, write_run_outputs, write_sweep_csv, CaseConfig, SWEEP_RESOLUTION,
};
use shocklayer::profile::solve_profile;
use shocklayer::{FluxModel, ShockPair};

#[derive(Parser)]
#[command(
    name = "shocklayer",
    about = "Viscous shock layers for convex scalar conservation laws: \
             steady profiles, weighted-entropy time series, and vanishing-viscosity sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the steady traveling-wave profile and emit it as (x, s) CSV
    Profile(ProfileArgs),
    /// Run one configured case and write series/snapshot/summary files
    Evolve(EvolveArgs),
    /// Run a viscosity sweep off one base config and fit the decay rate
    Sweep(SweepArgs),
    /// Print an example case config as JSON
    Example,
}

#[derive(Args)]
struct ProfileArgs {
    /// Flux key: burgers | exponential | quartic
    #[arg(long, default_value = "burgers")]
    flux: String,
    /// Left end state (must exceed the right one)
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c_left: f64,
    /// Right end state
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    c_right: f64,
    /// Interpolation error budget for the stored profile
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Truncate the table to |x| <= this (default: natural extent)
    #[arg(long)]
    half_width: Option<f64>,
    /// Number of evaluation rows in the CSV
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    /// Case config JSON path
    #[arg(long)]
    config: PathBuf,
    /// Output directory for {label}_series.csv, {label}_final.csv, {label}_summary.json
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Base case config JSON path (epsilon and n_cells are overridden per point)
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated decreasing viscosities, e.g. 0.04,0.02,0.01,0.005
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Cells per viscosity length: dx = eps / resolution
    #[arg(long, default_value_t = SWEEP_RESOLUTION)]
    resolution: f64,
    /// Rerun this epsilon at half dx and report the slope shift
    #[arg(long)]
    refine: Option<f64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Skip writing per-case series files, keep only the sweep summary
    #[arg(long)]
    summary_only: bool,
}

fn run_profile(args: &ProfileArgs) -> shocklayer::Result<()> {
    let flux = FluxModel::from_key(&args.flux)?;
    let shock = ShockPair::new(args.c_left, args.c_right);
    let profile = solve_profile(&flux, &shock, args.tol, args.half_width)?;
    let (x_lo, x_hi) = profile.x_range();
    let n = args.samples.max(2);
    let mut rows = String::new();
    rows.push_str(&format!(
        "# flux={} c_left={} c_right={} sigma={} knots={} tol={:e}\n",
        args.flux,
        args.c_left,
        args.c_right,
        profile.sigma,
        profile.knot_count(),
        args.tol
    ));
    rows.push_str("x,s\n");
    for i in 0..n {
        let x = x_lo + (x_hi - x_lo) * i as f64 / (n - 1) as f64;
        rows.push_str(&format!("{:e},{:e}\n", x, profile.eval(x)));
    }
    match &args.out {
        Some(path) => std::fs::write(path, rows)?,
        None => std::io::stdout().write_all(rows.as_bytes())?,
    }
    Ok(())
}

fn run_evolve(args: &EvolveArgs) -> shocklayer::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = CaseConfig::from_json(&text)?;
    let result = experiments::run_case(&cfg)?;
    let stem = write_run_outputs(&result, &cfg, &args.out)?;
    eprintln!(
        "wrote {}/{{{stem}_series.csv,{stem}_final.csv,{stem}_summary.json}}",
        args.out.display()
    );
    println!("{:#}", experiments::summary_json(&result));
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> shocklayer::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = CaseConfig::from_json(&text)?;
    let per_case_dir = if args.summary_only {
        None
    } else {
        Some(args.out.as_path())
    };
    let report = experiments::sweep(&cfg, &args.eps, args.resolution, args.refine, per_case_dir)?;
    std::fs::create_dir_all(&args.out)?;
    let stem = cfg.safe_label();
    let mut f = std::fs::File::create(args.out.join(format!("{stem}_sweep.csv")))?;
    write_sweep_csv(&mut f, &report)?;
    let summary = sweep_summary_json(&report);
    std::fs::write(
        args.out.join(format!("{stem}_sweep.json")),
        format!("{:#}\n", summary),
    )?;
    println!("{:#}", summary);
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Profile(args) => run_profile(args),
        Command::Evolve(args) => run_evolve(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Example => {
            println!("{}", CaseConfig::example().to_json());
            Ok(())
        }
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
