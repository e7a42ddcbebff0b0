use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wave_uc::harness::{
    gcc_query, run_contrast_sweep, run_refinement_sweep, run_single, ErrorColumn, ErrorRegionKind, OmegaKind,
    RunConfig, SolutionKind, SweepResult, SweepRow, TimeRule,
};

/// Space-time unique continuation for the wave equation.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and print its errors.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Refinement study over a range of levels.
    SweepH {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Levels, e.g. `1,2,3,4`.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        levels: Vec<u32>,
        /// Polynomial orders (k = q); defaults to the configured k, q.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
    },
    /// Contrast study at fixed level.
    SweepContrast {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Values of c1, e.g. `1,1.5,2`.
        #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,2.5,3,3.5,4,4.5")]
        contrasts: Vec<f64>,
    },
    /// Travel-time threshold for the configured speed and data domain.
    Gcc {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

/// Config file plus per-key overrides.
#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long, value_enum)]
    solution: Option<SolutionKind>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
    #[arg(long)]
    w1: Option<f64>,
    #[arg(long, value_enum)]
    omega: Option<OmegaKind>,
    /// Data intervals as `a:b,c:d`.
    #[arg(long, value_delimiter = ',', value_parser = parse_interval)]
    omega_intervals: Option<Vec<[f64; 2]>>,
    #[arg(long, value_enum)]
    error_region: Option<ErrorRegionKind>,
    #[arg(long)]
    final_time: Option<f64>,
    #[arg(long, value_enum)]
    time_rule: Option<TimeRule>,
    #[arg(long)]
    time_margin: Option<f64>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    k_dual: Option<usize>,
    #[arg(long)]
    q_dual: Option<usize>,
    #[arg(long)]
    dt_factor: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    slabs: Option<usize>,
    #[arg(long)]
    eval_time: Option<f64>,
    #[arg(long)]
    weight_data: Option<f64>,
    #[arg(long)]
    weight_flux_jump: Option<f64>,
    #[arg(long)]
    weight_least_squares: Option<f64>,
    #[arg(long)]
    weight_velocity: Option<f64>,
    #[arg(long)]
    weight_boundary: Option<f64>,
    #[arg(long)]
    weight_time_jump: Option<f64>,
    #[arg(long)]
    weight_dual: Option<f64>,
    /// CSV output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_interval(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok([p(a)?, p(b)?])
}

macro_rules! apply {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $(if let Some(v) = $args.$field { $cfg.$field = v; })*
    };
}

impl ConfigArgs {
    fn resolve(self) -> wave_uc::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let a = self;
        let intervals_only = a.omega_intervals.is_some() && a.omega.is_none();
        apply!(
            c, a, dimension, solution, c1, c2, p1, n, w1, omega, omega_intervals, error_region, final_time,
            time_rule, time_margin, level, k, q, dt_factor, weight_data, weight_flux_jump, weight_least_squares,
            weight_velocity, weight_boundary, weight_time_jump, weight_dual
        );
        if intervals_only {
            c.omega = OmegaKind::Intervals;
        }
        c.k_dual = a.k_dual.or(c.k_dual);
        c.q_dual = a.q_dual.or(c.q_dual);
        c.dt = a.dt.or(c.dt);
        c.slabs = a.slabs.or(c.slabs);
        c.eval_time = a.eval_time.or(c.eval_time);
        c.output = a.output.or(c.output);
        c.validate()?;
        Ok(c)
    }
}

fn report(result: &SweepResult, cfg: &RunConfig) -> wave_uc::Result<()> {
    print!("{}", result.summary());
    if let Some(path) = &cfg.output {
        result.write(path, cfg)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> wave_uc::Result<()> {
    match cli.command {
        Command::Run { cfg } => {
            let cfg = cfg.resolve()?;
            let o = run_single(&cfg)?;
            let r = &o.report;
            println!("unknowns {} slabs {} final time {}", o.unknowns, o.n_slabs, o.final_time);
            println!("{} {:.6e}", ErrorColumn::LinftyL2U.name(), r.linfty_l2_u);
            println!("{} {:.6e}", ErrorColumn::L2L2Ut.name(), r.l2_l2_ut);
            println!("{} {:.6e}", ErrorColumn::BestLinftyL2U.name(), r.best_linfty_l2_u);
            println!("{} {:.6e}", ErrorColumn::BestL2L2Ut.name(), r.best_l2_l2_ut);
            println!("t0-L2-error-u {:.6e}", r.t0_l2);
            let tn = r.tnorm.sqrt();
            println!(
                "tnorm parts: stabilizer {:.3e} time-jump {:.3e} data {:.3e} dual {:.3e}",
                tn.primal_stabilizer, tn.time_jump, tn.data, tn.dual
            );
            println!("residual {:.3e}", r.residual);
            if let (Some(t), Some(e)) = (cfg.eval_time, o.relative_l2_at) {
                println!("relative L2 error of u at t={t}: {e:.6e}");
            }
            if cfg.output.is_some() {
                report(&SweepResult { rows: vec![SweepRow::from_outcome(o)] }, &cfg)?;
            }
        }
        Command::SweepH { cfg, levels, orders } => {
            let cfg = cfg.resolve()?;
            report(&run_refinement_sweep(&cfg, &levels, &orders)?, &cfg)?;
        }
        Command::SweepContrast { cfg, contrasts } => {
            let cfg = cfg.resolve()?;
            let res = run_contrast_sweep(&cfg, &contrasts)?;
            report(&res, &cfg)?;
            if res.rows.len() > 1 {
                for col in ErrorColumn::ALL {
                    println!("slope of log {} vs log c1: {:.3}", col.name(), res.contrast_slope(col)?);
                }
            }
        }
        Command::Gcc { cfg } => {
            let cfg = cfg.resolve()?;
            println!("{:.12}", gcc_query(&cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wave-uc: {e}");
            ExitCode::FAILURE
        }
    }
}
