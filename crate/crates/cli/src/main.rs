use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cheeger_core::harness::{self, ExperimentConfig, ExperimentId, ReportFormat, Status};
use cheeger_core::riccati::{self, ComparisonParams, RhoSide, DEFAULT_BLOW_UP_CAP};
use cheeger_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "cheeger-lab",
    version,
    about = "Numerical checks of Cheeger and Buser type inequalities"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<ReportFormat>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,

    /// Also write the generated meshes as OFF files.
    #[arg(long, global = true)]
    export_meshes: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Closed form against the RK4 oracle, or a single evaluation.
    Riccati {
        #[command(subcommand)]
        action: Option<RiccatiAction>,
    },
    /// First eigenvalue and sweep cut on the reference meshes.
    Spectral {
        /// Additional OFF mesh to measure; repeatable.
        #[arg(long = "mesh")]
        meshes: Vec<PathBuf>,
    },
    /// Lower Cheeger bound on random weighted graphs.
    Cheeger,
    /// Upper bound on dumbbells of varying neck width.
    VerifyBuser,
    /// Local isoperimetric ratios near the interface.
    Lemma31,
    /// Tube volume profiles around the interface.
    Tube,
    /// Boundary constant on the disk and the hemisphere.
    Prop25,
    /// Every experiment listed in the configuration.
    Suite,
}

#[derive(Subcommand)]
enum RiccatiAction {
    /// Prints ψ(t), the existence time and the envelopes as JSON.
    Eval {
        #[arg(long)]
        n: usize,
        #[arg(long = "K")]
        k: f64,
        #[arg(long = "H", allow_hyphen_values = true)]
        h: f64,
        #[arg(long)]
        t: f64,
        /// Also integrate with RK4 up to `t`.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidParams(_) => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            })
        }
    }
}

fn run(cli: Cli) -> cheeger_core::Result<ExitCode> {
    let experiment = match cli.command {
        Command::Riccati {
            action:
                Some(RiccatiAction::Eval {
                    n,
                    k,
                    h,
                    t,
                    oracle,
                    step,
                }),
        } => return eval_riccati(n, k, h, t, oracle.then_some(step)),
        Command::Riccati { action: None } => Some(ExperimentId::Riccati),
        Command::Spectral { .. } => Some(ExperimentId::Spectral),
        Command::Cheeger => Some(ExperimentId::CheegerBound),
        Command::VerifyBuser => Some(ExperimentId::Buser),
        Command::Lemma31 => Some(ExperimentId::Lemma31),
        Command::Tube => Some(ExperimentId::Tube),
        Command::Prop25 => Some(ExperimentId::Prop25),
        Command::Suite => None,
    };
    let mut config = load_config(&cli.global)?;
    if let Some(id) = experiment {
        config.experiments = vec![id];
    }
    if let Command::Spectral { meshes } = cli.command {
        config.spectral.meshes.extend(meshes);
    }

    let out = harness::run_suite(&config)?;
    let written = harness::write_outputs(&out, &config.output)?;
    for e in &out.report.experiments {
        let failed: Vec<&str> = e.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        match e.status {
            Status::Pass => println!("{:<14} pass  ({} checks)", e.id.name(), e.checks.len()),
            Status::Fail => println!("{:<14} FAIL  {}", e.id.name(), failed.join(", ")),
            Status::Error => println!("{:<14} ERROR {}", e.id.name(), e.error.as_deref().unwrap_or("")),
        }
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    if out.timings.over_budget {
        eprintln!(
            "warning: suite took {:.1} s, over the {:.0} s budget",
            out.timings.total_seconds, out.timings.budget_seconds
        );
    }
    Ok(if out.report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    })
}

fn load_config(g: &GlobalArgs) -> cheeger_core::Result<ExperimentConfig> {
    let mut config = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if let Some(dir) = &g.out_dir {
        config.output.dir = dir.clone();
    }
    if let Some(format) = g.format {
        config.output.format = format;
    }
    config.output.svg |= g.svg;
    config.output.export_meshes |= g.export_meshes;
    Ok(config)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn eval_riccati(n: usize, k: f64, h: f64, t: f64, oracle_step: Option<f64>) -> cheeger_core::Result<ExitCode> {
    let params = ComparisonParams::new(n, k, h)?;
    if !(0.0..f64::INFINITY).contains(&t) {
        return Err(Error::InvalidParams(format!("t = {t} must be finite and >= 0")));
    }
    let t_max = riccati::max_existence_time(&params)?;
    let psi = match riccati::psi_closed_form(&params, t) {
        Ok(v) => Some(v),
        Err(Error::OutsideExistence { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut out = json!({
        "n": n,
        "K": k,
        "H": h,
        "t": t,
        "psi": psi,
        "T": finite(t_max),
        "T_infinite": t_max.is_infinite(),
        "equilibrium": params.equilibrium(),
        "envelope_nonnegative_rho": riccati::psi_upper_bound(&params, RhoSide::NonnegativeRho)?,
        "envelope_nonpositive_rho": riccati::psi_upper_bound(&params, RhoSide::NonpositiveRho)?,
    });
    if let Some(step) = oracle_step {
        let traj = riccati::integrate_riccati_capped(&params, t, step, DEFAULT_BLOW_UP_CAP)?;
        let value = traj.values.last().copied().filter(|_| traj.blow_up.is_none());
        out["oracle"] = json!({
            "method": "rk4",
            "step": step,
            "psi": value,
            "t": traj.last_time(),
            "blow_up": traj.blow_up,
            "abs_error": value.zip(psi).map(|(a, b)| (a - b).abs()),
        });
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}
