//! `sdi` — spin-dependent-displacement interferometry simulator.
//!
//! Subcommands reproduce the protocol's observables end to end: displaced
//! branch densities, wavepacket dispersion, fringe spacing and visibility
//! laws, field sensitivity, quantum Fisher information audits, and Monte
//! Carlo sensitivity scaling. CSV files are the authoritative output; SVG
//! plots are optional quick-looks.

mod cmds;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sdi_core::{Error, ParamSet};

#[derive(Parser)]
#[command(
    name = "sdi",
    version,
    about = "Spin-dependent-displacement interferometry simulator",
    after_help = "Parameters come from built-in Rb-87-like defaults, overridden by --config \
                  (key=value lines: gamma | gamma_ghz_per_t, k, t_couple, t_free, B, m_p, sigma, x0) \
                  and then by --set KEY=VALUE flags (flags win)."
)]
struct Cli {
    /// Plain-text key=value parameter file, SI units.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Also write SVG quick-look plots.
    #[arg(long, global = true)]
    svg: bool,

    /// Seed for all pseudorandom draws.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Also report the as-published fringe-spacing expression, which carries
    /// a spurious factor of hbar, alongside the dimensionally consistent one.
    #[arg(long = "paper-literal", global = true)]
    paper_literal: bool,

    /// Override a single parameter, e.g. --set B=2e-6 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepVar {
    K,
    T,
    Sigma,
    N,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Classical,
    Quantum,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Branch and total densities for spin-1/2 and spin-1 at a chosen time.
    Snapshot {
        /// Free-evolution time before the snapshot, s.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
    },
    /// Dispersed width sigma_t versus evolution time.
    Disperse {
        #[arg(long = "t-max", default_value_t = 1e-2)]
        t_max: f64,
        #[arg(long, default_value_t = 60)]
        points: usize,
    },
    /// Fringe spacing versus field, with blind-extraction validation columns.
    ///
    /// Each point runs at the interrogation time that pins the branch
    /// separation to --separation-ratio dispersed widths, keeping at least
    /// three fringes inside the envelope at finite visibility.
    Fringes {
        #[arg(long = "b-min", default_value_t = 1e-6)]
        b_min: f64,
        #[arg(long = "b-max", default_value_t = 1e-4)]
        b_max: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long = "separation-ratio", default_value_t = 2.5)]
        separation_ratio: f64,
    },
    /// Visibility versus separation-to-dispersion ratio.
    Visibility {
        #[arg(long = "ratio-max", default_value_t = 3.0)]
        ratio_max: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Field resolution versus coupling constant at fixed phase resolution.
    Sensitivity {
        #[arg(long = "k-min", default_value_t = 1e25)]
        k_min: f64,
        #[arg(long = "k-max", default_value_t = 1e27)]
        k_max: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Fringe-phase resolution delta_phi (dimensionless).
        #[arg(long = "delta-phi", default_value_t = 0.01)]
        delta_phi: f64,
        /// Readout position offset from x0 in units of sigma_t.
        #[arg(long = "x-offset-sigmas", default_value_t = 2.0)]
        x_offset_sigmas: f64,
    },
    /// Quantum Fisher information: published closed forms against the
    /// fidelity-susceptibility oracle, with optional parameter sweeps.
    Qfi {
        #[arg(long = "n-particles", default_value_t = 8)]
        n_particles: u32,
        /// Finite-difference field step for the oracle, T (default: adaptive).
        #[arg(long = "db-step")]
        db_step: Option<f64>,
        /// Experimental: per-particle mean momentum, kg m/s. Nonzero values
        /// let the branch derivatives add coherently across particles.
        #[arg(long = "mean-momentum", default_value_t = 0.0)]
        mean_momentum: f64,
        /// Sweep variable (k | t | sigma | n).
        #[arg(long)]
        sweep: Option<SweepVar>,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long = "sweep-points", default_value_t = 9)]
        sweep_points: usize,
    },
    /// Monte Carlo sensitivity scaling versus particle number.
    ///
    /// Classical rows fit N independent single-particle records per trial;
    /// quantum rows report the closed-form cat-state bounds (the N-body
    /// readout has no defined sampling scheme).
    Scaling {
        #[arg(long = "n-list", default_value = "1,4,16,64", value_delimiter = ',')]
        n_list: Vec<u32>,
        #[arg(long, default_value_t = 2000)]
        shots: u32,
        #[arg(long, default_value_t = 60)]
        trials: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
    },
}

fn load_params(cli: &Cli) -> Result<ParamSet, Error> {
    let mut p = ParamSet::rb87_defaults();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        p.apply_config_str(&text)?;
    }
    for kv in &cli.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        p.apply_kv(key.trim(), value.trim())?;
    }
    p.validate()?;
    Ok(p)
}

/// 2 = configuration/validation problem, 3 = numerical failure.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParam(_)
        | Error::InvalidConfig(_)
        | Error::ZeroField
        | Error::TimeMismatch { .. }
        | Error::DegenerateGeometry => 2,
        Error::GridTooNarrow { .. }
        | Error::Aliasing { .. }
        | Error::NoFringesDetected { .. }
        | Error::NonConvergence(_)
        | Error::BracketMiss
        | Error::UnnormalizedDensity(_)
        | Error::StepTooLarge(_)
        | Error::StepTooSmall(_)
        | Error::NumericalInvariant(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
        {
            eprintln!("error: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let params = match load_params(&cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let ctx = cmds::Ctx {
        params,
        out: cli.out.clone(),
        svg: cli.svg,
        seed: cli.seed,
        paper_literal: cli.paper_literal,
    };
    let result = match &cli.command {
        Command::Snapshot { time } => cmds::snapshot(&ctx, *time),
        Command::Disperse { t_max, points } => cmds::disperse(&ctx, *t_max, *points),
        Command::Fringes {
            b_min,
            b_max,
            points,
            separation_ratio,
        } => cmds::fringes(&ctx, *b_min, *b_max, *points, *separation_ratio),
        Command::Visibility { ratio_max, points } => cmds::visibility(&ctx, *ratio_max, *points),
        Command::Sensitivity {
            k_min,
            k_max,
            points,
            delta_phi,
            x_offset_sigmas,
        } => cmds::sensitivity(&ctx, *k_min, *k_max, *points, *delta_phi, *x_offset_sigmas),
        Command::Qfi {
            n_particles,
            db_step,
            mean_momentum,
            sweep,
            min,
            max,
            sweep_points,
        } => cmds::qfi(
            &ctx,
            *n_particles,
            *db_step,
            *mean_momentum,
            sweep.map(|s| match s {
                SweepVar::K => cmds::Sweep::K,
                SweepVar::T => cmds::Sweep::T,
                SweepVar::Sigma => cmds::Sweep::Sigma,
                SweepVar::N => cmds::Sweep::N,
            }),
            *min,
            *max,
            *sweep_points,
        ),
        Command::Scaling {
            n_list,
            shots,
            trials,
            mode,
        } => {
            let modes: &[sdi_core::estimation::ScalingMode] = match mode {
                ModeArg::Classical => &[sdi_core::estimation::ScalingMode::Classical],
                ModeArg::Quantum => &[sdi_core::estimation::ScalingMode::Quantum],
                ModeArg::Both => &[
                    sdi_core::estimation::ScalingMode::Classical,
                    sdi_core::estimation::ScalingMode::Quantum,
                ],
            };
            cmds::scaling(&ctx, n_list, *shots, *trials, modes)
        }
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
