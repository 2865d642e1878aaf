//! Command-line front end: angle scans, spectra, 2-D maps, figure recipes,
//! and the validation runner, with CSV output and an optional JSON mirror.
//!
//! Exit codes: 0 ok, 1 usage or runtime failure, 2 invalid configuration,
//! 3 validation failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use omit_ep::output;
use omit_ep::params::{Config, FieldValue, GridSpec};
use omit_ep::sweep::{AxisSpec, FigureId, SweepAxis, SweepError, SweepSpec};

const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

#[derive(Parser)]
#[command(
    name = "omit-ep",
    about = "Probe transmission and group delay of a two-scatterer whispering-gallery optomechanical resonator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (TOML). Defaults to the built-in reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write a JSON mirror next to the CSV output.
    #[arg(long, global = true)]
    json: bool,
    /// Pump power override [mW].
    #[arg(long = "p-pump-mw", global = true)]
    p_pump_mw: Option<f64>,
    /// Pump detuning override, Delta_a / omega_m.
    #[arg(long = "delta-a-over-omega-m", global = true)]
    delta_a_over_omega_m: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Angle scan: frequency splitting, |J1|, |J2|, and the relative photon
    /// number over a beta grid; prints the located splitting minima.
    EpScan {
        #[command(flatten)]
        common: CommonArgs,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Beta grid, start:stop:count [rad].
        #[arg(long)]
        beta: Option<GridSpec>,
    },
    /// Probe transmission and group delay versus probe detuning at one angle.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: PathBuf,
        /// Relative scatterer angle [rad].
        #[arg(long)]
        beta: f64,
        /// Probe-detuning grid in units of omega_m, start:stop:count.
        #[arg(long = "delta-p")]
        delta_p: Option<GridSpec>,
    },
    /// Two-axis sweep producing a long-form table (axis2 fastest).
    Map {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: PathBuf,
        /// First axis, e.g. beta=0:1.6:161.
        #[arg(long)]
        axis1: String,
        /// Second axis, e.g. delta_p_over_omega_m=-0.3:0.6:181.
        #[arg(long)]
        axis2: String,
        /// Fixed angle when beta is not an axis [rad].
        #[arg(long)]
        beta: Option<f64>,
        /// Fixed probe detuning when it is not an axis, Delta_p / omega_m.
        #[arg(long = "delta-p-over-omega-m")]
        delta_p_over_omega_m: Option<f64>,
    },
    /// Reproduce one of the built-in figure datasets
    /// (fig1b fig1c fig2a fig2b fig2c fig2d fig3a fig3b fig4a fig4b).
    Figure {
        #[command(flatten)]
        common: CommonArgs,
        /// Figure id.
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every oracle cross-check and report pass/fail per check.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Optional path for the report text.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Config(String),
    Validation,
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Validation => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Validation => write!(f, "validation failed"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => CliError::Config(c.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

fn load_config(common: &CommonArgs) -> Result<Config, CliError> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut cfg = Config::from_toml_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(p_mw) = common.p_pump_mw {
        cfg.set_field("p_pump_w", FieldValue::Scalar(p_mw * 1e-3))
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(da) = common.delta_a_over_omega_m {
        cfg.set_field("delta_a_over_omega_m", FieldValue::Scalar(da))
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    // Surface invariant violations now, with exit code 2.
    cfg.build().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn parse_axis(text: &str) -> Result<AxisSpec, CliError> {
    let (name, range) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("axis `{text}` must look like name=start:stop:count")))?;
    let param: SweepAxis = name.parse().map_err(CliError::Usage)?;
    let grid: GridSpec = range.parse().map_err(CliError::Usage)?;
    Ok(AxisSpec { param, grid })
}

fn json_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn create(out: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(out)?))
}

fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            std::process::exit(0);
        }
        CliError::Usage(e.to_string())
    })?;

    match cli.command {
        Command::EpScan { common, out, beta } => {
            let cfg = load_config(&common)?;
            let grid = beta.unwrap_or(cfg.sweep_defaults().beta).values();
            let rows = omit_ep::ep_scan(&cfg, &grid)?;
            output::write_csv(create(&out)?, &rows).map_err(|e| CliError::Runtime(e.to_string()))?;
            if common.json {
                output::write_json(create(&json_path(&out))?, &rows)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            let (params, _) = cfg.build().map_err(|e| CliError::Config(e.to_string()))?;
            let records = omit_ep::critical_angles(&params);
            println!("splitting minima (angle, vanishing rate, residual, surviving rate):");
            for r in records {
                println!(
                    "  beta_c = {:<12.9}  branch = {}  |d_omega|/gamma_a = {:.3e}  j_other/gamma_a = {:.6}{:+.6}i",
                    r.beta_c,
                    r.branch,
                    r.residual / params.gamma_a,
                    r.j_other.re / params.gamma_a,
                    r.j_other.im / params.gamma_a,
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Spectrum { common, out, beta, delta_p } => {
            let cfg = load_config(&common)?;
            let grid = delta_p.unwrap_or(cfg.sweep_defaults().delta_p_over_omega_m);
            let spec = SweepSpec {
                axis1: AxisSpec { param: SweepAxis::DeltaPOverOmegaM, grid },
                axis2: None,
                fixed: vec![("beta".into(), FieldValue::Scalar(beta))],
                output_path: Some(out.clone()),
            };
            let rows = omit_ep::run_sweep(&cfg, &spec, common.workers)?;
            let spectrum: Vec<omit_ep::sweep::SpectrumRow> = rows
                .iter()
                .map(|r| omit_ep::sweep::SpectrumRow {
                    delta_p_over_omega_m: r.axis1,
                    transmission: r.transmission,
                    re_tp: r.re_tp,
                    im_tp: r.im_tp,
                    group_delay_s: r.group_delay_s,
                })
                .collect();
            output::write_csv(create(&out)?, &spectrum)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            if common.json {
                output::write_json(create(&json_path(&out))?, &spectrum)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            if let Some(bad) = rows.iter().find(|r| r.error.is_some()) {
                eprintln!(
                    "note: node at delta_p/omega_m = {} reported: {}",
                    bad.axis1,
                    bad.error.as_deref().unwrap_or_default()
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Map { common, out, axis1, axis2, beta, delta_p_over_omega_m } => {
            let cfg = load_config(&common)?;
            let axis1 = parse_axis(&axis1)?;
            let axis2 = parse_axis(&axis2)?;
            let mut fixed = Vec::new();
            if let Some(b) = beta {
                fixed.push(("beta".to_string(), FieldValue::Scalar(b)));
            }
            if let Some(dp) = delta_p_over_omega_m {
                fixed.push(("delta_p_over_omega_m".to_string(), FieldValue::Scalar(dp)));
            }
            let spec = SweepSpec {
                axis1,
                axis2: Some(axis2),
                fixed,
                output_path: Some(out.clone()),
            };
            let rows = omit_ep::run_sweep(&cfg, &spec, common.workers)?;
            output::write_sweep_csv(
                create(&out)?,
                spec.axis1.param.name(),
                Some(spec.axis2.as_ref().unwrap().param.name()),
                &rows,
            )
            .map_err(|e| CliError::Runtime(e.to_string()))?;
            if common.json {
                output::write_sweep_json(
                    create(&json_path(&out))?,
                    spec.axis1.param.name(),
                    Some(spec.axis2.as_ref().unwrap().param.name()),
                    &rows,
                )
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            let errors = rows.iter().filter(|r| r.error.is_some()).count();
            if errors > 0 {
                eprintln!("note: {errors} of {} nodes carry an error marker", rows.len());
            }
            println!("wrote {}", out.display());
        }
        Command::Figure { common, id, out } => {
            let cfg = load_config(&common)?;
            let id: FigureId = id.parse().map_err(CliError::Usage)?;
            let dataset = omit_ep::reproduce_figure(&cfg, id, common.workers)?;
            dataset
                .write_csv(create(&out)?)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            if common.json {
                dataset
                    .write_json(create(&json_path(&out))?)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            println!("wrote {} ({})", out.display(), id.name());
        }
        Command::Validate { common, out } => {
            let cfg = load_config(&common)?;
            let report = omit_ep::validate(&cfg)?;
            println!("{report}");
            if let Some(path) = out {
                let mut w = create(&path)?;
                writeln!(w, "{report}")?;
            }
            if !report.passed() {
                return Err(CliError::Validation);
            }
        }
    }
    Ok(())
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
