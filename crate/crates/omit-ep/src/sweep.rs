//! Sweep orchestration and figure-reproduction recipes: grid evaluation of
//! steady state plus probe response over one or two swept parameters, with
//! per-node error capture and deterministic row order (axis2 fastest).

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coupling::{SplitPoint, coupling_at, splitting_curve};
use crate::params::{Config, ConfigError, FieldValue, GridSpec};
use crate::response::{group_delay, transmission_amplitude};
use crate::steady::{EtaPoint, solve_steady};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// The sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Beta,
    DeltaPOverOmegaM,
    PPumpW,
    DeltaAOverOmegaM,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::DeltaPOverOmegaM => "delta_p_over_omega_m",
            SweepAxis::PPumpW => "p_pump_w",
            SweepAxis::DeltaAOverOmegaM => "delta_a_over_omega_m",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "beta" => Ok(SweepAxis::Beta),
            "delta_p_over_omega_m" => Ok(SweepAxis::DeltaPOverOmegaM),
            "p_pump_w" => Ok(SweepAxis::PPumpW),
            "delta_a_over_omega_m" => Ok(SweepAxis::DeltaAOverOmegaM),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected beta, delta_p_over_omega_m, p_pump_w, delta_a_over_omega_m)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub param: SweepAxis,
    pub grid: GridSpec,
}

/// A one- or two-axis sweep over the node evaluator, with optional fixed
/// overrides of config fields plus the `beta` / `delta_p_over_omega_m` node
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis1: AxisSpec,
    pub axis2: Option<AxisSpec>,
    pub fixed: Vec<(String, FieldValue)>,
    pub output_path: Option<std::path::PathBuf>,
}

impl SweepSpec {
    fn validate(&self, base: &Config) -> Result<(), SweepError> {
        if self.axis1.grid.count < 2 {
            return Err(SweepError::InvalidSpec("axis1 needs count >= 2".into()));
        }
        if let Some(a2) = &self.axis2 {
            if a2.grid.count < 2 {
                return Err(SweepError::InvalidSpec("axis2 needs count >= 2".into()));
            }
            if a2.param == self.axis1.param {
                return Err(SweepError::InvalidSpec("axis1 and axis2 must differ".into()));
            }
        }
        let mut scratch = base.clone();
        for (name, value) in &self.fixed {
            if name == "beta" || name == "delta_p_over_omega_m" {
                continue;
            }
            scratch.set_field(name, *value)?;
        }
        Ok(())
    }
}

/// One evaluated sweep node. Fields that could not be computed hold NaN and
/// `error` says why; multistable nodes keep their values but are flagged
/// rather than silently picking a branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub transmission: f64,
    pub re_tp: f64,
    pub im_tp: f64,
    pub group_delay_s: f64,
    pub eta: f64,
    pub x_bar_m: f64,
    pub n_bar: f64,
    pub branch_count: Option<usize>,
    pub error: Option<String>,
}

fn eval_node(base: &Config, spec: &SweepSpec, a1: f64, a2: Option<f64>) -> SweepRow {
    let mut row = SweepRow {
        axis1: a1,
        axis2: a2,
        transmission: f64::NAN,
        re_tp: f64::NAN,
        im_tp: f64::NAN,
        group_delay_s: f64::NAN,
        eta: f64::NAN,
        x_bar_m: f64::NAN,
        n_bar: f64::NAN,
        branch_count: None,
        error: None,
    };
    let fail = |row: &mut SweepRow, msg: String| {
        row.error = Some(match row.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    };

    let mut cfg = base.clone();
    let mut beta = 0.0;
    let mut delta_p_n = 0.0;
    let mut apply = |cfg: &mut Config, name: &str, value: FieldValue| -> Result<(), ConfigError> {
        match (name, value) {
            ("beta", FieldValue::Scalar(v)) => {
                beta = v;
                Ok(())
            }
            ("delta_p_over_omega_m", FieldValue::Scalar(v)) => {
                delta_p_n = v;
                Ok(())
            }
            _ => cfg.set_field(name, value),
        }
    };
    for (name, value) in &spec.fixed {
        if let Err(e) = apply(&mut cfg, name, *value) {
            fail(&mut row, e.to_string());
            return row;
        }
    }
    let mut axes = vec![(spec.axis1.param, a1)];
    if let (Some(axis2), Some(v2)) = (&spec.axis2, a2) {
        axes.push((axis2.param, v2));
    }
    for (param, value) in axes {
        if let Err(e) = apply(&mut cfg, param.name(), FieldValue::Scalar(value)) {
            fail(&mut row, e.to_string());
            return row;
        }
    }

    let (params, drive) = match cfg.build() {
        Ok(pd) => pd,
        Err(e) => {
            fail(&mut row, e.to_string());
            return row;
        }
    };
    let coupling = coupling_at(&params, drive.delta_a, beta);
    let steady = match solve_steady(&params, &drive, &coupling) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut row, e.to_string());
            return row;
        }
    };
    row.eta = steady.eta;
    row.x_bar_m = steady.x_bar;
    row.n_bar = steady.n_bar;
    row.branch_count = Some(steady.branch_count);
    if steady.branch_count > 1 {
        fail(&mut row, format!("multistable: branch_count={}", steady.branch_count));
    }

    let delta_p = delta_p_n * params.omega_m;
    match transmission_amplitude(&params, &drive, &coupling, &steady, delta_p) {
        Ok((t_p, _)) => {
            row.transmission = t_p.norm_sqr();
            row.re_tp = t_p.re;
            row.im_tp = t_p.im;
        }
        Err(e) => {
            fail(&mut row, e.to_string());
            return row;
        }
    }
    match group_delay(&params, &drive, &coupling, &steady, delta_p) {
        Ok(gd) => row.group_delay_s = gd.tau_g,
        Err(e) => fail(&mut row, e.to_string()),
    }
    row
}

fn with_pool<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

/// Evaluates the sweep grid. Row order is deterministic: axis1 outer, axis2
/// fastest; workers only change wall time, never content.
pub fn run_sweep(
    base: &Config,
    spec: &SweepSpec,
    workers: Option<usize>,
) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate(base)?;
    let a1_values = spec.axis1.grid.values();
    let a2_values: Vec<Option<f64>> = match &spec.axis2 {
        Some(a2) => a2.grid.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let nodes: Vec<(f64, Option<f64>)> = a1_values
        .iter()
        .flat_map(|&v1| a2_values.iter().map(move |&v2| (v1, v2)))
        .collect();
    with_pool(workers, || {
        nodes.par_iter().map(|&(v1, v2)| eval_node(base, spec, v1, v2)).collect()
    })
}

/// Spectrum row of the CSV schema used by the `spectrum` command and the
/// single-spectrum figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub delta_p_over_omega_m: f64,
    pub transmission: f64,
    pub re_tp: f64,
    pub im_tp: f64,
    pub group_delay_s: f64,
}

/// Spectrum rows tagged by the angle, for the multi-angle figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaSpectrumRow {
    pub beta: f64,
    pub delta_p_over_omega_m: f64,
    pub transmission: f64,
    pub re_tp: f64,
    pub im_tp: f64,
    pub group_delay_s: f64,
}

/// Combined angle-scan row: splitting plus steady-state occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpScanRow {
    pub beta: f64,
    pub re_domega: f64,
    pub im_domega: f64,
    pub abs_j1: f64,
    pub abs_j2: f64,
    pub eta: f64,
    pub x_bar_m: f64,
    pub n_bar: f64,
    pub branch_count: usize,
}

/// Splitting curve and relative photon number over one beta grid.
pub fn ep_scan(
    config: &Config,
    beta_grid: &[f64],
) -> Result<Vec<EpScanRow>, SweepError> {
    let (params, drive) = config.build()?;
    let split = splitting_curve(&params, beta_grid);
    let eta = crate::steady::eta_curve(&params, &drive, beta_grid)
        .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
    Ok(split
        .iter()
        .zip(&eta)
        .map(|(s, e)| EpScanRow {
            beta: s.beta,
            re_domega: s.re_domega,
            im_domega: s.im_domega,
            abs_j1: s.abs_j1,
            abs_j2: s.abs_j2,
            eta: e.eta,
            x_bar_m: e.x_bar_m,
            n_bar: e.n_bar,
            branch_count: e.branch_count,
        })
        .collect())
}

fn spectrum_rows(
    config: &Config,
    beta: f64,
    grid: &GridSpec,
    workers: Option<usize>,
) -> Result<Vec<SpectrumRow>, SweepError> {
    let (params, drive) = config.build()?;
    let coupling = coupling_at(&params, drive.delta_a, beta);
    let steady =
        solve_steady(&params, &drive, &coupling).map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
    let delta_p: Vec<f64> = grid.values().iter().map(|v| v * params.omega_m).collect();
    let points = with_pool(workers, || {
        crate::response::transmission_spectrum(&params, &drive, &coupling, &steady, &delta_p)
    })?
    .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
    Ok(points
        .iter()
        .map(|p| SpectrumRow {
            delta_p_over_omega_m: p.delta_p / params.omega_m,
            transmission: p.transmission,
            re_tp: p.t_p.re,
            im_tp: p.t_p.im,
            group_delay_s: p.group_delay,
        })
        .collect())
}

/// The reproducible figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1b,
    Fig1c,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::Fig1b,
        FigureId::Fig1c,
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig2d,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4a,
        FigureId::Fig4b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1b => "fig1b",
            FigureId::Fig1c => "fig1c",
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig2d => "fig2d",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
        }
    }
}

impl std::str::FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        FigureId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown figure id `{s}` (expected one of {})",
                    FigureId::ALL.map(|id| id.name()).join(", ")
                )
            })
    }
}

/// Everything a figure pins: drive/detuning overrides at their published
/// values plus the grids and angles it is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRecipe {
    pub id: FigureId,
    /// Config-level overrides (pump power, pump detuning, scatterer count).
    pub fixed: Vec<(&'static str, FieldValue)>,
    /// Discrete angles (multi-spectrum figures).
    pub betas: Vec<f64>,
    /// Angle grid (curves and maps over beta).
    pub beta_grid: Option<GridSpec>,
    /// Probe-detuning grid in units of omega_m (spectra).
    pub delta_p_grid: Option<GridSpec>,
    /// Fixed probe detuning in units of omega_m (delay maps and angle cuts).
    pub delta_p_over_omega_m: Option<f64>,
    /// Pump-power grid [W] (delay maps).
    pub p_pump_grid: Option<GridSpec>,
}

const PUMP_1MW: (&str, FieldValue) = ("p_pump_w", FieldValue::Scalar(1.0e-3));
const DETUNED_AT_OMEGA_M: (&str, FieldValue) = ("delta_a_over_omega_m", FieldValue::Scalar(1.0));
const DETUNED_AT_087: (&str, FieldValue) = ("delta_a_over_omega_m", FieldValue::Scalar(0.87));
const NO_SECOND_SCATTERER: (&str, FieldValue) =
    ("eps2_over_gamma_a", FieldValue::Complex([0.0, 0.0]));

pub fn recipe(id: FigureId) -> FigureRecipe {
    let beta_grid = GridSpec::new(0.0, 1.6, 801);
    let beta_map_grid = GridSpec::new(0.0, 1.6, 161);
    let delta_p_grid = GridSpec::new(-0.3, 0.6, 901);
    let delta_p_map_grid = GridSpec::new(-0.3, 0.6, 181);
    let pump_grid = GridSpec::new(1.0e-4, 1.0e-2, 56);
    let base = FigureRecipe {
        id,
        fixed: Vec::new(),
        betas: Vec::new(),
        beta_grid: None,
        delta_p_grid: None,
        delta_p_over_omega_m: None,
        p_pump_grid: None,
    };
    match id {
        FigureId::Fig1b => FigureRecipe { beta_grid: Some(beta_grid), ..base },
        FigureId::Fig1c => FigureRecipe {
            fixed: vec![PUMP_1MW, DETUNED_AT_OMEGA_M],
            beta_grid: Some(beta_grid),
            ..base
        },
        FigureId::Fig2a => FigureRecipe {
            fixed: vec![PUMP_1MW, DETUNED_AT_OMEGA_M, NO_SECOND_SCATTERER],
            betas: vec![0.0],
            delta_p_grid: Some(delta_p_grid),
            ..base
        },
        FigureId::Fig2b => FigureRecipe {
            fixed: vec![PUMP_1MW, DETUNED_AT_OMEGA_M],
            betas: vec![0.2, 0.4, 0.6],
            delta_p_grid: Some(delta_p_grid),
            ..base
        },
        FigureId::Fig2c => FigureRecipe {
            fixed: vec![PUMP_1MW, DETUNED_AT_OMEGA_M],
            beta_grid: Some(beta_grid),
            delta_p_over_omega_m: Some(0.13),
            ..base
        },
        FigureId::Fig2d => FigureRecipe {
            fixed: vec![PUMP_1MW, DETUNED_AT_OMEGA_M],
            beta_grid: Some(beta_map_grid),
            delta_p_grid: Some(delta_p_map_grid),
            ..base
        },
        FigureId::Fig3a => FigureRecipe {
            fixed: vec![DETUNED_AT_OMEGA_M],
            beta_grid: Some(beta_map_grid),
            delta_p_over_omega_m: Some(0.0),
            p_pump_grid: Some(pump_grid),
            ..base
        },
        FigureId::Fig3b => FigureRecipe {
            fixed: vec![DETUNED_AT_OMEGA_M],
            betas: vec![0.2, 0.4],
            delta_p_over_omega_m: Some(0.13),
            p_pump_grid: Some(GridSpec::new(1.0e-4, 1.0e-2, 100)),
            ..base
        },
        FigureId::Fig4a => FigureRecipe {
            fixed: vec![PUMP_1MW, DETUNED_AT_087],
            betas: vec![0.4],
            delta_p_grid: Some(delta_p_grid),
            ..base
        },
        FigureId::Fig4b => FigureRecipe {
            fixed: vec![DETUNED_AT_087],
            beta_grid: Some(beta_map_grid),
            delta_p_over_omega_m: Some(0.13),
            p_pump_grid: Some(pump_grid),
            ..base
        },
    }
}

/// A plot-ready figure dataset.
#[derive(Debug, Clone)]
pub enum FigureData {
    Splitting(Vec<SplitPoint>),
    Eta(Vec<EtaPoint>),
    Spectrum(Vec<SpectrumRow>),
    BetaSpectra(Vec<BetaSpectrumRow>),
    Map { axis1: &'static str, axis2: &'static str, rows: Vec<SweepRow> },
}

#[derive(Debug, Clone)]
pub struct FigureDataset {
    pub id: FigureId,
    pub data: FigureData,
}

impl FigureDataset {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        match &self.data {
            FigureData::Splitting(rows) => crate::output::write_csv(writer, rows),
            FigureData::Eta(rows) => crate::output::write_csv(writer, rows),
            FigureData::Spectrum(rows) => crate::output::write_csv(writer, rows),
            FigureData::BetaSpectra(rows) => crate::output::write_csv(writer, rows),
            FigureData::Map { axis1, axis2, rows } => {
                crate::output::write_sweep_csv(writer, axis1, Some(axis2), rows)
            }
        }
    }

    pub fn write_json<W: std::io::Write>(&self, writer: W) -> serde_json::Result<()> {
        match &self.data {
            FigureData::Splitting(rows) => crate::output::write_json(writer, rows),
            FigureData::Eta(rows) => crate::output::write_json(writer, rows),
            FigureData::Spectrum(rows) => crate::output::write_json(writer, rows),
            FigureData::BetaSpectra(rows) => crate::output::write_json(writer, rows),
            FigureData::Map { axis1, axis2, rows } => {
                crate::output::write_sweep_json(writer, axis1, Some(axis2), rows)
            }
        }
    }
}

/// Runs the baked-in recipe for one figure against the given configuration.
/// Resonator constants come from the config; drive settings the figure pins
/// are overridden to their published values.
pub fn reproduce_figure(
    config: &Config,
    id: FigureId,
    workers: Option<usize>,
) -> Result<FigureDataset, SweepError> {
    let recipe = recipe(id);
    let mut cfg = config.clone();
    for (name, value) in &recipe.fixed {
        cfg.set_field(name, *value)?;
    }
    let data = match id {
        FigureId::Fig1b => {
            let (params, _) = cfg.build()?;
            let grid = recipe.beta_grid.unwrap().values();
            FigureData::Splitting(splitting_curve(&params, &grid))
        }
        FigureId::Fig1c => {
            let (params, drive) = cfg.build()?;
            let grid = recipe.beta_grid.unwrap().values();
            let curve = crate::steady::eta_curve(&params, &drive, &grid)
                .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
            FigureData::Eta(curve)
        }
        FigureId::Fig2a | FigureId::Fig4a => {
            let beta = recipe.betas[0];
            FigureData::Spectrum(spectrum_rows(&cfg, beta, &recipe.delta_p_grid.unwrap(), workers)?)
        }
        FigureId::Fig2b => {
            let grid = recipe.delta_p_grid.unwrap();
            let mut rows = Vec::new();
            for &beta in &recipe.betas {
                for r in spectrum_rows(&cfg, beta, &grid, workers)? {
                    rows.push(BetaSpectrumRow {
                        beta,
                        delta_p_over_omega_m: r.delta_p_over_omega_m,
                        transmission: r.transmission,
                        re_tp: r.re_tp,
                        im_tp: r.im_tp,
                        group_delay_s: r.group_delay_s,
                    });
                }
            }
            FigureData::BetaSpectra(rows)
        }
        FigureId::Fig2c => {
            let spec = SweepSpec {
                axis1: AxisSpec { param: SweepAxis::Beta, grid: recipe.beta_grid.unwrap() },
                axis2: None,
                fixed: vec![(
                    "delta_p_over_omega_m".into(),
                    FieldValue::Scalar(recipe.delta_p_over_omega_m.unwrap()),
                )],
                output_path: None,
            };
            let rows = run_sweep(&cfg, &spec, workers)?;
            FigureData::BetaSpectra(
                rows.iter()
                    .map(|r| BetaSpectrumRow {
                        beta: r.axis1,
                        delta_p_over_omega_m: recipe.delta_p_over_omega_m.unwrap(),
                        transmission: r.transmission,
                        re_tp: r.re_tp,
                        im_tp: r.im_tp,
                        group_delay_s: r.group_delay_s,
                    })
                    .collect(),
            )
        }
        FigureId::Fig2d => {
            let spec = SweepSpec {
                axis1: AxisSpec { param: SweepAxis::Beta, grid: recipe.beta_grid.unwrap() },
                axis2: Some(AxisSpec {
                    param: SweepAxis::DeltaPOverOmegaM,
                    grid: recipe.delta_p_grid.unwrap(),
                }),
                fixed: Vec::new(),
                output_path: None,
            };
            FigureData::Map {
                axis1: "beta",
                axis2: "delta_p_over_omega_m",
                rows: run_sweep(&cfg, &spec, workers)?,
            }
        }
        FigureId::Fig3a | FigureId::Fig4b => {
            let spec = SweepSpec {
                axis1: AxisSpec { param: SweepAxis::PPumpW, grid: recipe.p_pump_grid.unwrap() },
                axis2: Some(AxisSpec { param: SweepAxis::Beta, grid: recipe.beta_grid.unwrap() }),
                fixed: vec![(
                    "delta_p_over_omega_m".into(),
                    FieldValue::Scalar(recipe.delta_p_over_omega_m.unwrap()),
                )],
                output_path: None,
            };
            FigureData::Map { axis1: "p_pump_w", axis2: "beta", rows: run_sweep(&cfg, &spec, workers)? }
        }
        FigureId::Fig3b => {
            let spec = SweepSpec {
                axis1: AxisSpec {
                    param: SweepAxis::Beta,
                    grid: GridSpec::new(recipe.betas[0], recipe.betas[1], 2),
                },
                axis2: Some(AxisSpec {
                    param: SweepAxis::PPumpW,
                    grid: recipe.p_pump_grid.unwrap(),
                }),
                fixed: vec![(
                    "delta_p_over_omega_m".into(),
                    FieldValue::Scalar(recipe.delta_p_over_omega_m.unwrap()),
                )],
                output_path: None,
            };
            FigureData::Map { axis1: "beta", axis2: "p_pump_w", rows: run_sweep(&cfg, &spec, workers)? }
        }
    };
    Ok(FigureDataset { id, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULT_TOML: &str = include_str!("../../../configs/default.toml");

    fn config() -> Config {
        Config::from_toml_str(DEFAULT_TOML).unwrap()
    }

    #[test]
    fn degenerate_repeated_node_gives_identical_rows() {
        let spec = SweepSpec {
            axis1: AxisSpec { param: SweepAxis::Beta, grid: GridSpec::new(0.2, 0.2, 2) },
            axis2: None,
            fixed: vec![("delta_p_over_omega_m".into(), FieldValue::Scalar(0.13))],
            output_path: None,
        };
        let rows = run_sweep(&config(), &spec, Some(2)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].transmission, rows[1].transmission);
        assert_eq!(rows[0].group_delay_s, rows[1].group_delay_s);
        assert!(rows[0].error.is_none());
    }

    #[test]
    fn row_order_is_axis2_fastest_and_complete() {
        let spec = SweepSpec {
            axis1: AxisSpec { param: SweepAxis::Beta, grid: GridSpec::new(0.1, 0.3, 3) },
            axis2: Some(AxisSpec {
                param: SweepAxis::DeltaPOverOmegaM,
                grid: GridSpec::new(0.0, 0.2, 2),
            }),
            fixed: Vec::new(),
            output_path: None,
        };
        let rows = run_sweep(&config(), &spec, None).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].axis1, 0.1);
        assert_eq!(rows[0].axis2, Some(0.0));
        assert_eq!(rows[1].axis1, 0.1);
        assert_eq!(rows[1].axis2, Some(0.2));
        assert_eq!(rows[2].axis1, 0.2);
    }

    #[test]
    fn per_node_failures_do_not_abort() {
        // A pump axis reaching into negatives: those nodes carry errors, the
        // others still evaluate.
        let spec = SweepSpec {
            axis1: AxisSpec { param: SweepAxis::PPumpW, grid: GridSpec::new(-1e-3, 1e-3, 3) },
            axis2: None,
            fixed: vec![
                ("beta".into(), FieldValue::Scalar(0.2)),
                ("delta_p_over_omega_m".into(), FieldValue::Scalar(0.13)),
            ],
            output_path: None,
        };
        let rows = run_sweep(&config(), &spec, None).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].error.as_deref().unwrap().contains("p_pump_w"));
        assert!(rows[0].transmission.is_nan());
        assert!(rows[2].error.is_none());
        assert!(rows[2].transmission.is_finite());
    }

    #[test]
    fn sweep_output_is_deterministic_across_worker_counts() {
        let spec = SweepSpec {
            axis1: AxisSpec { param: SweepAxis::Beta, grid: GridSpec::new(0.0, 0.8, 5) },
            axis2: Some(AxisSpec {
                param: SweepAxis::DeltaPOverOmegaM,
                grid: GridSpec::new(0.0, 0.26, 3),
            }),
            fixed: Vec::new(),
            output_path: None,
        };
        let mut outputs = Vec::new();
        for workers in [Some(1), Some(4), Some(1)] {
            let rows = run_sweep(&config(), &spec, workers).unwrap();
            let mut bytes = Vec::new();
            crate::output::write_sweep_csv(&mut bytes, "beta", Some("delta_p_over_omega_m"), &rows)
                .unwrap();
            outputs.push(bytes);
        }
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[0], outputs[2]);
    }

    #[test]
    fn unknown_fixed_field_rejected() {
        let spec = SweepSpec {
            axis1: AxisSpec { param: SweepAxis::Beta, grid: GridSpec::new(0.0, 0.8, 5) },
            axis2: None,
            fixed: vec![("not_a_field".into(), FieldValue::Scalar(1.0))],
            output_path: None,
        };
        assert!(matches!(
            run_sweep(&config(), &spec, None),
            Err(SweepError::Config(ConfigError::UnknownField(_)))
        ));
    }

    #[test]
    fn recipes_pin_published_drive_values() {
        // Fig. 1(c) and Fig. 2: 1 mW pump at Delta_a/omega_m = 1; Fig. 4:
        // Delta_a/omega_m = 0.87; Fig. 2(b) angles {0.2, 0.4, 0.6}; the delay
        // figures sweep 0.1..10 mW; angle cuts sit at Delta_p/omega_m = 0.13.
        let pump = ("p_pump_w", FieldValue::Scalar(1.0e-3));
        let da1 = ("delta_a_over_omega_m", FieldValue::Scalar(1.0));
        let da087 = ("delta_a_over_omega_m", FieldValue::Scalar(0.87));
        assert_eq!(recipe(FigureId::Fig1c).fixed, vec![pump, da1]);
        assert_eq!(
            recipe(FigureId::Fig2a).fixed,
            vec![pump, da1, ("eps2_over_gamma_a", FieldValue::Complex([0.0, 0.0]))]
        );
        assert_eq!(recipe(FigureId::Fig2b).fixed, vec![pump, da1]);
        assert_eq!(recipe(FigureId::Fig2b).betas, vec![0.2, 0.4, 0.6]);
        assert_eq!(recipe(FigureId::Fig2c).delta_p_over_omega_m, Some(0.13));
        assert_eq!(recipe(FigureId::Fig3a).delta_p_over_omega_m, Some(0.0));
        assert_eq!(recipe(FigureId::Fig3a).fixed, vec![da1]);
        assert_eq!(recipe(FigureId::Fig3b).delta_p_over_omega_m, Some(0.13));
        assert_eq!(recipe(FigureId::Fig4a).fixed, vec![pump, da087]);
        assert_eq!(recipe(FigureId::Fig4b).fixed, vec![da087]);
        for id in [FigureId::Fig3a, FigureId::Fig3b, FigureId::Fig4b] {
            let p = recipe(id).p_pump_grid.unwrap();
            assert_eq!((p.start, p.stop), (1.0e-4, 1.0e-2));
        }
    }

    #[test]
    fn single_scatterer_override_flattens_fig1b() {
        let mut cfg = config();
        cfg.set_field("eps2_over_gamma_a", FieldValue::Complex([0.0, 0.0])).unwrap();
        let ds = reproduce_figure(&cfg, FigureId::Fig1b, None).unwrap();
        let FigureData::Splitting(rows) = ds.data else { panic!("wrong dataset") };
        for r in &rows {
            assert!((r.re_domega - rows[0].re_domega).abs() < 1e-6);
            assert!((r.im_domega - rows[0].im_domega).abs() < 1e-6);
        }
    }

    #[test]
    fn figure_ids_parse() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        assert!("fig9z".parse::<FigureId>().is_err());
    }
}
