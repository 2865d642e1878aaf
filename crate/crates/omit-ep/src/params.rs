//! Physical parameter records, drive settings, and the flat TOML configuration
//! document they are loaded from.
//!
//! Unit convention: every frequency-like quantity is an angular frequency in
//! rad/s, masses are kg, lengths are m, powers are W. The `_hz` suffix on the
//! config keys mirrors how these values are conventionally quoted; they are
//! consumed as rad/s without any hidden 2π factor. Dimensionless outputs
//! (transmission, spectra shapes, critical angles) are invariant to that
//! choice; group delays scale linearly with it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant [J s] (CODATA 2018 exact value).
pub const HBAR: f64 = 1.054571817e-34;

/// Complex shorthand used throughout the crate.
pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// The document is not valid TOML or a required field is absent. The
    /// underlying message names the offending field.
    #[error("config parse error: {0}")]
    Parse(String),
    /// A field parsed but violates an invariant.
    #[error("config field `{field}` invalid: {reason}")]
    Invariant { field: &'static str, reason: String },
    /// Override of a field that does not exist or has the wrong shape.
    #[error("unknown or mistyped config field `{0}`")]
    UnknownField(String),
}

#[derive(Debug, Error)]
pub enum DriveError {
    #[error("nonpositive optical frequency: {context} = {value} rad/s")]
    NonpositiveFrequency { context: &'static str, value: f64 },
}

/// Fixed resonator, mechanics, and scatterer constants.
///
/// `eps1`/`eps2` are stored in absolute rad/s (already scaled by `gamma_a`
/// from the configured ratios).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Optical resonance angular frequency [rad/s].
    pub omega_a: f64,
    /// Intrinsic optical damping (half-width) [rad/s].
    pub gamma_a: f64,
    /// Fiber-coupling loss rate [rad/s].
    pub gamma_ex: f64,
    /// Mechanical frequency [rad/s].
    pub omega_m: f64,
    /// Mechanical damping [rad/s].
    pub gamma_m: f64,
    /// Effective mass of the mechanical mode [kg].
    pub m_eff: f64,
    /// Resonator radius [m].
    pub radius: f64,
    /// Azimuthal mode number.
    pub azimuthal_m: u32,
    /// Complex half-splitting of scatterer 1 [rad/s].
    pub eps1: C64,
    /// Complex half-splitting of scatterer 2 [rad/s].
    pub eps2: C64,
    /// Reduced Planck constant [J s].
    pub hbar: f64,
}

impl PhysicalParams {
    /// Optomechanical coupling coefficient g = omega_a / R [rad/(s m)].
    pub fn g(&self) -> f64 {
        self.omega_a / self.radius
    }

    /// Total optical loss gamma = gamma_a - Im(eps1 + eps2) [rad/s].
    pub fn gamma_tot(&self) -> f64 {
        self.gamma_a - (self.eps1 + self.eps2).im
    }
}

/// Pump and probe drive settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Pump power [W].
    pub p_pump: f64,
    /// Probe power [W].
    pub p_probe: f64,
    /// Pump detuning Delta_a = omega_a - omega_l [rad/s].
    pub delta_a: f64,
    /// Probe-pump offset xi = omega_p - omega_l [rad/s].
    pub xi: f64,
}

impl DriveParams {
    /// The single conversion point between the internal xi axis and the
    /// probe-detuning axis used for plots: Delta_p = xi - Delta_a.
    pub fn delta_p(&self) -> f64 {
        self.xi - self.delta_a
    }

    /// Same drive with the probe offset placed at probe detuning `delta_p`.
    pub fn with_delta_p(&self, delta_p: f64) -> Self {
        Self { xi: delta_p + self.delta_a, ..*self }
    }
}

/// Pump and probe field amplitudes [s^(-1/2)]; the squared amplitude is a
/// photon flux in photons/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub e_pump: f64,
    pub e_probe: f64,
}

/// E = sqrt(P / (hbar * omega)) for the pump at omega_l = omega_a - Delta_a
/// and the probe at omega_p = omega_l + xi.
pub fn amplitudes_from_power(
    params: &PhysicalParams,
    drive: &DriveParams,
) -> Result<Amplitudes, DriveError> {
    let omega_l = params.omega_a - drive.delta_a;
    if omega_l <= 0.0 {
        return Err(DriveError::NonpositiveFrequency { context: "omega_l", value: omega_l });
    }
    let omega_p = omega_l + drive.xi;
    if omega_p <= 0.0 {
        return Err(DriveError::NonpositiveFrequency { context: "omega_p", value: omega_p });
    }
    Ok(Amplitudes {
        e_pump: (drive.p_pump / (params.hbar * omega_l)).sqrt(),
        e_probe: (drive.p_probe / (params.hbar * omega_p)).sqrt(),
    })
}

/// One sweep axis: `count` evenly spaced values from `start` to `stop`
/// inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    /// Parses the `start:stop:count` range syntax.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got `{s}`"));
        }
        let start: f64 = parts[0].parse().map_err(|e| format!("bad start in `{s}`: {e}"))?;
        let stop: f64 = parts[1].parse().map_err(|e| format!("bad stop in `{s}`: {e}"))?;
        let count: usize = parts[2].parse().map_err(|e| format!("bad count in `{s}`: {e}"))?;
        if count < 2 {
            return Err(format!("range `{s}` needs count >= 2"));
        }
        Ok(Self { start, stop, count })
    }
}

/// Default grids used when the document does not spell out sweep axes.
/// These are the only fields that carry defaults; physical constants never do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepDefaults {
    pub beta: GridSpec,
    pub delta_p_over_omega_m: GridSpec,
    pub p_pump_w: GridSpec,
}

impl Default for SweepDefaults {
    fn default() -> Self {
        Self {
            beta: GridSpec::new(0.0, 1.6, 801),
            delta_p_over_omega_m: GridSpec::new(-0.3, 0.6, 901),
            p_pump_w: GridSpec::new(1.0e-4, 1.0e-2, 56),
        }
    }
}

/// The flat configuration document, field for field. Complex values are
/// written as `[re, im]` pairs; `eps*` are ratios over `gamma_a_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub omega_a_hz: f64,
    pub gamma_a_hz: f64,
    pub gamma_ex_hz: f64,
    pub omega_m_hz: f64,
    pub gamma_m_hz: f64,
    pub m_eff_kg: f64,
    pub radius_m: f64,
    pub azimuthal_m: u32,
    pub eps1_over_gamma_a: [f64; 2],
    pub eps2_over_gamma_a: [f64; 2],
    pub p_pump_w: f64,
    pub p_probe_w: f64,
    pub delta_a_over_omega_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepDefaults>,
}

/// A scalar or `[re, im]` override value for a named config field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Scalar(f64),
    Complex([f64; 2]),
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Applies a named override; used by sweeps and figure recipes.
    pub fn set_field(&mut self, name: &str, value: FieldValue) -> Result<(), ConfigError> {
        use FieldValue::*;
        match (name, value) {
            ("omega_a_hz", Scalar(v)) => self.omega_a_hz = v,
            ("gamma_a_hz", Scalar(v)) => self.gamma_a_hz = v,
            ("gamma_ex_hz", Scalar(v)) => self.gamma_ex_hz = v,
            ("omega_m_hz", Scalar(v)) => self.omega_m_hz = v,
            ("gamma_m_hz", Scalar(v)) => self.gamma_m_hz = v,
            ("m_eff_kg", Scalar(v)) => self.m_eff_kg = v,
            ("radius_m", Scalar(v)) => self.radius_m = v,
            ("azimuthal_m", Scalar(v)) => self.azimuthal_m = v as u32,
            ("eps1_over_gamma_a", Complex(v)) => self.eps1_over_gamma_a = v,
            ("eps2_over_gamma_a", Complex(v)) => self.eps2_over_gamma_a = v,
            ("p_pump_w", Scalar(v)) => self.p_pump_w = v,
            ("p_probe_w", Scalar(v)) => self.p_probe_w = v,
            ("delta_a_over_omega_m", Scalar(v)) => self.delta_a_over_omega_m = v,
            _ => return Err(ConfigError::UnknownField(name.to_string())),
        }
        Ok(())
    }

    /// Validates every invariant and builds the parameter records.
    pub fn build(&self) -> Result<(PhysicalParams, DriveParams), ConfigError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::Invariant {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
            Ok(())
        }
        fn nonnegative(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ConfigError::Invariant {
                    field,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
            Ok(())
        }

        positive("omega_a_hz", self.omega_a_hz)?;
        positive("gamma_a_hz", self.gamma_a_hz)?;
        positive("gamma_ex_hz", self.gamma_ex_hz)?;
        positive("omega_m_hz", self.omega_m_hz)?;
        positive("gamma_m_hz", self.gamma_m_hz)?;
        positive("m_eff_kg", self.m_eff_kg)?;
        positive("radius_m", self.radius_m)?;
        if self.azimuthal_m < 1 {
            return Err(ConfigError::Invariant {
                field: "azimuthal_m",
                reason: "must be >= 1".into(),
            });
        }
        // Scatterers add loss, never gain.
        if self.eps1_over_gamma_a[1] > 0.0 {
            return Err(ConfigError::Invariant {
                field: "eps1_over_gamma_a",
                reason: format!("Im part must be <= 0, got {}", self.eps1_over_gamma_a[1]),
            });
        }
        if self.eps2_over_gamma_a[1] > 0.0 {
            return Err(ConfigError::Invariant {
                field: "eps2_over_gamma_a",
                reason: format!("Im part must be <= 0, got {}", self.eps2_over_gamma_a[1]),
            });
        }
        nonnegative("p_pump_w", self.p_pump_w)?;
        nonnegative("p_probe_w", self.p_probe_w)?;
        if !self.delta_a_over_omega_m.is_finite() {
            return Err(ConfigError::Invariant {
                field: "delta_a_over_omega_m",
                reason: "must be finite".into(),
            });
        }

        let params = PhysicalParams {
            omega_a: self.omega_a_hz,
            gamma_a: self.gamma_a_hz,
            gamma_ex: self.gamma_ex_hz,
            omega_m: self.omega_m_hz,
            gamma_m: self.gamma_m_hz,
            m_eff: self.m_eff_kg,
            radius: self.radius_m,
            azimuthal_m: self.azimuthal_m,
            eps1: C64::new(self.eps1_over_gamma_a[0], self.eps1_over_gamma_a[1]) * self.gamma_a_hz,
            eps2: C64::new(self.eps2_over_gamma_a[0], self.eps2_over_gamma_a[1]) * self.gamma_a_hz,
            hbar: HBAR,
        };
        let g = params.g();
        if !(g > 0.0) || !g.is_finite() {
            return Err(ConfigError::Invariant {
                field: "radius_m",
                reason: format!("derived g = omega_a/radius must be finite and > 0, got {g}"),
            });
        }

        let drive = DriveParams {
            p_pump: self.p_pump_w,
            p_probe: self.p_probe_w,
            delta_a: self.delta_a_over_omega_m * self.omega_m_hz,
            xi: self.delta_a_over_omega_m * self.omega_m_hz, // baseline Delta_p = 0
        };
        Ok((params, drive))
    }

    /// Sweep descriptors with defaults filled in.
    pub fn sweep_defaults(&self) -> SweepDefaults {
        self.sweep.unwrap_or_default()
    }
}

/// Parses a configuration document into fully validated parameter records
/// plus sweep descriptors.
pub fn load_config(
    text: &str,
) -> Result<(PhysicalParams, DriveParams, SweepDefaults), ConfigError> {
    let cfg = Config::from_toml_str(text)?;
    let (params, drive) = cfg.build()?;
    Ok((params, drive, cfg.sweep_defaults()))
}
