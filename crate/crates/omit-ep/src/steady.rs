//! Nonlinear steady state of the driven system: mechanical displacement,
//! mean intracavity fields, and the relative photon number eta.
//!
//! Writing u = Delta - g*x for the shifted detuning turns the displacement
//! equation into a degree-5 polynomial with real coefficients,
//!
//!   (Delta - u) |D(u)|^2 = K (gamma^2 + u^2 + |J2|^2),
//!   D(u) = (gamma + iu)^2 + J1 J2,
//!   K = hbar g^2 gamma_ex |E_l|^2 / (m_eff omega_m^2),
//!
//! whose real roots enumerate every steady-state branch. Coefficients are
//! normalized by powers of gamma before root finding so they stay O(1)..O(1e3)
//! in SI-scale inputs, and all roots are found at once from the companion
//! matrix (a fixed-point iteration is kept in `oracles` as a cross-check only,
//! since it silently converges to a single branch).

use nalgebra::Matrix5;
use serde::Serialize;
use thiserror::Error;

use crate::coupling::CouplingState;
use crate::params::{C64, DriveParams, DriveError, PhysicalParams, amplitudes_from_power};

#[derive(Debug, Error)]
pub enum SteadyError {
    #[error(transparent)]
    InvalidDrive(#[from] DriveError),
    #[error("no real steady-state root found: {0}")]
    NoRealRoot(String),
}

/// Mean-field solution at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Mechanical displacement [m].
    pub x_bar: f64,
    /// Mean CW field amplitude (|a|^2 is a photon number).
    pub a_cw: C64,
    /// Mean CCW field amplitude.
    pub a_ccw: C64,
    /// Relative photon number |a_ccw|^2 / |a_cw|^2.
    pub eta: f64,
    /// Total intracavity photon number.
    pub n_bar: f64,
    /// Number of real steady-state branches at this drive.
    pub branch_count: usize,
}

/// One row of the eta curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaPoint {
    pub beta: f64,
    pub eta: f64,
    pub x_bar_m: f64,
    pub n_bar: f64,
    pub branch_count: usize,
}

fn eval_poly(coeffs: &[f64; 6], v: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * v + c)
}

fn eval_poly_deriv(coeffs: &[f64; 6], v: f64) -> f64 {
    (1..coeffs.len()).rev().fold(0.0, |acc, i| acc * v + i as f64 * coeffs[i])
}

/// Real roots of the monic quintic v^5 + b4 v^4 + ... + b0 via the companion
/// matrix, Newton-polished.
fn real_quintic_roots(coeffs: &[f64; 6]) -> Vec<f64> {
    debug_assert!((coeffs[5] - 1.0).abs() < 1e-14);
    let companion = Matrix5::new(
        0.0, 0.0, 0.0, 0.0, -coeffs[0],
        1.0, 0.0, 0.0, 0.0, -coeffs[1],
        0.0, 1.0, 0.0, 0.0, -coeffs[2],
        0.0, 0.0, 1.0, 0.0, -coeffs[3],
        0.0, 0.0, 0.0, 1.0, -coeffs[4],
    );
    let eigenvalues = companion.complex_eigenvalues();
    let mut roots: Vec<f64> = eigenvalues
        .iter()
        .filter(|l| l.im.abs() <= 1e-8 * l.re.abs().max(1.0))
        .map(|l| polish_root(coeffs, l.re))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn polish_root(coeffs: &[f64; 6], start: f64) -> f64 {
    let mut v = start;
    for _ in 0..20 {
        let p = eval_poly(coeffs, v);
        let dp = eval_poly_deriv(coeffs, v);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        v -= step;
        if step.abs() <= 1e-15 * v.abs().max(1.0) {
            break;
        }
    }
    v
}

/// Solves the steady state. The returned branch is the one continuously
/// connected to x = 0 as the pump power goes to zero (the smallest-|x| real
/// root; every real root satisfies u <= Delta, so that is the largest u).
pub fn solve_steady(
    params: &PhysicalParams,
    drive: &DriveParams,
    coupling: &CouplingState,
) -> Result<SteadyState, SteadyError> {
    let amps = amplitudes_from_power(params, drive)?;
    let g = params.g();
    let gamma = coupling.gamma_tot;
    let delta = coupling.delta_eff;
    let product = coupling.j1 * coupling.j2;
    let j2_sq = coupling.j2.norm_sqr();
    let flux = params.gamma_ex * amps.e_pump * amps.e_pump;

    let (u, branch_count) = if amps.e_pump == 0.0 || g == 0.0 {
        (delta, 1)
    } else {
        // Dimensionless quintic in v = u / gamma.
        let dg = delta / gamma;
        let pr = product.re / (gamma * gamma);
        let pi = product.im / (gamma * gamma);
        let j2n = j2_sq / (gamma * gamma);
        let k = params.hbar * g * g * flux
            / (params.m_eff * params.omega_m * params.omega_m * gamma * gamma * gamma);
        let c4 = 2.0 * (1.0 - pr);
        let c1 = 4.0 * pi;
        let c0 = (1.0 + pr) * (1.0 + pr) + pi * pi;
        let coeffs = [
            k * (1.0 + j2n) - dg * c0,
            c0 - dg * c1,
            c1 + k - dg * c4,
            c4,
            -dg,
            1.0,
        ];
        let roots = real_quintic_roots(&coeffs);
        let v = *roots.last().ok_or_else(|| {
            SteadyError::NoRealRoot(format!("coefficients {coeffs:?}"))
        })?;
        (gamma * v, roots.len())
    };

    let x_bar = if g == 0.0 { 0.0 } else { (delta - u) / g };
    let denom = C64::new(gamma, u).powi(2) + product;
    let drive_amp = params.gamma_ex.sqrt() * amps.e_pump;
    let a_cw = drive_amp * C64::new(gamma, u) / denom;
    let a_ccw = C64::new(0.0, -1.0) * drive_amp * coupling.j2 / denom;
    let eta = j2_sq / (gamma * gamma + u * u);
    Ok(SteadyState {
        x_bar,
        a_cw,
        a_ccw,
        eta,
        n_bar: a_cw.norm_sqr() + a_ccw.norm_sqr(),
        branch_count,
    })
}

/// Maps `solve_steady` over a beta grid.
pub fn eta_curve(
    params: &PhysicalParams,
    drive: &DriveParams,
    beta_grid: &[f64],
) -> Result<Vec<EtaPoint>, SteadyError> {
    beta_grid
        .iter()
        .map(|&beta| {
            let coupling = crate::coupling::coupling_at(params, drive.delta_a, beta);
            let steady = solve_steady(params, drive, &coupling)?;
            Ok(EtaPoint {
                beta,
                eta: steady.eta,
                x_bar_m: steady.x_bar,
                n_bar: steady.n_bar,
                branch_count: steady.branch_count,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{EpBranch, coupling_at, critical_angles};
    use crate::oracles::fixed_point_xbar;
    use crate::params::load_config;

    const DEFAULT_TOML: &str = include_str!("../../../configs/default.toml");

    fn setup() -> (PhysicalParams, DriveParams) {
        let (p, d, _) = load_config(DEFAULT_TOML).unwrap();
        (p, d)
    }

    #[test]
    fn undriven_is_dark() {
        let (params, mut drive) = setup();
        drive.p_pump = 0.0;
        let coupling = coupling_at(&params, drive.delta_a, 0.2);
        let s = solve_steady(&params, &drive, &coupling).unwrap();
        assert_eq!(s.x_bar, 0.0);
        assert_eq!(s.a_cw, C64::new(0.0, 0.0));
        assert_eq!(s.a_ccw, C64::new(0.0, 0.0));
        assert_eq!(s.n_bar, 0.0);
    }

    #[test]
    fn vanishing_j2_kills_the_ccw_mode() {
        let (params, drive) = setup();
        let mut coupling = coupling_at(&params, drive.delta_a, 0.3928);
        coupling.j2 = C64::new(0.0, 0.0);
        let s = solve_steady(&params, &drive, &coupling).unwrap();
        assert_eq!(s.a_ccw, C64::new(0.0, 0.0));
        assert_eq!(s.eta, 0.0);
    }

    #[test]
    fn equation_residual_small_on_operating_grid() {
        // Substituting the returned triple back into the steady-state
        // equations reproduces it to 1e-10 relative.
        let (params, drive) = setup();
        let g = params.g();
        for i in 0..40 {
            let beta = 0.04 * i as f64;
            let coupling = coupling_at(&params, drive.delta_a, beta);
            let s = solve_steady(&params, &drive, &coupling).unwrap();
            let amps = amplitudes_from_power(&params, &drive).unwrap();
            let gamma = coupling.gamma_tot;
            let u = coupling.delta_eff - g * s.x_bar;
            let denom = C64::new(gamma, u).powi(2) + coupling.j1 * coupling.j2;
            let a_cw_rhs = params.gamma_ex.sqrt() * amps.e_pump * C64::new(gamma, u) / denom;
            let a_ccw_rhs =
                C64::new(0.0, -1.0) * params.gamma_ex.sqrt() * amps.e_pump * coupling.j2 / denom;
            let x_rhs = params.hbar * g * params.gamma_ex * amps.e_pump * amps.e_pump
                * (coupling.j2.norm_sqr() + gamma * gamma + u * u)
                / (params.m_eff * params.omega_m * params.omega_m * denom.norm_sqr());
            assert!((a_cw_rhs - s.a_cw).norm() <= 1e-10 * s.a_cw.norm());
            assert!((a_ccw_rhs - s.a_ccw).norm() <= 1e-10 * s.a_ccw.norm().max(1e-300));
            assert!((x_rhs - s.x_bar).abs() <= 1e-10 * s.x_bar.abs());
        }
    }

    #[test]
    fn agrees_with_fixed_point_iteration() {
        // 200-point beta grid over [0, 1.6]: quintic-root x against the
        // damped fixed-point oracle, 1e-9 relative.
        let (params, drive) = setup();
        for i in 0..200 {
            let beta = 1.6 * i as f64 / 199.0;
            let coupling = coupling_at(&params, drive.delta_a, beta);
            let s = solve_steady(&params, &drive, &coupling).unwrap();
            let x_fp = fixed_point_xbar(&params, &drive, &coupling, 1e-12, 100_000).unwrap();
            assert!(
                (s.x_bar - x_fp).abs() <= 1e-9 * x_fp.abs(),
                "beta {beta}: quintic {} vs fixed point {x_fp}",
                s.x_bar
            );
            assert_eq!(s.branch_count, 1, "unexpected multistability at beta {beta}");
        }
    }

    #[test]
    fn weak_drive_displacement_is_linear_in_power() {
        let (params, mut drive) = setup();
        let coupling = coupling_at(&params, drive.delta_a, 0.2);
        drive.p_pump = 1e-9;
        let x1 = solve_steady(&params, &drive, &coupling).unwrap().x_bar;
        drive.p_pump = 2e-9;
        let x2 = solve_steady(&params, &drive, &coupling).unwrap().x_bar;
        assert!((x2 / x1 - 2.0).abs() < 0.01, "x2/x1 = {}", x2 / x1);
    }

    #[test]
    fn eta_matches_field_ratio() {
        let (params, drive) = setup();
        for &beta in &[0.05, 0.2, 0.35, 0.7, 1.3] {
            let coupling = coupling_at(&params, drive.delta_a, beta);
            let s = solve_steady(&params, &drive, &coupling).unwrap();
            let ratio = s.a_ccw.norm_sqr() / s.a_cw.norm_sqr();
            assert!((s.eta - ratio).abs() <= 1e-12 * ratio);
        }
    }

    #[test]
    fn eta_constant_for_single_scatterer() {
        let (mut params, drive) = setup();
        params.eps2 = C64::new(0.0, 0.0);
        let grid: Vec<f64> = (0..30).map(|i| 0.05 * i as f64).collect();
        let curve = eta_curve(&params, &drive, &grid).unwrap();
        for p in &curve {
            assert!((p.eta - curve[0].eta).abs() <= 1e-12 * curve[0].eta.max(1e-300));
        }
    }

    #[test]
    fn eta_vanishes_at_j2_zero_angle() {
        let (params, drive) = setup();
        let records = critical_angles(&params);
        let j2_zero = records
            .iter()
            .find(|r| r.branch == EpBranch::J2 && (r.beta_c - 0.3928).abs() < 1e-3)
            .expect("J2-vanishing record near 0.4");
        let coupling = coupling_at(&params, drive.delta_a, j2_zero.beta_c);
        let s = solve_steady(&params, &drive, &coupling).unwrap();
        assert!(s.eta < 1e-4, "eta = {}", s.eta);
    }

    #[test]
    fn eta_is_pi_over_4_periodic() {
        let (params, drive) = setup();
        let period = std::f64::consts::PI / 4.0;
        for i in 0..50 {
            let beta = 0.015 * i as f64 + 0.003;
            let c0 = coupling_at(&params, drive.delta_a, beta);
            let c1 = coupling_at(&params, drive.delta_a, beta + period);
            let e0 = solve_steady(&params, &drive, &c0).unwrap().eta;
            let e1 = solve_steady(&params, &drive, &c1).unwrap().eta;
            assert!((e0 - e1).abs() <= 1e-9 * e0.max(1e-12), "beta {beta}: {e0} vs {e1}");
        }
    }

    #[test]
    fn branch_count_is_odd_and_single_on_figure_powers() {
        let (params, mut drive) = setup();
        for &p_mw in &[0.1, 1.0, 10.0] {
            drive.p_pump = p_mw * 1e-3;
            for &beta in &[0.1, 0.2, 0.4, 0.6, 1.2] {
                let coupling = coupling_at(&params, drive.delta_a, beta);
                let s = solve_steady(&params, &drive, &coupling).unwrap();
                assert!([1usize, 3, 5].contains(&s.branch_count));
                assert_eq!(s.branch_count, 1, "P = {p_mw} mW, beta = {beta}");
            }
        }
    }

    #[test]
    fn fields_finite_across_full_angle_range() {
        let (params, drive) = setup();
        for i in 0..628 {
            let beta = 0.01 * i as f64;
            let coupling = coupling_at(&params, drive.delta_a, beta);
            let s = solve_steady(&params, &drive, &coupling).unwrap();
            assert!(s.a_cw.norm().is_finite() && s.a_ccw.norm().is_finite());
            assert!(s.x_bar.is_finite() && s.eta >= 0.0 && s.n_bar >= 0.0);
        }
    }
}
