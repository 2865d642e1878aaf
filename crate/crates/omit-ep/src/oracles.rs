//! Independent reference implementations used to cross-check the production
//! code paths. Nothing here shares algebra with the module it checks: the
//! eigensolver iterates QR steps instead of evaluating the closed form, the
//! steady-state oracle iterates the fixed point instead of rooting the
//! polynomial, and the scan oracle brute-forces the splitting minimum.

use nalgebra::Matrix2;

use crate::coupling::CouplingState;
use crate::params::{C64, DriveParams, PhysicalParams, amplitudes_from_power};

/// Eigenvalues of a dense complex 2x2 matrix by Wilkinson-shifted QR
/// iteration with complex Givens rotations. The shift is the root of the
/// local characteristic equation nearest the trailing diagonal entry,
/// computed cancellation-free from the half-gap and the off-diagonal product.
pub fn eig2_qr(m: &Matrix2<C64>) -> (C64, C64) {
    let mut a11 = m[(0, 0)];
    let mut a12 = m[(0, 1)];
    let mut a21 = m[(1, 0)];
    let mut a22 = m[(1, 1)];
    let scale = a11.norm() + a12.norm() + a21.norm() + a22.norm();
    if scale == 0.0 {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    for _ in 0..200 {
        if a21.norm() <= 1e-30 * scale {
            break;
        }
        let half_gap = 0.5 * (a11 - a22);
        let disc = (half_gap * half_gap + a12 * a21).sqrt();
        // Branch choice avoiding cancellation in the denominator.
        let denom = if (half_gap + disc).norm() >= (half_gap - disc).norm() {
            half_gap + disc
        } else {
            half_gap - disc
        };
        let shift = if denom.norm() == 0.0 { a22 } else { a22 - a12 * a21 / denom };
        let b11 = a11 - shift;
        let b21 = a21;
        let r = (b11.norm_sqr() + b21.norm_sqr()).sqrt();
        if r == 0.0 {
            break;
        }
        // Unitary G = [[c, s], [-s^H, c^H]]/r zeroing the (2,1) entry of the
        // shifted matrix; the iterate is G B G^H + shift I.
        let c = b11.conj() / r;
        let s = b21.conj() / r;
        let b12 = a12;
        let b22 = a22 - shift;
        // Rows of G B.
        let g11 = c * b11 + s * b21;
        let g12 = c * b12 + s * b22;
        let g21 = -s.conj() * b11 + c.conj() * b21;
        let g22 = -s.conj() * b12 + c.conj() * b22;
        // Columns of (G B) G^H.
        a11 = g11 * c.conj() + g12 * s.conj() + shift;
        a12 = -g11 * s + g12 * c;
        a21 = g21 * c.conj() + g22 * s.conj();
        a22 = -g21 * s + g22 * c + shift;
    }
    (a11, a22)
}

/// Damped fixed-point iteration of the steady-state displacement equation
/// starting from x = 0, to relative tolerance `tol` on x. Converges to the
/// branch continuously connected to the undriven solution.
pub fn fixed_point_xbar(
    params: &PhysicalParams,
    drive: &DriveParams,
    coupling: &CouplingState,
    tol: f64,
    max_iter: usize,
) -> Result<f64, String> {
    let amps = amplitudes_from_power(params, drive).map_err(|e| e.to_string())?;
    let g = params.g();
    let gamma = coupling.gamma_tot;
    let delta = coupling.delta_eff;
    let product = coupling.j1 * coupling.j2;
    let j2_sq = coupling.j2.norm_sqr();
    let flux = params.gamma_ex * amps.e_pump * amps.e_pump;
    let force_scale = params.hbar * g / (params.m_eff * params.omega_m * params.omega_m);

    let f = |x: f64| -> f64 {
        let u = delta - g * x;
        let d = C64::new(gamma, u).powi(2) + product;
        force_scale * flux * (gamma * gamma + u * u + j2_sq) / d.norm_sqr()
    };

    let damping = 0.5;
    let mut x = 0.0;
    for _ in 0..max_iter {
        let next = (1.0 - damping) * x + damping * f(x);
        let delta_x = (next - x).abs();
        x = next;
        if delta_x <= tol * x.abs().max(1e-300) {
            return Ok(x);
        }
    }
    Err(format!("fixed point did not reach tol {tol} in {max_iter} iterations (x = {x})"))
}

/// Brute-force argmin of |Delta_omega(beta)| over `n` uniform samples of
/// [0, 2pi). Returns (beta, |Delta_omega|).
pub fn dense_scan_min_splitting(params: &PhysicalParams, n: usize) -> (f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..n {
        let beta = two_pi * k as f64 / n as f64;
        let psi = 2.0 * f64::from(params.azimuthal_m) * beta;
        let phase = C64::from_polar(1.0, psi);
        let j1 = params.eps1 + params.eps2 * phase.conj();
        let j2 = params.eps1 + params.eps2 * phase;
        let value = 2.0 * (j1 * j2).norm().sqrt();
        if value < best.1 {
            best = (beta, value);
        }
    }
    best
}

/// Analytic probe transmission of the bare cavity (no scatterers, no
/// optomechanical coupling): T = |1 - gamma_ex / (gamma + i (Delta - xi))|^2.
pub fn empty_cavity_transmission(gamma: f64, gamma_ex: f64, delta: f64, xi: f64) -> f64 {
    (C64::new(1.0, 0.0) - gamma_ex / C64::new(gamma, delta - xi)).norm_sqr()
}
