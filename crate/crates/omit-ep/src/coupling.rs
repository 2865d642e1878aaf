//! Non-Hermitian coupling of the clockwise/counterclockwise traveling waves
//! induced by the two scatterers: scattering rates, complex eigenfrequencies,
//! frequency splitting, and exceptional-point location versus the relative
//! scatterer angle.

use serde::Serialize;

use crate::params::{C64, PhysicalParams};

/// Everything the two-scatterer coupling determines at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingState {
    /// Relative scatterer angle [rad].
    pub beta: f64,
    /// CCW -> CW scattering rate J1 = eps1 + eps2 e^{-i 2 m beta} [rad/s].
    pub j1: C64,
    /// CW -> CCW scattering rate J2 = eps1 + eps2 e^{+i 2 m beta} [rad/s].
    pub j2: C64,
    /// Effective pump detuning Delta = Delta_a + Re(eps1 + eps2) [rad/s].
    pub delta_eff: f64,
    /// Total optical loss gamma = gamma_a - Im(eps1 + eps2) [rad/s].
    pub gamma_tot: f64,
    /// Complex eigenfrequencies of the coupled mode pair [rad/s].
    pub omega1: C64,
    pub omega2: C64,
    /// Complex splitting Delta_omega = omega1 - omega2 = 2 sqrt(J1 J2),
    /// principal branch [rad/s].
    pub delta_omega: C64,
}

/// Which scattering rate vanishes at (or nearest to) an exceptional point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EpBranch {
    J1,
    J2,
}

impl std::fmt::Display for EpBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EpBranch::J1 => write!(f, "J1"),
            EpBranch::J2 => write!(f, "J2"),
        }
    }
}

/// A located minimum of |Delta_omega(beta)|. `residual` is |Delta_omega| at
/// the refined angle; callers choose their own threshold for calling it an
/// exceptional point (with mismatched |eps1| != |eps2| the minima are near-EPs
/// with nonzero residual).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpRecord {
    /// Refined angle of the splitting minimum [rad].
    pub beta_c: f64,
    /// Which rate vanishes (or is smallest) here.
    pub branch: EpBranch,
    /// |Delta_omega(beta_c)| [rad/s].
    pub residual: f64,
    /// The surviving coupling rate at beta_c [rad/s].
    pub j_other: C64,
}

/// One row of the splitting curve, sign-aligned for continuity in beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitPoint {
    pub beta: f64,
    pub re_domega: f64,
    pub im_domega: f64,
    pub abs_j1: f64,
    pub abs_j2: f64,
}

/// Evaluates the coupling at one angle. Total function on valid parameters.
pub fn coupling_at(params: &PhysicalParams, delta_a: f64, beta: f64) -> CouplingState {
    let psi = 2.0 * f64::from(params.azimuthal_m) * beta;
    let phase = C64::from_polar(1.0, psi);
    let j1 = params.eps1 + params.eps2 * phase.conj();
    let j2 = params.eps1 + params.eps2 * phase;
    let eps_sum = params.eps1 + params.eps2;
    // Principal square root; splitting magnitude and zeros are branch
    // independent, and curve tracing re-aligns signs separately.
    let sq = (j1 * j2).sqrt();
    let center = C64::new(params.omega_a, -params.gamma_a) + eps_sum;
    CouplingState {
        beta,
        j1,
        j2,
        delta_eff: delta_a + eps_sum.re,
        gamma_tot: params.gamma_a - eps_sum.im,
        omega1: center + sq,
        omega2: center - sq,
        delta_omega: 2.0 * sq,
    }
}

/// |Delta_omega(beta)| without constructing the full state.
fn abs_splitting(params: &PhysicalParams, beta: f64) -> f64 {
    let psi = 2.0 * f64::from(params.azimuthal_m) * beta;
    let phase = C64::from_polar(1.0, psi);
    let j1 = params.eps1 + params.eps2 * phase.conj();
    let j2 = params.eps1 + params.eps2 * phase;
    2.0 * (j1 * j2).norm().sqrt()
}

/// Golden-section minimization on a unimodal bracket, to absolute tolerance
/// `tol` on the argument.
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Argument-angle tolerance of the exceptional-point refinement [rad].
pub const EP_REFINE_TOL: f64 = 1e-12;

/// Locates every minimum of |Delta_omega(beta)| in beta within [0, 2pi),
/// refined by golden-section search and sorted by angle.
///
/// Seeds come from the phase-alignment angles beta = (l pi -+ delta)/(2m)
/// with l odd and delta = arg(eps1) - arg(eps2): J1 aligns destructively at
/// the `-` seed and J2 at the `+` seed. In the phase variable psi = 2 m beta
/// the product |J1 J2| has critical points at psi = k pi plus the pair of
/// minima at cos(psi) = -(A/B) cos(delta) (A = |eps1|^2 + |eps2|^2,
/// B = 2 |eps1 eps2|) when that is solvable; each minimum therefore sits
/// alone between consecutive multiples of pi, which gives a guaranteed
/// unimodal golden-section bracket. When (A/B) cos(delta) >= 1 the two
/// branch minima merge at odd multiples of pi.
pub fn critical_angles(params: &PhysicalParams) -> Vec<EpRecord> {
    let m = f64::from(params.azimuthal_m);
    let abs1 = params.eps1.norm();
    let abs2 = params.eps2.norm();
    let f = |beta: f64| abs_splitting(params, beta);

    let mut records: Vec<EpRecord> = Vec::new();
    let mut push_record = |beta_c: f64, seed_branch: EpBranch| {
        let state = coupling_at(params, 0.0, beta_c);
        let (n1, n2) = (state.j1.norm(), state.j2.norm());
        let branch = if n1 < n2 * (1.0 - 1e-12) {
            EpBranch::J1
        } else if n2 < n1 * (1.0 - 1e-12) {
            EpBranch::J2
        } else {
            seed_branch
        };
        let j_other = match branch {
            EpBranch::J1 => state.j2,
            EpBranch::J2 => state.j1,
        };
        records.push(EpRecord { beta_c, branch, residual: 2.0 * (n1 * n2).sqrt(), j_other });
    };

    if abs1 * abs2 == 0.0 {
        // At most one scatterer couples: |Delta_omega| is constant in beta
        // and every angle is a (flat) minimum. Report the alignment seeds.
        for k in 0..2 * params.azimuthal_m {
            let beta_c = (2.0 * f64::from(k) + 1.0) * std::f64::consts::PI / (2.0 * m);
            push_record(beta_c, EpBranch::J1);
            push_record(beta_c, EpBranch::J2);
        }
        records.sort_by(|a, b| a.beta_c.total_cmp(&b.beta_c));
        return records;
    }

    let delta = wrap_angle(params.eps1.arg() - params.eps2.arg());
    let t = (abs1 * abs1 + abs2 * abs2) / (2.0 * abs1 * abs2) * delta.cos();
    let pi = std::f64::consts::PI;
    let pad = 1e-9 * pi;
    // Minima of |J1 J2| within one psi period, each with the unimodal bracket
    // formed by its enclosing critical points (the maxima at multiples of pi).
    let psi_star = (-t).clamp(-1.0, 1.0).acos(); // in [0, pi]
    let local: Vec<(f64, f64, EpBranch)> = if psi_star > 0.0 && psi_star < pi {
        // Distinct pair: one dip in (0, pi), its mirror in (pi, 2pi). Assign
        // branches by circular distance to the alignment angles pi -+ delta.
        let align_j1 = (pi - delta).rem_euclid(2.0 * pi);
        let circ = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(2.0 * pi);
            d.min(2.0 * pi - d)
        };
        let (first, second) = if circ(psi_star, align_j1) <= circ(2.0 * pi - psi_star, align_j1) {
            (EpBranch::J1, EpBranch::J2)
        } else {
            (EpBranch::J2, EpBranch::J1)
        };
        vec![
            (pad, pi - pad, first),
            (pi + pad, 2.0 * pi - pad, second),
        ]
    } else if psi_star == pi {
        // Merged pair at odd multiples of pi: one minimum shared by both
        // branches, bracketed by the full-height maxima at even multiples.
        vec![(pad, 2.0 * pi - pad, EpBranch::J1), (pad, 2.0 * pi - pad, EpBranch::J2)]
    } else {
        // Merged pair at even multiples of pi.
        vec![(-pi + pad, pi - pad, EpBranch::J1), (-pi + pad, pi - pad, EpBranch::J2)]
    };

    for k in 0..2 * params.azimuthal_m {
        let psi0 = 2.0 * pi * f64::from(k);
        for &(lo_psi, hi_psi, seed_branch) in &local {
            let lo = (psi0 + lo_psi) / (2.0 * m);
            let hi = (psi0 + hi_psi) / (2.0 * m);
            let beta_c = golden_min(&f, lo, hi, EP_REFINE_TOL).rem_euclid(2.0 * pi);
            push_record(beta_c, seed_branch);
        }
    }
    records.sort_by(|a, b| a.beta_c.total_cmp(&b.beta_c));
    records
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y > std::f64::consts::PI {
        y -= two_pi;
    } else if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

/// Splitting curve over a beta grid, with the square-root sign chosen for
/// continuity point to point (nearest-neighbor pairing), which lets the real
/// and imaginary parts pass smoothly through zero at the exceptional points.
pub fn splitting_curve(params: &PhysicalParams, beta_grid: &[f64]) -> Vec<SplitPoint> {
    let mut out = Vec::with_capacity(beta_grid.len());
    let mut prev: Option<C64> = None;
    for &beta in beta_grid {
        let state = coupling_at(params, 0.0, beta);
        let mut dw = state.delta_omega;
        if let Some(p) = prev {
            if (dw - p).norm() > (-dw - p).norm() {
                dw = -dw;
            }
        }
        prev = Some(dw);
        out.push(SplitPoint {
            beta,
            re_domega: dw.re,
            im_domega: dw.im,
            abs_j1: state.j1.norm(),
            abs_j2: state.j2.norm(),
        });
    }
    out
}
