//! Validation runner: every oracle cross-check in one report, one line per
//! check. Used by the `validate` CLI command, which exits nonzero when any
//! check fails.

use nalgebra::Matrix2;

use crate::coupling::{coupling_at, critical_angles};
use crate::oracles;
use crate::params::{C64, Config, DriveParams, FieldValue};
use crate::response::{
    group_delay, reconcile, transmission_amplitude,
};
use crate::steady::solve_steady;
use crate::sweep::{AxisSpec, SweepAxis, SweepSpec, run_sweep};
use crate::params::GridSpec;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// The measured figure of merit (a residual or deviation).
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {:<28} measured {:.3e}  tol {:.1e}{}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance,
                if c.detail.is_empty() { String::new() } else { format!("  ({})", c.detail) }
            )?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

struct Ctx {
    config: Config,
}

impl Ctx {
    fn push(&self, report: &mut ValidationReport, name: &'static str, measured: f64, tol: f64, detail: String) {
        report.checks.push(CheckResult { name, passed: measured <= tol, measured, tolerance: tol, detail });
    }
}

/// Runs every cross-check against the given configuration.
pub fn validate(config: &Config) -> Result<ValidationReport, crate::sweep::SweepError> {
    let ctx = Ctx { config: config.clone() };
    let mut report = ValidationReport::default();
    let (params, drive) = config.build()?;

    // Closed-form eigenfrequencies against the generic QR eigensolver on the
    // explicit mode matrix, over deterministic pseudo-random scatterers.
    {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let mut p = params;
            p.eps1 = C64::new(6.0 * next() - 3.0, -0.5 * next()) * params.gamma_a;
            p.eps2 = C64::new(6.0 * next() - 3.0, -0.5 * next()) * params.gamma_a;
            let beta = 2.0 * std::f64::consts::PI * next();
            let s = coupling_at(&p, 0.0, beta);
            let diag = C64::new(p.omega_a, -p.gamma_a) + p.eps1 + p.eps2;
            let (l1, l2) = oracles::eig2_qr(&Matrix2::new(diag, s.j1, s.j2, diag));
            let direct = (s.omega1 - l1).norm() + (s.omega2 - l2).norm();
            let swapped = (s.omega1 - l2).norm() + (s.omega2 - l1).norm();
            worst = worst.max(direct.min(swapped) / s.omega1.norm());
        }
        ctx.push(&mut report, "eigenvalues-vs-qr", worst, 1e-10, "100 random scatterer pairs".into());
    }

    // Refined critical angles against the brute-force scan: some record must
    // sit within one scan step of the scan argmin, or (for flat or degenerate
    // splitting curves, where the argmin is arbitrary) reach at least the
    // scanned minimum value.
    {
        let n = 1_000_000;
        let (beta_scan, val_scan) = oracles::dense_scan_min_splitting(&params, n);
        let step = 2.0 * std::f64::consts::PI / n as f64;
        let records = critical_angles(&params);
        let gap = records
            .iter()
            .map(|r| (r.beta_c - beta_scan).abs())
            .fold(f64::INFINITY, f64::min);
        let best = records.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
        let at_least_as_deep = best <= val_scan * (1.0 + 1e-9) + 1e-30;
        let measured = if at_least_as_deep { gap.min(step) } else { gap };
        ctx.push(
            &mut report,
            "ep-angle-vs-dense-scan",
            measured,
            step,
            format!("{n}-sample scan, argmin gap {gap:.3e}, min residual {best:.3e} vs scan {val_scan:.3e}"),
        );
    }

    // Quintic steady state against damped fixed-point iteration.
    {
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let beta = 1.6 * i as f64 / 199.0;
            let coupling = coupling_at(&params, drive.delta_a, beta);
            let steady = solve_steady(&params, &drive, &coupling)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            match oracles::fixed_point_xbar(&params, &drive, &coupling, 1e-12, 100_000) {
                Ok(x_fp) => worst = worst.max((steady.x_bar - x_fp).abs() / x_fp.abs().max(1e-300)),
                Err(e) => {
                    worst = f64::INFINITY;
                    ctx.push(&mut report, "steady-vs-fixed-point", worst, 1e-9, e);
                    break;
                }
            }
        }
        if worst.is_finite() {
            ctx.push(&mut report, "steady-vs-fixed-point", worst, 1e-9, "200-point angle grid".into());
        }
    }

    // Closed-form sideband reduction against the direct solve, and the
    // direct-solve residual itself.
    {
        let grid: Vec<f64> = (0..400)
            .map(|i| (-0.3 + 0.9 * i as f64 / 399.0) * params.omega_m)
            .collect();
        let rec = reconcile(&params, &drive, &[0.2, 0.4, 0.6], &grid)
            .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
        ctx.push(
            &mut report,
            "closed-form-vs-direct",
            rec.max_rel_dev_g_form,
            1e-6,
            format!("xi-prefactor variant deviates by {:.2e}", rec.max_rel_dev_xi_form),
        );
        ctx.push(&mut report, "direct-solve-residual", rec.max_direct_residual, 1e-10, String::new());
    }

    // Bare-cavity analytic limit.
    {
        let mut p = params;
        p.eps1 = C64::new(0.0, 0.0);
        p.eps2 = C64::new(0.0, 0.0);
        p.radius = f64::INFINITY;
        let coupling = coupling_at(&p, drive.delta_a, 0.0);
        let steady = solve_steady(&p, &drive, &coupling)
            .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
        let mut worst: f64 = 0.0;
        for i in 0..400 {
            let delta_p = (-0.3 + 0.9 * i as f64 / 399.0) * p.omega_m;
            let (t_p, _) = transmission_amplitude(&p, &drive, &coupling, &steady, delta_p)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            let expected = oracles::empty_cavity_transmission(
                coupling.gamma_tot,
                p.gamma_ex,
                coupling.delta_eff,
                delta_p + drive.delta_a,
            );
            worst = worst.max((t_p.norm_sqr() - expected).abs());
        }
        ctx.push(&mut report, "empty-cavity-lorentzian", worst, 1e-12, String::new());
    }

    // Finite-difference convergence of the group delay at representative
    // probe points.
    {
        let mut worst: f64 = 0.0;
        let mut detail = String::new();
        for (beta, dp_n) in [(0.0, 0.0), (0.2, 0.13), (0.4, 0.13), (0.6, 0.13), (0.4, 0.0)] {
            let coupling = coupling_at(&params, drive.delta_a, beta);
            let steady = solve_steady(&params, &drive, &coupling)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            match group_delay(&params, &drive, &coupling, &steady, dp_n * params.omega_m) {
                Ok(gd) => worst = worst.max(gd.achieved_tol),
                Err(e) => {
                    worst = f64::INFINITY;
                    detail = e.to_string();
                }
            }
        }
        ctx.push(&mut report, "group-delay-convergence", worst, 1e-4, detail);
    }

    // Passivity: no gain anywhere on the figure parameter sets.
    {
        let mut worst: f64 = 0.0;
        for &(beta, da_n) in &[(0.2, 1.0), (0.4, 1.0), (0.6, 1.0), (0.4, 0.87)] {
            let d = DriveParams { delta_a: da_n * params.omega_m, xi: da_n * params.omega_m, ..drive };
            let coupling = coupling_at(&params, d.delta_a, beta);
            let steady = solve_steady(&params, &d, &coupling)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            for i in 0..300 {
                let delta_p = (-0.3 + 0.9 * i as f64 / 299.0) * params.omega_m;
                let (t_p, _) = transmission_amplitude(&params, &d, &coupling, &steady, delta_p)
                    .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
                worst = worst.max(t_p.norm_sqr());
            }
        }
        ctx.push(&mut report, "passivity", worst, 1.0 + 1e-9, "max T over figure sets".into());
    }

    // Probe-power independence of T and tau_g.
    {
        let coupling = coupling_at(&params, drive.delta_a, 0.2);
        let steady = solve_steady(&params, &drive, &coupling)
            .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
        let strong = DriveParams { p_probe: drive.p_probe * 10.0, ..drive };
        let mut worst: f64 = 0.0;
        for &dp_n in &[0.0, 0.1, 0.13, 0.3] {
            let dp = dp_n * params.omega_m;
            let (t1, _) = transmission_amplitude(&params, &drive, &coupling, &steady, dp)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            let (t2, _) = transmission_amplitude(&params, &strong, &coupling, &steady, dp)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            let g1 = group_delay(&params, &drive, &coupling, &steady, dp)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            let g2 = group_delay(&params, &strong, &coupling, &steady, dp)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            worst = worst.max((t1 - t2).norm() / t1.norm().max(1e-300));
            worst = worst.max((g1.tau_g - g2.tau_g).abs() / g1.tau_g.abs().max(1e-300));
        }
        ctx.push(&mut report, "probe-power-independence", worst, 1e-12, "P_p vs 10 P_p".into());
    }

    // Determinism: identical spec twice, different worker counts, byte-equal
    // CSV.
    {
        let spec = SweepSpec {
            axis1: AxisSpec { param: SweepAxis::Beta, grid: GridSpec::new(0.0, 0.8, 5) },
            axis2: Some(AxisSpec {
                param: SweepAxis::DeltaPOverOmegaM,
                grid: GridSpec::new(0.0, 0.26, 3),
            }),
            fixed: Vec::new(),
            output_path: None,
        };
        let mut buffers = Vec::new();
        for workers in [Some(1), Some(4)] {
            let rows = run_sweep(&ctx.config, &spec, workers)?;
            let mut bytes = Vec::new();
            crate::output::write_sweep_csv(&mut bytes, "beta", Some("delta_p_over_omega_m"), &rows)
                .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
            buffers.push(bytes);
        }
        let identical = buffers[0] == buffers[1];
        ctx.push(
            &mut report,
            "sweep-determinism",
            if identical { 0.0 } else { 1.0 },
            0.0,
            "byte-identical CSV across worker counts".into(),
        );
    }

    // Config round trip: serialize, reparse, bitwise-equal records.
    {
        let text = ctx.config.to_toml_string();
        let reparsed = Config::from_toml_str(&text)?;
        let (p0, d0) = ctx.config.build()?;
        let (p1, d1) = reparsed.build()?;
        let equal = p0 == p1 && d0 == d1 && reparsed.to_toml_string() == text;
        ctx.push(&mut report, "config-round-trip", if equal { 0.0 } else { 1.0 }, 0.0, String::new());
    }

    // Single steady branch on the spectra figure sets (pump at or below
    // 1 mW). The delay maps reach powers where resonance pulling makes extra
    // branches genuinely appear near the exceptional angles; those nodes are
    // covered by the flagging check below instead of being asserted away.
    {
        let mut worst = 0usize;
        for &da_n in &[1.0, 0.87] {
            for &p_mw in &[0.1, 1.0] {
                let mut cfg = ctx.config.clone();
                cfg.set_field("delta_a_over_omega_m", FieldValue::Scalar(da_n))?;
                cfg.set_field("p_pump_w", FieldValue::Scalar(p_mw * 1e-3))?;
                let (p, d) = cfg.build()?;
                for i in 0..40 {
                    let beta = 1.6 * i as f64 / 39.0;
                    let coupling = coupling_at(&p, d.delta_a, beta);
                    let steady = solve_steady(&p, &d, &coupling)
                        .map_err(|e| crate::sweep::SweepError::InvalidSpec(e.to_string()))?;
                    worst = worst.max(steady.branch_count);
                }
            }
        }
        ctx.push(
            &mut report,
            "single-branch-at-figure-pump",
            worst as f64,
            1.0,
            "max branch_count at P <= 1 mW".into(),
        );
    }

    // Multistable nodes are flagged in sweep output rather than silently
    // resolved to one branch.
    {
        let spec = SweepSpec {
            axis1: AxisSpec { param: SweepAxis::PPumpW, grid: GridSpec::new(1.0e-3, 1.0e-2, 2) },
            axis2: None,
            fixed: vec![
                ("beta".into(), FieldValue::Scalar(0.4)),
                ("delta_p_over_omega_m".into(), FieldValue::Scalar(0.13)),
                ("delta_a_over_omega_m".into(), FieldValue::Scalar(0.87)),
            ],
            output_path: None,
        };
        let rows = run_sweep(&ctx.config, &spec, Some(1))?;
        let consistent = rows.iter().all(|r| {
            let multistable = r.branch_count.is_some_and(|c| c > 1);
            let flagged = r.error.as_deref().is_some_and(|e| e.contains("multistable"));
            multistable == flagged && r.branch_count.is_some()
        });
        ctx.push(
            &mut report,
            "multistable-nodes-flagged",
            if consistent { 0.0 } else { 1.0 },
            0.0,
            format!(
                "branch counts {:?}",
                rows.iter().map(|r| r.branch_count.unwrap_or(0)).collect::<Vec<_>>()
            ),
        );
    }

    Ok(report)
}
