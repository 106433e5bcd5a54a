//! Pipeline orchestration behind the CLI subcommands, and the bit-stable CSV
//! writers. Real-valued CSV columns carry 9 significant digits; files are
//! written once, after all computation.

use crate::analysis::{
    classify_peaks, enhancement_sweep, find_peaks, PeakSet, SweepOptions, SweepVariable,
};
use crate::config::{MethodChoice, RunConfig};
use crate::error::{Error, Result};
use crate::hilbert::HilbertSpec;
use crate::liouvillian::steady_state_auto;
use crate::model::{self, Branch, Drive};
use crate::spectrum::{
    delta_grid, max_relative_deviation, spectrum_fft, spectrum_resolvent, two_time_correlation,
    Spectrum,
};
use std::fmt::Write as _;
use std::path::Path;

/// Fock-truncation growth cap for the automatic raise.
pub const FOCK_CAP: usize = 60;
/// Peak-position tolerance for ladder classification (units of g).
pub const POSITION_TOLERANCE: f64 = 0.02;
/// Interior intensity floor for the method cross-check.
pub const CROSS_CHECK_FLOOR: f64 = 1e-6;

fn sig9(x: f64) -> String {
    format!("{:.8e}", x)
}

/// Outputs of a spectrum run, before serialization.
pub struct SpectrumRun {
    pub spectrum: Spectrum,
    pub peaks: PeakSet,
    pub g_prime: f64,
    /// Max relative deviation between methods (method = both only).
    pub methods_deviation: Option<f64>,
    pub fock_used: usize,
}

/// Compute spectrum and peaks per the configuration.
pub fn compute_spectrum(config: &RunConfig) -> Result<SpectrumRun> {
    let params = config.params()?;
    let (spec, l, rho) = steady_state_auto(
        &params,
        config.frame.frame(),
        config.fock_dim,
        FOCK_CAP,
    )?;
    let grid = delta_grid(config.delta_min, config.delta_max, config.delta_points)?;

    let (spectrum, methods_deviation) = match config.method {
        MethodChoice::Resolvent => (spectrum_resolvent(&l, &rho, &grid)?, None),
        MethodChoice::Fft => {
            let corr = two_time_correlation(&l, &rho, config.tau_max, config.dt)?;
            (spectrum_fft(&corr, &grid)?, None)
        }
        MethodChoice::Both => {
            let resolvent = spectrum_resolvent(&l, &rho, &grid)?;
            let corr = two_time_correlation(&l, &rho, config.tau_max, config.dt)?;
            let fft = spectrum_fft(&corr, &grid)?;
            let dev = max_relative_deviation(&fft, &resolvent, CROSS_CHECK_FLOOR);
            (resolvent, Some(dev))
        }
    };

    let found = find_peaks(&spectrum, config.min_prominence_log);
    let gp = model::g_prime(&params)?;
    let peaks = classify_peaks(&found, gp, POSITION_TOLERANCE)?;
    Ok(SpectrumRun {
        spectrum,
        peaks,
        g_prime: gp,
        methods_deviation,
        fock_used: spec.fock_dim(),
    })
}

/// `jcspec spectrum`: writes spectrum.csv and peaks.csv, plus
/// methods_check.txt when both methods run (failing above 1% deviation).
pub fn run_spectrum(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let run = compute_spectrum(config)?;
    std::fs::create_dir_all(out_dir)?;

    let mut spectrum_csv = String::from("delta_over_g,intensity,log10_intensity\n");
    let logs = run.spectrum.log10_intensity();
    for (k, &d) in run.spectrum.delta_grid.iter().enumerate() {
        let _ = writeln!(
            spectrum_csv,
            "{},{},{}",
            sig9(d),
            sig9(run.spectrum.intensity[k]),
            sig9(logs[k])
        );
    }
    std::fs::write(out_dir.join("spectrum.csv"), spectrum_csv)?;

    let mut peaks_csv = String::from("label,delta_over_g,height,log10_height\n");
    for p in &run.peaks.peaks {
        let label = p
            .label
            .map(|l| l.symbol().to_string())
            .unwrap_or_else(|| "unassigned".to_string());
        let _ = writeln!(
            peaks_csv,
            "{},{},{},{}",
            label,
            sig9(p.delta),
            sig9(p.height),
            sig9(p.log_height)
        );
    }
    std::fs::write(out_dir.join("peaks.csv"), peaks_csv)?;

    if let Some(dev) = run.methods_deviation {
        std::fs::write(
            out_dir.join("methods_check.txt"),
            format!("max_relative_deviation = {}\n", sig9(dev)),
        )?;
        if dev > 0.01 {
            return Err(Error::MethodMismatch { max_rel_dev: dev });
        }
    }
    Ok(())
}

/// Rows of eigen.csv: ladder index, branch, analytic and numeric energies.
pub struct EigenRow {
    pub n: usize,
    pub branch: Branch,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_diff: f64,
}

/// Analytic-vs-numeric quasi-energy table for the effective Hamiltonian,
/// convergence-checked by recomputation at fock_dim + 10.
pub fn compute_eigen_table(config: &RunConfig) -> Result<Vec<EigenRow>> {
    let params = config.params()?;
    if !params.quasi_energy_valid() {
        return Err(Error::InvalidRegime {
            ratio: params.drive_damping_ratio()?,
        });
    }
    let eps = params.eps_eff()?;
    let n_max = 6.min(config.fock_dim.saturating_sub(2));

    let energies_at = |fock: usize| -> Result<Vec<f64>> {
        let spec = HilbertSpec::new(fock)?;
        let h = model::hamiltonian(&params, spec, Drive::Effective)?;
        Ok(model::eigen(&h)?.into_iter().map(|m| m.energy).collect())
    };
    let small = energies_at(config.fock_dim)?;
    let large = energies_at(config.fock_dim + 10)?;
    let nearest = |set: &[f64], target: f64| -> f64 {
        set.iter()
            .copied()
            .min_by(|a, b| {
                (a - target)
                    .abs()
                    .partial_cmp(&(b - target).abs())
                    .unwrap()
            })
            .unwrap()
    };

    let mut rows = Vec::new();
    for n in 0..=n_max {
        let branches: &[Branch] = if n == 0 {
            &[Branch::Ground]
        } else {
            &[Branch::Plus, Branch::Minus]
        };
        for &branch in branches {
            let analytic = model::quasi_energy(n, branch, params.g, eps)?;
            let numeric = nearest(&small, analytic);
            let refined = nearest(&large, analytic);
            if (numeric - refined).abs() >= 1e-6 {
                return Err(Error::Numerical(format!(
                    "eigenvalue for manifold {n}{} not converged: shift {:.3e} between fock_dim {} and {}",
                    branch.symbol(),
                    (numeric - refined).abs(),
                    config.fock_dim,
                    config.fock_dim + 10
                )));
            }
            rows.push(EigenRow {
                n,
                branch,
                analytic,
                numeric,
                abs_diff: (analytic - numeric).abs(),
            });
        }
    }
    Ok(rows)
}

/// `jcspec eigen`: writes eigen.csv.
pub fn run_eigen(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let rows = compute_eigen_table(config)?;
    std::fs::create_dir_all(out_dir)?;
    let mut csv = String::from("n,branch,analytic,numeric,abs_diff\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.n,
            r.branch.symbol(),
            sig9(r.analytic),
            sig9(r.numeric),
            sig9(r.abs_diff)
        );
    }
    std::fs::write(out_dir.join("eigen.csv"), csv)?;
    Ok(())
}

/// `jcspec sweep`: values arrive in the config dialect (two_kappa_over_g or
/// omega_over_g); writes sweep.csv with per-row error propagation.
pub fn run_sweep(
    config: &RunConfig,
    vary: SweepVariable,
    values: &[f64],
    out_dir: &Path,
) -> Result<()> {
    let params = config.params()?;
    let opts = SweepOptions {
        fock_dim: config.fock_dim,
        fock_cap: FOCK_CAP,
        delta_min: config.delta_min,
        delta_max: config.delta_max,
        delta_points: config.delta_points,
        min_prominence_log: config.min_prominence_log,
        position_tolerance: POSITION_TOLERANCE,
    };
    let (param_name, rate_values): (&str, Vec<f64>) = match vary {
        SweepVariable::Kappa => (
            "two_kappa_over_g",
            values
                .iter()
                .map(|&v| model::kappa_from_two_kappa_over_g(v))
                .collect(),
        ),
        SweepVariable::Omega => ("omega_over_g", values.to_vec()),
    };

    let rows = enhancement_sweep(&params, vary, &rate_values, &opts);
    let mut csv = String::from("swept_param,swept_value,height_b_over_a,height_c_over_a\n");
    let mut first_err: Option<Error> = None;
    for (dialect_value, row) in values.iter().zip(rows) {
        match row.outcome {
            Ok(r) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    param_name,
                    sig9(*dialect_value),
                    sig9(r.height_b_over_a),
                    sig9(r.height_c_over_a)
                );
            }
            Err(e) => {
                eprintln!("jcspec: sweep row {param_name}={dialect_value}: {e}");
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("sweep.csv"), csv)?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(sig9(1.4074198921597265), "1.40741989e0");
        assert_eq!(sig9(0.00016044433368), "1.60444334e-4");
        assert_eq!(sig9(-0.412233946), "-4.12233946e-1");
        assert_eq!(sig9(0.0), "0.00000000e0");
    }

    #[test]
    fn eigen_table_lossless_matches_bare_ladder() {
        let config = RunConfig::load(
            r#"{"omega_over_g": 2.6666666666666665, "two_kappa_over_g": 0.0, "fock_dim": 20}"#,
            &[],
        )
        .unwrap();
        let rows = compute_eigen_table(&config).unwrap();
        for r in &rows {
            assert_eq!(r.analytic, r.branch.sign() * (r.n as f64).sqrt());
            assert!(r.abs_diff < 1e-8, "n={} diff {}", r.n, r.abs_diff);
        }
        assert_eq!(rows.len(), 13); // n=0 once, n=1..6 twice
    }

    #[test]
    fn eigen_table_effective_drive() {
        let config = RunConfig::load(
            r#"{"omega_over_g": 2.6666666666666665, "two_kappa_over_g": 0.03, "fock_dim": 20}"#,
            &[],
        )
        .unwrap();
        let rows = compute_eigen_table(&config).unwrap();
        // analytic column is the quasi-energy ladder at g' = 0.995196
        let gp = 0.995196149722982;
        for r in rows.iter().filter(|r| r.n <= 3) {
            assert!(
                (r.analytic - r.branch.sign() * (r.n as f64).sqrt() * gp).abs() < 1e-9,
                "n={} analytic {}",
                r.n,
                r.analytic
            );
            assert!(r.abs_diff < 1e-3);
        }
    }
}
