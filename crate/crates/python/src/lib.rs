//! Python bindings exposing the main jcspec operations: the modified
//! coupling, quasi-energy ladder, forbidden-transition strength, and the
//! full spectrum pipeline driven by the same JSON configuration as the CLI.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: jcspec::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Modified coupling g'/g for a drive Omega/g and conventional 2kappa/g.
#[pyfunction]
fn g_prime(omega_over_g: f64, two_kappa_over_g: f64) -> PyResult<f64> {
    let params = jcspec::ModelParams::resonant(
        omega_over_g,
        jcspec::kappa_from_two_kappa_over_g(two_kappa_over_g),
        0.0,
    )
    .map_err(err)?;
    jcspec::g_prime(&params).map_err(err)
}

/// Quasi-energy of manifold n (branch +1/-1) at cavity-drive amplitude eps/g.
#[pyfunction]
fn quasi_energy(n: usize, branch: i32, eps_over_g: f64) -> PyResult<f64> {
    let branch = match branch {
        1 => jcspec::Branch::Plus,
        -1 => jcspec::Branch::Minus,
        0 => jcspec::Branch::Ground,
        _ => return Err(PyValueError::new_err("branch must be +1, -1 or 0")),
    };
    jcspec::quasi_energy(n, branch, 1.0, eps_over_g).map_err(err)
}

/// Eigenvalues of the effective Hamiltonian at the given truncation.
#[pyfunction]
fn eigen_ladder(omega_over_g: f64, two_kappa_over_g: f64, fock_dim: usize) -> PyResult<Vec<f64>> {
    let params = jcspec::ModelParams::resonant(
        omega_over_g,
        jcspec::kappa_from_two_kappa_over_g(two_kappa_over_g),
        0.0,
    )
    .map_err(err)?;
    let spec = jcspec::HilbertSpec::new(fock_dim).map_err(err)?;
    let h = jcspec::hamiltonian(&params, spec, jcspec::Drive::Effective).map_err(err)?;
    Ok(jcspec::eigen(&h)
        .map_err(err)?
        .into_iter()
        .map(|m| m.energy)
        .collect())
}

/// Damping-induced manifold-2 -> 0 transition strength |<chi0|s-|chi2+>|^2.
#[pyfunction]
fn forbidden_strength(
    omega_over_g: f64,
    two_kappa_over_g: f64,
    fock_dim: usize,
) -> PyResult<f64> {
    let params = jcspec::ModelParams::resonant(
        omega_over_g,
        jcspec::kappa_from_two_kappa_over_g(two_kappa_over_g),
        0.0,
    )
    .map_err(err)?;
    let spec = jcspec::HilbertSpec::new(fock_dim).map_err(err)?;
    jcspec::forbidden_strength(&params, spec).map_err(err)
}

/// Run the spectrum pipeline from a JSON configuration string.
///
/// Returns (deltas, intensities, peaks) with peaks as
/// (label, delta, height, log10_height) tuples; unlabeled peaks carry
/// label "unassigned".
#[pyfunction]
#[allow(clippy::type_complexity)]
fn compute_spectrum(
    config_json: &str,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<(String, f64, f64, f64)>)> {
    let config = jcspec::RunConfig::load(config_json, &[]).map_err(err)?;
    let run = jcspec::pipeline::compute_spectrum(&config).map_err(err)?;
    let peaks = run
        .peaks
        .peaks
        .iter()
        .map(|p| {
            (
                p.label
                    .map(|l| l.symbol().to_string())
                    .unwrap_or_else(|| "unassigned".to_string()),
                p.delta,
                p.height,
                p.log_height,
            )
        })
        .collect();
    Ok((
        run.spectrum.delta_grid.to_vec(),
        run.spectrum.intensity.to_vec(),
        peaks,
    ))
}

#[pymodule]
fn _jcspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(g_prime, m)?)?;
    m.add_function(wrap_pyfunction!(quasi_energy, m)?)?;
    m.add_function(wrap_pyfunction!(eigen_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(forbidden_strength, m)?)?;
    m.add_function(wrap_pyfunction!(compute_spectrum, m)?)?;
    Ok(())
}
