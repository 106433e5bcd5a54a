//! Steady-state two-time atomic correlation by the quantum regression
//! theorem and the incoherent fluorescence spectrum it transforms into,
//! computed by two independent routes that must agree:
//!
//! * time route: propagate `sigma_- rho_ss` under `exp(L tau)` on a uniform
//!   delay grid, then take the half-sided Fourier transform with trapezoidal
//!   end correction;
//! * frequency route: evaluate the resolvent `(-i Delta - L)^{-1}` in the
//!   Liouvillian eigenbasis, one rational term per mode.
//!
//! Both produce `S(Delta) = Re Int_0^inf dtau e^{i Delta tau} [C(tau) - C_inf]`
//! with `C(tau) = Tr[sigma_+ exp(L tau) (sigma_- rho_ss)]` and the coherent
//! offset `C_inf = <sigma_+><sigma_->` removed (the elastic line is not part
//! of the reported spectrum). The atomic operators commute with the
//! displacement, so either frame yields the same lab-frame correlator.

use crate::error::{Error, Result};
use crate::hilbert;
use crate::linalg::{self, vec_cs};
use crate::liouvillian::{DensityMatrix, Superoperator};
use ndarray::prelude::*;
use num_complex::Complex64 as C64;

/// Atomic dipole correlation on a uniform delay grid.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    /// Delay step (units 1/g).
    pub dt: f64,
    /// `C(k dt)` including the coherent offset.
    pub values: Vec<C64>,
    /// `<sigma_+>_ss <sigma_->_ss`, the tau -> infinity limit.
    pub coherent_offset: C64,
}

impl CorrelationSeries {
    pub fn tau_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Incoherent part `C(k dt) - offset`.
    pub fn incoherent(&self, k: usize) -> C64 {
        self.values[k] - self.coherent_offset
    }

    pub fn max_incoherent(&self) -> f64 {
        (0..self.values.len())
            .map(|k| self.incoherent(k).norm())
            .fold(0.0, f64::max)
    }
}

/// Incoherent fluorescence intensity versus detuning, normalized to its peak.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Detunings Delta = omega - omega_0 in units of g.
    pub delta_grid: Array1<f64>,
    /// Intensity, max = 1 after normalization (all zero when flagged).
    pub intensity: Array1<f64>,
    /// Pre-normalization peak value; 0.0 flags an all-zero spectrum.
    pub normalization: f64,
}

impl Spectrum {
    pub fn is_zero(&self) -> bool {
        self.normalization == 0.0
    }

    pub fn log10_intensity(&self) -> Array1<f64> {
        self.intensity.mapv(|x| x.max(1e-300).log10())
    }

    /// Intensity at the grid point nearest to `delta`.
    pub fn nearest(&self, delta: f64) -> f64 {
        let mut best = 0usize;
        let mut dist = f64::INFINITY;
        for (k, d) in self.delta_grid.iter().enumerate() {
            let e = (d - delta).abs();
            if e < dist {
                dist = e;
                best = k;
            }
        }
        self.intensity[best]
    }
}

fn check_stationary(l: &Superoperator, rho_ss: &DensityMatrix) -> Result<()> {
    if rho_ss.spec() != l.spec() {
        return Err(Error::SpecMismatch {
            expected: l.spec().dim(),
            got: rho_ss.spec().dim(),
        });
    }
    let residual = linalg::max_abs_vec(&l.apply_vec(&vec_cs(rho_ss.matrix())));
    if residual > 1e-6 {
        return Err(Error::NotStationary { residual });
    }
    Ok(())
}

/// The regression source `sigma_- rho - <sigma_-> rho` and the offset.
fn regression_source(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
) -> Result<(Array1<C64>, C64, f64)> {
    let spec = l.spec();
    let (sm, sp, _) = hilbert::atomic_operators(spec);
    let s_minus = rho_ss.expectation(&sm)?;
    let s_plus = rho_ss.expectation(&sp)?;
    let n_exc = rho_ss.expectation(&sp.mul(&sm)?)?;
    let x = sm.matrix().dot(rho_ss.matrix()) - rho_ss.matrix().mapv(|z| z * s_minus);
    Ok((vec_cs(&x), s_plus * s_minus, n_exc.re))
}

/// Row functional computing `Tr[sigma_+ Y]` on column-stacked `Y`.
fn sigma_plus_row(l: &Superoperator) -> Array1<C64> {
    let (_, sp, _) = hilbert::atomic_operators(l.spec());
    vec_cs(&sp.matrix().t().to_owned())
}

/// Two-time correlation `C(tau) = Tr[sigma_+ exp(L tau)(sigma_- rho_ss)]` on
/// a uniform grid, evaluated with one matrix exponential per block scale.
///
/// `rho_ss` must be stationary within 1e-6.
pub fn two_time_correlation(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    tau_max: f64,
    dt: f64,
) -> Result<CorrelationSeries> {
    if !(dt > 0.0) || !(tau_max > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need tau_max > 0 and dt > 0, got {tau_max}, {dt}"
        )));
    }
    check_stationary(l, rho_ss)?;
    let (mut x, offset, n_exc) = regression_source(l, rho_ss)?;
    let w = sigma_plus_row(l);

    let steps = (tau_max / dt).round() as usize;
    let p = linalg::expm(&l.matrix().mapv(|z| z * C64::new(dt, 0.0)))?;

    // block evaluation: C_sub(km + j) = w P^j . (P^m)^k x with m a power of
    // two so the jump matrix costs log2(m) squarings
    let m = {
        let target = ((steps + 1) as f64).sqrt();
        let mut m = 1usize;
        while (m as f64) < target {
            m <<= 1;
        }
        m.min(steps + 1)
    };
    let mut w_rows: Vec<Array1<C64>> = Vec::with_capacity(m);
    w_rows.push(w);
    let pt = p.t();
    for j in 1..m {
        w_rows.push(pt.dot(&w_rows[j - 1]));
    }
    let jump = linalg::matrix_power(&p, m);

    let mut c_sub = Vec::with_capacity(steps + 1);
    let mut k0 = 0usize;
    while k0 <= steps {
        let last = (k0 + m - 1).min(steps);
        for j in 0..=(last - k0) {
            c_sub.push(w_rows[j].dot(&x));
        }
        k0 += m;
        if k0 <= steps {
            x = jump.dot(&x);
        }
    }

    let values: Vec<C64> = c_sub.iter().map(|c| c + offset).collect();
    // C(0) must equal <sigma_+ sigma_->_ss
    let c0_err = (values[0] - C64::new(n_exc, 0.0)).norm();
    if c0_err > 1e-8 {
        return Err(Error::Numerical(format!(
            "correlation C(0) deviates from <sigma_+ sigma_-> by {c0_err:.3e}"
        )));
    }
    Ok(CorrelationSeries {
        dt,
        values,
        coherent_offset: offset,
    })
}

/// Half-sided discrete transform of the incoherent correlation with
/// trapezoidal end correction, evaluated on the given detuning grid.
///
/// Fails with [`Error::InsufficientTail`] when the correlation has not
/// decayed to 1e-6 of its peak by `tau_max`.
pub fn spectrum_fft(corr: &CorrelationSeries, delta_grid: &Array1<f64>) -> Result<Spectrum> {
    let n = corr.values.len();
    if n < 3 {
        return Err(Error::InvalidInput("correlation series too short".into()));
    }
    let peak = corr.max_incoherent();
    if peak < 1e-14 {
        return Ok(Spectrum {
            delta_grid: delta_grid.clone(),
            intensity: Array1::zeros(delta_grid.len()),
            normalization: 0.0,
        });
    }
    let tail = corr.incoherent(n - 1).norm();
    if tail > 1e-6 * peak {
        return Err(Error::InsufficientTail { ratio: tail / peak });
    }

    let dt = corr.dt;
    let sub: Vec<C64> = (0..n).map(|k| corr.incoherent(k)).collect();
    let mut raw = Array1::<f64>::zeros(delta_grid.len());
    for (i, &delta) in delta_grid.iter().enumerate() {
        let rot = C64::new(0.0, delta * dt).exp();
        let mut phase = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in sub.iter().enumerate() {
            let weight = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += c * phase * C64::new(weight, 0.0);
            phase *= rot;
        }
        raw[i] = (acc * C64::new(dt, 0.0)).re;
    }
    normalize_spectrum(delta_grid.clone(), raw)
}

/// Resolvent-route spectrum: each Liouvillian eigenmode contributes a
/// rational term `Re[q_k / (-i Delta - lambda_k)]`; the stationary mode
/// (|lambda| < 1e-9) carries no weight after the coherent subtraction and is
/// excluded exactly.
pub fn spectrum_resolvent(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    delta_grid: &Array1<f64>,
) -> Result<Spectrum> {
    check_stationary(l, rho_ss)?;
    let (x, _offset, _) = regression_source(l, rho_ss)?;
    let raw = resolvent_values(l, &x, delta_grid)?;
    normalize_spectrum(delta_grid.clone(), raw)
}

/// Shared resolvent evaluation on an arbitrary source vector.
pub(crate) fn resolvent_values(
    l: &Superoperator,
    x: &Array1<C64>,
    delta_grid: &Array1<f64>,
) -> Result<Array1<f64>> {
    use ndarray_linalg::Solve;
    let eig = l.resolvent_eig()?;
    let c = eig.lu.solve(x).map_err(Error::from)?;
    let modes: Vec<(C64, C64)> = eig
        .values
        .iter()
        .zip(eig.weights.iter().zip(c.iter()))
        .filter(|(lam, _)| lam.norm() > 1e-9)
        .map(|(lam, (w, ck))| (*lam, w * ck))
        .collect();

    let mut raw = Array1::<f64>::zeros(delta_grid.len());
    for (i, &delta) in delta_grid.iter().enumerate() {
        let shift = C64::new(0.0, -delta);
        let mut acc = C64::new(0.0, 0.0);
        for (lam, q) in &modes {
            let den = shift - lam;
            if den.norm() < 1e-12 {
                return Err(Error::SingularResolvent { delta });
            }
            acc += q / den;
        }
        raw[i] = acc.re;
    }
    Ok(raw)
}

fn normalize_spectrum(delta_grid: Array1<f64>, raw: Array1<f64>) -> Result<Spectrum> {
    let peak_abs = raw.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if peak_abs < 1e-14 {
        return Ok(Spectrum {
            delta_grid,
            intensity: Array1::zeros(raw.len()),
            normalization: 0.0,
        });
    }
    let peak = raw.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
    if peak <= 0.0 {
        return Err(Error::Numerical(
            "spectrum has no positive values to normalize to".into(),
        ));
    }
    let intensity = raw.mapv(|x| x / peak);
    let min = intensity.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    if min < -1e-6 {
        return Err(Error::Numerical(format!(
            "spectrum negativity {min:.3e} beyond tolerance"
        )));
    }
    Ok(Spectrum {
        delta_grid,
        intensity,
        normalization: peak,
    })
}

/// Uniform detuning grid.
pub fn delta_grid(min: f64, max: f64, points: usize) -> Result<Array1<f64>> {
    if points < 3 || !(max > min) {
        return Err(Error::InvalidInput(format!(
            "need at least 3 grid points and max > min, got {points}, [{min}, {max}]"
        )));
    }
    Ok(Array1::linspace(min, max, points))
}

/// Max relative deviation between two normalized spectra over interior grid
/// points with intensity above `floor` of peak.
pub fn max_relative_deviation(a: &Spectrum, b: &Spectrum, floor: f64) -> f64 {
    let n = a.intensity.len();
    let mut dev = 0.0f64;
    for k in 1..n.saturating_sub(1) {
        let r = b.intensity[k];
        if r > floor {
            dev = dev.max((a.intensity[k] - r).abs() / r);
        }
    }
    dev
}
