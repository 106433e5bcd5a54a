//! Run configuration: a flat JSON document speaking the conventional
//! parameter dialect (`two_kappa_over_g`), with `--set key=value` overrides.
//! The factor-of-two conversion to the field decay rate happens in exactly
//! one place, [`crate::model::kappa_from_two_kappa_over_g`].

use crate::error::{Error, Result};
use crate::liouvillian::Frame;
use crate::model::{kappa_from_two_kappa_over_g, ModelParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameChoice {
    Displaced,
    Lab,
}

impl FrameChoice {
    pub fn frame(self) -> Frame {
        match self {
            FrameChoice::Displaced => Frame::Displaced,
            FrameChoice::Lab => Frame::Lab,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Resolvent,
    Fft,
    Both,
}

fn default_gamma() -> f64 {
    0.03
}
fn default_fock_dim() -> usize {
    20
}
fn default_frame() -> FrameChoice {
    FrameChoice::Displaced
}
fn default_delta_min() -> f64 {
    -3.0
}
fn default_delta_max() -> f64 {
    3.0
}
fn default_delta_points() -> usize {
    2001
}
fn default_tau_max() -> f64 {
    400.0
}
fn default_dt() -> f64 {
    0.02
}
fn default_method() -> MethodChoice {
    MethodChoice::Resolvent
}
fn default_min_prominence_log() -> f64 {
    0.3
}

/// Flat run configuration; all computations are deterministic (seedless).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub omega_over_g: f64,
    /// Conventional "2 kappa / g"; halved internally to the field rate.
    pub two_kappa_over_g: f64,
    #[serde(default = "default_gamma")]
    pub gamma_over_g: f64,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
    #[serde(default = "default_frame")]
    pub frame: FrameChoice,
    #[serde(default = "default_delta_min")]
    pub delta_min: f64,
    #[serde(default = "default_delta_max")]
    pub delta_max: f64,
    #[serde(default = "default_delta_points")]
    pub delta_points: usize,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_method")]
    pub method: MethodChoice,
    #[serde(default = "default_min_prominence_log")]
    pub min_prominence_log: f64,
}

impl RunConfig {
    /// Parse a JSON document, apply `--set key=value` overrides, validate.
    pub fn load(json: &str, overrides: &[String]) -> Result<RunConfig> {
        let mut config: RunConfig = serde_json::from_str(json)?;
        for kv in overrides {
            let (key, value) = kv.split_once('=').ok_or_else(|| {
                Error::Config(format!("--set expects key=value, got '{kv}'"))
            })?;
            config.apply_set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn apply_set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse '{value}' as number for {key}")))
        }
        match key {
            "omega_over_g" => self.omega_over_g = num(key, value)?,
            "two_kappa_over_g" => self.two_kappa_over_g = num(key, value)?,
            "gamma_over_g" => self.gamma_over_g = num(key, value)?,
            "fock_dim" => {
                self.fock_dim = value
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("cannot parse '{value}' as integer")))?
            }
            "frame" => {
                self.frame = match value {
                    "displaced" => FrameChoice::Displaced,
                    "lab" => FrameChoice::Lab,
                    _ => return Err(Error::Config(format!("unknown frame '{value}'"))),
                }
            }
            "delta_min" => self.delta_min = num(key, value)?,
            "delta_max" => self.delta_max = num(key, value)?,
            "delta_points" => {
                self.delta_points = value
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("cannot parse '{value}' as integer")))?
            }
            "tau_max" => self.tau_max = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "method" => {
                self.method = match value {
                    "resolvent" => MethodChoice::Resolvent,
                    "fft" => MethodChoice::Fft,
                    "both" => MethodChoice::Both,
                    _ => return Err(Error::Config(format!("unknown method '{value}'"))),
                }
            }
            "min_prominence_log" => self.min_prominence_log = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Enforce the load-time bounds, naming each violated one.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_over_g", self.omega_over_g),
            ("two_kappa_over_g", self.two_kappa_over_g),
            ("gamma_over_g", self.gamma_over_g),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        // 2 Omega kappa / g^2 < 1, i.e. kappa < g^2 / (2 Omega)
        let ratio = self.omega_over_g * self.two_kappa_over_g;
        if ratio >= 1.0 {
            return Err(Error::Config(format!(
                "violated bound kappa < g^2/(2 Omega): 2*Omega*kappa/g^2 = {ratio} >= 1"
            )));
        }
        if self.fock_dim < 2 {
            return Err(Error::Config(format!(
                "fock_dim must be >= 2, got {}",
                self.fock_dim
            )));
        }
        if self.delta_points < 3 {
            return Err(Error::Config(format!(
                "delta_points must be >= 3, got {}",
                self.delta_points
            )));
        }
        if !(self.delta_max > self.delta_min) {
            return Err(Error::Config(format!(
                "need delta_max > delta_min, got [{}, {}]",
                self.delta_min, self.delta_max
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.tau_max > 0.0) {
            return Err(Error::Config(format!(
                "tau_max must be > 0, got {}",
                self.tau_max
            )));
        }
        if !(self.min_prominence_log > 0.0) {
            return Err(Error::Config(format!(
                "min_prominence_log must be > 0, got {}",
                self.min_prominence_log
            )));
        }
        Ok(())
    }

    /// Physical rates in units of g (kappa halved from the 2-kappa dialect).
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::resonant(
            self.omega_over_g,
            kappa_from_two_kappa_over_g(self.two_kappa_over_g),
            self.gamma_over_g,
        )
    }
}
