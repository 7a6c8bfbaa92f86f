//! Flat JSON run configuration with `--set key=value` overrides.

use std::path::Path;

use coarse_manifold::models::{KmcParams, KmcVariant, LiftMode};
use coarse_manifold::numlin::Orientation;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Toy,
    Meanfield,
    Kmc,
}

/// Every option a command may read. Unset keys fall back to per-model
/// defaults resolved by the accessors below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelKind,

    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub k_r: Option<f64>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,

    /// Reporting horizon `T` of the coarse map.
    pub horizon: Option<f64>,
    /// RK4 step of the mean-field map.
    pub dt: Option<f64>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub realizations: Option<usize>,
    pub master_seed: Option<u64>,
    pub micro_horizon: Option<f64>,
    pub variant: Option<KmcVariant>,
    pub lift_mode: Option<LiftMode>,

    /// Newton initial guess for `saddle`, or the state for `simulate`.
    pub x0: Option<Vec<f64>>,
    /// Known fixed point; skips the saddle solve in fit commands.
    pub x_star: Option<Vec<f64>>,
    pub newton_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub fd_eps: Option<f64>,
    /// Horizon of the Jacobian whose eigenvectors define the frame.
    pub frame_horizon: Option<f64>,
    pub orientation: Option<Orientation>,

    pub degree: Option<u32>,
    pub include_linear: Option<bool>,
    pub basis: Option<Vec<Vec<u32>>>,
    pub seeds: Option<Vec<Vec<f64>>>,
    pub k_max: Option<usize>,
    pub eps_q: Option<f64>,
    pub state_eps: Option<f64>,
    pub fit_tol: Option<f64>,
    pub max_newton: Option<usize>,
    pub accept_unconverged: Option<bool>,
    pub q0: Option<Vec<f64>>,
    pub inner_radius: Option<f64>,
    pub outer_radius: Option<f64>,

    pub nodes: Option<Vec<Vec<f64>>>,

    pub param: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub ds: Option<f64>,
    pub steps: Option<usize>,

    pub out: Option<String>,
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` in order, and validates.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut obj = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(CliError::Config(format!("{}: top level must be an object", p.display()))),
                    Err(e) => return Err(CliError::Config(format!("{}: {e}", p.display()))),
                }
            }
            None => Map::new(),
        };
        for (k, v) in overrides {
            obj.insert(k.clone(), parse_value(v));
        }
        let cfg: RunConfig = serde_json::from_value(Value::Object(obj)).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("horizon", self.horizon),
            ("dt", self.dt),
            ("micro_horizon", self.micro_horizon),
            ("newton_tol", self.newton_tol),
            ("fd_eps", self.fd_eps),
            ("frame_horizon", self.frame_horizon),
            ("eps_q", self.eps_q),
            ("state_eps", self.state_eps),
            ("fit_tol", self.fit_tol),
            ("outer_radius", self.outer_radius),
        ];
        for (key, v) in positive {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Config(format!("{key} must be positive and finite, got {v}")));
                }
            }
        }
        let rates = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("k_r", self.k_r),
            ("mu", self.mu),
            ("eta", self.eta),
            ("inner_radius", self.inner_radius),
        ];
        for (key, v) in rates {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(CliError::Config(format!("{key} must be non-negative and finite, got {v}")));
                }
            }
        }
        for (key, v) in [("width", self.width), ("height", self.height), ("realizations", self.realizations)] {
            if v == Some(0) {
                return Err(CliError::Config(format!("{key} must be positive")));
            }
        }
        if let Some(ds) = self.ds {
            if !(ds.is_finite() && ds != 0.0) {
                return Err(CliError::Config(format!("ds must be finite and nonzero, got {ds}")));
            }
        }
        if let Some(p) = &self.param {
            if p != "beta" {
                return Err(CliError::Config(format!("unsupported continuation parameter {p:?} (only beta)")));
            }
        }
        Ok(())
    }

    pub fn kmc_params(&self) -> KmcParams {
        let d = KmcParams::default();
        KmcParams {
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            gamma: self.gamma.unwrap_or(d.gamma),
            k_r: self.k_r.unwrap_or(d.k_r),
            mu: self.mu.unwrap_or(d.mu),
            eta: self.eta.unwrap_or(d.eta),
        }
    }

    /// Map parameters: empty for the toy, `[β]` otherwise.
    pub fn params(&self) -> Vec<f64> {
        match self.model {
            ModelKind::Toy => Vec::new(),
            _ => vec![self.kmc_params().beta],
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(0.05)
    }

    pub fn x0(&self) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| match self.model {
            ModelKind::Toy => vec![0.0; 3],
            _ => vec![0.30, 0.03, 0.65],
        })
    }

    pub fn fd_eps(&self) -> f64 {
        self.fd_eps.unwrap_or(match self.model {
            ModelKind::Toy => 1e-2,
            ModelKind::Meanfield => 1e-5,
            ModelKind::Kmc => 1e-2,
        })
    }

    pub fn newton_tol(&self) -> f64 {
        self.newton_tol.unwrap_or(match self.model {
            ModelKind::Kmc => 1e-3,
            _ => 1e-10,
        })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation.unwrap_or(match self.model {
            ModelKind::Toy => Orientation::LargestPositive,
            _ => Orientation::LargestNegative,
        })
    }
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    if k.is_empty() {
        return Err(format!("empty key in {s:?}"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}
