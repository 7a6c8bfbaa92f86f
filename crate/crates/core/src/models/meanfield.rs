//! Mean-field CO oxidation with an inert adsorbate, and its RK4 time-T map.
//!
//! Coverages `θ = (θ_A, θ_B, θ_C)` of CO, O and inert species; `θ_* = 1 -
//! θ_A - θ_B - θ_C` is the vacant fraction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::blackbox::CoarseMap;
use crate::error::{Error, Result};
use crate::odeman::VectorField;

/// Rate constants of the surface reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmcParams {
    /// CO adsorption.
    pub alpha: f64,
    /// O2 dissociative adsorption (the bifurcation parameter).
    pub beta: f64,
    /// CO desorption.
    pub gamma: f64,
    /// CO + O reaction.
    pub k_r: f64,
    /// Inert adsorption.
    pub mu: f64,
    /// Inert desorption.
    pub eta: f64,
}

impl Default for KmcParams {
    fn default() -> Self {
        Self {
            alpha: 1.6,
            beta: 20.7,
            gamma: 0.04,
            k_r: 1.0,
            mu: 0.36,
            eta: 0.016,
        }
    }
}

impl KmcParams {
    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let r = [self.alpha, self.beta, self.gamma, self.k_r, self.mu, self.eta];
        if r.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("rates must be finite and non-negative: {self:?}")))
        }
    }
}

/// Right-hand side of the mean-field equations.
pub fn meanfield_rhs(theta: &[f64], k: &KmcParams) -> [f64; 3] {
    let (a, b, c) = (theta[0], theta[1], theta[2]);
    let s = 1.0 - a - b - c;
    let react = 4.0 * k.k_r * a * b;
    [
        k.alpha * s - k.gamma * a - react,
        2.0 * k.beta * s * s - react,
        k.mu * s - k.eta * c,
    ]
}

/// Analytic Jacobian of [`meanfield_rhs`].
pub fn meanfield_jacobian(theta: &[f64], k: &KmcParams) -> DMatrix<f64> {
    let (a, b, c) = (theta[0], theta[1], theta[2]);
    let s = 1.0 - a - b - c;
    let kr = 4.0 * k.k_r;
    DMatrix::from_row_slice(
        3,
        3,
        &[
            -k.alpha - k.gamma - kr * b,
            -k.alpha - kr * a,
            -k.alpha,
            -4.0 * k.beta * s - kr * b,
            -4.0 * k.beta * s - kr * a,
            -4.0 * k.beta * s,
            -k.mu,
            -k.mu,
            -k.mu - k.eta,
        ],
    )
}

/// The mean-field vector field at fixed rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanField {
    pub params: KmcParams,
}

impl VectorField for MeanField {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&self, x: &[f64]) -> Vec<f64> {
        meanfield_rhs(x, &self.params).to_vec()
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        meanfield_jacobian(x, &self.params)
    }
}

/// Time-T map of the mean field by fixed-step classical RK4.
/// The single map parameter is `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4TMap {
    pub params: KmcParams,
    pub horizon: f64,
    pub dt: f64,
    steps: usize,
}

/// Builds the RK4 time-T map; `dt` must divide `T`.
pub fn rk4_tmap(params: KmcParams, horizon: f64, dt: f64) -> Result<Rk4TMap> {
    params.validate()?;
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(Error::InvalidConfig("T and dt must be positive".into()));
    }
    let ratio = horizon / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
        return Err(Error::InvalidConfig(format!("dt = {dt} does not divide T = {horizon}")));
    }
    Ok(Rk4TMap {
        params,
        horizon,
        dt,
        steps: steps as usize,
    })
}

impl Rk4TMap {
    /// Integrates `x` over `n` steps of `dt`.
    pub fn integrate(&self, x: &[f64], k: &KmcParams, n: usize) -> [f64; 3] {
        let h = self.dt;
        let mut y = [x[0], x[1], x[2]];
        let add = |y: &[f64; 3], k: &[f64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
        for _ in 0..n {
            let k1 = meanfield_rhs(&y, k);
            let k2 = meanfield_rhs(&add(&y, &k1, h / 2.0), k);
            let k3 = meanfield_rhs(&add(&y, &k2, h / 2.0), k);
            let k4 = meanfield_rhs(&add(&y, &k3, h), k);
            for i in 0..3 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }
}

impl CoarseMap for Rk4TMap {
    fn dim(&self) -> usize {
        3
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn apply(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let k = self.params.with_beta(p.first().copied().unwrap_or(self.params.beta));
        Ok(self.integrate(x, &k, self.steps).to_vec())
    }
}
