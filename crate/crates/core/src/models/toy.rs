//! Three-dimensional polynomial map with a saddle at the origin.
//!
//! `(x1, x2, x3) -> (-x1/2, -x2/2 + x1², 2 x3 + x2²)`. The linearization is
//! diagonal, so the eigen-coordinates are the state coordinates.

use nalgebra::DMatrix;

use crate::blackbox::CoarseMap;
use crate::error::Result;
use crate::fit::{fit_manifold, FitConfig, FitReport};
use crate::numlin::{SpectralSplit, SplitMode};
use crate::polyman::{enumerate_basis, ManifoldKind, ManifoldModel};

pub fn toy_step(x: &[f64; 3]) -> [f64; 3] {
    [-0.5 * x[0], -0.5 * x[1] + x[0] * x[0], 2.0 * x[2] + x[1] * x[1]]
}

/// The toy map as a deterministic coarse map without parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyMap;

impl CoarseMap for ToyMap {
    fn dim(&self) -> usize {
        3
    }
    fn param_dim(&self) -> usize {
        0
    }
    fn apply(&self, x: &[f64], _p: &[f64]) -> Result<Vec<f64>> {
        Ok(toy_step(&[x[0], x[1], x[2]]).to_vec())
    }
}

/// Exact eigen-frame at the origin: `V = I`, `Λs = diag(-1/2, -1/2)`, `Λu = 2`.
pub fn toy_split() -> SpectralSplit {
    SpectralSplit::from_real_frame(
        vec![0.0; 3],
        DMatrix::identity(3, 2),
        DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]),
        &[-0.5, -0.5],
        &[2.0],
        SplitMode::Discrete,
    )
    .expect("static frame is consistent")
}

/// Starting coefficients of the toy fit, in basis order
/// `a01, a02, a10, a11, a12, a20, a21, a22`.
pub const TOY_Q0: [f64; 8] = [0.1, 0.25, -0.3, -0.15, -0.15, 0.1, -0.1, 0.15];

/// Analytic quadratic/cubic terms of the stable graph.
pub const A02: f64 = -4.0 / 7.0;
pub const A21: f64 = 32.0 / 119.0;

/// Stable graph `x3 = a02 x2² + a21 x1² x2 (+ a22 x1² x2²)` over the
/// tensor basis of degree 2.
pub fn analytic_stable_model(a22: Option<f64>) -> ManifoldModel {
    let basis = enumerate_basis(2, 2, true, None).expect("static basis");
    let mut q = [0.0; 8];
    q[1] = A02;
    q[6] = A21;
    q[7] = a22.unwrap_or(0.0);
    ManifoldModel::from_q(ManifoldKind::Stable, basis, toy_split(), &q).expect("static model")
}

/// Fit settings of the reference toy experiment: seeds `(±0.2, ±0.2)`,
/// four images per seed, `eps_q = 0.05`, tolerance `1e-4`.
pub fn reference_fit_config() -> FitConfig {
    FitConfig {
        seeds: vec![vec![-0.2, -0.2], vec![-0.2, 0.2], vec![0.2, -0.2], vec![0.2, 0.2]],
        k_max: 3,
        inner_radius: 0.0,
        outer_radius: 1.0,
        eps_q: 0.05,
        newton_tol: 1e-4,
        max_newton: 20,
        q0: Some(TOY_Q0.to_vec()),
        ..FitConfig::default()
    }
}

/// Stable-manifold fit with the reference configuration.
pub fn reference_fit() -> Result<(ManifoldModel, FitReport)> {
    let basis = enumerate_basis(2, 2, true, None)?;
    fit_manifold(&ToyMap, &toy_split(), &basis, ManifoldKind::Stable, &reference_fit_config())
}
