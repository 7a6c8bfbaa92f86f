//! Reference settings for the CO-oxidation surface reaction near its
//! saddle: the RK4 time-T map, the saddle and ODE equilibrium, the
//! eigen-frame convention, fit seeds and the collocation manifolds.

use crate::error::{Error, Result};
use crate::fit::FitConfig;
use crate::models::meanfield::{rk4_tmap, KmcParams, MeanField, Rk4TMap};
use crate::numlin::{jacobian_fd, spectral_split_with, FdScheme, Orientation, SpectralSplit, SplitMode, SplitOptions};
use crate::odeman::{default_stable_nodes, default_unstable_nodes, solve_ode_manifold, OdeSolveOptions, VectorField};
use crate::polyman::{enumerate_basis, ManifoldKind, ManifoldModel, MultiIndex};
use crate::saddle::{newton_fixed_point_with, NewtonOptions};

/// O2 adsorption rate at which the saddle is studied.
pub const BETA_REF: f64 = 20.7;

/// Unstable-graph basis used for the surface reaction: linear terms plus
/// `z1², z2², z1 z2, z1 z2², z1² z2`.
pub fn surface_unstable_basis() -> Vec<MultiIndex> {
    [[1, 0], [2, 0], [0, 1], [0, 2], [1, 1], [1, 2], [2, 1]]
        .iter()
        .map(|v| MultiIndex(v.to_vec()))
        .collect()
}

/// Eigenvector sign convention used for the surface-reaction frames.
pub fn surface_split_options() -> SplitOptions {
    SplitOptions {
        orientation: Orientation::LargestNegative,
        ..SplitOptions::default()
    }
}

/// RK4 time-T map of the mean field with the reference step sizes.
pub fn meanfield_tmap() -> Result<Rk4TMap> {
    rk4_tmap(KmcParams::default(), 0.05, 0.005)
}

/// Mean-field saddle of the RK4 map at `beta`.
pub fn meanfield_saddle(map: &Rk4TMap, beta: f64) -> Result<Vec<f64>> {
    let opts = NewtonOptions {
        tol: 1e-13,
        eps: 1e-4,
        ..NewtonOptions::default()
    };
    Ok(newton_fixed_point_with(map, &[0.31, 0.04, 0.65], &[beta], &opts)?.x)
}

/// Collocation solutions of the stable and unstable mean-field graphs.
pub fn meanfield_ode_manifolds(x_star: &[f64]) -> Result<(ManifoldModel, ManifoldModel)> {
    let field = MeanField { params: KmcParams::default() };
    let opts = OdeSolveOptions {
        split: surface_split_options(),
        ..OdeSolveOptions::default()
    };
    let stable = solve_ode_manifold(
        &field,
        x_star,
        ManifoldKind::Stable,
        &enumerate_basis(1, 3, true, None)?,
        &default_stable_nodes(),
        None,
        &opts,
    )?;
    let unstable = solve_ode_manifold(
        &field,
        x_star,
        ManifoldKind::Unstable,
        &surface_unstable_basis(),
        &default_unstable_nodes(),
        None,
        &opts,
    )?;
    Ok((stable.model, unstable.model))
}

/// Equilibrium of the mean-field ODE by Newton with the analytic Jacobian.
pub fn meanfield_equilibrium(beta: f64) -> Result<Vec<f64>> {
    let field = MeanField { params: KmcParams::default().with_beta(beta) };
    let mut x = vec![0.31, 0.04, 0.65];
    for _ in 0..50 {
        let f = field.rhs(&x);
        if f.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-14 {
            return Ok(x);
        }
        let dx = crate::numlin::solve_dense(&field.jacobian(&x), &f)?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi -= d;
        }
    }
    let f = field.rhs(&x);
    let r = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r <= 1e-12 {
        Ok(x)
    } else {
        Err(Error::NoConvergence { iterations: 50, history: vec![r] })
    }
}

/// Frame of the mean-field RK4 map at its saddle.
pub fn meanfield_tmap_split(map: &Rk4TMap, x: &[f64], beta: f64) -> Result<SpectralSplit> {
    let j = jacobian_fd(map, x, &[beta], 1e-5, FdScheme::Central)?;
    spectral_split_with(&j, x, SplitMode::Discrete, &surface_split_options())
}

/// Stable-fit seeds on the slow coordinate.
pub const STABLE_SEEDS: [f64; 6] = [-0.005, -0.003, -0.001, 0.001, 0.003, 0.005];

/// Unstable-fit seeds: tensor grid of `{±0.01, ±0.03, ±0.05}²`.
pub fn unstable_seeds() -> Vec<Vec<f64>> {
    let g = [-0.05, -0.03, -0.01, 0.01, 0.03, 0.05];
    g.iter().flat_map(|&a| g.iter().map(move |&b| vec![a, b])).collect()
}

pub fn surface_stable_fit_config(beta: f64) -> FitConfig {
    FitConfig {
        seeds: STABLE_SEEDS.iter().map(|&z| vec![z]).collect(),
        k_max: 2,
        inner_radius: 0.0,
        outer_radius: 0.03,
        eps_q: 1e-2,
        newton_tol: 1e-6,
        max_newton: 20,
        params: vec![beta],
        ..FitConfig::default()
    }
}

pub fn surface_unstable_fit_config(beta: f64) -> FitConfig {
    FitConfig {
        seeds: unstable_seeds(),
        k_max: 2,
        inner_radius: 0.0,
        outer_radius: 0.1,
        eps_q: 1e-2,
        newton_tol: 1e-6,
        max_newton: 20,
        params: vec![beta],
        ..FitConfig::default()
    }
}
