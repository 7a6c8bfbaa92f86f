//! Equation-free manifold fitting: the coefficient map `Q` built from
//! manifold-constrained timestepper trajectories, and Newton on `q - Q(q)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blackbox::CoarseMap;
use crate::error::{Error, Result};
use crate::numlin::{lstsq_multi, solve_dense, FdScheme, SpectralSplit, RANK_TOL};
use crate::polyman::{ManifoldFile, ManifoldKind, ManifoldModel, MultiIndex};

/// Settings of the coefficient map and its Newton solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Trajectory starts in graph-input coordinates (`z_s` for stable fits,
    /// `z_u` for unstable ones).
    pub seeds: Vec<Vec<f64>>,
    pub k_max: usize,
    /// Seeds must satisfy `inner_radius < |z| < outer_radius`.
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Perturbation used for `∇Q`.
    pub eps_q: f64,
    /// When set, coefficient `c` is perturbed by `state_eps / max_seed |φ_c|`
    /// instead of `eps_q`, so every column moves the state by about the same
    /// amount. Needed for stochastic maps whose output is resolved only to
    /// the lattice granularity.
    #[serde(default)]
    pub state_eps: Option<f64>,
    pub scheme: FdScheme,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Return the last iterate (flagged unconverged) instead of an error
    /// when `max_newton` is reached.
    #[serde(default)]
    pub accept_unconverged: bool,
    /// Initial coefficients; zeros when absent.
    pub q0: Option<Vec<f64>>,
    /// Map parameters held fixed during the fit.
    pub params: Vec<f64>,
    pub rank_tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            seeds: Vec::new(),
            k_max: 2,
            inner_radius: 0.0,
            outer_radius: 1.0,
            eps_q: 0.05,
            state_eps: None,
            scheme: FdScheme::Central,
            newton_tol: 1e-4,
            max_newton: 20,
            accept_unconverged: false,
            q0: None,
            params: Vec::new(),
            rank_tol: RANK_TOL,
        }
    }
}

impl FitConfig {
    fn validate(&self, model: &ManifoldModel) -> Result<()> {
        let d = model.input_dim();
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        for s in &self.seeds {
            if s.len() != d {
                return Err(Error::Dimension { expected: d, got: s.len() });
            }
            let r = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(r > self.inner_radius && r < self.outer_radius) {
                return Err(Error::InvalidConfig(format!(
                    "seed {s:?} (radius {r}) outside the annulus ({}, {})",
                    self.inner_radius, self.outer_radius
                )));
            }
        }
        let rows = self.seeds.len() * (self.k_max + 1);
        if rows < model.basis.len() {
            return Err(Error::InvalidConfig(format!(
                "{rows} design rows for {} basis functions",
                model.basis.len()
            )));
        }
        if !(self.eps_q > 0.0 && self.newton_tol > 0.0 && self.state_eps.is_none_or(|e| e > 0.0)) {
            return Err(Error::InvalidConfig("eps_q and newton_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Least-squares system of one coefficient-map evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSystem {
    /// Basis values at the image input coordinates, one row per image.
    pub a: DMatrix<f64>,
    /// Image output coordinates, one column per output component.
    pub b: DMatrix<f64>,
}

/// Images of one seed trajectory: `(input, output)` per step.
fn trajectory<M: CoarseMap + ?Sized>(
    map: &M,
    model: &ManifoldModel,
    config: &FitConfig,
    seed: &[f64],
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut zin = seed.to_vec();
    let mut out = Vec::with_capacity(config.k_max + 1);
    for _ in 0..=config.k_max {
        let x = model.lift_to_manifold(&zin)?;
        let y = map.evaluate(&x, &config.params)?;
        let (zi, zo) = model.coordinates(&y)?;
        let dist = zi.iter().chain(&zo).map(|v| v * v).sum::<f64>().sqrt();
        if dist > 10.0 * config.outer_radius {
            return Err(Error::EscapedNeighborhood {
                distance: dist,
                radius: config.outer_radius,
            });
        }
        zin = zi.clone();
        out.push((zi, zo));
    }
    Ok(out)
}

/// Runs the constrained trajectories for the model's current coefficients
/// and assembles the design system (seed-major, step-minor rows).
pub fn build_design<M: CoarseMap + ?Sized>(map: &M, model: &ManifoldModel, config: &FitConfig) -> Result<DesignSystem> {
    let trajs: Vec<Vec<(Vec<f64>, Vec<f64>)>> = config
        .seeds
        .par_iter()
        .map(|s| trajectory(map, model, config, s))
        .collect::<Result<_>>()?;
    let rows: Vec<&(Vec<f64>, Vec<f64>)> = trajs.iter().flatten().collect();
    let c = model.basis.len();
    let e = model.output_dim();
    let a = DMatrix::from_fn(rows.len(), c, |r, k| model.basis[k].monomial(&rows[r].0));
    let b = DMatrix::from_fn(rows.len(), e, |r, j| rows[r].1[j]);
    Ok(DesignSystem { a, b })
}

/// The coefficient map `Q(q)`: least-squares refit of the graph to the
/// images of manifold-constrained points.
pub fn coefficient_map<M: CoarseMap + ?Sized>(
    map: &M,
    model: &ManifoldModel,
    config: &FitConfig,
    q: &[f64],
) -> Result<Vec<f64>> {
    let mut m = model.clone();
    m.set_q(q)?;
    let sys = build_design(map, &m, config)?;
    let sol = lstsq_multi(&sys.a, &sys.b, config.rank_tol)?;
    Ok(sol.x.iter().copied().collect())
}

/// One Newton step of the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitIteration {
    pub norm_dq: f64,
    /// `‖q - Q(q)‖` before the step.
    pub norm_f: f64,
    /// Coefficients after the step.
    pub q: Vec<f64>,
}

/// Convergence report written next to the fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: Vec<FitIteration>,
    pub final_model: ManifoldFile,
    /// Invariance residuals at the seeds.
    pub invariance_residuals: Vec<f64>,
    /// `‖Q(q*) - q*‖` at the returned coefficients.
    pub fixed_point_residual: f64,
    /// False when `accept_unconverged` cut the iteration short.
    #[serde(default = "yes")]
    pub converged: bool,
}

fn yes() -> bool {
    true
}

impl FitReport {
    pub fn final_norm_dq(&self) -> f64 {
        self.iterations.last().map_or(f64::NAN, |i| i.norm_dq)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Jacobian of `Q` at `q` by finite differences with step `eps_q`.
fn coefficient_jacobian<M: CoarseMap + ?Sized>(
    map: &M,
    model: &ManifoldModel,
    config: &FitConfig,
    q: &[f64],
    qq: &[f64],
) -> Result<DMatrix<f64>> {
    let n = q.len();
    let c = model.basis.len();
    let step = |i: usize| match config.state_eps {
        Some(e) => {
            let scale = config
                .seeds
                .iter()
                .map(|z| model.basis[i % c].monomial(z).abs())
                .fold(0.0, f64::max);
            if scale > 0.0 {
                e / scale
            } else {
                config.eps_q
            }
        }
        None => config.eps_q,
    };
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let h = step(i);
            let shifted = |s: f64| {
                let mut qs = q.to_vec();
                qs[i] += s;
                coefficient_map(map, model, config, &qs)
            };
            let plus = shifted(h)?;
            Ok(match config.scheme {
                FdScheme::Forward => plus.iter().zip(qq).map(|(a, b)| (a - b) / h).collect(),
                FdScheme::Central => {
                    let minus = shifted(-h)?;
                    plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect()
                }
            })
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

/// Fits a polynomial graph of the stable or unstable manifold by Newton's
/// method on the fixed-point equation `q = Q(q)`.
pub fn fit_manifold<M: CoarseMap + ?Sized>(
    map: &M,
    split: &SpectralSplit,
    basis: &[MultiIndex],
    kind: ManifoldKind,
    config: &FitConfig,
) -> Result<(ManifoldModel, FitReport)> {
    let mut model = ManifoldModel::zeros(kind, basis.to_vec(), split.clone())?;
    config.validate(&model)?;
    let nq = model.q().len();
    let mut q = match &config.q0 {
        Some(q0) if q0.len() != nq => return Err(Error::Dimension { expected: nq, got: q0.len() }),
        Some(q0) => q0.clone(),
        None => vec![0.0; nq],
    };
    let mut iterations: Vec<FitIteration> = Vec::new();
    let mut converged = false;
    loop {
        if iterations.len() >= config.max_newton && config.accept_unconverged {
            break;
        }
        if iterations.len() >= config.max_newton {
            return Err(Error::NoConvergence {
                iterations: iterations.len(),
                history: iterations.iter().map(|i| i.norm_dq).collect(),
            });
        }
        let qq = coefficient_map(map, &model, config, &q)?;
        let f: Vec<f64> = q.iter().zip(&qq).map(|(a, b)| a - b).collect();
        let jq = coefficient_jacobian(map, &model, config, &q, &qq)?;
        let lhs = DMatrix::identity(nq, nq) - jq;
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let dq = solve_dense(&lhs, &rhs)?;
        for (qi, d) in q.iter_mut().zip(&dq) {
            *qi += d;
        }
        let norm_dq = norm(&dq);
        iterations.push(FitIteration {
            norm_dq,
            norm_f: norm(&f),
            q: q.clone(),
        });
        if !norm_dq.is_finite() {
            return Err(Error::NoConvergence {
                iterations: iterations.len(),
                history: iterations.iter().map(|i| i.norm_dq).collect(),
            });
        }
        if norm_dq <= config.newton_tol {
            converged = true;
            break;
        }
    }
    model.set_q(&q)?;
    let qq = coefficient_map(map, &model, config, &q)?;
    let fixed_point_residual = norm(&q.iter().zip(&qq).map(|(a, b)| a - b).collect::<Vec<_>>());
    let invariance_residuals = invariance_residual(map, &model, &config.seeds, &config.params)?;
    let report = FitReport {
        iterations,
        final_model: model.to_file(),
        invariance_residuals,
        fixed_point_residual,
        converged,
    };
    Ok((model, report))
}

/// For each probe `z`: put the point on the graph, advance one map step,
/// and return `‖z_out(image) - h(z_in(image))‖`.
pub fn invariance_residual<M: CoarseMap + ?Sized>(
    map: &M,
    model: &ManifoldModel,
    probes: &[Vec<f64>],
    params: &[f64],
) -> Result<Vec<f64>> {
    probes
        .par_iter()
        .map(|z| {
            let x = model.lift_to_manifold(z)?;
            let y = map.evaluate(&x, params)?;
            let (zi, zo) = model.coordinates(&y)?;
            let h = model.evaluate(&zi);
            Ok(norm(&zo.iter().zip(&h).map(|(a, b)| a - b).collect::<Vec<_>>()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox::FnMap;
    use crate::numlin::SplitMode;
    use crate::polyman::enumerate_basis;

    fn planar_split() -> SpectralSplit {
        SpectralSplit::from_real_frame(
            vec![0.0, 0.0],
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
            &[0.5],
            &[2.0],
            SplitMode::Discrete,
        )
        .unwrap()
    }

    #[test]
    fn linear_map_has_flat_manifold() {
        let map = FnMap::new(2, 0, |x: &[f64], _p: &[f64]| vec![0.5 * x[0], 2.0 * x[1]]);
        let basis = enumerate_basis(1, 3, true, None).unwrap();
        let model = ManifoldModel::zeros(ManifoldKind::Stable, basis, planar_split()).unwrap();
        let config = FitConfig {
            seeds: vec![vec![0.1], vec![-0.1], vec![0.05]],
            ..FitConfig::default()
        };
        let q = coefficient_map(&map, &model, &config, &[0.0; 3]).unwrap();
        assert!(q.iter().all(|v| v.abs() < 1e-14), "{q:?}");
    }

    #[test]
    fn rejects_underdetermined_design() {
        let map = FnMap::new(2, 0, |x: &[f64], _p: &[f64]| x.to_vec());
        let basis = enumerate_basis(1, 4, true, None).unwrap();
        let config = FitConfig {
            seeds: vec![vec![0.1]],
            k_max: 1,
            ..FitConfig::default()
        };
        assert!(matches!(
            fit_manifold(&map, &planar_split(), &basis, ManifoldKind::Stable, &config),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn reports_escape() {
        let map = FnMap::new(2, 0, |x: &[f64], _p: &[f64]| vec![0.5 * x[0], 50.0 * x[1] + 30.0 * x[0]]);
        let basis = enumerate_basis(1, 2, true, None).unwrap();
        let model = ManifoldModel::zeros(ManifoldKind::Stable, basis, planar_split()).unwrap();
        let config = FitConfig {
            seeds: vec![vec![0.1], vec![-0.1]],
            k_max: 3,
            outer_radius: 0.2,
            ..FitConfig::default()
        };
        assert!(matches!(
            coefficient_map(&map, &model, &config, &[0.0; 2]),
            Err(Error::EscapedNeighborhood { .. })
        ));
    }
}
