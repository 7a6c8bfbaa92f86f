//! Python bindings: the built-in coarse maps, fixed points, manifold fits
//! and collocation solves.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use coarse_manifold::models::toy::{toy_split, TOY_Q0};
use coarse_manifold::models::{kmc_timestepper, rk4_tmap, KmcParams, KmcVariant, LiftMode, MeanField, ToyMap};
use coarse_manifold::numlin::spectral_split_with;
use coarse_manifold::odeman::{default_stable_nodes, default_unstable_nodes, solve_ode_manifold, OdeSolveOptions};
use coarse_manifold::saddle::{newton_fixed_point_with, NewtonOptions};
use coarse_manifold::models::surface;
use coarse_manifold::Error;
use coarse_manifold_verify as verify;
use coarse_manifold::{
    enumerate_basis, fit_manifold, iterate, jacobian_fd, CoarseMap, FdScheme, FitConfig, ManifoldKind, MultiIndex, SplitMode,
    TimestepperConfig,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_) | Error::InvalidBasis(_) | Error::Dimension { .. } | Error::InfeasibleState(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<ManifoldKind> {
    match kind {
        "stable" => Ok(ManifoldKind::Stable),
        "unstable" => Ok(ManifoldKind::Unstable),
        _ => Err(PyValueError::new_err(format!("kind must be 'stable' or 'unstable', got {kind:?}"))),
    }
}

fn kind_name(kind: ManifoldKind) -> &'static str {
    match kind {
        ManifoldKind::Stable => "stable",
        ManifoldKind::Unstable => "unstable",
    }
}

/// A fixed point with its spectrum and stability class.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct BranchPoint {
    x: Vec<f64>,
    p: Vec<f64>,
    /// `(re, im)` pairs, nearest the stability boundary last.
    eigenvalues: Vec<(f64, f64)>,
    stability: String,
    residual_norm: f64,
}

#[pymethods]
impl BranchPoint {
    fn __repr__(&self) -> String {
        format!("BranchPoint(x={:?}, p={:?}, stability={:?})", self.x, self.p, self.stability)
    }
}

impl From<coarse_manifold::BranchPoint> for BranchPoint {
    fn from(b: coarse_manifold::BranchPoint) -> Self {
        Self {
            eigenvalues: b.eigenvalues.iter().map(|c| (c.re, c.im)).collect(),
            stability: format!("{:?}", b.stability).to_lowercase(),
            x: b.x,
            p: b.p,
            residual_norm: b.residual_norm,
        }
    }
}

/// Graph `output = h(input)` of an invariant manifold in eigen-coordinates.
#[pyclass]
struct ManifoldModel {
    inner: coarse_manifold::ManifoldModel,
}

#[pymethods]
impl ManifoldModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: coarse_manifold::ManifoldModel::from_json(text).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: coarse_manifold::ManifoldModel::load(std::path::Path::new(path)).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(std::path::Path::new(path)).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        kind_name(self.inner.kind)
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    #[getter]
    fn basis(&self) -> Vec<Vec<u32>> {
        self.inner.basis.iter().map(|b| b.0.clone()).collect()
    }

    /// Coefficients stacked output by output.
    #[getter]
    fn q(&self) -> Vec<f64> {
        self.inner.q()
    }

    #[getter]
    fn x_star(&self) -> Vec<f64> {
        self.inner.split.x_star.clone()
    }

    fn coefficient(&self, output: usize, index: Vec<u32>) -> PyResult<f64> {
        if output >= self.inner.output_dim() || index.len() != self.inner.input_dim() {
            return Err(PyValueError::new_err("output or multi-index out of range"));
        }
        Ok(self.inner.coefficient(output, &index))
    }

    fn evaluate(&self, z: Vec<f64>) -> PyResult<Vec<f64>> {
        if z.len() != self.inner.input_dim() {
            return Err(py_err(Error::Dimension {
                expected: self.inner.input_dim(),
                got: z.len(),
            }));
        }
        Ok(self.inner.evaluate(&z))
    }

    /// State on the manifold above graph coordinates `z`.
    fn lift(&self, z: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.lift_to_manifold(&z).map_err(py_err)
    }

    /// `(input, output)` eigen-coordinates of a state.
    fn coordinates(&self, x: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        self.inner.coordinates(&x).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ManifoldModel(kind={:?}, input_dim={}, output_dim={}, terms={})",
            self.kind(),
            self.inner.input_dim(),
            self.inner.output_dim(),
            self.inner.basis.len()
        )
    }
}

/// One of the built-in coarse maps.
#[pyclass]
struct CoarseModel {
    map: Box<dyn CoarseMap>,
    name: &'static str,
    params: Vec<f64>,
}

#[pymethods]
impl CoarseModel {
    /// The three-dimensional polynomial toy map.
    #[staticmethod]
    fn toy() -> Self {
        Self {
            map: Box::new(ToyMap),
            name: "toy",
            params: Vec::new(),
        }
    }

    /// RK4 time-`horizon` map of the CO-oxidation mean field.
    #[staticmethod]
    #[pyo3(signature = (beta=20.7, horizon=0.05, dt=0.005))]
    fn meanfield(beta: f64, horizon: f64, dt: f64) -> PyResult<Self> {
        Ok(Self {
            map: Box::new(rk4_tmap(KmcParams::default(), horizon, dt).map_err(py_err)?),
            name: "meanfield",
            params: vec![beta],
        })
    }

    /// Ensemble-averaged lattice kMC coarse timestepper.
    #[staticmethod]
    #[pyo3(signature = (beta=20.7, horizon=0.05, width=128, height=128, realizations=200, master_seed=20_240_611, nearest_neighbor=false, exact_count=true))]
    #[allow(clippy::too_many_arguments)]
    fn kmc(
        beta: f64,
        horizon: f64,
        width: usize,
        height: usize,
        realizations: usize,
        master_seed: u64,
        nearest_neighbor: bool,
        exact_count: bool,
    ) -> PyResult<Self> {
        let ts = kmc_timestepper(
            KmcParams::default(),
            if nearest_neighbor { KmcVariant::NearestNeighbor } else { KmcVariant::WellMixed },
            width,
            height,
            if exact_count { LiftMode::ExactCount } else { LiftMode::Independent },
            TimestepperConfig {
                micro_horizon: horizon.min(0.05),
                reporting_horizon: horizon,
                realizations,
                master_seed,
            },
        )
        .map_err(py_err)?;
        Ok(Self {
            map: Box::new(ts),
            name: "kmc",
            params: vec![beta],
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.map.dim()
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.params.clone()
    }

    fn evaluate(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        py.detach(|| self.map.evaluate(&x, &self.params)).map_err(py_err)
    }

    /// `steps` iterates starting from `x0`, including `x0`.
    fn iterate(&self, py: Python<'_>, x0: Vec<f64>, steps: usize) -> PyResult<Vec<Vec<f64>>> {
        py.detach(|| iterate(&self.map, &x0, &self.params, steps)).map_err(py_err)
    }

    /// Central-difference Jacobian as a list of rows.
    #[pyo3(signature = (x, eps=1e-4))]
    fn jacobian(&self, py: Python<'_>, x: Vec<f64>, eps: f64) -> PyResult<Vec<Vec<f64>>> {
        let j = py.detach(|| jacobian_fd(&self.map, &x, &self.params, eps, FdScheme::Central)).map_err(py_err)?;
        Ok(j.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    #[pyo3(signature = (x0, tol=1e-10, max_iter=50, eps=1e-4))]
    fn fixed_point(&self, py: Python<'_>, x0: Vec<f64>, tol: f64, max_iter: usize, eps: f64) -> PyResult<BranchPoint> {
        let opts = NewtonOptions {
            tol,
            max_iter,
            eps,
            ..NewtonOptions::default()
        };
        let bp = py.detach(|| newton_fixed_point_with(&self.map, &x0, &self.params, &opts)).map_err(py_err)?;
        Ok(bp.into())
    }

    /// Fits a manifold graph through the equation-free coefficient map.
    /// Returns the model and the fit report as JSON.
    #[pyo3(signature = (kind, x_star, seeds, degree=3, k_max=2, eps_q=0.01, tol=1e-6, max_newton=20, outer_radius=1.0, eps=1e-4, q0=None, basis=None))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        &self,
        py: Python<'_>,
        kind: &str,
        x_star: Vec<f64>,
        seeds: Vec<Vec<f64>>,
        degree: u32,
        k_max: usize,
        eps_q: f64,
        tol: f64,
        max_newton: usize,
        outer_radius: f64,
        eps: f64,
        q0: Option<Vec<f64>>,
        basis: Option<Vec<Vec<u32>>>,
    ) -> PyResult<(ManifoldModel, String)> {
        let kind = parse_kind(kind)?;
        py.detach(|| {
            let split = if self.name == "toy" {
                toy_split()
            } else {
                let j = jacobian_fd(&self.map, &x_star, &self.params, eps, FdScheme::Central)?;
                spectral_split_with(&j, &x_star, SplitMode::Discrete, &surface::surface_split_options())?
            };
            let d = kind.input_dim(&split);
            let custom: Option<Vec<MultiIndex>> = basis.map(|b| b.into_iter().map(MultiIndex).collect());
            let basis = enumerate_basis(d, degree, true, custom.as_deref())?;
            let q0 = q0.or_else(|| (self.name == "toy" && basis.len() == TOY_Q0.len()).then(|| TOY_Q0.to_vec()));
            let cfg = FitConfig {
                seeds,
                k_max,
                outer_radius,
                eps_q,
                newton_tol: tol,
                max_newton,
                q0,
                params: self.params.clone(),
                ..FitConfig::default()
            };
            let (model, report) = fit_manifold(&self.map, &split, &basis, kind, &cfg)?;
            Ok((ManifoldModel { inner: model }, report.to_json()?))
        })
        .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("CoarseModel({}, params={:?})", self.name, self.params)
    }
}

/// Stable or unstable graph of the mean-field ODE at its equilibrium, by
/// collocation.
#[pyfunction]
#[pyo3(signature = (kind, beta=20.7))]
fn ode_manifold(py: Python<'_>, kind: &str, beta: f64) -> PyResult<ManifoldModel> {
    let kind = parse_kind(kind)?;
    py.detach(|| {
        let params = KmcParams::default().with_beta(beta);
        let x = surface::meanfield_equilibrium(beta)?;
        let (basis, nodes) = match kind {
            ManifoldKind::Stable => (enumerate_basis(1, 3, true, None)?, default_stable_nodes()),
            ManifoldKind::Unstable => (surface::surface_unstable_basis(), default_unstable_nodes()),
        };
        let opts = OdeSolveOptions {
            split: surface::surface_split_options(),
            ..OdeSolveOptions::default()
        };
        let sol = solve_ode_manifold(&MeanField { params }, &x, kind, &basis, &nodes, None, &opts)?;
        Ok(ManifoldModel { inner: sol.model })
    })
    .map_err(py_err)
}

/// Basis multi-indices in the library's canonical order.
#[pyfunction]
#[pyo3(signature = (d, degree, include_linear=true))]
fn basis(d: usize, degree: u32, include_linear: bool) -> PyResult<Vec<Vec<u32>>> {
    Ok(enumerate_basis(d, degree, include_linear, None)
        .map_err(py_err)?
        .into_iter()
        .map(|b| b.0)
        .collect())
}

/// Deterministic acceptance criteria as `(id, title, passed, report)`.
#[pyfunction]
fn verify_deterministic(py: Python<'_>) -> Vec<(u32, String, bool, String)> {
    py.detach(verify::deterministic_suite)
        .into_iter()
        .map(|c| (c.id, c.title.clone(), c.passed(), c.render()))
        .collect()
}

#[pymodule]
fn coarse_manifold_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CoarseModel>()?;
    m.add_class::<ManifoldModel>()?;
    m.add_class::<BranchPoint>()?;
    m.add_function(wrap_pyfunction!(ode_manifold, m)?)?;
    m.add_function(wrap_pyfunction!(basis, m)?)?;
    m.add_function(wrap_pyfunction!(verify_deterministic, m)?)?;
    Ok(())
}
