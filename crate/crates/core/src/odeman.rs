//! Invariant manifolds of a known vector field by collocation of the
//! continuous-time invariance equation.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numlin::{lstsq_multi, spectral_split_with, SpectralSplit, SplitMode, SplitOptions, RANK_TOL};
use crate::polyman::{ManifoldKind, ManifoldModel, MultiIndex};

/// Largest `‖f(x*)‖` accepted as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Autonomous vector field `dx/dt = f(x)` with parameters baked in.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, x: &[f64]) -> Vec<f64>;

    /// Jacobian of `f`; central differences unless overridden.
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let h = 1e-7;
        let mut j = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[c] += h;
            xm[c] -= h;
            let (fp, fm) = (self.rhs(&xp), self.rhs(&xm));
            for r in 0..n {
                j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        j
    }
}

/// Nonlinear remainder in eigen-coordinates: `V⁻¹ (f(x* + x') - J x')`,
/// with `J = V Λ V⁻¹` taken from the split.
struct Remainder<'a, F: ?Sized> {
    field: &'a F,
    split: &'a SpectralSplit,
    v: DMatrix<f64>,
    v_inv: DMatrix<f64>,
    lambda: DMatrix<f64>,
}

impl<'a, F: VectorField + ?Sized> Remainder<'a, F> {
    fn new(field: &'a F, split: &'a SpectralSplit) -> Result<Self> {
        let v = split.v();
        let v_inv = v.clone().try_inverse().ok_or(Error::Transform { condition: f64::INFINITY })?;
        Ok(Self { field, split, v, v_inv, lambda: split.lambda() })
    }

    /// `[g_s; g_u]` at eigen-coordinates `z = [z_s; z_u]`.
    fn g(&self, z: &DVector<f64>) -> DVector<f64> {
        let xp = &self.v * z;
        let x: Vec<f64> = xp.iter().zip(&self.split.x_star).map(|(a, b)| a + b).collect();
        let f = DVector::from_vec(self.field.rhs(&x));
        &self.v_inv * f - &self.lambda * z
    }
}

fn residual_at<F: VectorField + ?Sized>(rem: &Remainder<'_, F>, model: &ManifoldModel, z: &[f64]) -> Vec<f64> {
    let split = rem.split;
    let l = split.stable_dim();
    let n = split.dim();
    let h = model.evaluate(z);
    let dh = model.jacobian(z);
    let full = match model.kind {
        ManifoldKind::Stable => DVector::from_iterator(n, z.iter().chain(&h).copied()),
        ManifoldKind::Unstable => DVector::from_iterator(n, h.iter().chain(z).copied()),
    };
    let g = rem.g(&full);
    let (gs, gu) = (g.rows(0, l).into_owned(), g.rows(l, n - l).into_owned());
    let hv = DVector::from_vec(h);
    let zv = DVector::from_column_slice(z);
    let r = match model.kind {
        ManifoldKind::Stable => &split.lambda_u * &hv + gu - &dh * (&split.lambda_s * zv + gs),
        ManifoldKind::Unstable => &split.lambda_s * &hv + gs - &dh * (&split.lambda_u * zv + gu),
    };
    r.iter().copied().collect()
}

/// Invariance defect of the graph at `z`:
/// `Λu h + g_u - ∇h (Λs z + g_s)` for stable graphs, and the mirrored form
/// with the roles of `s` and `u` exchanged for unstable ones.
pub fn ode_residual<F: VectorField + ?Sized>(field: &F, model: &ManifoldModel, z: &[f64]) -> Result<Vec<f64>> {
    if model.split.mode != SplitMode::Continuous {
        return Err(Error::InvalidConfig("ode_residual needs a continuous-mode split".into()));
    }
    if z.len() != model.input_dim() {
        return Err(Error::Dimension { expected: model.input_dim(), got: z.len() });
    }
    let rem = Remainder::new(field, &model.split)?;
    Ok(residual_at(&rem, model, z))
}

/// Stable 1-D collocation nodes.
pub fn default_stable_nodes() -> Vec<Vec<f64>> {
    [-1e-3, -6e-4, -2e-4, 2e-4, 6e-4, 1e-3].iter().map(|&z| vec![z]).collect()
}

/// Unstable 2-D collocation nodes: the tensor grid `{±1e-3, ±3e-3}²`.
pub fn default_unstable_nodes() -> Vec<Vec<f64>> {
    let g = [-3e-3, -1e-3, 1e-3, 3e-3];
    g.iter().flat_map(|&a| g.iter().map(move |&b| vec![a, b])).collect()
}

/// Newton settings for [`solve_ode_manifold`].
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolveOptions {
    pub max_iter: usize,
    /// Stop once `‖dq‖ ≤ step_tol·(1 + ‖q‖)`.
    pub step_tol: f64,
    /// Required final collocation residual norm.
    pub residual_tol: f64,
    pub split: SplitOptions,
}

impl Default for OdeSolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 30,
            step_tol: 1e-12,
            residual_tol: 1e-6,
            split: SplitOptions::default(),
        }
    }
}

/// Result of a collocation solve.
#[derive(Debug, Clone)]
pub struct OdeManifold {
    pub model: ManifoldModel,
    /// Norm of the stacked collocation residual at the solution.
    pub residual_norm: f64,
    /// Residual norm before each Newton step.
    pub history: Vec<f64>,
}

/// Solves for the graph coefficients by Gauss-Newton on the collocation
/// residuals at `nodes` (least squares when overdetermined).
pub fn solve_ode_manifold<F: VectorField + ?Sized>(
    field: &F,
    x_star: &[f64],
    kind: ManifoldKind,
    basis: &[MultiIndex],
    nodes: &[Vec<f64>],
    q0: Option<&[f64]>,
    opts: &OdeSolveOptions,
) -> Result<OdeManifold> {
    let n = field.dim();
    if x_star.len() != n {
        return Err(Error::Dimension { expected: n, got: x_star.len() });
    }
    let f0 = field.rhs(x_star);
    let f0n = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(f0n <= EQUILIBRIUM_TOL) {
        return Err(Error::InfeasibleState(format!("x* is not an equilibrium: ‖f(x*)‖ = {f0n:e}")));
    }
    let split = spectral_split_with(&field.jacobian(x_star), x_star, SplitMode::Continuous, &opts.split)?;
    let mut model = ManifoldModel::zeros(kind, basis.to_vec(), split)?;
    let nq = model.q().len();
    if nodes.len() * model.output_dim() < nq {
        return Err(Error::InvalidConfig(format!(
            "{} collocation equations for {nq} coefficients",
            nodes.len() * model.output_dim()
        )));
    }
    if let Some(q0) = q0 {
        model.set_q(q0)?;
    }
    let split = model.split.clone();
    let rem = Remainder::new(field, &split)?;
    let stacked = |m: &ManifoldModel| -> Vec<f64> {
        nodes.par_iter().map(|z| residual_at(&rem, m, z)).collect::<Vec<_>>().concat()
    };
    let mut q = model.q();
    let mut history = Vec::new();
    for _ in 0..opts.max_iter {
        model.set_q(&q)?;
        let r = stacked(&model);
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let stalled = history.last().is_some_and(|&prev: &f64| rn >= prev * (1.0 - 1e-6));
        history.push(rn);
        if !rn.is_finite() {
            break;
        }
        // least-squares collocation leaves a nonzero floor; stop once it stops moving
        if stalled && rn <= opts.residual_tol {
            return Ok(OdeManifold { model, residual_norm: rn, history });
        }
        let cols: Vec<Vec<f64>> = (0..nq)
            .map(|i| {
                let h = 1e-7 * (1.0 + q[i].abs());
                let mut m = model.clone();
                let mut qs = q.clone();
                qs[i] += h;
                m.set_q(&qs).expect("length checked");
                stacked(&m).iter().zip(&r).map(|(a, b)| (a - b) / h).collect()
            })
            .collect();
        let jac = DMatrix::from_fn(r.len(), nq, |row, c| cols[c][row]);
        let rhs = DMatrix::from_iterator(r.len(), 1, r.iter().map(|v| -v));
        let dq = lstsq_multi(&jac, &rhs, RANK_TOL)?.x;
        for (qi, d) in q.iter_mut().zip(dq.iter()) {
            *qi += d;
        }
        let qn = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dq.norm() <= opts.step_tol * (1.0 + qn) {
            model.set_q(&q)?;
            let r = stacked(&model);
            let residual_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            history.push(residual_norm);
            if residual_norm <= opts.residual_tol {
                return Ok(OdeManifold { model, residual_norm, history });
            }
            break;
        }
    }
    Err(Error::NoConvergence { iterations: history.len(), history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyman::enumerate_basis;

    struct Synthetic;
    impl VectorField for Synthetic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, x: &[f64]) -> Vec<f64> {
            vec![-x[0], 2.0 * x[1] + x[0] * x[0]]
        }
    }

    #[test]
    fn synthetic_stable_manifold_is_exact() {
        let basis = enumerate_basis(1, 3, true, None).unwrap();
        let nodes: Vec<Vec<f64>> = [-0.2, -0.1, 0.1, 0.2].iter().map(|&z| vec![z]).collect();
        let sol = solve_ode_manifold(&Synthetic, &[0.0, 0.0], ManifoldKind::Stable, &basis, &nodes, None, &OdeSolveOptions::default())
            .unwrap();
        let m = &sol.model;
        assert!((m.coefficient(0, &[2]) + 0.25).abs() < 1e-9);
        assert!(m.coefficient(0, &[1]).abs() < 1e-9);
        assert!(m.coefficient(0, &[3]).abs() < 1e-9);
    }

    struct Linear;
    impl VectorField for Linear {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, x: &[f64]) -> Vec<f64> {
            vec![-x[0] + 0.3 * x[1], 2.0 * x[1]]
        }
    }

    #[test]
    fn linear_field_zero_residual() {
        let j = Linear.jacobian(&[0.0, 0.0]);
        let split = crate::numlin::spectral_split(&j, &[0.0, 0.0], SplitMode::Continuous).unwrap();
        let model = ManifoldModel::zeros(ManifoldKind::Stable, enumerate_basis(1, 2, true, None).unwrap(), split).unwrap();
        for z in [-0.5, 0.1, 0.7] {
            let r = ode_residual(&Linear, &model, &[z]).unwrap();
            assert!(r[0].abs() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn rejects_non_equilibrium() {
        let basis = enumerate_basis(1, 2, true, None).unwrap();
        let nodes = vec![vec![0.1], vec![0.2]];
        assert!(matches!(
            solve_ode_manifold(&Synthetic, &[0.1, 0.0], ManifoldKind::Stable, &basis, &nodes, None, &OdeSolveOptions::default()),
            Err(Error::InfeasibleState(_))
        ));
    }
}
