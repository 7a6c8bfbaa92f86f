//! Coarse fixed points: Newton on `F_T(x) - x`, stability classification,
//! and pseudo-arclength continuation of equilibrium branches.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blackbox::CoarseMap;
use crate::error::{Error, Result};
use crate::io::{sig6, Table};
use crate::numlin::{jacobian_fd, solve_dense, FdScheme, SplitMode, DELTA_HYP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Saddle,
    Source,
    /// Some eigenvalue lies within the hyperbolicity margin of the boundary.
    NonHyperbolic,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Stable => "stable",
            Self::Saddle => "saddle",
            Self::Source => "source",
            Self::NonHyperbolic => "non_hyperbolic",
        })
    }
}

/// Classifies a spectrum relative to the unit circle (maps) or the
/// imaginary axis (flows).
pub fn classify(eigenvalues: &[Complex64], mode: SplitMode, delta_hyp: f64) -> Stability {
    let dist = |l: &Complex64| match mode {
        SplitMode::Discrete => l.norm() - 1.0,
        SplitMode::Continuous => l.re,
    };
    if eigenvalues.iter().any(|l| dist(l).abs() <= delta_hyp) {
        return Stability::NonHyperbolic;
    }
    let unstable = eigenvalues.iter().filter(|l| dist(l) > 0.0).count();
    match unstable {
        0 => Stability::Stable,
        u if u == eigenvalues.len() => Stability::Source,
        _ => Stability::Saddle,
    }
}

/// Accepted fixed point along a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub x: Vec<f64>,
    /// Full parameter vector.
    pub p: Vec<f64>,
    /// Index of the continuation parameter in `p`.
    pub param_index: usize,
    pub eigenvalues: Vec<Complex64>,
    pub stability: Stability,
    pub residual_norm: f64,
}

impl BranchPoint {
    /// Value of the active parameter.
    pub fn p_i(&self) -> f64 {
        self.p.get(self.param_index).copied().unwrap_or(f64::NAN)
    }
}

/// Options shared by the Newton solver and the continuation corrector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Finite-difference step of the state Jacobian.
    pub eps: f64,
    pub scheme: FdScheme,
    pub mode: SplitMode,
    pub delta_hyp: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            eps: 1e-2,
            scheme: FdScheme::Central,
            mode: SplitMode::Discrete,
            delta_hyp: DELTA_HYP,
        }
    }
}

impl NewtonOptions {
    /// Defaults for ensemble-averaged maps.
    pub fn stochastic() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 20,
            ..Self::default()
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn residual<M: CoarseMap + ?Sized>(map: &M, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    Ok(map.evaluate(x, p)?.iter().zip(x).map(|(f, x)| f - x).collect())
}

/// Spectrum of the coarse Jacobian at `x`, nearest the boundary last.
pub fn spectrum<M: CoarseMap + ?Sized>(
    map: &M,
    x: &[f64],
    p: &[f64],
    eps: f64,
    scheme: FdScheme,
) -> Result<(DMatrix<f64>, Vec<Complex64>)> {
    let j = jacobian_fd(map, x, p, eps, scheme)?;
    let mut eig: Vec<Complex64> = j.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(b.im.total_cmp(&a.im)));
    Ok((j, eig))
}

/// Newton's method for `F(x, p) = x` with the basic arguments and
/// default discrete-time classification.
pub fn newton_fixed_point<M: CoarseMap + ?Sized>(
    map: &M,
    x0: &[f64],
    p: &[f64],
    tol: f64,
    max_iter: usize,
    eps: f64,
) -> Result<BranchPoint> {
    let opts = NewtonOptions {
        tol,
        max_iter,
        eps,
        ..NewtonOptions::default()
    };
    newton_fixed_point_with(map, x0, p, &opts)
}

/// Newton's method for `F(x, p) = x`: solves `(I - ∇F) dx = F(x) - x`.
pub fn newton_fixed_point_with<M: CoarseMap + ?Sized>(
    map: &M,
    x0: &[f64],
    p: &[f64],
    opts: &NewtonOptions,
) -> Result<BranchPoint> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig("Newton tolerance must be positive".into()));
    }
    let n = map.dim();
    let mut x = x0.to_vec();
    let mut history = Vec::new();
    for _ in 0..=opts.max_iter {
        let r = residual(map, &x, p)?;
        let rn = norm(&r);
        history.push(rn);
        if rn <= opts.tol {
            let (_, eigenvalues) = spectrum(map, &x, p, opts.eps, opts.scheme)?;
            return Ok(BranchPoint {
                stability: classify(&eigenvalues, opts.mode, opts.delta_hyp),
                x,
                p: p.to_vec(),
                param_index: 0,
                eigenvalues,
                residual_norm: rn,
            });
        }
        if history.len() > opts.max_iter {
            break;
        }
        let j = jacobian_fd(map, &x, p, opts.eps, opts.scheme)?;
        let m = DMatrix::identity(n, n) - &j;
        let smin = m.singular_values().min();
        if smin <= 1e-12 * (1.0 + j.norm()) {
            return Err(Error::NonHyperbolic {
                eigenvalue: Complex64::new(1.0, 0.0),
                margin: smin,
            });
        }
        let dx = solve_dense(&m, &r).map_err(|e| match e {
            Error::SingularMatrix { condition } => Error::NonHyperbolic {
                eigenvalue: Complex64::new(1.0, 0.0),
                margin: 1.0 / condition,
            },
            other => other,
        })?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence { iterations: history.len(), history });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, history })
}

/// Pseudo-arclength continuation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    /// Signed arclength step.
    pub ds: f64,
    /// Number of new points requested.
    pub steps: usize,
    /// Smallest step before the branch is abandoned (default `|ds|/64`).
    pub ds_min: Option<f64>,
    pub newton: NewtonOptions,
    /// Finite-difference step for `∂F/∂p`.
    pub eps_p: f64,
    /// Stop once the parameter leaves this interval.
    pub p_bounds: Option<(f64, f64)>,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            ds: 0.05,
            steps: 100,
            ds_min: None,
            newton: NewtonOptions {
                max_iter: 12,
                ..NewtonOptions::default()
            },
            eps_p: 1e-4,
            p_bounds: None,
        }
    }
}

/// Outcome of a continuation run that may stop early.
#[derive(Debug)]
pub struct Continuation {
    /// Seeds followed by every accepted point.
    pub points: Vec<BranchPoint>,
    /// Why the run stopped before `steps` points, if it did.
    pub termination: Option<Error>,
}

fn with_param(p: &[f64], i: usize, v: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] = v;
    q
}

/// One corrector solve on the bordered system. Returns the converged
/// augmented state `(x, p_i)` and the final residual norm.
fn correct<M: CoarseMap + ?Sized>(
    map: &M,
    base_p: &[f64],
    k: usize,
    anchor: &[f64],
    tangent: &[f64],
    ds: f64,
    opts: &ContinuationOptions,
) -> Result<(Vec<f64>, f64)> {
    let n = map.dim();
    let mut y: Vec<f64> = anchor.iter().zip(tangent).map(|(a, t)| a + ds * t).collect();
    let mut history = Vec::new();
    for _ in 0..opts.newton.max_iter {
        let p = with_param(base_p, k, y[n]);
        let g = residual(map, &y[..n], &p)?;
        let arc: f64 = y.iter().zip(anchor).zip(tangent).map(|((y, a), t)| t * (y - a)).sum::<f64>() - ds;
        let gn = norm(&g);
        history.push(gn.max(arc.abs()));
        if gn <= opts.newton.tol && arc.abs() <= 1e-8 {
            return Ok((y, gn));
        }
        let jx = jacobian_fd(map, &y[..n], &p, opts.newton.eps, opts.newton.scheme)?;
        let fp = {
            let h = opts.eps_p;
            let plus = map.evaluate(&y[..n], &with_param(base_p, k, y[n] + h))?;
            let minus = map.evaluate(&y[..n], &with_param(base_p, k, y[n] - h))?;
            plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>()
        };
        let mut big = DMatrix::zeros(n + 1, n + 1);
        for r in 0..n {
            for c in 0..n {
                big[(r, c)] = jx[(r, c)] - if r == c { 1.0 } else { 0.0 };
            }
            big[(r, n)] = fp[r];
        }
        for c in 0..=n {
            big[(n, c)] = tangent[c];
        }
        let mut rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        rhs.push(-arc);
        let dy = solve_dense(&big, &rhs)?;
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += d;
        }
        if y.iter().any(|v| !v.is_finite()) {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: history.len(), history })
}

/// Continues a branch from two converged seeds with the default options.
pub fn continue_branch<M: CoarseMap + ?Sized>(
    map: &M,
    seed0: &BranchPoint,
    seed1: &BranchPoint,
    param_index: usize,
    ds: f64,
    steps: usize,
) -> Result<Vec<BranchPoint>> {
    let opts = ContinuationOptions {
        ds,
        steps,
        ..ContinuationOptions::default()
    };
    let run = continue_branch_with(map, seed0, seed1, param_index, &opts)?;
    match run.termination {
        None => Ok(run.points),
        Some(e) => Err(e),
    }
}

/// Pseudo-arclength continuation: secant predictor from the last two
/// points, bordered Newton corrector on `F(x,p) - x = 0` together with the
/// arclength condition, step halving on failure.
pub fn continue_branch_with<M: CoarseMap + ?Sized>(
    map: &M,
    seed0: &BranchPoint,
    seed1: &BranchPoint,
    param_index: usize,
    opts: &ContinuationOptions,
) -> Result<Continuation> {
    let n = map.dim();
    if param_index >= map.param_dim() {
        return Err(Error::InvalidConfig(format!(
            "parameter index {param_index} out of range for {} parameters",
            map.param_dim()
        )));
    }
    let ds0 = opts.ds;
    if !(ds0 != 0.0 && ds0.is_finite()) {
        return Err(Error::InvalidConfig("continuation step must be nonzero".into()));
    }
    let ds_min = opts.ds_min.unwrap_or(ds0.abs() / 64.0);
    let augment = |b: &BranchPoint| {
        let mut y = b.x.clone();
        y.push(b.p[param_index]);
        y
    };
    if seed0.p[param_index] == seed1.p[param_index] {
        return Err(Error::InvalidConfig("continuation seeds must have distinct parameter values".into()));
    }
    let base_p = seed1.p.clone();
    let mut points = vec![
        BranchPoint { param_index, ..seed0.clone() },
        BranchPoint { param_index, ..seed1.clone() },
    ];
    let mut prev = augment(seed0);
    let mut last = augment(seed1);
    let mut ds = ds0.abs();
    let direction = ds0.signum();
    let mut termination = None;

    for _ in 0..opts.steps {
        let secant: Vec<f64> = last.iter().zip(&prev).map(|(a, b)| a - b).collect();
        let sn = norm(&secant);
        let tangent: Vec<f64> = secant.iter().map(|v| v / sn).collect();
        let accepted = loop {
            match correct(map, &base_p, param_index, &last, &tangent, direction * ds, opts) {
                Ok(y) => break Some(y),
                Err(e) => {
                    ds /= 2.0;
                    if ds < ds_min {
                        termination = Some(Error::BranchTerminated {
                            points: points.len(),
                            reason: format!("corrector failed at step {ds:e} below minimum: {e}"),
                        });
                        break None;
                    }
                }
            }
        };
        let Some((y, rn)) = accepted else { break };
        let p = with_param(&base_p, param_index, y[n]);
        let (_, eigenvalues) = spectrum(map, &y[..n], &p, opts.newton.eps, opts.newton.scheme)?;
        points.push(BranchPoint {
            x: y[..n].to_vec(),
            stability: classify(&eigenvalues, opts.newton.mode, opts.newton.delta_hyp),
            p,
            param_index,
            eigenvalues,
            residual_norm: rn,
        });
        prev = std::mem::replace(&mut last, y);
        ds = (ds * 2.0).min(ds0.abs());
        if let Some((lo, hi)) = opts.p_bounds {
            let v = last[n];
            if v < lo || v > hi {
                break;
            }
        }
    }
    Ok(Continuation { points, termination })
}

/// Interval between consecutive branch points whose stability differs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityFlip {
    pub p_low: f64,
    pub p_high: f64,
    pub from: Stability,
    pub to: Stability,
}

impl StabilityFlip {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.p_low + self.p_high)
    }
}

/// Brackets every change of stability class along the branch.
/// Non-hyperbolic points are skipped so a flip spanning one is reported once.
pub fn stability_flips(branch: &[BranchPoint]) -> Vec<StabilityFlip> {
    let hyperbolic: Vec<&BranchPoint> = branch.iter().filter(|b| b.stability != Stability::NonHyperbolic).collect();
    hyperbolic
        .windows(2)
        .filter(|w| w[0].stability != w[1].stability)
        .map(|w| {
            let (a, b) = (w[0].p_i(), w[1].p_i());
            StabilityFlip {
                p_low: a.min(b),
                p_high: a.max(b),
                from: w[0].stability,
                to: w[1].stability,
            }
        })
        .collect()
}

/// Parameter values of folds (turning points of `p_i` along the branch),
/// refined by a quadratic through the three points around each turn.
pub fn locate_folds(branch: &[BranchPoint]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = vec![0.0];
    for w in branch.windows(2) {
        let mut d2 = (w[1].p_i() - w[0].p_i()).powi(2);
        for (a, b) in w[1].x.iter().zip(&w[0].x) {
            d2 += (a - b).powi(2);
        }
        s.push(s.last().copied().unwrap_or(0.0) + d2.sqrt());
    }
    for i in 1..branch.len().saturating_sub(1) {
        let (p0, p1, p2) = (branch[i - 1].p_i(), branch[i].p_i(), branch[i + 1].p_i());
        if (p1 - p0) * (p2 - p1) < 0.0 {
            // Lagrange quadratic p(s) through the three points; vertex value
            let (s0, s1, s2) = (s[i - 1], s[i], s[i + 1]);
            let d01 = (p1 - p0) / (s1 - s0);
            let d12 = (p2 - p1) / (s2 - s1);
            let a = (d12 - d01) / (s2 - s0);
            let b = d01 - a * (s0 + s1);
            let c = p0 - a * s0 * s0 - b * s0;
            out.push(c - b * b / (4.0 * a));
        }
    }
    out
}

/// Branch table: `p, x_1..x_n, re_1, im_1, ..., stability`.
pub fn branch_table(branch: &[BranchPoint]) -> Table {
    let n = branch.first().map_or(0, |b| b.x.len());
    let mut header = vec!["p".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    for i in 1..=n {
        header.push(format!("re_lambda_{i}"));
        header.push(format!("im_lambda_{i}"));
    }
    header.push("stability".into());
    let mut t = Table::new(header);
    for b in branch {
        let mut row = vec![sig6(b.p_i())];
        row.extend(b.x.iter().map(|&v| sig6(v)));
        for l in &b.eigenvalues {
            row.push(sig6(l.re));
            row.push(sig6(l.im));
        }
        row.push(b.stability.to_string());
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox::FnMap;

    #[test]
    fn classify_examples() {
        let c = |v: &[(f64, f64)], m| classify(&v.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>(), m, 1e-6);
        assert_eq!(c(&[(-0.5, 0.0), (-0.5, 0.0), (2.0, 0.0)], SplitMode::Discrete), Stability::Saddle);
        assert_eq!(c(&[(0.7515, 0.0), (1.0006, 0.013), (1.0006, -0.013)], SplitMode::Discrete), Stability::Saddle);
        assert_eq!(c(&[(-5.7148, 0.0), (0.011, 0.03), (0.011, -0.03)], SplitMode::Continuous), Stability::Saddle);
        assert_eq!(c(&[(0.5, 0.0)], SplitMode::Discrete), Stability::Stable);
        assert_eq!(c(&[(1.5, 0.0)], SplitMode::Discrete), Stability::Source);
        assert_eq!(c(&[(1.0, 1e-8)], SplitMode::Discrete), Stability::NonHyperbolic);
    }

    #[test]
    fn scalar_square_map_roots() {
        let map = FnMap::new(1, 0, |x: &[f64], _p: &[f64]| vec![x[0] * x[0]]);
        let a = newton_fixed_point(&map, &[0.3], &[], 1e-12, 50, 1e-3).unwrap();
        assert!(a.x[0].abs() < 1e-10);
        assert_eq!(a.stability, Stability::Stable);
        let b = newton_fixed_point(&map, &[1.3], &[], 1e-12, 50, 1e-3).unwrap();
        assert!((b.x[0] - 1.0).abs() < 1e-10);
        assert_eq!(b.stability, Stability::Source);
    }

    #[test]
    fn newton_reports_history_on_failure() {
        // x -> x + 1 has no fixed point; I - J = 0 is singular
        let map = FnMap::new(1, 0, |x: &[f64], _p: &[f64]| vec![x[0] + 1.0]);
        assert!(matches!(
            newton_fixed_point(&map, &[0.0], &[], 1e-10, 5, 1e-3),
            Err(Error::NonHyperbolic { .. })
        ));
        // x -> x + 0.1 sin(x) + 1 never reaches a root within 3 steps
        let map = FnMap::new(1, 0, |x: &[f64], _p: &[f64]| vec![x[0] + 1.0 + 0.5 * x[0].sin()]);
        match newton_fixed_point(&map, &[0.0], &[], 1e-14, 1, 1e-3) {
            Err(Error::NoConvergence { history, .. }) => assert_eq!(history.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
