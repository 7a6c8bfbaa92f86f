//! Dense kernels: finite-difference Jacobians, real block eigen-splitting,
//! least squares with pseudoinverse fallback, and pivoted linear solves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blackbox::CoarseMap;
use crate::error::{Error, Result};

/// Default relative rank threshold for [`lstsq`].
pub const RANK_TOL: f64 = 1e-10;
/// Default hyperbolicity margin.
pub const DELTA_HYP: f64 = 1e-6;
/// Largest eigenvector-matrix condition accepted by [`spectral_split`].
pub const MAX_EIGVEC_CONDITION: f64 = 1e8;
/// Condition number above which [`solve_dense`] reports a singular matrix.
pub const SINGULAR_CONDITION: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdScheme {
    Forward,
    Central,
}

/// Stability boundary used when splitting a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Maps: unit circle.
    Discrete,
    /// Flows: imaginary axis.
    Continuous,
}

/// Sign convention for eigenvectors. Every eigenvector is scaled to unit
/// norm with its largest-magnitude component real; this picks its sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    LargestPositive,
    LargestNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    pub delta_hyp: f64,
    pub max_condition: f64,
    pub orientation: Orientation,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self {
            delta_hyp: DELTA_HYP,
            max_condition: MAX_EIGVEC_CONDITION,
            orientation: Orientation::LargestPositive,
        }
    }
}

/// Saddle-centred eigen-coordinate frame.
///
/// `x = x_star + V1 z_s + V2 z_u`. Complex pairs `a ± iβ` (β > 0) take two
/// adjacent columns `(Re v, Im v)` of the eigenvector for `a + iβ`, with the
/// block `[[a, β], [-β, a]]` in `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    pub x_star: Vec<f64>,
    /// Stable eigenvalues first, then unstable; pairs listed `+iβ` then `-iβ`.
    pub eigenvalues: Vec<Complex64>,
    pub v1: DMatrix<f64>,
    pub v2: DMatrix<f64>,
    pub lambda_s: DMatrix<f64>,
    pub lambda_u: DMatrix<f64>,
    pub mode: SplitMode,
}

impl SpectralSplit {
    pub fn dim(&self) -> usize {
        self.x_star.len()
    }

    /// Number of stable directions `l`.
    pub fn stable_dim(&self) -> usize {
        self.v1.ncols()
    }

    pub fn unstable_dim(&self) -> usize {
        self.v2.ncols()
    }

    /// `[V1 V2]`.
    pub fn v(&self) -> DMatrix<f64> {
        let n = self.dim();
        let l = self.stable_dim();
        let mut v = DMatrix::zeros(n, n);
        v.columns_mut(0, l).copy_from(&self.v1);
        v.columns_mut(l, n - l).copy_from(&self.v2);
        v
    }

    /// `blockdiag(Λs, Λu)`.
    pub fn lambda(&self) -> DMatrix<f64> {
        let n = self.dim();
        let l = self.stable_dim();
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (l, l)).copy_from(&self.lambda_s);
        m.view_mut((l, l), (n - l, n - l)).copy_from(&self.lambda_u);
        m
    }

    /// Builds a split from an explicit frame (diagonal `Λ` from real
    /// eigenvalues). Used for analytic models whose frame is known.
    pub fn from_real_frame(
        x_star: Vec<f64>,
        v1: DMatrix<f64>,
        v2: DMatrix<f64>,
        stable: &[f64],
        unstable: &[f64],
        mode: SplitMode,
    ) -> Result<Self> {
        let n = x_star.len();
        if v1.nrows() != n || v2.nrows() != n || v1.ncols() + v2.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: v1.ncols() + v2.ncols(),
            });
        }
        if stable.len() != v1.ncols() || unstable.len() != v2.ncols() {
            return Err(Error::InvalidConfig("eigenvalue count does not match frame".into()));
        }
        let eigenvalues = stable
            .iter()
            .chain(unstable)
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        Ok(Self {
            x_star,
            eigenvalues,
            v1,
            v2,
            lambda_s: DMatrix::from_diagonal(&DVector::from_column_slice(stable)),
            lambda_u: DMatrix::from_diagonal(&DVector::from_column_slice(unstable)),
            mode,
        })
    }

    /// Keeps the frame and replaces `Λs`, `Λu` with the diagonal blocks of
    /// `V⁻¹ J V`. Lets a frame resolved from one Jacobian carry the spectrum
    /// of another map with the same eigenvectors (e.g. a shorter horizon).
    pub fn projected(&self, j: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim();
        if j.nrows() != n || j.ncols() != n {
            return Err(Error::Dimension { expected: n, got: j.nrows() });
        }
        let v = self.v();
        let jv = j * &v;
        let m = v.lu().solve(&jv).ok_or(Error::Transform { condition: f64::INFINITY })?;
        let l = self.stable_dim();
        let lambda_s = m.view((0, 0), (l, l)).into_owned();
        let lambda_u = m.view((l, l), (n - l, n - l)).into_owned();
        let eigenvalues = lambda_s
            .complex_eigenvalues()
            .iter()
            .chain(lambda_u.complex_eigenvalues().iter())
            .copied()
            .collect();
        Ok(Self {
            eigenvalues,
            lambda_s,
            lambda_u,
            ..self.clone()
        })
    }
}

/// Rebuilds a real block-diagonal `Λ` from a listed spectrum.
pub(crate) fn block_diag_from(eigs: &[Complex64]) -> Result<DMatrix<f64>> {
    let k = eigs.len();
    let mut m = DMatrix::zeros(k, k);
    let mut i = 0;
    while i < k {
        let lam = eigs[i];
        if lam.im == 0.0 {
            m[(i, i)] = lam.re;
            i += 1;
        } else {
            if i + 1 >= k {
                return Err(Error::InvalidConfig("unpaired complex eigenvalue".into()));
            }
            m[(i, i)] = lam.re;
            m[(i + 1, i + 1)] = lam.re;
            m[(i, i + 1)] = lam.im.abs();
            m[(i + 1, i)] = -lam.im.abs();
            i += 2;
        }
    }
    Ok(m)
}


/// Finite-difference Jacobian of `map` at `(x, p)`.
///
/// Stochastic maps always use central differences.
pub fn jacobian_fd<M: CoarseMap + ?Sized>(
    map: &M,
    x: &[f64],
    p: &[f64],
    eps: f64,
    scheme: FdScheme,
) -> Result<DMatrix<f64>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidConfig(format!("finite-difference eps must be positive, got {eps}")));
    }
    let n = map.dim();
    if x.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len() });
    }
    let scheme = if map.is_stochastic() { FdScheme::Central } else { scheme };
    let base = match scheme {
        FdScheme::Forward => Some(map.evaluate(x, p)?),
        FdScheme::Central => None,
    };
    let column = |i: usize| -> Result<Vec<f64>> {
        let shifted = |h: f64| {
            let mut xs = x.to_vec();
            xs[i] += h;
            map.evaluate(&xs, p).map_err(|e| match e {
                Error::Evaluation { context } => Error::Evaluation {
                    context: format!("Jacobian column {i}: {context}"),
                },
                other => other,
            })
        };
        let plus = shifted(eps)?;
        Ok(match &base {
            Some(f0) => plus.iter().zip(f0).map(|(a, b)| (a - b) / eps).collect(),
            None => {
                let minus = shifted(-eps)?;
                plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * eps)).collect()
            }
        })
    };
    let cols: Vec<Vec<f64>> = (0..n).into_par_iter().map(column).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

fn boundary_distance(lam: Complex64, mode: SplitMode) -> f64 {
    match mode {
        SplitMode::Discrete => lam.norm() - 1.0,
        SplitMode::Continuous => lam.re,
    }
}

/// Sort key inside the stable and unstable groups.
fn order_key(lam: Complex64, mode: SplitMode) -> f64 {
    match mode {
        SplitMode::Discrete => lam.norm(),
        SplitMode::Continuous => lam.re,
    }
}

/// Reduced row echelon form of the rows of `basis` (each row one vector).
fn rref(mut rows: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let k = rows.len();
    if k == 0 {
        return rows;
    }
    let n = rows[0].len();
    let mut lead = 0;
    for r in 0..k {
        // pick the column and row with the largest pivot at or after `lead`
        let mut best: Option<(usize, usize, f64)> = None;
        for c in lead..n {
            for (i, row) in rows.iter().enumerate().skip(r) {
                let m = row[c].norm();
                if m > 1e-12 && best.map_or(true, |b| c < b.1 || (c == b.1 && m > b.2)) {
                    best = Some((i, c, m));
                }
            }
            if best.is_some() {
                break;
            }
        }
        let Some((i, c, _)) = best else { break };
        rows.swap(r, i);
        let piv = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = rows[r].clone();
        for (j, row) in rows.iter_mut().enumerate() {
            if j != r {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        lead = c + 1;
    }
    rows
}

fn normalize(v: &mut [Complex64], orientation: Orientation) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, c)| if c.norm() > acc.1 + 1e-12 { (i, c.norm()) } else { acc });
    let phase = v[imax] / v[imax].norm();
    let sign = match orientation {
        Orientation::LargestPositive => 1.0,
        Orientation::LargestNegative => -1.0,
    };
    let scale = Complex64::new(sign, 0.0) / (phase * norm);
    for c in v.iter_mut() {
        *c *= scale;
    }
}

/// Null space of `J - λI`, `k` vectors.
fn eigvecs(j: &DMatrix<f64>, lam: Complex64, k: usize) -> Option<Vec<Vec<Complex64>>> {
    let n = j.nrows();
    let a = DMatrix::from_fn(n, n, |r, c| {
        Complex64::new(j[(r, c)], 0.0) - if r == c { lam } else { Complex64::new(0.0, 0.0) }
    });
    let scale = j.norm().max(1.0);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    // a repeated eigenvalue without a full set of eigenvectors is defective
    if svd.singular_values[idx[k - 1]] > 1e-6 * scale {
        return None;
    }
    let rows: Vec<Vec<Complex64>> = idx[..k]
        .iter()
        .map(|&r| (0..n).map(|c| vt[(r, c)].conj()).collect())
        .collect();
    Some(if k > 1 { rref(rows) } else { rows })
}

/// Spectral split with default options.
pub fn spectral_split(j: &DMatrix<f64>, x_star: &[f64], mode: SplitMode) -> Result<SpectralSplit> {
    spectral_split_with(j, x_star, mode, &SplitOptions::default())
}

/// Splits the spectrum of `j` into stable and unstable real block frames.
pub fn spectral_split_with(
    j: &DMatrix<f64>,
    x_star: &[f64],
    mode: SplitMode,
    opts: &SplitOptions,
) -> Result<SpectralSplit> {
    let n = j.nrows();
    if j.ncols() != n || x_star.len() != n {
        return Err(Error::Dimension { expected: n, got: x_star.len() });
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation { context: "non-finite Jacobian".into() });
    }
    let eig = j.complex_eigenvalues();
    for &lam in eig.iter() {
        let d = boundary_distance(lam, mode);
        if d.abs() <= opts.delta_hyp {
            return Err(Error::NonHyperbolic { eigenvalue: lam, margin: opts.delta_hyp });
        }
    }
    let scale = j.norm().max(1.0);
    let cluster_tol = 1e-7 * scale;

    // group into clusters of (numerically) repeated eigenvalues, keeping one
    // representative with Im >= 0 for each conjugate pair
    let mut reps: Vec<(Complex64, usize)> = Vec::new();
    for &lam in eig.iter() {
        let lam = if lam.im.abs() <= cluster_tol { Complex64::new(lam.re, 0.0) } else { lam };
        if lam.im < 0.0 {
            continue;
        }
        match reps.iter_mut().find(|(r, _)| (*r - lam).norm() <= cluster_tol) {
            Some(entry) => entry.1 += 1,
            None => reps.push((lam, 1)),
        }
    }
    reps.sort_by(|a, b| {
        let sa = boundary_distance(a.0, mode) > 0.0;
        let sb = boundary_distance(b.0, mode) > 0.0;
        sa.cmp(&sb)
            .then(order_key(a.0, mode).total_cmp(&order_key(b.0, mode)))
            .then(b.0.im.total_cmp(&a.0.im))
    });

    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut blocks: Vec<(Complex64, bool)> = Vec::new(); // (eigenvalue, unstable)
    let mut eigenvalues = Vec::with_capacity(n);
    for &(lam, mult) in &reps {
        let unstable = boundary_distance(lam, mode) > 0.0;
        let vecs = eigvecs(j, lam, mult).ok_or(Error::NearDefective { condition: f64::INFINITY })?;
        for mut v in vecs {
            normalize(&mut v, opts.orientation);
            if lam.im == 0.0 {
                cols.push(v.iter().map(|c| c.re).collect());
                eigenvalues.push(lam);
            } else {
                cols.push(v.iter().map(|c| c.re).collect());
                cols.push(v.iter().map(|c| c.im).collect());
                eigenvalues.push(lam);
                eigenvalues.push(lam.conj());
            }
            blocks.push((lam, unstable));
        }
    }
    if cols.len() != n {
        return Err(Error::NearDefective { condition: f64::INFINITY });
    }
    let v = DMatrix::from_fn(n, n, |r, c| cols[c][r]);
    let sv = v.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= opts.max_condition) {
        return Err(Error::NearDefective { condition: cond });
    }

    let l = blocks
        .iter()
        .filter(|b| !b.1)
        .map(|b| if b.0.im == 0.0 { 1 } else { 2 })
        .sum::<usize>();
    let mut lambda = DMatrix::zeros(n, n);
    let mut at = 0;
    for &(lam, _) in &blocks {
        if lam.im == 0.0 {
            lambda[(at, at)] = lam.re;
            at += 1;
        } else {
            lambda[(at, at)] = lam.re;
            lambda[(at + 1, at + 1)] = lam.re;
            lambda[(at, at + 1)] = lam.im;
            lambda[(at + 1, at)] = -lam.im;
            at += 2;
        }
    }
    Ok(SpectralSplit {
        x_star: x_star.to_vec(),
        eigenvalues,
        v1: v.columns(0, l).into_owned(),
        v2: v.columns(l, n - l).into_owned(),
        lambda_s: lambda.view((0, 0), (l, l)).into_owned(),
        lambda_u: lambda.view((l, l), (n - l, n - l)).into_owned(),
        mode,
    })
}

/// Moore-Penrose pseudoinverse truncating singular values below `tau·σmax`.
pub fn pinv(a: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tau * smax && s > 0.0 {
            out += (vt.row(k).transpose() / s) * u.column(k).transpose();
        }
    }
    out
}

/// Diagnostic output of [`lstsq_multi`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    /// One solution column per right-hand side.
    pub x: DMatrix<f64>,
    pub rank: usize,
    /// True when the SVD pseudoinverse branch was used.
    pub pseudoinverse: bool,
    pub singular_values: Vec<f64>,
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b);
    Ok(lstsq_multi(a, &bm, RANK_TOL)?.x.column(0).iter().copied().collect())
}

/// Least squares for several right-hand sides sharing one design matrix.
///
/// Full-rank systems (σmin ≥ τ·σmax) are solved through the normal
/// equations after scaling every column of `A` to unit norm; the scaling
/// leaves the solution unchanged and keeps the Cholesky factor accurate
/// when monomial columns differ by many orders of magnitude.
pub fn lstsq_multi(a: &DMatrix<f64>, b: &DMatrix<f64>, tau: f64) -> Result<LstsqSolution> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    if b.nrows() != a.nrows() {
        return Err(Error::Dimension { expected: a.nrows(), got: b.nrows() });
    }
    if a.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateSystem);
    }
    let sv = a.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > tau * smax).count();
    let full = a.nrows() >= a.ncols() && sv.min() >= tau * smax;
    let singular_values = sv.iter().copied().collect();
    if full {
        let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
        let mut s = a.clone();
        for (mut c, &nrm) in s.column_iter_mut().zip(&norms) {
            c /= nrm;
        }
        let st = s.transpose();
        if let Some(chol) = (&st * &s).cholesky() {
            let mut x = chol.solve(&(&st * b));
            for (mut row, &nrm) in x.row_iter_mut().zip(&norms) {
                row /= nrm;
            }
            return Ok(LstsqSolution { x, rank, pseudoinverse: false, singular_values });
        }
    }
    let x = pinv(a, tau) * b;
    Ok(LstsqSolution { x, rank, pseudoinverse: true, singular_values })
}

/// Solves `M y = rhs` by LU with partial pivoting.
pub fn solve_dense(m: &DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let k = m.nrows();
    if m.ncols() != k {
        return Err(Error::Dimension { expected: k, got: m.ncols() });
    }
    if rhs.len() != k {
        return Err(Error::Dimension { expected: k, got: rhs.len() });
    }
    let sv = m.singular_values();
    let cond = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
    if !(cond <= SINGULAR_CONDITION) {
        return Err(Error::SingularMatrix { condition: cond });
    }
    let lu = m.clone().lu();
    let y = lu
        .solve(&DVector::from_column_slice(rhs))
        .ok_or(Error::SingularMatrix { condition: cond })?;
    Ok(y.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox::FnMap;

    fn reconstruction_error(j: &DMatrix<f64>, s: &SpectralSplit) -> f64 {
        let v = s.v();
        (j * &v - &v * s.lambda()).norm()
    }

    #[test]
    fn jacobian_of_linear_map_is_exact() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, -1.0, 0.5, -3.0, 0.0, 4.0, 0.1, 0.2]);
        let a2 = a.clone();
        let map = FnMap::new(3, 0, move |x: &[f64], _p: &[f64]| {
            (&a2 * DVector::from_column_slice(x)).iter().copied().collect()
        });
        for eps in [1e-2, 1e-3, 1e-4] {
            let j = jacobian_fd(&map, &[0.3, -0.2, 0.1], &[], eps, FdScheme::Central).unwrap();
            assert!((j - &a).amax() < 1e-10);
        }
    }

    #[test]
    fn jacobian_reports_offending_column() {
        let map = FnMap::new(2, 0, |x: &[f64], _p: &[f64]| vec![x[0], 1.0 / (x[1] - 0.01)]);
        let err = jacobian_fd(&map, &[0.0, 0.0], &[], 0.01, FdScheme::Forward).unwrap_err();
        assert!(err.to_string().contains("column 1"), "{err}");
    }

    #[test]
    fn split_toy_jacobian() {
        let j = DMatrix::from_diagonal(&DVector::from_vec(vec![-0.5, -0.5, 2.0]));
        let s = spectral_split(&j, &[0.0; 3], SplitMode::Discrete).unwrap();
        assert_eq!(s.stable_dim(), 2);
        assert!((s.v() - DMatrix::identity(3, 3)).amax() < 1e-12);
        assert_eq!(s.lambda_u[(0, 0)], 2.0);
    }

    #[test]
    fn split_rotation_block() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
        let s = spectral_split(&j, &[0.0; 2], SplitMode::Discrete).unwrap();
        assert_eq!(s.stable_dim(), 2);
        assert!((s.lambda_s[(0, 0)]).abs() < 1e-12);
        assert!((s.lambda_s[(0, 1)] - 0.5).abs() < 1e-12);
        assert!((s.lambda_s[(1, 0)] + 0.5).abs() < 1e-12);
        assert!(reconstruction_error(&j, &s) < 1e-12);
    }

    #[test]
    fn split_rejects_unit_circle() {
        let j = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0 + 1e-9]));
        assert!(matches!(
            spectral_split(&j, &[0.0; 2], SplitMode::Discrete),
            Err(Error::NonHyperbolic { .. })
        ));
    }

    #[test]
    fn split_rejects_jordan_block() {
        let j = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        assert!(matches!(
            spectral_split(&j, &[0.0; 2], SplitMode::Discrete),
            Err(Error::NearDefective { .. })
        ));
    }

    #[test]
    fn projection_carries_squared_spectrum() {
        let j = DMatrix::from_row_slice(3, 3, &[0.9, 0.2, 0.0, -0.3, 1.1, 0.1, 0.05, 0.0, 0.4]);
        let s = spectral_split(&j, &[0.0; 3], SplitMode::Discrete).unwrap();
        let p = s.projected(&(&j * &j)).unwrap();
        let mut want: Vec<f64> = s.eigenvalues.iter().map(|l| (l * l).norm()).collect();
        let mut got: Vec<f64> = p.eigenvalues.iter().map(|l| l.norm()).collect();
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for (a, b) in want.iter().zip(&got) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(p.v1, s.v1);
        assert!(reconstruction_error(&(&j * &j), &p) < 1e-12);
    }

    #[test]
    fn split_continuous_mixed() {
        let j = DMatrix::from_row_slice(
            3,
            3,
            &[-1.75785, -2.76986, -1.6, -2.50697, -3.55898, -2.38912, -0.36, -0.36, -0.376],
        );
        let s = spectral_split(&j, &[0.0; 3], SplitMode::Continuous).unwrap();
        assert_eq!(s.stable_dim(), 1);
        assert!((s.lambda_s[(0, 0)] + 5.7148).abs() < 1e-3);
        assert!(s.lambda_u[(0, 1)] > 0.0);
        assert!(reconstruction_error(&j, &s) <= 1e-8 * j.norm());
    }

    #[test]
    fn lstsq_examples() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert_eq!(lstsq(&i, &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let x = lstsq(&a, &[2.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(matches!(lstsq(&DMatrix::zeros(2, 2), &[1.0, 1.0]), Err(Error::DegenerateSystem)));
    }

    #[test]
    fn solve_dense_examples() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0]));
        assert_eq!(solve_dense(&m, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(solve_dense(&sing, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
    }
}
