//! Monomial bases and the graph representation of invariant manifolds in
//! saddle-centred eigen-coordinates.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{SpectralSplit, SplitMode};

/// Largest `[V1 V2]` condition number accepted by the coordinate transforms.
pub const MAX_TRANSFORM_CONDITION: f64 = 1e12;

/// Exponent vector of one monomial `z_1^{k_1} ... z_d^{k_d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn monomial(&self, z: &[f64]) -> f64 {
        self.0.iter().zip(z).map(|(&k, &v)| v.powi(k as i32)).product()
    }

    /// Partial derivative with respect to `z_i`.
    pub fn monomial_derivative(&self, z: &[f64], i: usize) -> f64 {
        let k = self.0[i];
        if k == 0 {
            return 0.0;
        }
        self.0
            .iter()
            .zip(z)
            .enumerate()
            .map(|(j, (&kj, &v))| {
                if j == i {
                    kj as f64 * v.powi(kj as i32 - 1)
                } else {
                    v.powi(kj as i32)
                }
            })
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "a{{{}}}", parts.join(","))
    }
}

/// Enumerates the basis: `{0..M}^d` minus the zero index, in lexicographic
/// order with the first exponent most significant. With
/// `include_linear = false` the total-degree-one indices are also removed.
/// A `custom` list is validated and returned unchanged.
pub fn enumerate_basis(
    d: usize,
    m: u32,
    include_linear: bool,
    custom: Option<&[MultiIndex]>,
) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::InvalidBasis("input dimension must be positive".into()));
    }
    if let Some(list) = custom {
        for (i, idx) in list.iter().enumerate() {
            if idx.dim() != d {
                return Err(Error::InvalidBasis(format!("index {idx} has dimension {}, expected {d}", idx.dim())));
            }
            if idx.is_zero() {
                return Err(Error::InvalidBasis("constant term is not allowed".into()));
            }
            if list[..i].contains(idx) {
                return Err(Error::InvalidBasis(format!("duplicate index {idx}")));
            }
        }
        return Ok(list.to_vec());
    }
    if m == 0 {
        return Err(Error::InvalidBasis("degree M must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    loop {
        let idx = MultiIndex(cur.clone());
        if !idx.is_zero() && (include_linear || idx.degree() != 1) {
            out.push(idx);
        }
        // odometer increment, last exponent fastest
        let mut pos = d;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if cur[pos] < m {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
        }
    }
}

/// Which invariant manifold a graph describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    /// `z_u = h(z_s)`.
    Stable,
    /// `z_s = h(z_u)`.
    Unstable,
}

impl ManifoldKind {
    pub fn input_dim(self, split: &SpectralSplit) -> usize {
        match self {
            Self::Stable => split.stable_dim(),
            Self::Unstable => split.unstable_dim(),
        }
    }

    pub fn output_dim(self, split: &SpectralSplit) -> usize {
        match self {
            Self::Stable => split.unstable_dim(),
            Self::Unstable => split.stable_dim(),
        }
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(Self::Stable),
            "unstable" => Ok(Self::Unstable),
            other => Err(Error::InvalidConfig(format!("unknown manifold kind `{other}`"))),
        }
    }
}

/// Solves `[V1 V2] z = x - x*`.
pub fn to_z(split: &SpectralSplit, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = split.dim();
    if x.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len() });
    }
    let v = split.v();
    let sv = v.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= MAX_TRANSFORM_CONDITION) {
        return Err(Error::Transform { condition: cond });
    }
    let rhs = DVector::from_iterator(n, x.iter().zip(&split.x_star).map(|(a, b)| a - b));
    let z = v.lu().solve(&rhs).ok_or(Error::Transform { condition: cond })?;
    let l = split.stable_dim();
    Ok((z.rows(0, l).iter().copied().collect(), z.rows(l, n - l).iter().copied().collect()))
}

/// `x* + V1 z_s + V2 z_u`.
pub fn to_x(split: &SpectralSplit, zs: &[f64], zu: &[f64]) -> Result<Vec<f64>> {
    if zs.len() != split.stable_dim() {
        return Err(Error::Dimension { expected: split.stable_dim(), got: zs.len() });
    }
    if zu.len() != split.unstable_dim() {
        return Err(Error::Dimension { expected: split.unstable_dim(), got: zu.len() });
    }
    let x = &split.v1 * DVector::from_column_slice(zs) + &split.v2 * DVector::from_column_slice(zu);
    Ok(x.iter().zip(&split.x_star).map(|(a, b)| a + b).collect())
}

/// Polynomial graph of an invariant manifold.
///
/// Coefficients are stored as an `e × |basis|` table; the flat coefficient
/// vector `q` stacks the rows (output component major).
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldModel {
    pub kind: ManifoldKind,
    pub basis: Vec<MultiIndex>,
    pub coefficients: DMatrix<f64>,
    pub split: SpectralSplit,
}

impl ManifoldModel {
    /// Model with all coefficients zero (the linear eigenspace).
    pub fn zeros(kind: ManifoldKind, basis: Vec<MultiIndex>, split: SpectralSplit) -> Result<Self> {
        let e = kind.output_dim(&split);
        let c = basis.len();
        Self::from_q(kind, basis, split, &vec![0.0; e * c])
    }

    pub fn from_q(kind: ManifoldKind, basis: Vec<MultiIndex>, split: SpectralSplit, q: &[f64]) -> Result<Self> {
        let d = kind.input_dim(&split);
        let e = kind.output_dim(&split);
        if let Some(bad) = basis.iter().find(|b| b.dim() != d) {
            return Err(Error::InvalidBasis(format!("index {bad} does not match input dimension {d}")));
        }
        if basis.iter().any(MultiIndex::is_zero) {
            return Err(Error::InvalidBasis("constant term is not allowed".into()));
        }
        if q.len() != e * basis.len() {
            return Err(Error::Dimension { expected: e * basis.len(), got: q.len() });
        }
        let coefficients = DMatrix::from_row_slice(e, basis.len(), q);
        Ok(Self { kind, basis, coefficients, split })
    }

    pub fn input_dim(&self) -> usize {
        self.kind.input_dim(&self.split)
    }

    pub fn output_dim(&self) -> usize {
        self.kind.output_dim(&self.split)
    }

    /// Flat coefficient vector.
    pub fn q(&self) -> Vec<f64> {
        self.coefficients.transpose().iter().copied().collect()
    }

    pub fn set_q(&mut self, q: &[f64]) -> Result<()> {
        if q.len() != self.coefficients.len() {
            return Err(Error::Dimension { expected: self.coefficients.len(), got: q.len() });
        }
        self.coefficients = DMatrix::from_row_slice(self.output_dim(), self.basis.len(), q);
        Ok(())
    }

    /// Coefficient of output `j` on `index`, zero when absent from the basis.
    pub fn coefficient(&self, j: usize, index: &[u32]) -> f64 {
        self.basis
            .iter()
            .position(|b| b.0 == index)
            .map_or(0.0, |c| self.coefficients[(j, c)])
    }

    pub fn basis_values(&self, z: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| b.monomial(z)).collect()
    }

    /// `h(z)`.
    pub fn evaluate(&self, z: &[f64]) -> Vec<f64> {
        let phi = self.basis_values(z);
        self.coefficients
            .row_iter()
            .map(|row| row.iter().zip(&phi).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `∇h(z)`, an `e × d` matrix.
    pub fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let d = self.input_dim();
        let e = self.output_dim();
        let mut out = DMatrix::zeros(e, d);
        for i in 0..d {
            let dphi: Vec<f64> = self.basis.iter().map(|b| b.monomial_derivative(z, i)).collect();
            for j in 0..e {
                out[(j, i)] = self.coefficients.row(j).iter().zip(&dphi).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    /// Splits a state into (graph input, graph output) coordinates.
    pub fn coordinates(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (zs, zu) = to_z(&self.split, x)?;
        Ok(match self.kind {
            ManifoldKind::Stable => (zs, zu),
            ManifoldKind::Unstable => (zu, zs),
        })
    }

    /// Assembles a state from (graph input, graph output) coordinates.
    pub fn state(&self, input: &[f64], output: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ManifoldKind::Stable => to_x(&self.split, input, output),
            ManifoldKind::Unstable => to_x(&self.split, output, input),
        }
    }

    /// The point on the manifold above `z`.
    pub fn lift_to_manifold(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.state(z, &self.evaluate(z))
    }

    pub fn to_file(&self) -> ManifoldFile {
        ManifoldFile {
            kind: self.kind,
            input_dim: self.input_dim(),
            output_dim: self.output_dim(),
            basis: self.basis.clone(),
            coefficients: rows(&self.coefficients),
            x_star: self.split.x_star.clone(),
            v1: rows(&self.split.v1),
            v2: rows(&self.split.v2),
            eigenvalues: self.split.eigenvalues.iter().map(|c| [c.re, c.im]).collect(),
            mode: Some(self.split.mode),
            lambda_s: Some(rows(&self.split.lambda_s)),
            lambda_u: Some(rows(&self.split.lambda_u)),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ManifoldFile>(s)?.into_model()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidConfig(format!("{what} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

/// On-disk manifold format. Matrices are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldFile {
    pub kind: ManifoldKind,
    pub input_dim: usize,
    pub output_dim: usize,
    pub basis: Vec<MultiIndex>,
    pub coefficients: Vec<Vec<f64>>,
    pub x_star: Vec<f64>,
    #[serde(rename = "V1")]
    pub v1: Vec<Vec<f64>>,
    #[serde(rename = "V2")]
    pub v2: Vec<Vec<f64>>,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SplitMode>,
    #[serde(default, rename = "Lambda_s", skip_serializing_if = "Option::is_none")]
    pub lambda_s: Option<Vec<Vec<f64>>>,
    #[serde(default, rename = "Lambda_u", skip_serializing_if = "Option::is_none")]
    pub lambda_u: Option<Vec<Vec<f64>>>,
}

impl ManifoldFile {
    pub fn into_model(self) -> Result<ManifoldModel> {
        let n = self.x_star.len();
        let v1cols = self.v1.first().map_or(0, Vec::len);
        let v2cols = n - v1cols.min(n);
        let v1 = matrix(&self.v1, n, v1cols, "V1")?;
        let v2 = matrix(&self.v2, n, v2cols, "V2")?;
        let eigenvalues: Vec<Complex64> = self.eigenvalues.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        if eigenvalues.len() != n {
            return Err(Error::Dimension { expected: n, got: eigenvalues.len() });
        }
        let l = v1cols;
        let lambda_s = match &self.lambda_s {
            Some(r) => matrix(r, l, l, "Lambda_s")?,
            None => crate::numlin::block_diag_from(&eigenvalues[..l])?,
        };
        let lambda_u = match &self.lambda_u {
            Some(r) => matrix(r, n - l, n - l, "Lambda_u")?,
            None => crate::numlin::block_diag_from(&eigenvalues[l..])?,
        };
        let split = SpectralSplit {
            x_star: self.x_star,
            eigenvalues,
            v1,
            v2,
            lambda_s,
            lambda_u,
            mode: self.mode.unwrap_or(SplitMode::Discrete),
        };
        if self.kind.input_dim(&split) != self.input_dim || self.kind.output_dim(&split) != self.output_dim {
            return Err(Error::InvalidConfig("input_dim/output_dim do not match V1/V2".into()));
        }
        let c = self.basis.len();
        let coefficients = matrix(&self.coefficients, self.output_dim, c, "coefficients")?;
        let q: Vec<f64> = coefficients.transpose().iter().copied().collect();
        ManifoldModel::from_q(self.kind, self.basis, split, &q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_split() -> SpectralSplit {
        SpectralSplit::from_real_frame(
            vec![0.0; 3],
            DMatrix::identity(3, 2),
            DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]),
            &[-0.5, -0.5],
            &[2.0],
            SplitMode::Discrete,
        )
        .unwrap()
    }

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn basis_tensor_grid_order() {
        let b = enumerate_basis(2, 2, true, None).unwrap();
        let expected: Vec<MultiIndex> =
            [[0, 1], [0, 2], [1, 0], [1, 1], [1, 2], [2, 0], [2, 1], [2, 2]].iter().map(|v| idx(v)).collect();
        assert_eq!(b, expected);
        let b = enumerate_basis(1, 3, true, None).unwrap();
        assert_eq!(b, vec![idx(&[1]), idx(&[2]), idx(&[3])]);
        assert_eq!(enumerate_basis(1, 1, false, None).unwrap(), vec![]);
        assert_eq!(enumerate_basis(2, 1, false, None).unwrap(), vec![idx(&[1, 1])]);
    }

    #[test]
    fn basis_custom_validation() {
        assert!(enumerate_basis(2, 0, true, Some(&[idx(&[0, 0])])).is_err());
        assert!(enumerate_basis(2, 0, true, Some(&[idx(&[1, 0]), idx(&[1, 0])])).is_err());
        assert!(enumerate_basis(2, 0, true, Some(&[idx(&[1])])).is_err());
        assert!(enumerate_basis(2, 0, true, None).is_err());
        let custom = [idx(&[2, 0]), idx(&[1, 1])];
        assert_eq!(enumerate_basis(2, 0, true, Some(&custom)).unwrap(), custom.to_vec());
    }

    #[test]
    fn analytic_toy_graph_values() {
        let basis = enumerate_basis(2, 2, true, None).unwrap();
        let mut m = ManifoldModel::zeros(ManifoldKind::Stable, basis, identity_split()).unwrap();
        let mut q = vec![0.0; 8];
        q[1] = -4.0 / 7.0;
        q[6] = 32.0 / 119.0;
        m.set_q(&q).unwrap();
        assert!((m.evaluate(&[0.2, 0.2])[0] + 0.020705).abs() < 1e-6);
        q[7] = -0.2598;
        m.set_q(&q).unwrap();
        assert!((m.evaluate(&[0.2, 0.2])[0] + 0.02112).abs() < 5e-6);
        assert_eq!(m.evaluate(&[0.0, 0.0]), vec![0.0]);
    }

    #[test]
    fn jacobian_matches_finite_difference() {
        let basis = enumerate_basis(2, 3, true, None).unwrap();
        let q: Vec<f64> = (0..basis.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let m = ManifoldModel::from_q(ManifoldKind::Stable, basis, identity_split(), &q).unwrap();
        let z = [0.3, -0.2];
        let j = m.jacobian(&z);
        for i in 0..2 {
            let h = 1e-6;
            let mut zp = z;
            zp[i] += h;
            let mut zm = z;
            zm[i] -= h;
            let fd = (m.evaluate(&zp)[0] - m.evaluate(&zm)[0]) / (2.0 * h);
            assert!((fd - j[(0, i)]).abs() < 1e-8);
        }
    }

    #[test]
    fn toy_frame_transforms() {
        let s = identity_split();
        let (zs, zu) = to_z(&s, &[0.2, 0.2, 0.5]).unwrap();
        assert_eq!((zs, zu), (vec![0.2, 0.2], vec![0.5]));
        assert_eq!(to_x(&s, &[0.2, 0.2], &[0.5]).unwrap(), vec![0.2, 0.2, 0.5]);
    }

    #[test]
    fn json_round_trip() {
        let basis = enumerate_basis(2, 2, true, None).unwrap();
        let q: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
        let m = ManifoldModel::from_q(ManifoldKind::Stable, basis, identity_split(), &q).unwrap();
        let back = ManifoldModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
