//! Chart-level Riemannian manifolds with an optional almost complex structure.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg;
use crate::report::{ReportBuilder, VerificationReport};
use crate::sampling::map_samples;
use crate::{Matrix, Vector};

/// Eigenvalues at or below this make a metric count as not positive definite.
pub const PD_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ComplexStructure {
    /// `e_{2k-1} -> e_{2k}`, `e_{2k} -> -e_{2k-1}`.
    Canonical,
    /// `entries[i][j]` is `J^i_j`.
    Entries(Vec<Vec<Expression>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    name: String,
    coords: Arc<[String]>,
    metric: Vec<Vec<Expression>>,
    complex_structure: Option<ComplexStructure>,
}

fn shared_coords<S: AsRef<str>>(coords: &[S]) -> Result<Arc<[String]>> {
    if coords.is_empty() {
        return Err(Error::InvalidSpec("a chart needs at least one coordinate".into()));
    }
    let names: Vec<String> = coords.iter().map(|c| c.as_ref().trim().to_string()).collect();
    for (i, n) in names.iter().enumerate() {
        if n.is_empty() || names[..i].contains(n) {
            return Err(Error::InvalidSpec(format!("bad or repeated coordinate name `{n}`")));
        }
    }
    Ok(names.into())
}

fn check_square(what: &'static str, rows: &[Vec<Expression>], m: usize) -> Result<()> {
    if rows.len() != m {
        return Err(Error::Dimension {
            what,
            expected: m,
            found: rows.len(),
        });
    }
    for row in rows {
        if row.len() != m {
            return Err(Error::Dimension {
                what,
                expected: m,
                found: row.len(),
            });
        }
        if let Some(e) = row.iter().find(|e| e.dim() != m) {
            return Err(Error::Dimension {
                what: "expression chart",
                expected: m,
                found: e.dim(),
            });
        }
    }
    Ok(())
}

impl ManifoldSpec {
    /// `metric` is the full matrix of entries; it must be structurally symmetric.
    pub fn new<S: AsRef<str>>(name: &str, coords: &[S], metric: Vec<Vec<Expression>>) -> Result<Self> {
        let coords = shared_coords(coords)?;
        let m = coords.len();
        check_square("metric", &metric, m)?;
        for i in 0..m {
            for j in i + 1..m {
                if metric[i][j].root() != metric[j][i].root() {
                    return Err(Error::InvalidSpec(format!(
                        "metric of `{name}` is not symmetric: g{}{} = {} but g{}{} = {}",
                        i + 1,
                        j + 1,
                        metric[i][j],
                        j + 1,
                        i + 1,
                        metric[j][i]
                    )));
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            coords,
            metric,
            complex_structure: None,
        })
    }

    /// Parses a full matrix of metric entries.
    pub fn from_entries<S: AsRef<str>>(name: &str, coords: &[S], entries: &[&[&str]]) -> Result<Self> {
        let shared = shared_coords(coords)?;
        let metric = entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| Expression::parse_shared(t, shared.clone()).map_err(Error::from))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, &shared, metric)
    }

    pub fn diagonal<S: AsRef<str>>(name: &str, coords: &[S], diagonal: &[&str]) -> Result<Self> {
        let shared = shared_coords(coords)?;
        let m = shared.len();
        if diagonal.len() != m {
            return Err(Error::Dimension {
                what: "metric diagonal",
                expected: m,
                found: diagonal.len(),
            });
        }
        let mut metric = vec![vec![Expression::constant(0.0, shared.clone()); m]; m];
        for (i, t) in diagonal.iter().enumerate() {
            metric[i][i] = Expression::parse_shared(t, shared.clone())?;
        }
        Self::new(name, &shared, metric)
    }

    pub fn euclidean<S: AsRef<str>>(name: &str, coords: &[S]) -> Result<Self> {
        let shared = shared_coords(coords)?;
        let m = shared.len();
        let metric = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| Expression::constant(if i == j { 1.0 } else { 0.0 }, shared.clone()))
                    .collect()
            })
            .collect();
        Self::new(name, &shared, metric)
    }

    pub fn with_canonical_complex_structure(self) -> Result<Self> {
        self.with_structure(ComplexStructure::Canonical)
    }

    pub fn with_complex_structure(self, entries: Vec<Vec<Expression>>) -> Result<Self> {
        check_square("complex structure", &entries, self.dim())?;
        self.with_structure(ComplexStructure::Entries(entries))
    }

    pub fn with_complex_structure_entries(self, entries: &[&[&str]]) -> Result<Self> {
        let parsed = entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| Expression::parse_shared(t, self.coords.clone()).map_err(Error::from))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        self.with_complex_structure(parsed)
    }

    fn with_structure(mut self, j: ComplexStructure) -> Result<Self> {
        if !self.dim().is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "`{}` has odd dimension {} and cannot carry a complex structure",
                self.name,
                self.dim()
            )));
        }
        self.complex_structure = Some(j);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn metric_entry(&self, i: usize, j: usize) -> &Expression {
        &self.metric[i][j]
    }

    pub fn complex_structure(&self) -> Option<&ComplexStructure> {
        self.complex_structure.as_ref()
    }

    pub fn has_complex_structure(&self) -> bool {
        self.complex_structure.is_some()
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension {
                what: "point",
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }

    fn check_pd(&self, g: &Matrix, p: &[f64]) -> Result<()> {
        let smallest = linalg::smallest_eigenvalue(g);
        if !(smallest > PD_THRESHOLD) {
            return Err(Error::NotPositiveDefinite {
                manifold: self.name.clone(),
                point: p.to_vec(),
                smallest,
            });
        }
        Ok(())
    }

    /// Metric matrix at `p`, checked to be positive definite.
    pub fn metric_at(&self, p: &[f64]) -> Result<Matrix> {
        self.check_point(p)?;
        let m = self.dim();
        let mut g = Matrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.metric[i][j].eval(p)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        self.check_pd(&g, p)?;
        Ok(g)
    }

    /// Metric and its coordinate derivatives: `dg[k][(i, j)] = d_k g_ij`.
    pub fn metric_derivatives_at(&self, p: &[f64]) -> Result<(Matrix, Vec<Matrix>)> {
        self.check_point(p)?;
        let m = self.dim();
        let mut g = Matrix::zeros(m, m);
        let mut dg = vec![Matrix::zeros(m, m); m];
        for i in 0..m {
            for j in i..m {
                let e = &self.metric[i][j];
                if let Some(c) = e.constant_value() {
                    g[(i, j)] = c;
                    g[(j, i)] = c;
                    continue;
                }
                let jet = e.eval_jet2(p)?;
                g[(i, j)] = jet.value;
                g[(j, i)] = jet.value;
                for (k, d) in dg.iter_mut().enumerate() {
                    d[(i, j)] = jet.gradient[k];
                    d[(j, i)] = jet.gradient[k];
                }
            }
        }
        self.check_pd(&g, p)?;
        Ok((g, dg))
    }

    pub fn christoffel_at(&self, p: &[f64]) -> Result<Christoffel> {
        let (g, dg) = self.metric_derivatives_at(p)?;
        let g_inv = linalg::inverse_spd(&g).ok_or_else(|| Error::SingularMetric {
            manifold: self.name.clone(),
            point: p.to_vec(),
        })?;
        Ok(Christoffel::from_metric(&g_inv, &dg))
    }

    /// `J^i_j` at `p`.
    pub fn complex_structure_at(&self, p: &[f64]) -> Result<Matrix> {
        Ok(self.complex_structure_jets_at(p)?.0)
    }

    /// `J` and its coordinate derivatives: `dj[k][(i, j)] = d_k J^i_j`.
    pub fn complex_structure_jets_at(&self, p: &[f64]) -> Result<(Matrix, Vec<Matrix>)> {
        self.check_point(p)?;
        let m = self.dim();
        let mut j = Matrix::zeros(m, m);
        let mut dj = vec![Matrix::zeros(m, m); m];
        match &self.complex_structure {
            None => return Err(Error::NoComplexStructure(self.name.clone())),
            Some(ComplexStructure::Canonical) => {
                for k in 0..m / 2 {
                    j[(2 * k + 1, 2 * k)] = 1.0;
                    j[(2 * k, 2 * k + 1)] = -1.0;
                }
            }
            Some(ComplexStructure::Entries(entries)) => {
                for (r, row) in entries.iter().enumerate() {
                    for (c, e) in row.iter().enumerate() {
                        if let Some(v) = e.constant_value() {
                            j[(r, c)] = v;
                            continue;
                        }
                        let jet = e.eval_jet2(p)?;
                        j[(r, c)] = jet.value;
                        for (k, d) in dj.iter_mut().enumerate() {
                            d[(r, c)] = jet.gradient[k];
                        }
                    }
                }
            }
        }
        Ok((j, dj))
    }

    pub fn apply_j(&self, p: &[f64], u: &Vector) -> Result<Vector> {
        if u.len() != self.dim() {
            return Err(Error::Dimension {
                what: "tangent vector",
                expected: self.dim(),
                found: u.len(),
            });
        }
        Ok(self.complex_structure_at(p)? * u)
    }

    /// Covariant derivative of `J`: `out[k][(i, j)] = (nabla_k J)^i_j`.
    pub fn nabla_j_at(&self, p: &[f64]) -> Result<Vec<Matrix>> {
        let (j, dj) = self.complex_structure_jets_at(p)?;
        let gamma = self.christoffel_at(p)?;
        let m = self.dim();
        let mut out = dj;
        for (k, d) in out.iter_mut().enumerate() {
            for i in 0..m {
                for c in 0..m {
                    let mut v = 0.0;
                    for l in 0..m {
                        v += gamma.get(i, k, l) * j[(l, c)] - gamma.get(l, k, c) * j[(i, l)];
                    }
                    d[(i, c)] += v;
                }
            }
        }
        Ok(out)
    }

    /// `(max |J^2 + I|, max |g(J e_i, J e_j) - g(e_i, e_j)|)` at `p`.
    pub fn hermitian_defects_at(&self, p: &[f64]) -> Result<(f64, f64)> {
        let j = self.complex_structure_at(p)?;
        let g = self.metric_at(p)?;
        let m = self.dim();
        let square = &j * &j + Matrix::identity(m, m);
        let compat = j.transpose() * &g * &j - &g;
        Ok((square.amax(), compat.amax()))
    }

    pub fn kahler_defect_at(&self, p: &[f64]) -> Result<f64> {
        Ok(self
            .nabla_j_at(p)?
            .iter()
            .fold(0.0_f64, |acc, d| acc.max(d.amax())))
    }

    pub fn check_almost_hermitian(&self, samples: &[Vector], tol: f64) -> Result<VerificationReport> {
        if !self.has_complex_structure() {
            return Err(Error::NoComplexStructure(self.name.clone()));
        }
        let defects = map_samples(samples, |p| self.hermitian_defects_at(p.as_slice()))?;
        let mut report = ReportBuilder::new("almost_hermitian", tol, samples.len());
        report.declare("j_squared");
        report.declare("metric_compatibility");
        for (p, (square, compat)) in samples.iter().zip(defects) {
            report.residual("j_squared", square, p.as_slice(), || "J^2 + I".into());
            report.residual("metric_compatibility", compat, p.as_slice(), || "J^T g J - g".into());
        }
        Ok(report.finish())
    }

    pub fn check_kahler(&self, samples: &[Vector], tol: f64) -> Result<VerificationReport> {
        if !self.has_complex_structure() {
            return Err(Error::NoComplexStructure(self.name.clone()));
        }
        let defects = map_samples(samples, |p| self.kahler_defect_at(p.as_slice()))?;
        let mut report = ReportBuilder::new("kahler", tol, samples.len());
        report.declare("nabla_j");
        for (p, d) in samples.iter().zip(defects) {
            report.residual("nabla_j", d, p.as_slice(), || "max |(nabla J)^i_jk|".into());
        }
        Ok(report.finish())
    }
}

/// Christoffel symbols of the Levi-Civita connection, `gamma(k, i, j) = Γ^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    /// `Γ^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)`, filled for `i <= j` and mirrored.
    pub fn from_metric(g_inv: &Matrix, dg: &[Matrix]) -> Self {
        let m = g_inv.nrows();
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in i..m {
                let lowered: Vec<f64> = (0..m)
                    .map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                    .collect();
                for k in 0..m {
                    let v: f64 = (0..m).map(|l| g_inv[(k, l)] * lowered[l]).sum();
                    out.data[k * m * m + i * m + j] = v;
                    out.data[k * m * m + j * m + i] = v;
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[k * self.dim * self.dim + i * self.dim + j]
    }

    /// `Γ(u, v)^k = Γ^k_ij u^i v^j`.
    pub fn contract(&self, u: &Vector, v: &Vector) -> Vector {
        let m = self.dim;
        Vector::from_fn(m, |k, _| {
            let mut s = 0.0;
            for i in 0..m {
                if u[i] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    s += self.get(k, i, j) * u[i] * v[j];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> ManifoldSpec {
        ManifoldSpec::diagonal("S2", &["th", "ph"], &["1", "sin(th)^2"]).unwrap()
    }

    #[test]
    fn metric_values() {
        let r4 = ManifoldSpec::euclidean("R4", &["x1", "x2", "x3", "x4"]).unwrap();
        assert_eq!(r4.metric_at(&[0.1, 2.0, -3.0, 4.0]).unwrap(), Matrix::identity(4, 4));
        let g = sphere().metric_at(&[std::f64::consts::FRAC_PI_2, 0.3]).unwrap();
        assert_eq!(g, Matrix::identity(2, 2));
    }

    #[test]
    fn sphere_christoffels_at_quarter_turn() {
        let gamma = sphere().christoffel_at(&[std::f64::consts::FRAC_PI_4, 1.0]).unwrap();
        assert!((gamma.get(0, 1, 1) + 0.5).abs() < 1e-12);
        assert!((gamma.get(1, 0, 1) - 1.0).abs() < 1e-12);
        assert_eq!(gamma.get(1, 0, 1), gamma.get(1, 1, 0));
        assert_eq!(gamma.get(0, 0, 0), 0.0);
    }

    #[test]
    fn not_positive_definite() {
        let bad = ManifoldSpec::diagonal("bad", &["x", "y"], &["1", "x"]).unwrap();
        match bad.metric_at(&[-1.0, 0.0]) {
            Err(Error::NotPositiveDefinite { smallest, .. }) => assert_eq!(smallest, -1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let r = ManifoldSpec::from_entries("a", &["x", "y"], &[&["1", "x"], &["y", "1"]]);
        assert!(matches!(r, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn canonical_structure_on_basis() {
        let r4 = ManifoldSpec::euclidean("R4", &["x1", "x2", "x3", "x4"])
            .unwrap()
            .with_canonical_complex_structure()
            .unwrap();
        let p = [0.0; 4];
        let z1 = Vector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let z4 = Vector::from_vec(vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(r4.apply_j(&p, &z1).unwrap(), z4);
        assert_eq!(r4.hermitian_defects_at(&p).unwrap(), (0.0, 0.0));
        assert_eq!(r4.kahler_defect_at(&p).unwrap(), 0.0);
    }

    #[test]
    fn odd_dimension_has_no_complex_structure() {
        let r3 = ManifoldSpec::euclidean("R3", &["a", "b", "c"]).unwrap();
        assert!(r3.clone().with_canonical_complex_structure().is_err());
        assert!(matches!(r3.complex_structure_at(&[0.0; 3]), Err(Error::NoComplexStructure(_))));
    }
}
