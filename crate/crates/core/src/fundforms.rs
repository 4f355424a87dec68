//! Second fundamental forms of maps, shape operators along a map, and the
//! second-fundamental-form tensors of distributions.
//!
//! Quantities built only from expressions (the second fundamental form of the
//! map, Christoffel symbols, derivatives of `J`) come from exact jets. Anything
//! that differentiates a frame obtained by linear algebra uses central finite
//! differences over a [`Neighborhood`], whose stencil frames are aligned to the
//! anchor frames so they vary smoothly.

use crate::error::{Error, Result};
use crate::geometry::{Christoffel, ManifoldSpec};
use crate::linalg;
use crate::maps::{image_and_differential, FrameBundle, MapSpec};
use crate::report::{ReportBuilder, Verdict, VerificationReport};
use crate::sampling::map_samples;
use crate::{Matrix, Vector};

/// Relative part of the finite-difference step `h = STEP * (1 + |p|)`.
pub const STEP: f64 = 1e-5;

/// A normal vector counts as normal when its range part is below this (relative).
const NORMAL_TOLERANCE: f64 = 1e-8;

/// Pointwise data at a stencil point: metrics, differential, `J`, aligned frames.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub x: Vector,
    pub y: Vector,
    pub g1: Matrix,
    pub g2: Matrix,
    pub df: Matrix,
    pub j: Option<Matrix>,
    pub frames: FrameBundle,
}

/// Everything known at an anchor point, including second-order data.
#[derive(Debug, Clone)]
pub struct MapPoint {
    pub local: LocalFrame,
    /// `hessians[a][(i, j)] = d_i d_j F^a`.
    pub hessians: Vec<Matrix>,
    pub gamma1: Christoffel,
    pub gamma2: Christoffel,
}

impl MapPoint {
    pub fn new(map: &MapSpec, p: &[f64]) -> Result<Self> {
        let jets = map.component_jets(p)?;
        let (y, df) = image_and_differential(&jets, map.source().dim());
        let hessians = jets.into_iter().map(|j| j.hessian).collect();
        let g1 = map.source().metric_at(p)?;
        let g2 = map.target().metric_at(y.as_slice())?;
        let gamma1 = map.source().christoffel_at(p)?;
        let gamma2 = map.target().christoffel_at(y.as_slice())?;
        let j = optional_j(map.source(), p)?;
        let frames = map.bundle_from(&g1, &g2, &df, p, y.clone(), None)?;
        Ok(Self {
            local: LocalFrame {
                x: Vector::from_column_slice(p),
                y,
                g1,
                g2,
                df,
                j,
                frames,
            },
            hessians,
            gamma1,
            gamma2,
        })
    }

    pub fn frames(&self) -> &FrameBundle {
        &self.local.frames
    }

    pub fn sff(&self) -> SecondFundamentalForm {
        SecondFundamentalForm::assemble(&self.hessians, &self.local.df, &self.gamma1, &self.gamma2)
    }
}

fn optional_j(m: &ManifoldSpec, p: &[f64]) -> Result<Option<Matrix>> {
    if m.has_complex_structure() {
        Ok(Some(m.complex_structure_at(p)?))
    } else {
        Ok(None)
    }
}

/// `(nabla F_*)(d_i, d_j)` on the coordinate basis, as target vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    m: usize,
    n: usize,
    values: Vec<Vector>,
}

impl SecondFundamentalForm {
    /// `d_i d_j F^a + Γ2^a_bc d_iF^b d_jF^c - Γ1^k_ij d_kF^a`, every `(i, j)` computed separately.
    pub fn assemble(hessians: &[Matrix], df: &Matrix, gamma1: &Christoffel, gamma2: &Christoffel) -> Self {
        let (n, m) = df.shape();
        let mut values = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let ci = df.column(i).into_owned();
                let cj = df.column(j).into_owned();
                let target_term = gamma2.contract(&ci, &cj);
                let v = Vector::from_fn(n, |a, _| {
                    let source_term: f64 = (0..m).map(|k| gamma1.get(k, i, j) * df[(a, k)]).sum();
                    hessians[a][(i, j)] + target_term[a] - source_term
                });
                values.push(v);
            }
        }
        Self { m, n, values }
    }

    pub fn source_dim(&self) -> usize {
        self.m
    }

    pub fn target_dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Vector {
        &self.values[i * self.m + j]
    }

    /// Bilinear extension `sum_ij X^i Y^j SFF[i][j]`.
    pub fn apply(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.n);
        for i in 0..self.m {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.m {
                if y[j] != 0.0 {
                    out.axpy(x[i] * y[j], self.get(i, j), 1.0);
                }
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.m {
            for j in i + 1..self.m {
                worst = worst.max((self.get(i, j) - self.get(j, i)).amax());
            }
        }
        worst
    }
}

pub fn map_sff_at(map: &MapSpec, p: &[f64]) -> Result<SecondFundamentalForm> {
    let jets = map.component_jets(p)?;
    let (y, df) = image_and_differential(&jets, map.source().dim());
    let hessians: Vec<Matrix> = jets.into_iter().map(|j| j.hessian).collect();
    let gamma1 = map.source().christoffel_at(p)?;
    let gamma2 = map.target().christoffel_at(y.as_slice())?;
    Ok(SecondFundamentalForm::assemble(&hessians, &df, &gamma1, &gamma2))
}

/// An anchor point plus aligned frames at `p ± h e_k` for every coordinate `k`.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    anchor: MapPoint,
    step: f64,
    plus: Vec<LocalFrame>,
    minus: Vec<LocalFrame>,
}

impl Neighborhood {
    pub fn new(map: &MapSpec, p: &[f64]) -> Result<Self> {
        let anchor = MapPoint::new(map, p)?;
        let step = STEP * (1.0 + Vector::from_column_slice(p).norm());
        let stencil = |sign: f64| {
            (0..p.len())
                .map(|k| {
                    let mut q = p.to_vec();
                    q[k] += sign * step;
                    local_frame(map, &q, &anchor.local.frames)
                })
                .collect::<Result<Vec<_>>>()
        };
        let plus = stencil(1.0)?;
        let minus = stencil(-1.0)?;
        Ok(Self {
            anchor,
            step,
            plus,
            minus,
        })
    }

    pub fn anchor(&self) -> &MapPoint {
        &self.anchor
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Plain directional derivative `X(W)` of a field given through its stencil values.
    pub fn derivative<F>(&self, x: &Vector, field: F) -> Result<Vector>
    where
        F: Fn(&LocalFrame) -> Result<Vector>,
    {
        let mut out: Option<Vector> = None;
        for k in 0..x.len() {
            if x[k] == 0.0 {
                continue;
            }
            let d = (field(&self.plus[k])? - field(&self.minus[k])?) * (x[k] / (2.0 * self.step));
            out = Some(match out {
                Some(acc) => acc + d,
                None => d,
            });
        }
        match out {
            Some(v) => Ok(v),
            None => Ok(field(&self.anchor.local)? * 0.0),
        }
    }

    /// `nabla_X W` for a source vector field `W`.
    pub fn source_covariant<F>(&self, x: &Vector, field: F) -> Result<Vector>
    where
        F: Fn(&LocalFrame) -> Result<Vector>,
    {
        let w = field(&self.anchor.local)?;
        Ok(self.derivative(x, field)? + self.anchor.gamma1.contract(x, &w))
    }

    /// Pullback connection `nabla^F_X W` for a field `W` along the map.
    pub fn pullback_covariant<F>(&self, x: &Vector, field: F) -> Result<Vector>
    where
        F: Fn(&LocalFrame) -> Result<Vector>,
    {
        let w = field(&self.anchor.local)?;
        let fx = &self.anchor.local.df * x;
        Ok(self.derivative(x, field)? + self.anchor.gamma2.contract(&fx, &w))
    }

    pub fn vertical_geometry(&self) -> DistributionGeometry {
        self.distribution(|f| &f.frames.vertical)
    }

    pub fn horizontal_geometry(&self) -> DistributionGeometry {
        self.distribution(|f| &f.frames.horizontal)
    }

    fn distribution(&self, pick: impl Fn(&LocalFrame) -> &Vec<Vector>) -> DistributionGeometry {
        let frame = pick(&self.anchor.local).clone();
        let derivatives: Vec<Vec<Vector>> = (0..self.plus.len())
            .map(|k| {
                pick(&self.plus[k])
                    .iter()
                    .zip(pick(&self.minus[k]))
                    .map(|(a, b)| (a - b) / (2.0 * self.step))
                    .collect()
            })
            .collect();
        DistributionGeometry::assemble(&self.anchor.local.g1, &self.anchor.gamma1, frame, &derivatives)
    }
}

fn local_frame(map: &MapSpec, q: &[f64], anchor: &FrameBundle) -> Result<LocalFrame> {
    let (y, df) = map.differential_at(q)?;
    let g1 = map.source().metric_at(q)?;
    let g2 = map.target().metric_at(y.as_slice())?;
    let j = optional_j(map.source(), q)?;
    let frames = map.aligned_from(&g1, &g2, &df, q, y.clone(), &anchor.pivots)?;
    Ok(LocalFrame {
        x: Vector::from_column_slice(q),
        y,
        g1,
        g2,
        df,
        j,
        frames,
    })
}

/// How a normal vector given at the anchor is extended to the stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalExtension {
    /// Constant coefficients in the aligned range-complement frame.
    FrameCoefficients,
    /// Orthogonal projection of the anchor vector onto the range complement at each point.
    Projected,
}

/// The shape operator `A_V` on the range, with the normal connection part.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    pub normal: Vector,
    /// `F_* H_i` for the horizontal frame at the anchor.
    pub pushed: Vec<Vector>,
    /// `A_V F_* H_i`.
    pub images: Vec<Vector>,
    /// Normal-connection derivatives `nabla^perp_{H_i} V`.
    pub normal_derivatives: Vec<Vector>,
    /// `gram[(i, j)] = g2(A_V F_* H_i, F_* H_j)`.
    pub gram: Matrix,
    g2: Matrix,
}

impl ShapeOperator {
    pub fn at(nb: &Neighborhood, v: &Vector, extension: NormalExtension) -> Result<Self> {
        let local = &nb.anchor.local;
        let g2 = &local.g2;
        let range = &local.frames.range;
        let defect = linalg::norm(g2, &linalg::project(g2, range, v));
        if !(defect <= NORMAL_TOLERANCE * linalg::norm(g2, v).max(1.0)) {
            return Err(Error::NotNormal { defect });
        }
        let coefficients: Vec<f64> = local.frames.complement.iter().map(|n| linalg::inner(g2, n, v)).collect();
        let field = |f: &LocalFrame| -> Result<Vector> {
            Ok(match extension {
                NormalExtension::FrameCoefficients => {
                    let mut w = Vector::zeros(v.len());
                    for (c, n) in coefficients.iter().zip(&f.frames.complement) {
                        w.axpy(*c, n, 1.0);
                    }
                    w
                }
                NormalExtension::Projected => linalg::reject(&f.g2, &f.frames.range, v),
            })
        };
        let mut pushed = Vec::new();
        let mut images = Vec::new();
        let mut normal_derivatives = Vec::new();
        for h in &local.frames.horizontal {
            let total = nb.pullback_covariant(h, field)?;
            let tangential = linalg::project(g2, range, &total);
            normal_derivatives.push(&total - &tangential);
            images.push(-tangential);
            pushed.push(&local.df * h);
        }
        let r = pushed.len();
        let gram = Matrix::from_fn(r, r, |i, j| linalg::inner(g2, &images[i], &pushed[j]));
        Ok(Self {
            normal: v.clone(),
            pushed,
            images,
            normal_derivatives,
            gram,
            g2: g2.clone(),
        })
    }

    /// `A_V y` for `y` in the range (other components are ignored).
    pub fn apply(&self, y: &Vector) -> Vector {
        let r = self.pushed.len();
        let mut out = Vector::zeros(y.len());
        if r == 0 {
            return out;
        }
        let gram = Matrix::from_fn(r, r, |i, j| linalg::inner(&self.g2, &self.pushed[i], &self.pushed[j]));
        let rhs = Vector::from_fn(r, |i, _| linalg::inner(&self.g2, &self.pushed[i], y));
        let Some(c) = nalgebra::Cholesky::new(gram).map(|ch| ch.solve(&rhs)) else {
            return out * f64::NAN;
        };
        for (ci, img) in c.iter().zip(&self.images) {
            out.axpy(*ci, img, 1.0);
        }
        out
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.gram - self.gram.transpose()).amax()
    }
}

pub fn shape_operator_at(map: &MapSpec, p: &[f64], v: &Vector, extension: NormalExtension) -> Result<ShapeOperator> {
    let nb = Neighborhood::new(map, p)?;
    ShapeOperator::at(&nb, v, extension)
}

/// Tensors of a distribution spanned by an orthonormal frame `E_1..E_q`, with
/// `H` the orthogonal projection onto the complement:
/// `A_ab = H(nabla_{E_a} E_b)`, `B` its symmetrization, `I_ab = A_ab - A_ba`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionGeometry {
    pub frame: Vec<Vector>,
    pub a: Vec<Vec<Vector>>,
    pub b: Vec<Vec<Vector>>,
    pub integrability: Vec<Vec<Vector>>,
    /// `I_ab - H([E_a, E_b])`, zero for a torsion-free connection up to discretization error.
    pub bracket_defect: Vec<Vec<Vector>>,
    /// `(1/q) sum_a B_aa`.
    pub mean_curvature: Vector,
    g: Matrix,
}

/// Least-squares fit of `B_ab = delta_ab H`.
#[derive(Debug, Clone, PartialEq)]
pub struct UmbilicalFit {
    pub mean_curvature: Vector,
    pub mean_norm: f64,
    /// `max |B_ab - delta_ab H|`.
    pub residual: f64,
    /// `max |B_ab|`.
    pub max_value: f64,
}

impl DistributionGeometry {
    /// `derivatives[k][a] = d_k E_a`.
    fn assemble(g: &Matrix, gamma: &Christoffel, frame: Vec<Vector>, derivatives: &[Vec<Vector>]) -> Self {
        let q = frame.len();
        let m = g.nrows();
        let along = |x: &Vector, b: usize| {
            let mut out = Vector::zeros(m);
            for (k, dk) in derivatives.iter().enumerate() {
                if x[k] != 0.0 {
                    out.axpy(x[k], &dk[b], 1.0);
                }
            }
            out
        };
        let complement = |w: &Vector| linalg::reject(g, &frame, w);
        let mut a = vec![vec![Vector::zeros(m); q]; q];
        let mut bracket = vec![vec![Vector::zeros(m); q]; q];
        for i in 0..q {
            for j in 0..q {
                let d = along(&frame[i], j);
                let nabla = &d + gamma.contract(&frame[i], &frame[j]);
                a[i][j] = complement(&nabla);
                bracket[i][j] = d;
            }
        }
        let mut b = vec![vec![Vector::zeros(m); q]; q];
        let mut integrability = vec![vec![Vector::zeros(m); q]; q];
        let mut bracket_defect = vec![vec![Vector::zeros(m); q]; q];
        for i in 0..q {
            for j in 0..q {
                b[i][j] = (&a[i][j] + &a[j][i]) * 0.5;
                integrability[i][j] = &a[i][j] - &a[j][i];
                let lie = &bracket[i][j] - &bracket[j][i];
                bracket_defect[i][j] = &integrability[i][j] - complement(&lie);
            }
        }
        let mut mean_curvature = Vector::zeros(m);
        for (i, row) in b.iter().enumerate() {
            mean_curvature += &row[i];
        }
        if q > 0 {
            mean_curvature /= q as f64;
        }
        Self {
            frame,
            a,
            b,
            integrability,
            bracket_defect,
            mean_curvature,
            g: g.clone(),
        }
    }

    pub fn size(&self) -> usize {
        self.frame.len()
    }

    fn max_norm(&self, t: &[Vec<Vector>]) -> (f64, (usize, usize)) {
        let mut worst = (0.0, (0, 0));
        for (i, row) in t.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let n = linalg::norm(&self.g, v);
                if n > worst.0 || n.is_nan() {
                    worst = (n, (i, j));
                }
            }
        }
        worst
    }

    pub fn max_symmetric(&self) -> (f64, (usize, usize)) {
        self.max_norm(&self.b)
    }

    pub fn max_integrability(&self) -> (f64, (usize, usize)) {
        self.max_norm(&self.integrability)
    }

    pub fn max_bracket_defect(&self) -> f64 {
        self.max_norm(&self.bracket_defect).0
    }

    pub fn mean_curvature_norm(&self) -> f64 {
        linalg::norm(&self.g, &self.mean_curvature)
    }

    pub fn umbilical_fit(&self) -> UmbilicalFit {
        let h = self.mean_curvature.clone();
        let mut residual = 0.0_f64;
        for (i, row) in self.b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let d = if i == j { v - &h } else { v.clone() };
                residual = residual.max(linalg::norm(&self.g, &d));
            }
        }
        UmbilicalFit {
            mean_norm: linalg::norm(&self.g, &h),
            mean_curvature: h,
            residual,
            max_value: self.max_symmetric().0,
        }
    }
}

/// Distribution tensors for a frame field given as a function of the point.
/// The frame is re-orthonormalized in `g` at every stencil point.
pub fn distribution_geometry<F>(source: &ManifoldSpec, p: &[f64], frame_field: F) -> Result<DistributionGeometry>
where
    F: Fn(&[f64]) -> Result<Vec<Vector>>,
{
    let step = STEP * (1.0 + Vector::from_column_slice(p).norm());
    let orthonormal = |q: &[f64]| -> Result<Vec<Vector>> {
        let g = source.metric_at(q)?;
        let raw = frame_field(q)?;
        linalg::gram_schmidt(&g, &raw, 1e-8).ok_or_else(|| Error::FrameBreakdown {
            frame: "distribution",
            point: q.to_vec(),
        })
    };
    let frame = orthonormal(p)?;
    let mut derivatives = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[k] += step;
        minus[k] -= step;
        let (fp, fm) = (orthonormal(&plus)?, orthonormal(&minus)?);
        if fp.len() != frame.len() || fm.len() != frame.len() {
            return Err(Error::FrameBreakdown {
                frame: "distribution",
                point: p.to_vec(),
            });
        }
        derivatives.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect());
    }
    let g = source.metric_at(p)?;
    let gamma = source.christoffel_at(p)?;
    Ok(DistributionGeometry::assemble(&g, &gamma, frame, &derivatives))
}

/// Named source directions: coordinate vectors, the vertical and horizontal
/// frames, and the map's probes.
pub(crate) fn test_directions(map: &MapSpec, frames: &FrameBundle) -> Vec<(String, Vector)> {
    let m = map.source().dim();
    let mut out = Vec::new();
    for i in 0..m {
        let mut e = Vector::zeros(m);
        e[i] = 1.0;
        out.push((format!("e{}", i + 1), e));
    }
    for (a, v) in frames.vertical.iter().enumerate() {
        out.push((format!("V{}", a + 1), v.clone()));
    }
    for (i, h) in frames.horizontal.iter().enumerate() {
        out.push((format!("H{}", i + 1), h.clone()));
    }
    for probe in map.probes() {
        out.push((probe.name.clone(), probe.vector.clone()));
    }
    out
}

pub(crate) fn totally_geodesic_defect(map: &MapSpec, point: &MapPoint) -> (f64, String) {
    let sff = point.sff();
    let dirs = test_directions(map, point.frames());
    let mut worst = (0.0, String::new());
    for (i, (nx, x)) in dirs.iter().enumerate() {
        for (ny, y) in &dirs[i..] {
            let n = linalg::norm(&point.local.g2, &sff.apply(x, y));
            if n > worst.0 || n.is_nan() {
                worst = (n, format!("X={nx}, Y={ny}"));
            }
        }
    }
    worst
}

/// Largest `|(nabla F_*)(X, Y)|` over coordinate vectors, frames and probes.
pub fn check_totally_geodesic_map(map: &MapSpec, samples: &[Vector], tol: f64) -> Result<VerificationReport> {
    let defects = map_samples(samples, |p| {
        let point = MapPoint::new(map, p.as_slice())?;
        Ok(totally_geodesic_defect(map, &point))
    })?;
    let mut report = ReportBuilder::new("totally_geodesic_map", tol, samples.len());
    report.declare("sff_norm");
    for (p, (d, detail)) in samples.iter().zip(defects) {
        report.residual("sff_norm", d, p.as_slice(), || detail);
    }
    Ok(report.finish())
}

/// Fits `h(V_a, V_b) = delta_ab H` for the fibers at every sample.
pub fn check_umbilical_fibers(
    map: &MapSpec,
    samples: &[Vector],
    tol: f64,
) -> Result<(VerificationReport, Vec<UmbilicalFit>)> {
    let fits = map_samples(samples, |p| {
        let nb = Neighborhood::new(map, p.as_slice())?;
        let geometry = nb.vertical_geometry();
        Ok((geometry.size(), geometry.umbilical_fit()))
    })?;
    let report = umbilical_report(samples, &fits, tol);
    Ok((report, fits.into_iter().map(|(_, f)| f).collect()))
}

/// `fits` holds the fiber dimension and the fit at every sample.
pub(crate) fn umbilical_report(samples: &[Vector], fits: &[(usize, UmbilicalFit)], tol: f64) -> VerificationReport {
    let mut report = ReportBuilder::new("umbilical_fibers", tol, samples.len());
    if fits.iter().all(|(q, _)| *q == 0) {
        report.note("kernel is trivial: there are no fibers to test");
        return report.finish_with(Verdict::VacuousPass);
    }
    report.declare("umbilical_fit");
    let mut mean = 0.0_f64;
    let mut sff = 0.0_f64;
    for (p, (_, fit)) in samples.iter().zip(fits) {
        report.residual("umbilical_fit", fit.residual, p.as_slice(), || "max |h(V_a, V_b) - delta_ab H|".into());
        mean = mean.max(fit.mean_norm);
        sff = sff.max(fit.max_value);
    }
    report.measure("mean_curvature", mean);
    report.measure("fiber_sff", sff);
    if report.within_tolerance() && mean < tol {
        report.note("fibers are minimal");
    }
    if sff < tol {
        report.note("fibers are totally geodesic");
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn flat(name: &str, coords: &[&str]) -> Arc<ManifoldSpec> {
        Arc::new(ManifoldSpec::euclidean(name, coords).unwrap())
    }

    fn circle() -> MapSpec {
        MapSpec::parse("circle", flat("R", &["t"]), flat("R2", &["a", "b"]), &["cos(t)", "sin(t)"]).unwrap()
    }

    #[test]
    fn circle_second_fundamental_form() {
        let t = 0.7_f64;
        let sff = map_sff_at(&circle(), &[t]).unwrap();
        let v = sff.get(0, 0);
        assert!((v[0] + t.cos()).abs() < 1e-15 && (v[1] + t.sin()).abs() < 1e-15);
    }

    #[test]
    fn circle_shape_operator() {
        let t = 0.3_f64;
        let v = Vector::from_vec(vec![-t.cos(), -t.sin()]);
        let s = shape_operator_at(&circle(), &[t], &v, NormalExtension::FrameCoefficients).unwrap();
        assert_eq!(s.gram.shape(), (1, 1));
        assert!((s.gram[(0, 0)] - 1.0).abs() < 1e-8);
        let tangent = Vector::from_vec(vec![-t.sin(), t.cos()]);
        assert!(matches!(
            shape_operator_at(&circle(), &[t], &tangent, NormalExtension::Projected),
            Err(Error::NotNormal { .. })
        ));
    }

    #[test]
    fn constant_frame_in_flat_space_is_totally_geodesic() {
        let r3 = ManifoldSpec::euclidean("R3", &["x", "y", "z"]).unwrap();
        let g = distribution_geometry(&r3, &[0.1, 0.2, 0.3], |_| {
            Ok(vec![Vector::from_vec(vec![1.0, 1.0, 0.0])])
        })
        .unwrap();
        assert!(g.max_symmetric().0 < 1e-12);
        assert!(g.mean_curvature_norm() < 1e-12);
    }

    #[test]
    fn empty_frame_has_zero_mean_curvature() {
        let r2 = ManifoldSpec::euclidean("R2", &["x", "y"]).unwrap();
        let g = distribution_geometry(&r2, &[0.0, 0.0], |_| Ok(Vec::new())).unwrap();
        assert_eq!(g.size(), 0);
        assert_eq!(g.mean_curvature, Vector::zeros(2));
    }
}
