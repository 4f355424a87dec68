//! Smooth maps between charts: Jacobians, the kernel/horizontal and
//! range/range-complement splittings, the Riemannian-map property and adjoints.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Expression, Jet2};
use crate::geometry::ManifoldSpec;
use crate::linalg;
use crate::report::{ReportBuilder, VerificationReport};
use crate::sampling::map_samples;
use crate::{Matrix, Vector};

/// Relative singular-value threshold used for the numerical rank.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;

/// Frames projected from a pivot record break down below this remainder.
const ALIGN_MIN_NORM: f64 = 1e-6;

/// A named constant-coefficient source vector used as an extra test direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub vector: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    name: String,
    source: Arc<ManifoldSpec>,
    target: Arc<ManifoldSpec>,
    components: Vec<Expression>,
    probes: Vec<Probe>,
    rank_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianData {
    /// `n x m`, `matrix[(a, i)] = d_i F^a`.
    pub matrix: Matrix,
    /// Singular values of `L2^T dF L1^{-T}` (`g = L L^T`), descending; `min(m, n)` of them.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Frames an aligned splitting is projected from.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotRecord {
    pub point: Vector,
    pub vertical: Vec<Vector>,
    pub horizontal: Vec<Vector>,
    pub range: Vec<Vector>,
    pub complement: Vec<Vector>,
}

/// Orthonormal frames of the four subbundles at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub point: Vector,
    pub image: Vector,
    pub rank: usize,
    /// `g1`-orthonormal basis of the kernel of `F_*`.
    pub vertical: Vec<Vector>,
    /// `g1`-orthonormal basis of the orthogonal complement of the kernel.
    pub horizontal: Vec<Vector>,
    /// `g2`-orthonormal basis of the range at `F(p)`.
    pub range: Vec<Vector>,
    /// `g2`-orthonormal basis of the orthogonal complement of the range.
    pub complement: Vec<Vector>,
    pub pivots: Arc<PivotRecord>,
}

struct Splitting {
    jacobian: JacobianData,
    vertical: Vec<Vector>,
    horizontal: Vec<Vector>,
    range: Vec<Vector>,
    complement: Vec<Vector>,
}

impl MapSpec {
    pub fn new(
        name: &str,
        source: Arc<ManifoldSpec>,
        target: Arc<ManifoldSpec>,
        components: Vec<Expression>,
    ) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::Dimension {
                what: "map components",
                expected: target.dim(),
                found: components.len(),
            });
        }
        if let Some(e) = components.iter().find(|e| e.dim() != source.dim()) {
            return Err(Error::Dimension {
                what: "component chart",
                expected: source.dim(),
                found: e.dim(),
            });
        }
        Ok(Self {
            name: name.to_string(),
            source,
            target,
            components,
            probes: Vec::new(),
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
        })
    }

    pub fn parse(
        name: &str,
        source: Arc<ManifoldSpec>,
        target: Arc<ManifoldSpec>,
        components: &[&str],
    ) -> Result<Self> {
        let parsed = components
            .iter()
            .map(|t| Expression::parse_shared(t, source.coords().clone()).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, source, target, parsed)
    }

    pub fn with_probe(mut self, name: &str, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != self.source.dim() {
            return Err(Error::Dimension {
                what: "probe vector",
                expected: self.source.dim(),
                found: coefficients.len(),
            });
        }
        self.probes.push(Probe {
            name: name.to_string(),
            vector: Vector::from_column_slice(coefficients),
        });
        Ok(self)
    }

    pub fn with_rank_tolerance(mut self, tol: f64) -> Self {
        self.rank_tolerance = tol;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &ManifoldSpec {
        &self.source
    }

    pub fn target(&self) -> &ManifoldSpec {
        &self.target
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.source.dim() {
            return Err(Error::Dimension {
                what: "source point",
                expected: self.source.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }

    pub fn eval_at(&self, p: &[f64]) -> Result<Vector> {
        self.check_point(p)?;
        let values = self
            .components
            .iter()
            .map(|e| e.eval(p).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector::from_vec(values))
    }

    /// Exact 2-jets of all components.
    pub fn component_jets(&self, p: &[f64]) -> Result<Vec<Jet2>> {
        self.check_point(p)?;
        self.components
            .iter()
            .map(|e| e.eval_jet2(p).map_err(Error::from))
            .collect()
    }

    /// Image point and `n x m` differential.
    pub fn differential_at(&self, p: &[f64]) -> Result<(Vector, Matrix)> {
        let jets = self.component_jets(p)?;
        Ok(image_and_differential(&jets, self.source.dim()))
    }

    pub fn jacobian_at(&self, p: &[f64]) -> Result<JacobianData> {
        let (y, df) = self.differential_at(p)?;
        let g1 = self.source.metric_at(p)?;
        let g2 = self.target.metric_at(y.as_slice())?;
        Ok(self.split_raw(&g1, &g2, &df, p, None)?.jacobian)
    }

    /// Frames at `p` with the rank measured there. The returned bundle is its own pivot record.
    pub fn split_at(&self, p: &[f64]) -> Result<FrameBundle> {
        self.split_impl(p, None)
    }

    /// Like [`MapSpec::split_at`] but fails unless the rank at `p` is `rank`.
    pub fn split_with_rank(&self, p: &[f64], rank: usize) -> Result<FrameBundle> {
        self.split_impl(p, Some(rank))
    }

    fn split_impl(&self, p: &[f64], rank: Option<usize>) -> Result<FrameBundle> {
        let (y, df) = self.differential_at(p)?;
        let g1 = self.source.metric_at(p)?;
        let g2 = self.target.metric_at(y.as_slice())?;
        self.bundle_from(&g1, &g2, &df, p, y, rank)
    }

    pub(crate) fn bundle_from(
        &self,
        g1: &Matrix,
        g2: &Matrix,
        df: &Matrix,
        p: &[f64],
        y: Vector,
        rank: Option<usize>,
    ) -> Result<FrameBundle> {
        let s = self.split_raw(g1, g2, df, p, rank)?;
        let pivots = Arc::new(PivotRecord {
            point: Vector::from_column_slice(p),
            vertical: s.vertical.clone(),
            horizontal: s.horizontal.clone(),
            range: s.range.clone(),
            complement: s.complement.clone(),
        });
        Ok(FrameBundle {
            point: Vector::from_column_slice(p),
            image: y,
            rank: s.jacobian.rank,
            vertical: s.vertical,
            horizontal: s.horizontal,
            range: s.range,
            complement: s.complement,
            pivots,
        })
    }

    /// Frames at `q` obtained by projecting the pivot frames onto the subbundles at
    /// `q` and re-orthonormalizing. Close to the pivot point this is smooth in `q`.
    pub fn split_near(&self, q: &[f64], pivots: &Arc<PivotRecord>) -> Result<FrameBundle> {
        let (y, df) = self.differential_at(q)?;
        let g1 = self.source.metric_at(q)?;
        let g2 = self.target.metric_at(y.as_slice())?;
        self.aligned_from(&g1, &g2, &df, q, y, pivots)
    }

    pub(crate) fn aligned_from(
        &self,
        g1: &Matrix,
        g2: &Matrix,
        df: &Matrix,
        q: &[f64],
        y: Vector,
        pivots: &Arc<PivotRecord>,
    ) -> Result<FrameBundle> {
        let s = self.split_raw(g1, g2, df, q, Some(pivots.horizontal.len()))?;
        let align = |g: &Matrix, basis: &[Vector], anchor: &[Vector], frame: &'static str| {
            let projected: Vec<Vector> = anchor.iter().map(|a| linalg::project(g, basis, a)).collect();
            linalg::gram_schmidt(g, &projected, ALIGN_MIN_NORM).ok_or_else(|| Error::FrameBreakdown {
                frame,
                point: q.to_vec(),
            })
        };
        Ok(FrameBundle {
            point: Vector::from_column_slice(q),
            image: y,
            rank: s.jacobian.rank,
            vertical: align(g1, &s.vertical, &pivots.vertical, "vertical")?,
            horizontal: align(g1, &s.horizontal, &pivots.horizontal, "horizontal")?,
            range: align(g2, &s.range, &pivots.range, "range")?,
            complement: align(g2, &s.complement, &pivots.complement, "range complement")?,
            pivots: pivots.clone(),
        })
    }

    fn split_raw(&self, g1: &Matrix, g2: &Matrix, df: &Matrix, p: &[f64], expected: Option<usize>) -> Result<Splitting> {
        let (m, n) = (self.source.dim(), self.target.dim());
        let singular = |name: &str, at: &[f64]| Error::SingularMetric {
            manifold: name.to_string(),
            point: at.to_vec(),
        };
        let (_, l1_inv_t) = linalg::inverse_transpose_factor(g1).ok_or_else(|| singular(self.source.name(), p))?;
        let (l2, _) = linalg::inverse_transpose_factor(g2).ok_or_else(|| singular(self.target.name(), p))?;
        let weighted = l2.transpose() * df * &l1_inv_t;
        let (sigma, v) = linalg::sorted_svd(&weighted);
        let sigma: Vec<f64> = sigma.into_iter().take(m.min(n)).collect();
        let rank = linalg::rank_from_singular_values(&sigma, self.rank_tolerance);
        if let Some(expected) = expected {
            if expected != rank {
                return Err(Error::RankMismatch {
                    point: p.to_vec(),
                    expected,
                    found: rank,
                });
            }
        }
        let lifted: Vec<Vector> = (0..m)
            .map(|c| {
                let mut x = &l1_inv_t * v.column(c);
                linalg::canonical_sign(&mut x);
                x
            })
            .collect();
        let source_frames = linalg::gram_schmidt(g1, &lifted, ALIGN_MIN_NORM).ok_or_else(|| Error::FrameBreakdown {
            frame: "source",
            point: p.to_vec(),
        })?;
        let horizontal = source_frames[..rank].to_vec();
        let vertical = source_frames[rank..].to_vec();
        let pushed: Vec<Vector> = horizontal.iter().map(|h| df * h).collect();
        let range = linalg::gram_schmidt(g2, &pushed, ALIGN_MIN_NORM).ok_or_else(|| Error::FrameBreakdown {
            frame: "range",
            point: p.to_vec(),
        })?;
        let complement = linalg::complete(g2, &range, n - rank);
        Ok(Splitting {
            jacobian: JacobianData {
                matrix: df.clone(),
                singular_values: sigma,
                rank,
            },
            vertical,
            horizontal,
            range,
            complement,
        })
    }

    /// `x*` with `g1(x, x*) = g2(F_* x, y)` for every `x`.
    pub fn adjoint_at(&self, p: &[f64], y: &Vector) -> Result<Vector> {
        let (image, df) = self.differential_at(p)?;
        if y.len() != self.target.dim() {
            return Err(Error::Dimension {
                what: "target vector",
                expected: self.target.dim(),
                found: y.len(),
            });
        }
        let g1 = self.source.metric_at(p)?;
        let g2 = self.target.metric_at(image.as_slice())?;
        adjoint(&g1, &g2, &df, y).ok_or_else(|| Error::SingularMetric {
            manifold: self.source.name().to_string(),
            point: p.to_vec(),
        })
    }

    /// Max over horizontal frame pairs of `|g2(F_* H_i, F_* H_j) - g1(H_i, H_j)|`.
    pub fn isometry_defect_at(&self, p: &[f64]) -> Result<(f64, (usize, usize))> {
        let (y, df) = self.differential_at(p)?;
        let g1 = self.source.metric_at(p)?;
        let g2 = self.target.metric_at(y.as_slice())?;
        let bundle = self.bundle_from(&g1, &g2, &df, p, y, None)?;
        Ok(isometry_defect(&g1, &g2, &df, &bundle.horizontal))
    }

    pub fn check_constant_rank(&self, samples: &[Vector], tol: f64) -> Result<VerificationReport> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                found: samples.len(),
            });
        }
        let ranks = map_samples(samples, |p| Ok(self.jacobian_at(p.as_slice())?.rank))?;
        let lo = *ranks.iter().min().expect("nonempty");
        let hi = *ranks.iter().max().expect("nonempty");
        let mut report = ReportBuilder::new("constant_rank", tol, samples.len());
        report.declare("rank_spread");
        let first = ranks[0];
        for (p, r) in samples.iter().zip(&ranks) {
            if *r != first {
                report.residual("rank_spread", (hi - lo) as f64, p.as_slice(), || {
                    format!("rank {r}, first sample has rank {first}")
                });
            }
        }
        report.measure("rank_min", lo as f64);
        report.measure("rank_max", hi as f64);
        let distinct: BTreeSet<usize> = ranks.iter().copied().collect();
        report.note(format!("ranks found: {distinct:?}"));
        if lo == hi {
            let (m, n) = (self.source().dim(), self.target().dim());
            let kind = match lo {
                0 => "constant map",
                r if r == m && r == n => "local diffeomorphism",
                r if r == m => "immersion",
                r if r == n => "submersion",
                _ => "proper",
            };
            report.note(format!("rank type: {kind}"));
        }
        Ok(report.finish())
    }

    pub fn check_riemannian_map(&self, samples: &[Vector], tol: f64) -> Result<VerificationReport> {
        let defects = map_samples(samples, |p| self.isometry_defect_at(p.as_slice()))?;
        let mut report = ReportBuilder::new("riemannian_map", tol, samples.len());
        report.declare("horizontal_isometry");
        for (p, (d, (i, j))) in samples.iter().zip(defects) {
            report.residual("horizontal_isometry", d, p.as_slice(), || {
                format!("H{}, H{}", i + 1, j + 1)
            });
        }
        Ok(report.finish())
    }
}

pub(crate) fn image_and_differential(jets: &[Jet2], m: usize) -> (Vector, Matrix) {
    let n = jets.len();
    let y = Vector::from_iterator(n, jets.iter().map(|j| j.value));
    let mut df = Matrix::zeros(n, m);
    for (a, jet) in jets.iter().enumerate() {
        df.set_row(a, &jet.gradient.transpose());
    }
    (y, df)
}

pub(crate) fn adjoint(g1: &Matrix, g2: &Matrix, df: &Matrix, y: &Vector) -> Option<Vector> {
    let rhs = df.transpose() * (g2 * y);
    let chol = nalgebra::Cholesky::new(g1.clone())?;
    Some(chol.solve(&rhs))
}

pub(crate) fn isometry_defect(g1: &Matrix, g2: &Matrix, df: &Matrix, horizontal: &[Vector]) -> (f64, (usize, usize)) {
    let pushed: Vec<Vector> = horizontal.iter().map(|h| df * h).collect();
    let mut worst = (0.0, (0, 0));
    for i in 0..horizontal.len() {
        for j in i..horizontal.len() {
            let d = (linalg::inner(g2, &pushed[i], &pushed[j]) - linalg::inner(g1, &horizontal[i], &horizontal[j])).abs();
            if d > worst.0 || d.is_nan() {
                worst = (d, (i, j));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(name: &str, coords: &[&str]) -> Arc<ManifoldSpec> {
        Arc::new(ManifoldSpec::euclidean(name, coords).unwrap())
    }

    #[test]
    fn identity_map_frames() {
        let r2 = flat("R2", &["x", "y"]);
        let f = MapSpec::parse("id", r2.clone(), r2, &["x", "y"]).unwrap();
        let jac = f.jacobian_at(&[0.3, 0.4]).unwrap();
        assert_eq!(jac.rank, 2);
        assert_eq!(jac.matrix, Matrix::identity(2, 2));
        let b = f.split_at(&[0.3, 0.4]).unwrap();
        assert!(b.vertical.is_empty() && b.complement.is_empty());
        assert_eq!(b.horizontal.len(), 2);
    }

    #[test]
    fn constant_map_has_rank_zero() {
        let r2 = flat("R2", &["x", "y"]);
        let f = MapSpec::parse("c", r2.clone(), r2, &["1", "2"]).unwrap();
        let jac = f.jacobian_at(&[0.3, 0.4]).unwrap();
        assert_eq!(jac.rank, 0);
        assert!(jac.matrix.iter().all(|v| *v == 0.0));
        let b = f.split_at(&[0.0, 0.0]).unwrap();
        assert_eq!((b.vertical.len(), b.range.len(), b.complement.len()), (2, 0, 2));
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let r2 = flat("R2", &["x", "y"]);
        let f = MapSpec::parse("sq", r2.clone(), r2, &["x^2", "0"]).unwrap();
        assert!(matches!(f.split_with_rank(&[0.0, 0.5], 1), Err(Error::RankMismatch { found: 0, .. })));
        assert_eq!(f.split_with_rank(&[0.5, 0.5], 1).unwrap().rank, 1);
    }

    #[test]
    fn aligned_frames_reproduce_the_anchor() {
        let r2 = flat("R2", &["x", "y"]);
        let r3 = flat("R3", &["a", "b", "c"]);
        let f = MapSpec::parse("f", r2, r3, &["x", "y", "x*y"]).unwrap();
        let anchor = f.split_at(&[0.2, -0.1]).unwrap();
        let again = f.split_near(&[0.2, -0.1], &anchor.pivots).unwrap();
        for (a, b) in anchor.horizontal.iter().zip(&again.horizontal) {
            assert!((a - b).amax() < 1e-14);
        }
        for (a, b) in anchor.complement.iter().zip(&again.complement) {
            assert!((a - b).amax() < 1e-14);
        }
    }
}
