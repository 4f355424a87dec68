//! How the complex structure of the source interacts with the kernel of a map:
//! anti-invariance, the Lagrangian case, the complement `mu` of `J(ker F_*)`
//! inside the horizontal space and the splitting `J Z = B Z + C Z`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::maps::{FrameBundle, MapSpec};
use crate::sampling::map_samples;
use crate::{Matrix, Vector};

/// Spans below this count as dependent when measuring `dim span{J V_a}`.
pub const SPAN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `J` maps the kernel into the horizontal space.
    AntiInvariant,
    /// `J` maps the kernel into itself.
    InvariantKernel,
    Mixed,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::AntiInvariant => "anti_invariant",
            Classification::InvariantKernel => "invariant_kernel",
            Classification::Mixed => "mixed",
        }
    }

    /// Lattice meet over samples.
    pub fn meet(self, other: Classification) -> Classification {
        if self == other {
            self
        } else {
            Classification::Mixed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointClassification {
    /// `max_a |P_ker(J V_a)|`.
    pub vertical_defect: f64,
    /// `max_a |P_hor(J V_a)|`.
    pub horizontal_defect: f64,
    pub classification: Classification,
    pub lagrangian: bool,
    pub kernel_dim: usize,
    pub horizontal_dim: usize,
    /// `dim span{P_hor(J V_a)}`.
    pub j_kernel_dim: usize,
    /// Measured `dim mu`; only meaningful for anti-invariant points.
    pub mu_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntiInvarianceVerdict {
    pub classification: Classification,
    pub lagrangian: bool,
    /// Measured `dim mu`, when anti-invariant and identical at every sample.
    pub mu_dim: Option<usize>,
    pub kernel_dim: usize,
    pub rank: usize,
    /// Per-sample vertical defects.
    pub residuals: Vec<f64>,
    pub horizontal_defects: Vec<f64>,
    pub points: Vec<PointClassification>,
}

/// `J(ker)` and `mu` bases at a point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ComplexSplitting {
    pub j_kernel: Vec<Vector>,
    pub mu: Vec<Vector>,
}

pub(crate) fn classify_frames(g1: &Matrix, j: &Matrix, bundle: &FrameBundle, tol: f64) -> PointClassification {
    let mut vertical_defect = 0.0_f64;
    let mut horizontal_defect = 0.0_f64;
    let mut horizontal_parts = Vec::with_capacity(bundle.vertical.len());
    for v in &bundle.vertical {
        let jv = j * v;
        let vert = linalg::project(g1, &bundle.vertical, &jv);
        let hor = linalg::project(g1, &bundle.horizontal, &jv);
        vertical_defect = vertical_defect.max(linalg::norm(g1, &vert));
        horizontal_defect = horizontal_defect.max(linalg::norm(g1, &hor));
        horizontal_parts.push(hor);
    }
    let j_kernel_dim = linalg::span_basis(g1, &horizontal_parts, SPAN_TOLERANCE).len();
    let classification = if vertical_defect < tol {
        Classification::AntiInvariant
    } else if horizontal_defect < tol {
        Classification::InvariantKernel
    } else {
        Classification::Mixed
    };
    let anti = classification == Classification::AntiInvariant;
    PointClassification {
        vertical_defect,
        horizontal_defect,
        classification,
        lagrangian: anti && j_kernel_dim == bundle.horizontal.len(),
        kernel_dim: bundle.vertical.len(),
        horizontal_dim: bundle.horizontal.len(),
        j_kernel_dim,
        mu_dim: bundle.horizontal.len().saturating_sub(j_kernel_dim),
    }
}

/// `J(ker)` from the horizontal parts of `J V_a`, `mu` as its orthogonal
/// complement in the horizontal space (pivoted over the horizontal frame).
pub(crate) fn complex_splitting(g1: &Matrix, j: &Matrix, bundle: &FrameBundle) -> ComplexSplitting {
    let parts: Vec<Vector> = bundle
        .vertical
        .iter()
        .map(|v| linalg::project(g1, &bundle.horizontal, &(j * v)))
        .collect();
    let j_kernel = linalg::span_basis(g1, &parts, SPAN_TOLERANCE);
    let count = bundle.horizontal.len().saturating_sub(j_kernel.len());
    let mu = linalg::complete_from(g1, &j_kernel, &bundle.horizontal, count);
    ComplexSplitting { j_kernel, mu }
}

/// `B Z`: vertical part of `J Z`.
pub(crate) fn b_part(g1: &Matrix, j: &Matrix, vertical: &[Vector], z: &Vector) -> Vector {
    linalg::project(g1, vertical, &(j * z))
}

/// `C Z`: `mu` part of `J Z`.
pub(crate) fn c_part(g1: &Matrix, j: &Matrix, mu: &[Vector], z: &Vector) -> Vector {
    linalg::project(g1, mu, &(j * z))
}

struct PointData {
    g1: Matrix,
    j: Matrix,
    bundle: FrameBundle,
}

fn point_data(map: &MapSpec, p: &[f64]) -> Result<PointData> {
    let j = map.source().complex_structure_at(p)?;
    let g1 = map.source().metric_at(p)?;
    let bundle = map.split_at(p)?;
    Ok(PointData { g1, j, bundle })
}

pub fn classify_at(map: &MapSpec, p: &[f64], tol: f64) -> Result<PointClassification> {
    let d = point_data(map, p)?;
    Ok(classify_frames(&d.g1, &d.j, &d.bundle, tol))
}

/// Per-sample classification merged by meet; Lagrangian only if every sample is.
pub fn classify_anti_invariant(map: &MapSpec, samples: &[Vector], tol: f64) -> Result<AntiInvarianceVerdict> {
    if !map.source().has_complex_structure() {
        return Err(Error::NoComplexStructure(map.source().name().to_string()));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, found: 0 });
    }
    let points = map_samples(samples, |p| classify_at(map, p.as_slice(), tol))?;
    let classification = points
        .iter()
        .map(|c| c.classification)
        .reduce(Classification::meet)
        .expect("nonempty");
    let lagrangian = classification == Classification::AntiInvariant && points.iter().all(|c| c.lagrangian);
    let mu_dim = if classification == Classification::AntiInvariant && points.iter().all(|c| c.mu_dim == points[0].mu_dim) {
        Some(points[0].mu_dim)
    } else {
        None
    };
    Ok(AntiInvarianceVerdict {
        classification,
        lagrangian,
        mu_dim,
        kernel_dim: points[0].kernel_dim,
        rank: points[0].horizontal_dim,
        residuals: points.iter().map(|c| c.vertical_defect).collect(),
        horizontal_defects: points.iter().map(|c| c.horizontal_defect).collect(),
        points,
    })
}

/// `g1`-orthonormal basis of `mu` at `p`.
pub fn mu_frame(map: &MapSpec, p: &[f64], tol: f64) -> Result<Vec<Vector>> {
    let d = point_data(map, p)?;
    let c = classify_frames(&d.g1, &d.j, &d.bundle, tol);
    if c.classification != Classification::AntiInvariant {
        return Err(Error::NotAntiInvariant {
            point: p.to_vec(),
            defect: c.vertical_defect,
        });
    }
    Ok(complex_splitting(&d.g1, &d.j, &d.bundle).mu)
}

/// `(B Z, C Z)` for a horizontal `Z`.
pub fn bc_decompose(map: &MapSpec, p: &[f64], z: &Vector, tol: f64) -> Result<(Vector, Vector)> {
    let d = point_data(map, p)?;
    if z.len() != map.source().dim() {
        return Err(Error::Dimension {
            what: "tangent vector",
            expected: map.source().dim(),
            found: z.len(),
        });
    }
    let c = classify_frames(&d.g1, &d.j, &d.bundle, tol);
    if c.classification != Classification::AntiInvariant {
        return Err(Error::NotAntiInvariant {
            point: p.to_vec(),
            defect: c.vertical_defect,
        });
    }
    let defect = linalg::norm(&d.g1, &linalg::project(&d.g1, &d.bundle.vertical, z));
    if !(defect < tol * linalg::norm(&d.g1, z).max(1.0)) {
        return Err(Error::NotHorizontal { defect });
    }
    let split = complex_splitting(&d.g1, &d.j, &d.bundle);
    Ok((
        b_part(&d.g1, &d.j, &d.bundle.vertical, z),
        c_part(&d.g1, &d.j, &split.mu, z),
    ))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::ManifoldSpec;

    fn kahler_flat(coords: &[&str]) -> Arc<ManifoldSpec> {
        Arc::new(
            ManifoldSpec::euclidean("C", coords)
                .unwrap()
                .with_canonical_complex_structure()
                .unwrap(),
        )
    }

    #[test]
    fn invariant_kernel_projection() {
        let src = kahler_flat(&["x1", "x2", "x3", "x4"]);
        let tgt = Arc::new(ManifoldSpec::euclidean("R2", &["a", "b"]).unwrap());
        let f = MapSpec::parse("proj", src, tgt, &["x1", "x2"]).unwrap();
        let c = classify_at(&f, &[0.1, 0.2, 0.3, 0.4], 1e-9).unwrap();
        assert_eq!(c.classification, Classification::InvariantKernel);
        assert!(!c.lagrangian);
        assert!(matches!(mu_frame(&f, &[0.0; 4], 1e-9), Err(Error::NotAntiInvariant { .. })));
    }

    #[test]
    fn planar_projection_is_lagrangian() {
        let src = kahler_flat(&["x", "y"]);
        let tgt = Arc::new(ManifoldSpec::euclidean("R2", &["a", "b"]).unwrap());
        let f = MapSpec::parse("line", src, tgt, &["x", "0"]).unwrap();
        let c = classify_at(&f, &[0.5, -0.5], 1e-9).unwrap();
        assert_eq!(c.classification, Classification::AntiInvariant);
        assert!(c.lagrangian);
        assert_eq!(c.mu_dim, 0);
        assert!(mu_frame(&f, &[0.5, -0.5], 1e-9).unwrap().is_empty());
    }

    #[test]
    fn vertical_vectors_are_rejected_by_bc() {
        let src = kahler_flat(&["x", "y"]);
        let tgt = Arc::new(ManifoldSpec::euclidean("R2", &["a", "b"]).unwrap());
        let f = MapSpec::parse("line", src, tgt, &["x", "0"]).unwrap();
        let z = Vector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(bc_decompose(&f, &[0.0, 0.0], &z, 1e-9), Err(Error::NotHorizontal { .. })));
        let (b, c) = bc_decompose(&f, &[0.0, 0.0], &Vector::from_vec(vec![1.0, 0.0]), 1e-9).unwrap();
        assert_eq!(b, Vector::from_vec(vec![0.0, 1.0]));
        assert_eq!(c, Vector::zeros(2));
    }
}
