//! Computational differential geometry for Riemannian maps between coordinate
//! charts.
//!
//! The crate builds the objects attached to a smooth map `F: (M1, g1, J) -> (M2, g2)`
//! (kernel and horizontal distributions, range and range complement, the second
//! fundamental form of the map, shape operators, distribution tensors) from
//! closed-form chart data, and turns geometric statements about anti-invariant and
//! Lagrangian Riemannian maps into numerical checks with explicit tolerances.
//!
//! Module map:
//! - [`expr`]: expression parsing and exact 2-jets
//! - [`geometry`]: manifolds, metrics, Christoffel symbols, complex structures
//! - [`maps`]: Jacobians, frame splittings, adjoints, Riemannian-map check
//! - [`hermitian`]: anti-invariance classification, the complement `mu`, B/C splitting
//! - [`fundforms`]: second fundamental forms, shape operators, distribution geometry
//! - [`verdicts`]: criteria checks and the check registry
//! - [`report`], [`sampling`]: verification reports and sample generation

pub mod error;
pub mod expr;
pub mod fundforms;
pub mod geometry;
pub mod hermitian;
pub(crate) mod linalg;
pub mod maps;
pub mod report;
pub mod sampling;
pub mod verdicts;

pub use error::{Error, Result};
pub use expr::{ExprError, Expression, Jet2};
pub use fundforms::{DistributionGeometry, NormalExtension, SecondFundamentalForm, ShapeOperator};
pub use geometry::{Christoffel, ComplexStructure, ManifoldSpec};
pub use hermitian::{AntiInvarianceVerdict, Classification};
pub use maps::{FrameBundle, JacobianData, MapSpec};
pub use report::{Measurement, Offender, Verdict, VerificationReport};
pub use sampling::{Sampling, SamplingStrategy};
pub use verdicts::{CheckContext, CheckKind, Tolerances};

/// Coordinates of a point or components of a tangent vector in the coordinate frame.
pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
