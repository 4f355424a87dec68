//! Criteria checks on sampled points and the registry of check names.
//!
//! Equivalences are checked by measuring both sides independently: the verdict
//! is `pass` when both hold, `fail` when both fail and `inconsistent` when they
//! disagree. Checks whose hypotheses do not hold report `vacuous-pass` with a
//! note naming the hypothesis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fundforms::{self, MapPoint, Neighborhood, NormalExtension, SecondFundamentalForm, ShapeOperator};
use crate::hermitian::{self, AntiInvarianceVerdict, Classification, ComplexSplitting};
use crate::linalg;
use crate::maps::{adjoint, MapSpec, Probe};
use crate::report::{ReportBuilder, Verdict, VerificationReport};
use crate::sampling::map_samples;
use crate::{Matrix, Vector};

/// Projected probes shorter than this are dropped.
const PROBE_FLOOR: f64 = 1e-9;

macro_rules! checks {
    ($($variant:ident => $name:literal, $tol:expr, $doc:literal;)*) => {
        /// Every check the engine can run.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum CheckKind {
            $(#[doc = $doc] $variant,)*
        }

        impl CheckKind {
            pub const ALL: &'static [CheckKind] = &[$(CheckKind::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(CheckKind::$variant => $name,)*
                }
            }

            pub fn description(self) -> &'static str {
                match self {
                    $(CheckKind::$variant => $doc,)*
                }
            }

            pub fn default_tolerance(self) -> f64 {
                match self {
                    $(CheckKind::$variant => $tol,)*
                }
            }
        }
    };
}

const EXACT: f64 = 1e-9;
const DIFFERENCED: f64 = 1e-6;
const INTEGER: f64 = 0.5;

checks! {
    ConstantRank => "constant_rank", INTEGER, "rank of the differential is the same at every sample";
    RiemannianMap => "riemannian_map", EXACT, "differential is an isometry from the horizontal space onto the range";
    AlmostHermitian => "almost_hermitian", EXACT, "J^2 = -I and J preserves the source metric";
    Kahler => "kahler", EXACT, "J is parallel for the Levi-Civita connection of the source";
    AntiInvariant => "anti_invariant", EXACT, "J maps the kernel into the horizontal space";
    DimensionCounts => "dimension_counts", INTEGER, "dimension relations between kernel, range and mu";
    TotallyGeodesicMap => "totally_geodesic_map", EXACT, "second fundamental form of the map vanishes";
    UmbilicalFibers => "umbilical_fibers", DIFFERENCED, "fibers are totally umbilical";
    Pluriharmonic => "pluriharmonic", EXACT, "(nabla F_*)(X, Y) + (nabla F_*)(JX, JY) = 0";
    ShapeOperator => "shape_operator", DIFFERENCED, "shape operator is dual to the second fundamental form, symmetric and extension independent";
    RangeLemma => "range_lemma", DIFFERENCED, "horizontal pairs have normal second fundamental form, vertical pairs tangential";
    VerticalFoliation => "vertical_foliation", DIFFERENCED, "kernel foliation is totally geodesic iff the vertical identity holds";
    HorizontalFoliation => "horizontal_foliation", DIFFERENCED, "horizontal distribution is a totally geodesic foliation iff the horizontal identity holds";
    LocalProduct => "local_product", DIFFERENCED, "source splits locally as a product iff both foliation identities hold";
    TotallyGeodesicCriterion => "totally_geodesic_criterion", DIFFERENCED, "map is totally geodesic iff the four shape and connection conditions hold";
    UmbilicalLagrangianFibers => "umbilical_lagrangian_fibers", DIFFERENCED, "totally umbilical fibers of a Lagrangian map of fiber dimension > 1 are totally geodesic";
    PluriharmonicLagrangian => "pluriharmonic_lagrangian", EXACT, "a pluriharmonic Lagrangian map is totally geodesic";
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown check `{s}`")))
    }
}

/// Tolerance lookup: a global override beats per-check overrides, which beat defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tolerances {
    global: Option<f64>,
    overrides: BTreeMap<CheckKind, f64>,
}

impl Tolerances {
    pub fn get(&self, kind: CheckKind) -> f64 {
        self.global
            .or_else(|| self.overrides.get(&kind).copied())
            .unwrap_or_else(|| kind.default_tolerance())
    }

    pub fn set(&mut self, kind: CheckKind, tol: f64) {
        self.overrides.insert(kind, tol);
    }

    pub fn set_global(&mut self, tol: f64) {
        self.global = Some(tol);
    }
}

/// Hypotheses shared by several checks, measured once per context.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypotheses {
    pub ranks: Vec<usize>,
    pub constant_rank: Option<usize>,
    pub riemannian: bool,
    pub complex: bool,
    pub almost_hermitian: bool,
    pub kahler: bool,
    pub anti_invariance: Option<AntiInvarianceVerdict>,
}

impl Hypotheses {
    pub fn anti_invariant(&self) -> bool {
        self.anti_invariance
            .as_ref()
            .is_some_and(|a| a.classification == Classification::AntiInvariant)
    }

    pub fn lagrangian(&self) -> bool {
        self.anti_invariance.as_ref().is_some_and(|a| a.lagrangian)
    }
}

#[derive(Debug, Clone, Copy)]
enum Need {
    ConstantRank,
    Riemannian,
    Kahler,
    AntiInvariant,
    Lagrangian,
    KernelAbove(usize),
}

/// A map, its sample points and tolerances, with lazily shared per-sample data.
pub struct CheckContext<'a> {
    map: &'a MapSpec,
    samples: Vec<Vector>,
    tolerances: Tolerances,
    hypotheses: OnceLock<Result<Hypotheses>>,
    points: OnceLock<Result<Vec<MapPoint>>>,
    neighborhoods: OnceLock<Result<Vec<Neighborhood>>>,
}

/// Largest value per condition at one sample, with a description of where it occurred.
#[derive(Debug, Default)]
struct SampleMax {
    entries: Vec<(&'static str, f64, String)>,
}

impl SampleMax {
    fn declare(&mut self, condition: &'static str) {
        if !self.entries.iter().any(|e| e.0 == condition) {
            self.entries.push((condition, 0.0, String::new()));
        }
    }

    fn record(&mut self, condition: &'static str, value: f64, detail: impl FnOnce() -> String) {
        let value = value.abs();
        match self.entries.iter_mut().find(|e| e.0 == condition) {
            Some(e) => {
                if value > e.1 || (value.is_nan() && !e.1.is_nan()) {
                    e.1 = value;
                    e.2 = detail();
                }
            }
            None => self.entries.push((condition, value, detail())),
        }
    }

    fn get(&self, condition: &str) -> f64 {
        self.entries.iter().find(|e| e.0 == condition).map_or(0.0, |e| e.1)
    }

    fn feed(self, report: &mut ReportBuilder, point: &[f64]) {
        for (condition, value, detail) in self.entries {
            report.residual(condition, value, point, || detail);
        }
    }
}

fn g_inner(g: &Matrix, u: &Vector, v: &Vector) -> f64 {
    linalg::inner(g, u, v)
}

/// Frame vectors named `prefix1..`, then probes projected onto their span.
fn directions(g: &Matrix, frame: &[Vector], prefix: &str, probes: &[Probe]) -> Vec<(String, Vector)> {
    let mut out: Vec<(String, Vector)> = frame
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("{prefix}{}", i + 1), v.clone()))
        .collect();
    for probe in probes {
        let projected = linalg::project(g, frame, &probe.vector);
        if linalg::norm(g, &projected) > PROBE_FLOOR * linalg::norm(g, &probe.vector).max(1.0) {
            out.push((probe.name.clone(), projected));
        }
    }
    out
}

/// Per-sample data for statements about the complex structure.
struct ComplexPoint<'n> {
    point: &'n MapPoint,
    j: Option<&'n Matrix>,
    split: ComplexSplitting,
    sff: SecondFundamentalForm,
    vertical: Vec<(String, Vector)>,
    horizontal: Vec<(String, Vector)>,
    mu: Vec<(String, Vector)>,
}

impl<'n> ComplexPoint<'n> {
    fn new(map: &MapSpec, point: &'n MapPoint) -> Self {
        let local = &point.local;
        let frames = &local.frames;
        let j = local.j.as_ref();
        let split = match j {
            Some(j) => hermitian::complex_splitting(&local.g1, j, frames),
            None => ComplexSplitting {
                j_kernel: Vec::new(),
                mu: frames.horizontal.clone(),
            },
        };
        let probes = map.probes();
        Self {
            vertical: directions(&local.g1, &frames.vertical, "V", probes),
            horizontal: directions(&local.g1, &frames.horizontal, "H", probes),
            mu: directions(&local.g1, &split.mu, "mu", probes),
            sff: point.sff(),
            split,
            j,
            point,
        }
    }

    fn g1(&self) -> &Matrix {
        &self.point.local.g1
    }

    fn g2(&self) -> &Matrix {
        &self.point.local.g2
    }

    fn push(&self, x: &Vector) -> Vector {
        &self.point.local.df * x
    }

    fn j(&self) -> &Matrix {
        self.j.expect("complex structure checked by the caller")
    }

    fn jv(&self, x: &Vector) -> Vector {
        self.j() * x
    }

    fn b(&self, z: &Vector) -> Vector {
        hermitian::b_part(self.g1(), self.j(), &self.point.local.frames.vertical, z)
    }

    fn c(&self, z: &Vector) -> Vector {
        hermitian::c_part(self.g1(), self.j(), &self.split.mu, z)
    }

    fn adjoint(&self, y: &Vector) -> Vector {
        let l = &self.point.local;
        adjoint(&l.g1, &l.g2, &l.df, y).unwrap_or_else(|| y.clone() * f64::NAN)
    }
}

fn j_at(f: &fundforms::LocalFrame) -> Result<&Matrix> {
    f.j.as_ref()
        .ok_or_else(|| Error::NoComplexStructure("source".into()))
}

impl<'a> CheckContext<'a> {
    pub fn new(map: &'a MapSpec, samples: Vec<Vector>, tolerances: Tolerances) -> Self {
        Self {
            map,
            samples,
            tolerances,
            hypotheses: OnceLock::new(),
            points: OnceLock::new(),
            neighborhoods: OnceLock::new(),
        }
    }

    pub fn map(&self) -> &MapSpec {
        self.map
    }

    pub fn samples(&self) -> &[Vector] {
        &self.samples
    }

    pub fn tolerance(&self, kind: CheckKind) -> f64 {
        self.tolerances.get(kind)
    }

    pub fn hypotheses(&self) -> Result<&Hypotheses> {
        self.hypotheses
            .get_or_init(|| self.measure_hypotheses())
            .as_ref()
            .map_err(Clone::clone)
    }

    fn points(&self) -> Result<&Vec<MapPoint>> {
        self.points
            .get_or_init(|| map_samples(&self.samples, |p| MapPoint::new(self.map, p.as_slice())))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn neighborhoods(&self) -> Result<&Vec<Neighborhood>> {
        self.neighborhoods
            .get_or_init(|| map_samples(&self.samples, |p| Neighborhood::new(self.map, p.as_slice())))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn measure_hypotheses(&self) -> Result<Hypotheses> {
        let ranks = map_samples(&self.samples, |p| Ok(self.map.jacobian_at(p.as_slice())?.rank))?;
        let constant_rank = ranks
            .first()
            .copied()
            .filter(|r| ranks.iter().all(|x| x == r));
        let riemannian = self
            .map
            .check_riemannian_map(&self.samples, self.tolerance(CheckKind::RiemannianMap))?
            .passed();
        let source = self.map.source();
        let complex = source.has_complex_structure();
        let (mut almost_hermitian, mut kahler, mut anti_invariance) = (false, false, None);
        if complex {
            almost_hermitian = source
                .check_almost_hermitian(&self.samples, self.tolerance(CheckKind::AlmostHermitian))?
                .passed();
            kahler = almost_hermitian
                && source
                    .check_kahler(&self.samples, self.tolerance(CheckKind::Kahler))?
                    .passed();
            anti_invariance = Some(hermitian::classify_anti_invariant(
                self.map,
                &self.samples,
                self.tolerance(CheckKind::AntiInvariant),
            )?);
        }
        Ok(Hypotheses {
            ranks,
            constant_rank,
            riemannian,
            complex,
            almost_hermitian,
            kahler,
            anti_invariance,
        })
    }

    /// First unmet hypothesis, as a note.
    fn unmet(&self, needs: &[Need]) -> Result<Option<String>> {
        let h = self.hypotheses()?;
        for need in needs {
            let failure = match need {
                Need::ConstantRank if h.constant_rank.is_none() => Some("rank is not constant on the samples".to_string()),
                Need::Riemannian if !h.riemannian => Some("map is not a Riemannian map".to_string()),
                Need::Kahler if !h.complex => Some("source has no complex structure".to_string()),
                Need::Kahler if !h.almost_hermitian => Some("source is not almost Hermitian".to_string()),
                Need::Kahler if !h.kahler => Some("source is not Kahler".to_string()),
                Need::AntiInvariant if !h.anti_invariant() => Some("map is not anti-invariant".to_string()),
                Need::Lagrangian if !h.lagrangian() => Some("map is not Lagrangian".to_string()),
                Need::KernelAbove(k) => {
                    let dim = h.constant_rank.map(|r| self.map.source().dim() - r);
                    match dim {
                        Some(d) if d > *k => None,
                        Some(d) => Some(format!("kernel dimension {d} is not above {k}")),
                        None => Some("kernel dimension varies".to_string()),
                    }
                }
                _ => None,
            };
            if let Some(f) = failure {
                return Ok(Some(format!("hypothesis not met: {f}")));
            }
        }
        Ok(None)
    }

    fn builder(&self, kind: CheckKind) -> ReportBuilder {
        ReportBuilder::new(kind.name(), self.tolerance(kind), self.samples.len())
    }

    fn vacuous(&self, kind: CheckKind, note: String) -> VerificationReport {
        let mut b = self.builder(kind);
        b.note(note);
        b.finish_with(Verdict::VacuousPass)
    }

    /// Runs one check. Evaluation errors become an `error` verdict.
    pub fn run(&self, kind: CheckKind) -> VerificationReport {
        let result = match kind {
            CheckKind::ConstantRank => self.constant_rank(),
            CheckKind::RiemannianMap => self.map.check_riemannian_map(&self.samples, self.tolerance(kind)),
            CheckKind::AlmostHermitian => self
                .map
                .source()
                .check_almost_hermitian(&self.samples, self.tolerance(kind)),
            CheckKind::Kahler => self.map.source().check_kahler(&self.samples, self.tolerance(kind)),
            CheckKind::AntiInvariant => self.anti_invariant(),
            CheckKind::DimensionCounts => self.dimension_counts(),
            CheckKind::TotallyGeodesicMap => self.totally_geodesic_map(),
            CheckKind::UmbilicalFibers => self.umbilical_fibers(),
            CheckKind::Pluriharmonic => self.pluriharmonic(),
            CheckKind::ShapeOperator => self.shape_operator(),
            CheckKind::RangeLemma => self.range_lemma(),
            CheckKind::VerticalFoliation => self.vertical_foliation(),
            CheckKind::HorizontalFoliation => self.horizontal_foliation(),
            CheckKind::LocalProduct => self.local_product(),
            CheckKind::TotallyGeodesicCriterion => self.totally_geodesic_criterion(),
            CheckKind::UmbilicalLagrangianFibers => self.umbilical_lagrangian_fibers(),
            CheckKind::PluriharmonicLagrangian => self.pluriharmonic_lagrangian(),
        };
        match result {
            Ok(mut report) => {
                report.name = kind.name().to_string();
                report
            }
            Err(e) => VerificationReport::error(kind.name(), self.tolerance(kind), self.samples.len(), e.to_string()),
        }
    }

    pub fn run_all(&self, kinds: &[CheckKind]) -> Vec<VerificationReport> {
        kinds.iter().map(|k| self.run(*k)).collect()
    }

    fn constant_rank(&self) -> Result<VerificationReport> {
        if self.samples.len() < 2 {
            return Ok(self.vacuous(CheckKind::ConstantRank, "a single sample cannot show a rank change".into()));
        }
        self.map
            .check_constant_rank(&self.samples, self.tolerance(CheckKind::ConstantRank))
    }

    fn anti_invariant(&self) -> Result<VerificationReport> {
        let kind = CheckKind::AntiInvariant;
        let verdict = hermitian::classify_anti_invariant(self.map, &self.samples, self.tolerance(kind))?;
        let mut b = self.builder(kind);
        b.declare("vertical_defect");
        for (p, c) in self.samples.iter().zip(&verdict.points) {
            b.residual("vertical_defect", c.vertical_defect, p.as_slice(), || {
                format!("|P_ker(J V)|, point classified {}", c.classification.as_str())
            });
        }
        b.measure("horizontal_defect", verdict.horizontal_defects.iter().fold(0.0, |a: f64, v| a.max(*v)));
        b.measure("lagrangian", if verdict.lagrangian { 1.0 } else { 0.0 });
        b.measure("kernel_dim", verdict.kernel_dim as f64);
        b.measure("rank", verdict.rank as f64);
        if let Some(mu) = verdict.mu_dim {
            b.measure("mu_dim", mu as f64);
        }
        b.note(format!(
            "classification: {}; lagrangian: {}",
            verdict.classification.as_str(),
            verdict.lagrangian
        ));
        let pass = verdict.classification == Classification::AntiInvariant;
        Ok(b.finish_with(if pass { Verdict::Pass } else { Verdict::Fail }))
    }

    fn dimension_counts(&self) -> Result<VerificationReport> {
        let kind = CheckKind::DimensionCounts;
        let h = self.hypotheses()?;
        let Some(anti) = h.anti_invariance.as_ref() else {
            return Ok(self.vacuous(kind, "hypothesis not met: source has no complex structure".into()));
        };
        let m = self.map.source().dim();
        let n = self.map.target().dim();
        let mut b = self.builder(kind);
        b.declare("proper_surface_forced_anti_invariance");
        for (p, c) in self.samples.iter().zip(&anti.points) {
            let rank = c.horizontal_dim;
            let proper_surface = m == 2 && rank > 0 && rank < m.min(n);
            let violated = proper_surface && c.classification != Classification::AntiInvariant;
            b.residual("proper_surface_forced_anti_invariance", if violated { 1.0 } else { 0.0 }, p.as_slice(), || {
                format!("dim 2 source, rank {rank}, classified {}", c.classification.as_str())
            });
        }
        if anti.classification != Classification::AntiInvariant {
            if b.within_tolerance() {
                b.note("map is not anti-invariant: dimension relations do not apply");
                return Ok(b.finish_with(Verdict::VacuousPass));
            }
            return Ok(b.finish());
        }
        b.declare("mu_dimension");
        b.declare("lagrangian_criterion");
        for (p, c) in self.samples.iter().zip(&anti.points) {
            let expected = m as i64 - 2 * c.kernel_dim as i64;
            b.residual("mu_dimension", (c.mu_dim as i64 - expected) as f64, p.as_slice(), || {
                format!("dim mu = {}, dim M1 - 2 dim ker = {expected}", c.mu_dim)
            });
            let half = m == 2 * c.horizontal_dim;
            b.residual("lagrangian_criterion", if half == c.lagrangian { 0.0 } else { 1.0 }, p.as_slice(), || {
                format!("lagrangian = {}, dim M1 / 2 == rank is {half}", c.lagrangian)
            });
        }
        if let Some(mu) = anti.mu_dim {
            b.measure("mu_dim", mu as f64);
        }
        b.measure("kernel_dim", anti.kernel_dim as f64);
        b.measure("rank", anti.rank as f64);
        Ok(b.finish())
    }

    fn totally_geodesic_map(&self) -> Result<VerificationReport> {
        let points = self.points()?;
        let mut b = self.builder(CheckKind::TotallyGeodesicMap);
        b.declare("sff_norm");
        for (p, point) in self.samples.iter().zip(points) {
            let (d, detail) = fundforms::totally_geodesic_defect(self.map, point);
            b.residual("sff_norm", d, p.as_slice(), || detail);
        }
        Ok(b.finish())
    }

    fn umbilical_fibers(&self) -> Result<VerificationReport> {
        let fits: Vec<_> = self
            .neighborhoods()?
            .iter()
            .map(|nb| {
                let g = nb.vertical_geometry();
                (g.size(), g.umbilical_fit())
            })
            .collect();
        Ok(fundforms::umbilical_report(
            &self.samples,
            &fits,
            self.tolerance(CheckKind::UmbilicalFibers),
        ))
    }

    fn pluriharmonic_defect(&self, point: &MapPoint) -> Result<(f64, String)> {
        let j = point
            .local
            .j
            .as_ref()
            .ok_or_else(|| Error::NoComplexStructure(self.map.source().name().to_string()))?;
        let sff = point.sff();
        let dirs = fundforms::test_directions(self.map, point.frames());
        let jdirs: Vec<Vector> = dirs.iter().map(|(_, x)| j * x).collect();
        let mut worst = (0.0, String::new());
        for i in 0..dirs.len() {
            for k in i..dirs.len() {
                let v = sff.apply(&dirs[i].1, &dirs[k].1) + sff.apply(&jdirs[i], &jdirs[k]);
                let n = linalg::norm(&point.local.g2, &v);
                if n > worst.0 || n.is_nan() {
                    worst = (n, format!("X={}, Y={}", dirs[i].0, dirs[k].0));
                }
            }
        }
        Ok(worst)
    }

    fn pluriharmonic(&self) -> Result<VerificationReport> {
        if !self.map.source().has_complex_structure() {
            return Err(Error::NoComplexStructure(self.map.source().name().to_string()));
        }
        let defects = map_samples(self.points()?, |pt| self.pluriharmonic_defect(pt))?;
        let mut b = self.builder(CheckKind::Pluriharmonic);
        b.declare("pluriharmonic_defect");
        for (p, (d, detail)) in self.samples.iter().zip(defects) {
            b.residual("pluriharmonic_defect", d, p.as_slice(), || detail);
        }
        Ok(b.finish())
    }

    fn shape_operator(&self) -> Result<VerificationReport> {
        let kind = CheckKind::ShapeOperator;
        let nbs = self.neighborhoods()?;
        if nbs.iter().all(|nb| nb.anchor().frames().complement.is_empty()) {
            return Ok(self.vacuous(kind, "range complement is trivial: no normal directions".into()));
        }
        let per_sample = map_samples(nbs, |nb| {
            let point = nb.anchor();
            let local = &point.local;
            let sff = point.sff();
            let horizontal = directions(&local.g1, &local.frames.horizontal, "H", self.map.probes());
            let mut s = SampleMax::default();
            s.declare("duality");
            s.declare("symmetry");
            s.declare("extension_independence");
            for (c, v) in local.frames.complement.iter().enumerate() {
                let shape = ShapeOperator::at(nb, v, NormalExtension::FrameCoefficients)?;
                let other = ShapeOperator::at(nb, v, NormalExtension::Projected)?;
                for (nx, x) in &horizontal {
                    let ax = shape.apply(&(&local.df * x));
                    for (ny, y) in &horizontal {
                        let lhs = g_inner(&local.g2, &ax, &(&local.df * y));
                        let rhs = g_inner(&local.g2, v, &sff.apply(x, y));
                        s.record("duality", lhs - rhs, || format!("N{}, X={nx}, Y={ny}", c + 1));
                    }
                }
                s.record("symmetry", shape.asymmetry(), || format!("N{}", c + 1));
                for (i, (a, b)) in shape.images.iter().zip(&other.images).enumerate() {
                    s.record("extension_independence", linalg::norm(&local.g2, &(a - b)), || {
                        format!("N{}, H{}", c + 1, i + 1)
                    });
                }
            }
            Ok(s)
        })?;
        let mut b = self.builder(kind);
        for (p, s) in self.samples.iter().zip(per_sample) {
            s.feed(&mut b, p.as_slice());
        }
        Ok(b.finish())
    }

    fn range_lemma(&self) -> Result<VerificationReport> {
        let kind = CheckKind::RangeLemma;
        if let Some(note) = self.unmet(&[Need::ConstantRank, Need::Riemannian])? {
            return Ok(self.vacuous(kind, note));
        }
        let per_sample = map_samples(self.points()?, |point| {
            let local = &point.local;
            let sff = point.sff();
            let range = &local.frames.range;
            let horizontal = directions(&local.g1, &local.frames.horizontal, "H", self.map.probes());
            let vertical = directions(&local.g1, &local.frames.vertical, "V", self.map.probes());
            let mut s = SampleMax::default();
            s.declare("horizontal_pairs_normal");
            s.declare("vertical_pairs_tangent");
            for (i, (nz, z)) in horizontal.iter().enumerate() {
                for (nw, w) in &horizontal[i..] {
                    let part = linalg::project(&local.g2, range, &sff.apply(z, w));
                    s.record("horizontal_pairs_normal", linalg::norm(&local.g2, &part), || format!("Z={nz}, W={nw}"));
                }
            }
            for (i, (nx, x)) in vertical.iter().enumerate() {
                for (ny, y) in &vertical[i..] {
                    let part = linalg::reject(&local.g2, range, &sff.apply(x, y));
                    s.record("vertical_pairs_tangent", linalg::norm(&local.g2, &part), || format!("X={nx}, Y={ny}"));
                }
            }
            Ok(s)
        })?;
        let mut b = self.builder(kind);
        for (p, s) in self.samples.iter().zip(per_sample) {
            s.feed(&mut b, p.as_slice());
        }
        Ok(b.finish())
    }

    fn foliation_needs() -> [Need; 4] {
        [Need::ConstantRank, Need::Riemannian, Need::Kahler, Need::AntiInvariant]
    }

    fn vertical_foliation(&self) -> Result<VerificationReport> {
        let kind = CheckKind::VerticalFoliation;
        if let Some(note) = self.unmet(&Self::foliation_needs())? {
            return Ok(self.vacuous(kind, note));
        }
        let nbs = self.neighborhoods()?;
        if nbs.iter().all(|nb| nb.anchor().frames().vertical.is_empty()) {
            return Ok(self.vacuous(kind, "kernel is trivial".into()));
        }
        let per_sample = map_samples(nbs, |nb| {
            let cp = ComplexPoint::new(self.map, nb.anchor());
            let mut s = SampleMax::default();
            s.declare("identity");
            s.declare("second_fundamental_form");
            s.declare("integrability");
            for (nx, x) in &cp.vertical {
                for (ny, y) in &cp.vertical {
                    let jy = cp.jv(y);
                    let fjy = cp.push(&jy);
                    for (nz, z) in &cp.horizontal {
                        let lhs = g_inner(cp.g2(), &cp.sff.apply(x, &cp.b(z)), &fjy);
                        let rhs = g_inner(cp.g2(), &cp.sff.apply(&jy, x), &cp.push(&cp.c(z)));
                        s.record("identity", lhs - rhs, || format!("X={nx}, Y={ny}, Z={nz}"));
                    }
                }
            }
            let geometry = nb.vertical_geometry();
            let (bmax, (i, k)) = geometry.max_symmetric();
            s.record("second_fundamental_form", bmax, || format!("V{}, V{}", i + 1, k + 1));
            let (imax, (i, k)) = geometry.max_integrability();
            s.record("integrability", imax, || format!("V{}, V{}", i + 1, k + 1));
            Ok((s, geometry.max_bracket_defect()))
        })?;
        let mut b = self.builder(kind);
        let tol = b.tolerance();
        let (mut side_a, mut side_b) = (true, true);
        for (p, (s, bracket)) in self.samples.iter().zip(per_sample) {
            side_a &= s.get("identity") < tol;
            side_b &= s.get("second_fundamental_form") < tol && s.get("integrability") < tol;
            b.measure_max("bracket_defect", bracket);
            s.feed(&mut b, p.as_slice());
        }
        Ok(b.finish_with(Verdict::biconditional(side_a, side_b)))
    }

    fn horizontal_foliation(&self) -> Result<VerificationReport> {
        let kind = CheckKind::HorizontalFoliation;
        if let Some(note) = self.unmet(&Self::foliation_needs())? {
            return Ok(self.vacuous(kind, note));
        }
        let nbs = self.neighborhoods()?;
        if nbs.iter().all(|nb| nb.anchor().frames().horizontal.is_empty()) {
            return Ok(self.vacuous(kind, "horizontal space is trivial".into()));
        }
        let per_sample = map_samples(nbs, |nb| {
            let cp = ComplexPoint::new(self.map, nb.anchor());
            let frames = nb.anchor().frames();
            let mut s = SampleMax::default();
            s.declare("identity");
            s.declare("lemma_range_part");
            s.declare("second_fundamental_form");
            s.declare("integrability");
            for (a, x) in frames.vertical.iter().enumerate() {
                let jx = cp.jv(x);
                let fjx = cp.push(&jx);
                let field = |f: &fundforms::LocalFrame| -> Result<Vector> { Ok(&f.df * (j_at(f)? * &f.frames.vertical[a])) };
                for (i, z1) in frames.horizontal.iter().enumerate() {
                    let lemma = linalg::project(cp.g2(), &frames.range, &cp.sff.apply(z1, &jx));
                    s.record("lemma_range_part", linalg::norm(cp.g2(), &lemma), || format!("Z1=H{}, X=V{}", i + 1, a + 1));
                    let nabla = nb.pullback_covariant(z1, field)?;
                    for (k, z2) in frames.horizontal.iter().enumerate() {
                        let lhs = g_inner(cp.g2(), &cp.sff.apply(z1, &cp.b(z2)), &fjx);
                        let rhs = -g_inner(cp.g2(), &nabla, &cp.push(&cp.c(z2)));
                        s.record("identity", lhs - rhs, || format!("Z1=H{}, Z2=H{}, X=V{}", i + 1, k + 1, a + 1));
                    }
                }
            }
            let geometry = nb.horizontal_geometry();
            let (bmax, (i, k)) = geometry.max_symmetric();
            s.record("second_fundamental_form", bmax, || format!("H{}, H{}", i + 1, k + 1));
            let (imax, (i, k)) = geometry.max_integrability();
            s.record("integrability", imax, || format!("H{}, H{}", i + 1, k + 1));
            Ok((s, geometry.max_bracket_defect()))
        })?;
        let mut b = self.builder(kind);
        let tol = b.tolerance();
        let (mut side_a, mut side_b, mut lemma) = (true, true, true);
        for (p, (s, bracket)) in self.samples.iter().zip(per_sample) {
            side_a &= s.get("identity") < tol;
            side_b &= s.get("second_fundamental_form") < tol && s.get("integrability") < tol;
            lemma &= s.get("lemma_range_part") < tol;
            b.measure_max("bracket_defect", bracket);
            s.feed(&mut b, p.as_slice());
        }
        if !lemma {
            b.note("the range part of (nabla F_*)(Z, J X) does not vanish, so the identity loses its meaning");
            return Ok(b.finish_with(Verdict::Inconsistent));
        }
        Ok(b.finish_with(Verdict::biconditional(side_a, side_b)))
    }

    fn local_product(&self) -> Result<VerificationReport> {
        let kind = CheckKind::LocalProduct;
        let parts = [self.run(CheckKind::VerticalFoliation), self.run(CheckKind::HorizontalFoliation)];
        let mut b = self.builder(kind);
        for (prefix, r) in ["vertical", "horizontal"].iter().zip(&parts) {
            if let Some(o) = &r.worst_offender {
                for m in &r.residuals {
                    b.residual(&format!("{prefix}.{}", m.name), m.value, &o.point, || o.detail.clone());
                }
            } else {
                for m in &r.residuals {
                    b.declare(&format!("{prefix}.{}", m.name));
                }
            }
            for note in &r.notes {
                b.note(format!("{prefix}: {note}"));
            }
        }
        let verdicts = [parts[0].verdict, parts[1].verdict];
        let verdict = if verdicts.contains(&Verdict::Error) {
            Verdict::Error
        } else if verdicts.contains(&Verdict::Inconsistent) {
            Verdict::Inconsistent
        } else if verdicts.iter().all(|v| *v == Verdict::VacuousPass) {
            Verdict::VacuousPass
        } else if verdicts.iter().all(|v| v.is_success()) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Ok(b.finish_with(verdict))
    }

    fn totally_geodesic_criterion(&self) -> Result<VerificationReport> {
        let kind = CheckKind::TotallyGeodesicCriterion;
        if let Some(note) = self.unmet(&[Need::ConstantRank, Need::Riemannian])? {
            return Ok(self.vacuous(kind, note));
        }
        let h = self.hypotheses()?;
        let m = self.map.source().dim();
        let complex = h.complex;
        if complex {
            if let Some(note) = self.unmet(&[Need::Kahler, Need::AntiInvariant])? {
                return Ok(self.vacuous(kind, note));
            }
        } else if h.constant_rank != Some(m) {
            return Ok(self.vacuous(kind, "hypothesis not met: source has no complex structure".into()));
        }
        let nbs = self.neighborhoods()?;
        let per_sample = map_samples(nbs, |nb| {
            let cp = ComplexPoint::new(self.map, nb.anchor());
            let frames = nb.anchor().frames();
            let mut s = SampleMax::default();
            s.declare("shape_on_j_kernel_in_mu");
            s.declare("shape_on_mu_in_j_kernel");
            s.declare("vertical_horizontal_identity");
            s.declare("connection_identity");
            s.declare("sff_norm");
            let shapes = frames
                .complement
                .iter()
                .map(|v| ShapeOperator::at(nb, v, NormalExtension::FrameCoefficients))
                .collect::<Result<Vec<_>>>()?;
            for (c, shape) in shapes.iter().enumerate() {
                if complex {
                    for (nx, x) in &cp.vertical {
                        let xs = cp.adjoint(&shape.apply(&cp.push(&cp.jv(x))));
                        let off = linalg::reject(cp.g1(), &cp.split.mu, &xs);
                        s.record("shape_on_j_kernel_in_mu", linalg::norm(cp.g1(), &off), || {
                            format!("X={nx}, V=N{}", c + 1)
                        });
                    }
                }
                for (nz, z) in &cp.mu {
                    let xs = cp.adjoint(&shape.apply(&cp.push(z)));
                    let off = linalg::reject(cp.g1(), &cp.split.j_kernel, &xs);
                    s.record("shape_on_mu_in_j_kernel", linalg::norm(cp.g1(), &off), || {
                        format!("Z1={nz}, V=N{}", c + 1)
                    });
                }
            }
            if complex {
                for (nx, x) in &cp.vertical {
                    for (ny, y) in &cp.vertical {
                        let jy = cp.jv(y);
                        for (nz, z) in &cp.horizontal {
                            let lhs = g_inner(cp.g2(), &cp.push(&jy), &cp.sff.apply(x, &cp.b(z)));
                            let rhs = g_inner(cp.g2(), &cp.sff.apply(x, &jy), &cp.push(&cp.c(z)));
                            s.record("vertical_horizontal_identity", lhs - rhs, || format!("X={nx}, Y={ny}, Z={nz}"));
                        }
                    }
                }
                for (a, x) in frames.vertical.iter().enumerate() {
                    for (i, z) in frames.horizontal.iter().enumerate() {
                        let field = |f: &fundforms::LocalFrame| -> Result<Vector> {
                            Ok(hermitian::b_part(&f.g1, j_at(f)?, &f.frames.vertical, &f.frames.horizontal[i]))
                        };
                        let nabla = nb.source_covariant(x, field)?;
                        let (bz, cz) = (cp.b(z), cp.c(z));
                        for (k, zbar) in frames.horizontal.iter().enumerate() {
                            let (bzbar, czbar) = (cp.b(zbar), cp.c(zbar));
                            let lhs = g_inner(cp.g1(), &nabla, &bzbar);
                            let rhs = g_inner(cp.g2(), &(cp.sff.apply(x, &bz) + cp.sff.apply(x, &cz)), &cp.push(&czbar))
                                - g_inner(cp.g2(), &cp.push(&cz), &cp.sff.apply(x, &bzbar));
                            s.record("connection_identity", lhs - rhs, || {
                                format!("X=V{}, Z=H{}, Zbar=H{}", a + 1, i + 1, k + 1)
                            });
                        }
                    }
                }
            }
            let (tg, detail) = fundforms::totally_geodesic_defect(self.map, nb.anchor());
            s.record("sff_norm", tg, || detail);
            Ok(s)
        })?;
        let mut b = self.builder(kind);
        let tol = b.tolerance();
        let (mut side_a, mut side_b) = (true, true);
        for (p, s) in self.samples.iter().zip(per_sample) {
            side_a &= [
                "shape_on_j_kernel_in_mu",
                "shape_on_mu_in_j_kernel",
                "vertical_horizontal_identity",
                "connection_identity",
            ]
            .iter()
            .all(|c| s.get(c) < tol);
            side_b &= s.get("sff_norm") < tol;
            s.feed(&mut b, p.as_slice());
        }
        if !complex {
            b.note("source has no complex structure and the kernel is trivial: only the mu condition applies, with mu the whole horizontal space");
        }
        Ok(b.finish_with(Verdict::biconditional(side_a, side_b)))
    }

    fn umbilical_lagrangian_fibers(&self) -> Result<VerificationReport> {
        let kind = CheckKind::UmbilicalLagrangianFibers;
        let needs = [
            Need::ConstantRank,
            Need::Riemannian,
            Need::Kahler,
            Need::Lagrangian,
            Need::KernelAbove(1),
        ];
        if let Some(note) = self.unmet(&needs)? {
            return Ok(self.vacuous(kind, note));
        }
        let fits: Vec<_> = self
            .neighborhoods()?
            .iter()
            .map(|nb| nb.vertical_geometry().umbilical_fit())
            .collect();
        let mut b = self.builder(kind);
        let tol = b.tolerance();
        let umbilical = fits.iter().all(|f| f.residual < tol);
        for f in &fits {
            b.measure_max("umbilical_fit", f.residual);
        }
        if !umbilical {
            b.note("hypothesis not met: fibers are not totally umbilical");
            return Ok(b.finish_with(Verdict::VacuousPass));
        }
        b.declare("mean_curvature");
        b.declare("fiber_sff");
        for (p, f) in self.samples.iter().zip(&fits) {
            b.residual("mean_curvature", f.mean_norm, p.as_slice(), || "|H|".into());
            b.residual("fiber_sff", f.max_value, p.as_slice(), || "max |h(V_a, V_b)|".into());
        }
        if b.within_tolerance() {
            Ok(b.finish())
        } else {
            b.note("umbilical fibers with nonzero mean curvature contradict the statement");
            Ok(b.finish_with(Verdict::Inconsistent))
        }
    }

    fn pluriharmonic_lagrangian(&self) -> Result<VerificationReport> {
        let kind = CheckKind::PluriharmonicLagrangian;
        if let Some(note) = self.unmet(&[Need::ConstantRank, Need::Riemannian, Need::Kahler, Need::Lagrangian])? {
            return Ok(self.vacuous(kind, note));
        }
        let points = self.points()?;
        let defects = map_samples(points, |pt| {
            Ok((self.pluriharmonic_defect(pt)?, fundforms::totally_geodesic_defect(self.map, pt)))
        })?;
        let mut b = self.builder(kind);
        let tol = b.tolerance();
        let pluri = defects.iter().fold(0.0_f64, |a, ((d, _), _)| a.max(*d));
        let geodesic = defects.iter().fold(0.0_f64, |a, (_, (d, _))| a.max(*d));
        b.measure("pluriharmonic_defect", pluri);
        b.measure("sff_norm", geodesic);
        b.declare("implication");
        if pluri < tol {
            for (p, (_, (d, detail))) in self.samples.iter().zip(&defects) {
                b.residual("implication", *d, p.as_slice(), || detail.clone());
            }
        }
        if b.within_tolerance() {
            if pluri >= tol {
                b.note("map is not pluriharmonic; the contrapositive holds");
            }
            Ok(b.finish())
        } else {
            b.note("pluriharmonic but not totally geodesic");
            Ok(b.finish_with(Verdict::Inconsistent))
        }
    }
}
