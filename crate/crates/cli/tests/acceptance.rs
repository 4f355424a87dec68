//! Acceptance run over the shipped catalog. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use riemap_cli::{catalog, run_scenario, RunOptions, Scenario};
use riemap_core::fundforms::{map_sff_at, Neighborhood};
use riemap_core::{
    CheckContext, CheckKind, ManifoldSpec, MapSpec, Matrix, NormalExtension, Sampling, ShapeOperator, Tolerances,
    Verdict, Vector,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type ClosedForm<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn scenario(name: &str) -> Scenario {
    catalog::load(name).expect("catalog entry").expect("catalog entry parses")
}

fn all_scenarios() -> Vec<Scenario> {
    catalog::CATALOG.iter().map(|e| scenario(e.name)).collect()
}

fn manifold(scenario_name: &str, manifold: &str) -> ManifoldSpec {
    let s = scenario(scenario_name);
    s.manifolds.iter().find(|m| m.name() == manifold).expect("manifold").as_ref().clone()
}

fn draws(region: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vector> {
    Sampling::uniform(region.to_vec(), count, seed).points(region.len()).unwrap()
}

fn probe(map: &MapSpec, name: &str) -> Vector {
    map.probes().iter().find(|p| p.name == name).expect("probe").vector.clone()
}

fn inner(g: &Matrix, u: &Vector, v: &Vector) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

fn combination(frame: &[Vector], coeffs: &Vector) -> Vector {
    frame.iter().zip(coeffs.iter()).fold(Vector::zeros(frame[0].len()), |acc, (e, c)| acc + e * *c)
}

/// Norm of the `g`-orthogonal projection of `v` onto the span of an orthonormal frame.
fn projected_norm(g: &Matrix, frame: &[Vector], v: &Vector) -> f64 {
    frame.iter().map(|e| inner(g, e, v).powi(2)).sum::<f64>().sqrt()
}

fn linear_golden() -> Outcome {
    let s = scenario("linear_lagrangian");
    let start = Instant::now();
    let report = run_scenario(&s, &RunOptions::default());
    let elapsed = start.elapsed();
    let f = &s.maps[0];
    let g1 = f.source().metric_at(&[0.0; 4]).unwrap();
    let zs: Vec<Vector> = (1..=4).map(|i| probe(f, &format!("Z{i}")) / SQRT_2).collect();
    let points = s.verifications[0].sampling.points(4).unwrap();
    for p in &points {
        let b = f.split_at(p.as_slice()).unwrap();
        ensure!(b.rank == 2 && b.vertical.len() == 2, "rank {} at {p}", b.rank);
        for z in &zs[..2] {
            ensure!((projected_norm(&g1, &b.vertical, z) - 1.0).abs() < 1e-12, "kernel misses a vertical probe");
        }
        let df = f.differential_at(p.as_slice()).unwrap().1;
        let f3 = &df * probe(f, "Z3");
        let f4 = &df * probe(f, "Z4");
        ensure!((f3 - Vector::from_column_slice(&[SQRT_2, 0.0, 0.0])).amax() < 1e-12, "F_*Z3 off");
        ensure!((f4 - Vector::from_column_slice(&[0.0, 0.0, SQRT_2])).amax() < 1e-12, "F_*Z4 off");
        ensure!(b.complement.len() == 1, "range complement has dimension {}", b.complement.len());
        let e2 = Vector::from_column_slice(&[0.0, 1.0, 0.0]);
        ensure!((b.complement[0].abs() - e2).amax() < 1e-12, "range complement is {}", b.complement[0]);
    }
    let anti = report.check("F", "anti_invariant").ok_or("anti_invariant missing")?;
    ensure!(anti.verdict == Verdict::Pass, "anti_invariant: {:?}", anti.verdict);
    ensure!(anti.measurement("lagrangian") == Some(1.0), "not Lagrangian");
    ensure!(anti.measurement("mu_dim") == Some(0.0), "mu dimension {:?}", anti.measurement("mu_dim"));
    ensure!(report.checks.len() == CheckKind::ALL.len(), "{} checks ran", report.checks.len());
    for c in &report.checks {
        ensure!(c.verdict == Verdict::Pass, "{}: {:?}", c.name, c.verdict);
    }
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{} points, {} checks passed in {elapsed:.2?}", points.len(), report.checks.len()))
}

fn koszul_by_differences(m: &ManifoldSpec, p: &[f64]) -> Vec<f64> {
    let n = m.dim();
    let h = 1e-5;
    let dg: Vec<Matrix> = (0..n)
        .map(|k| {
            let (mut a, mut b) = (p.to_vec(), p.to_vec());
            a[k] += h;
            b[k] -= h;
            (m.metric_at(&a).unwrap() - m.metric_at(&b).unwrap()) / (2.0 * h)
        })
        .collect();
    let g_inv = m.metric_at(p).unwrap().try_inverse().unwrap();
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out.push((0..n).map(|l| 0.5 * g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).sum());
            }
        }
    }
    out
}

fn christoffel_oracles() -> Outcome {
    let sphere = manifold("latitude_circle", "S2");
    let half_plane = manifold("horocycle_fibration", "H2");
    let pinned = [
        (&sphere, vec![FRAC_PI_4, 0.3], vec![((0, 1, 1), -0.5), ((1, 0, 1), 1.0), ((1, 1, 0), 1.0)]),
        (&half_plane, vec![0.0, 2.0], vec![((0, 0, 1), -0.5), ((1, 0, 0), 0.5), ((1, 1, 1), -0.5)]),
    ];
    for (m, p, values) in pinned {
        let g = m.christoffel_at(&p).unwrap();
        for ((k, i, j), want) in values {
            ensure!((g.get(k, i, j) - want).abs() < 1e-9, "{}: G^{k}_{i}{j} = {}", m.name(), g.get(k, i, j));
        }
    }

    let mut worst: f64 = 0.0;
    let closed_sphere = |p: &[f64]| {
        let (s, c) = p[0].sin_cos();
        // order k, i, j
        vec![0.0, 0.0, 0.0, -s * c, 0.0, c / s, c / s, 0.0]
    };
    let closed_half_plane = |p: &[f64]| {
        let y = p[1];
        vec![0.0, -1.0 / y, -1.0 / y, 0.0, 1.0 / y, 0.0, 0.0, -1.0 / y]
    };
    let cases: [(&ManifoldSpec, Vec<(f64, f64)>, ClosedForm); 2] = [
        (&sphere, vec![(0.2, 2.9), (-3.0, 3.0)], &closed_sphere),
        (&half_plane, vec![(-2.0, 2.0), (0.3, 4.0)], &closed_half_plane),
    ];
    for (seed, (m, region, closed)) in cases.into_iter().enumerate() {
        for p in draws(&region, 16, 100 + seed as u64) {
            let g = m.christoffel_at(p.as_slice()).unwrap();
            let exact: Vec<f64> = (0..2)
                .flat_map(|k| (0..2).flat_map(move |i| (0..2).map(move |j| (k, i, j))))
                .map(|(k, i, j)| g.get(k, i, j))
                .collect();
            for (a, b) in exact.iter().zip(closed(p.as_slice())) {
                ensure!((a - b).abs() < 1e-9, "{} at {p}: closed form {b} vs {a}", m.name());
            }
            for (a, b) in exact.iter().zip(koszul_by_differences(m, p.as_slice())) {
                worst = worst.max((a - b).abs());
                ensure!((a - b).abs() < 1e-6, "{} at {p}: Koszul differences {b} vs {a}", m.name());
            }
        }
    }
    Ok(format!("16 points per chart, worst difference to Koszul {worst:.1e}"))
}

/// Second fundamental form along constant-coefficient fields, from central differences of `F_*`.
fn sff_by_differences(map: &MapSpec, p: &Vector, x: &Vector, y: &Vector) -> Vector {
    let h = 1e-5;
    let push = |q: Vector| map.differential_at(q.as_slice()).unwrap().1 * y;
    let d = (push(p + x * h) - push(p - x * h)) / (2.0 * h);
    let (image, df) = map.differential_at(p.as_slice()).unwrap();
    let g1 = map.source().christoffel_at(p.as_slice()).unwrap();
    let g2 = map.target().christoffel_at(image.as_slice()).unwrap();
    d + g2.contract(&(&df * x), &(&df * y)) - &df * g1.contract(x, y)
}

fn corpus() -> Vec<(MapSpec, Vec<(f64, f64)>)> {
    all_scenarios()
        .into_iter()
        .filter_map(|s| {
            let v = s.verifications.first()?;
            let region = if v.sampling.region.is_empty() {
                vec![(-1.0, 1.0); v.map.source().dim()]
            } else {
                v.sampling.region.clone()
            };
            Some((v.map.as_ref().clone(), region))
        })
        .collect()
}

fn sff_symmetry_and_tensoriality() -> Outcome {
    let names = ["linear_lagrangian", "lagrangian_cylinder", "circle_inclusion", "latitude_circle", "horocycle_fibration"];
    let (mut asym, mut contraction): (f64, f64) = (0.0, 0.0);
    for (seed, name) in names.iter().enumerate() {
        let s = scenario(name);
        let v = &s.verifications[0];
        let m = v.map.source().dim();
        let points = draws(&v.sampling.region, 32, 200 + seed as u64);
        let vectors = draws(&vec![(-1.0, 1.0); m], 64, 300 + seed as u64);
        for (k, p) in points.iter().enumerate() {
            let sff = map_sff_at(&v.map, p.as_slice()).unwrap();
            asym = asym.max(sff.max_asymmetry());
            let (x, y) = (&vectors[2 * k], &vectors[2 * k + 1]);
            contraction = contraction.max((sff.apply(x, y) - sff_by_differences(&v.map, p, x, y)).amax());
        }
        ensure!(asym < 1e-9, "{name}: asymmetry {asym:.2e}");
        ensure!(contraction < 1e-8, "{name}: contraction differs by {contraction:.2e}");
    }
    Ok(format!("5 maps x 32 points, asymmetry {asym:.1e}, contraction {contraction:.1e}"))
}

fn shape_operator_duality() -> Outcome {
    let (mut duality, mut symmetry, mut extension): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (seed, name) in ["circle_inclusion", "lagrangian_cylinder"].into_iter().enumerate() {
        let s = scenario(name);
        let v = &s.verifications[0];
        let m = v.map.source().dim();
        let points = draws(&v.sampling.region, 16, 400 + seed as u64);
        let vectors = draws(&vec![(-1.0, 1.0); m], 32, 500 + seed as u64);
        for (k, p) in points.iter().enumerate() {
            let nb = Neighborhood::new(&v.map, p.as_slice()).unwrap();
            let local = &nb.anchor().local;
            let complement = &local.frames.complement;
            let coeffs = &draws(&vec![(-1.0, 1.0); complement.len()], 1, 600 + k as u64)[0];
            let normal = combination(complement, coeffs);
            let a = ShapeOperator::at(&nb, &normal, NormalExtension::FrameCoefficients).unwrap();
            let b = ShapeOperator::at(&nb, &normal, NormalExtension::Projected).unwrap();
            let sff = nb.anchor().sff();
            let (x, y) = (&vectors[2 * k], &vectors[2 * k + 1]);
            let (fx, fy) = (&local.df * x, &local.df * y);
            let lhs = inner(&local.g2, &a.apply(&fx), &fy);
            let rhs = inner(&local.g2, &normal, &sff.apply(x, y));
            duality = duality.max((lhs - rhs).abs());
            symmetry = symmetry.max(a.asymmetry());
            extension = extension.max((a.apply(&fx) - b.apply(&fx)).amax());
        }
        ensure!(duality < 1e-6, "{name}: duality defect {duality:.2e}");
        ensure!(symmetry < 1e-6, "{name}: asymmetry {symmetry:.2e}");
        ensure!(extension < 1e-6, "{name}: extensions differ by {extension:.2e}");
    }
    Ok(format!("duality {duality:.1e}, symmetry {symmetry:.1e}, extension {extension:.1e}"))
}

fn range_lemma() -> Outcome {
    let mut maps = 0;
    let mut worst: f64 = 0.0;
    for s in all_scenarios() {
        for v in &s.verifications {
            let samples = v.sampling.points(v.map.source().dim()).unwrap();
            let ctx = CheckContext::new(&v.map, samples, Tolerances::default());
            if ctx.run(CheckKind::RiemannianMap).verdict != Verdict::Pass {
                continue;
            }
            let r = ctx.run(CheckKind::RangeLemma);
            let normal = r.residual("horizontal_pairs_normal").ok_or("missing residual")?;
            ensure!(r.verdict == Verdict::Pass, "{}: {:?} {:?}", v.map.name(), r.verdict, r.notes);
            ensure!(normal < 1e-6, "{}: range projection {normal:.2e}", v.map.name());
            worst = worst.max(normal);
            maps += 1;
        }
    }
    ensure!(maps >= 6, "only {maps} Riemannian maps in the corpus");
    Ok(format!("{maps} Riemannian maps, largest range projection {worst:.1e}"))
}

fn cylinder_values() -> Outcome {
    let s = scenario("lagrangian_cylinder");
    let g = &s.maps[0];
    let (z3, z4) = (probe(g, "Z3"), probe(g, "Z4"));
    let points = s.verifications[0].sampling.points(4).unwrap();
    for p in &points {
        let u = (p[0] - p[2]) / SQRT_2;
        let sff = map_sff_at(g, p.as_slice()).unwrap();
        let want = Vector::from_column_slice(&[u.cos(), u.sin(), 0.0]) * -2.0;
        ensure!((sff.apply(&z3, &z3) - want).amax() < 1e-8, "SFF(Z3, Z3) at {p}");
        ensure!(sff.apply(&z3, &z4).amax() < 1e-8, "SFF(Z3, Z4) at {p}");
        let nb = Neighborhood::new(g, p.as_slice()).unwrap();
        let normal = Vector::from_column_slice(&[u.cos(), u.sin(), 0.0]);
        let a = ShapeOperator::at(&nb, &normal, NormalExtension::FrameCoefficients).unwrap();
        let df = &nb.anchor().local.df;
        let g3 = df * &z3;
        ensure!((a.apply(&g3) + &g3).amax() < 1e-6, "A_V G_*Z3 at {p}");
        ensure!(a.apply(&(df * &z4)).amax() < 1e-6, "A_V G_*Z4 at {p}");
    }

    let start = Instant::now();
    let report = run_scenario(&s, &RunOptions::default());
    let elapsed = start.elapsed();
    let criterion = report.check("G", "totally_geodesic_criterion").ok_or("criterion missing")?;
    let shape = criterion.residual("shape_on_j_kernel_in_mu").ok_or("residual missing")?;
    ensure!((shape - SQRT_2).abs() < 1e-6, "shape operator condition residual {shape}");
    let pluri = report.check("G", "pluriharmonic").ok_or("pluriharmonic missing")?;
    ensure!((pluri.max_residual - 2.0).abs() < 1e-8, "pluriharmonic residual {}", pluri.max_residual);
    let implication = report.check("G", "pluriharmonic_lagrangian").ok_or("implication missing")?;
    ensure!(implication.verdict == Verdict::Pass, "implication: {:?}", implication.verdict);
    let geodesic = report.check("G", "totally_geodesic_map").ok_or("totally_geodesic_map missing")?;
    ensure!(geodesic.verdict == Verdict::Fail, "cylinder reported totally geodesic");
    ensure!(report.checks[0].samples == 64, "{} samples", report.checks[0].samples);
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("residuals {shape:.8} and {:.8}, 64 samples in {elapsed:.2?}", pluri.max_residual))
}

fn dimension_counts() -> Outcome {
    let corpus = corpus();
    ensure!(corpus.len() >= 6, "corpus has {} entries", corpus.len());
    let mut exercised = 0;
    for s in all_scenarios() {
        for v in &s.verifications {
            let samples = v.sampling.points(v.map.source().dim()).unwrap();
            let ctx = CheckContext::new(&v.map, samples, Tolerances::default());
            let counts = ctx.run(CheckKind::DimensionCounts);
            if !v.map.source().has_complex_structure() || ctx.run(CheckKind::AntiInvariant).verdict != Verdict::Pass {
                ensure!(counts.verdict == Verdict::VacuousPass, "{}: {:?}", v.map.name(), counts.verdict);
                continue;
            }
            ensure!(counts.verdict == Verdict::Pass, "{}: {:?}", v.map.name(), counts.verdict);
            for r in &counts.residuals {
                ensure!(r.value == 0.0, "{}: {} = {}", v.map.name(), r.name, r.value);
            }
            let anti = ctx.run(CheckKind::AntiInvariant);
            let get = |k: &str| anti.measurement(k).ok_or(format!("{k} missing"));
            let m = v.map.source().dim() as f64;
            let (kernel, rank, mu, lagrangian) = (get("kernel_dim")?, get("rank")?, get("mu_dim")?, get("lagrangian")?);
            ensure!(mu == m - 2.0 * kernel, "{}: mu {mu} with kernel {kernel}", v.map.name());
            ensure!((lagrangian == 1.0) == (m == 2.0 * rank), "{}: Lagrangian flag {lagrangian}", v.map.name());
            exercised += 1;
        }
    }
    ensure!(exercised >= 3, "only {exercised} anti-invariant maps");
    Ok(format!("{} corpus maps, {exercised} anti-invariant with exact counts", corpus.len()))
}

fn consistency_and_determinism() -> Outcome {
    let mut verdicts = 0;
    for s in all_scenarios() {
        let report = run_scenario(&s, &RunOptions::default());
        for c in &report.checks {
            ensure!(c.verdict != Verdict::Inconsistent, "{}/{}: {}", s.name, c.name, c.map);
        }
        verdicts += report.checks.len();
        for v in &s.verifications {
            let samples = v.sampling.points(v.map.source().dim()).unwrap();
            let ctx = CheckContext::new(&v.map, samples, Tolerances::default());
            for r in ctx.run_all(CheckKind::ALL) {
                ensure!(r.verdict != Verdict::Inconsistent, "{}/{} with all checks", s.name, r.name);
                verdicts += 1;
            }
        }
        let again = run_scenario(&s, &RunOptions::default()).to_json();
        ensure!(report.to_json() == again, "{}: JSON differs between runs", s.name);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let threaded = pool.install(|| run_scenario(&s, &RunOptions::default())).to_json();
        ensure!(threaded == again, "{}: JSON depends on thread count", s.name);
    }
    Ok(format!("{verdicts} verdicts, none inconsistent; JSON byte-identical across runs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("linear Lagrangian golden run", linear_golden),
        ("Christoffel oracles", christoffel_oracles),
        ("second fundamental form symmetry and tensoriality", sff_symmetry_and_tensoriality),
        ("shape operator duality", shape_operator_duality),
        ("range lemma", range_lemma),
        ("cylinder pinned values", cylinder_values),
        ("dimension counts", dimension_counts),
        ("consistency and determinism", consistency_and_determinism),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {title}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
