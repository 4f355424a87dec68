#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riemap_core::{ManifoldSpec, MapSpec, Matrix, Vector};

pub const S2: f64 = std::f64::consts::SQRT_2;

pub fn flat(name: &str, coords: &[&str]) -> Arc<ManifoldSpec> {
    Arc::new(ManifoldSpec::euclidean(name, coords).unwrap())
}

pub fn flat_c2() -> Arc<ManifoldSpec> {
    Arc::new(
        ManifoldSpec::euclidean("R4", &["x1", "x2", "x3", "x4"])
            .unwrap()
            .with_canonical_complex_structure()
            .unwrap(),
    )
}

pub fn sphere() -> Arc<ManifoldSpec> {
    Arc::new(ManifoldSpec::diagonal("S2", &["theta", "phi"], &["1", "sin(theta)^2"]).unwrap())
}

pub fn half_plane() -> Arc<ManifoldSpec> {
    Arc::new(
        ManifoldSpec::diagonal("H2", &["x", "y"], &["1/y^2", "1/y^2"])
            .unwrap()
            .with_canonical_complex_structure()
            .unwrap(),
    )
}

pub fn z(i: usize) -> Vector {
    let v = match i {
        1 => [1.0, 0.0, 1.0, 0.0],
        2 => [0.0, 1.0, 0.0, -1.0],
        3 => [1.0, 0.0, -1.0, 0.0],
        4 => [0.0, 1.0, 0.0, 1.0],
        _ => panic!("no Z{i}"),
    };
    Vector::from_column_slice(&v)
}

fn with_z_probes(mut f: MapSpec) -> MapSpec {
    for i in 1..=4 {
        f = f.with_probe(&format!("Z{i}"), z(i).as_slice()).unwrap();
    }
    f
}

/// Linear Lagrangian map R^4 -> R^3 with kernel span{Z1, Z2}.
pub fn linear_lagrangian() -> MapSpec {
    let f = MapSpec::parse(
        "F",
        flat_c2(),
        flat("R3", &["y1", "y2", "y3"]),
        &["(x1 - x3)/sqrt(2)", "0", "(x2 + x4)/sqrt(2)"],
    )
    .unwrap();
    with_z_probes(f)
}

pub fn cylinder() -> MapSpec {
    let f = MapSpec::parse(
        "G",
        flat_c2(),
        flat("R3", &["y1", "y2", "y3"]),
        &["cos((x1 - x3)/sqrt(2))", "sin((x1 - x3)/sqrt(2))", "(x2 + x4)/sqrt(2)"],
    )
    .unwrap();
    with_z_probes(f)
}

pub fn circle() -> MapSpec {
    MapSpec::parse("circle", flat("line", &["t"]), flat("R2", &["a", "b"]), &["cos(t)", "sin(t)"]).unwrap()
}

pub fn latitude() -> MapSpec {
    MapSpec::parse("latitude", flat("line", &["t"]), sphere(), &["pi/4", "sqrt(2)*t"]).unwrap()
}

pub fn horocycles() -> MapSpec {
    MapSpec::parse("h", half_plane(), flat("R", &["s"]), &["log(y)"]).unwrap()
}

pub fn invariant_projection() -> MapSpec {
    MapSpec::parse("P", flat_c2(), flat("R2", &["a", "b"]), &["x1", "x2"]).unwrap()
}

pub fn planar_projection() -> MapSpec {
    let c = Arc::new(
        ManifoldSpec::euclidean("C", &["x", "y"])
            .unwrap()
            .with_canonical_complex_structure()
            .unwrap(),
    );
    MapSpec::parse("L", c, flat("R2", &["a", "b"]), &["x", "0"]).unwrap()
}

/// Corpus maps paired with a sampling box for their source.
pub fn corpus() -> Vec<(MapSpec, Vec<(f64, f64)>)> {
    let box4 = vec![(-2.0, 2.0); 4];
    vec![
        (linear_lagrangian(), box4.clone()),
        (cylinder(), box4.clone()),
        (circle(), vec![(0.0, 6.0)]),
        (latitude(), vec![(0.0, 2.0)]),
        (horocycles(), vec![(-1.0, 1.0), (0.5, 3.0)]),
        (invariant_projection(), box4),
        (planar_projection(), vec![(-1.0, 1.0); 2]),
    ]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, region: &[(f64, f64)]) -> Vec<f64> {
    region.iter().map(|&(a, b)| rng.random_range(a..b)).collect()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn inner(g: &Matrix, u: &Vector, v: &Vector) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

/// Central difference of a vector-valued function of the point along `dir`.
pub fn directional(p: &[f64], dir: &Vector, h: f64, f: impl Fn(&[f64]) -> Vector) -> Vector {
    let shift = |s: f64| -> Vec<f64> { p.iter().zip(dir.iter()).map(|(a, d)| a + s * h * d).collect() };
    (f(&shift(1.0)) - f(&shift(-1.0))) / (2.0 * h)
}
