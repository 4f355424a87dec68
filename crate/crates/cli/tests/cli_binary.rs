use std::path::Path;
use std::process::{Command, Output};

fn riemap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riemap")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn catalog_lists_entries() {
    let o = riemap(&["catalog"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().count() >= 6);
    assert!(out.contains("linear_lagrangian"));
    assert!(out.contains("lagrangian_cylinder"));
}

#[test]
fn describe_shows_maps_and_checks() {
    let o = riemap(&["describe", "linear_lagrangian"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("F"));
    assert!(out.contains("anti_invariant"));
    assert_eq!(riemap(&["describe", "nowhere"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(riemap(&["verify", "linear_lagrangian"]).status.code(), Some(0));
    assert_eq!(riemap(&["verify", "lagrangian_cylinder", "--samples", "8"]).status.code(), Some(1));
    assert_eq!(riemap(&["verify", "no_such_scenario"]).status.code(), Some(2));
    assert_eq!(riemap(&["verify", "linear_lagrangian", "--tolerance", "-1"]).status.code(), Some(2));
    assert_eq!(riemap(&["frobnicate"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.scn", "scenario = s\n[manifold M]\ncoords = x\nmetric = wobbly\n");
    let o = riemap(&["verify", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn loose_tolerance_turns_failures_into_passes() {
    let o = riemap(&["verify", "circle_inclusion", "--tolerance", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn json_report_to_file_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = riemap(&["verify", "linear_lagrangian", "--json", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("anti_invariant"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["scenario"], "linear_lagrangian");
    assert_eq!(v["seed"], 7);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 17);
    for c in checks {
        for key in ["name", "verdict", "max_residual", "tolerance", "samples", "worst_offender"] {
            assert!(c.get(key).is_some(), "{key}");
        }
        assert_eq!(c["verdict"], "pass");
    }

    let o = riemap(&["verify", "linear_lagrangian", "--json", "-", "--seed", "99", "--samples", "5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 99);
    assert_eq!(v["checks"][0]["samples"], 5);
}

#[test]
fn same_seed_gives_identical_json() {
    let run = |threads: &str| {
        riemap(&["verify", "lagrangian_cylinder", "--samples", "12", "--seed", "3", "--json", "-", "--threads", threads]).stdout
    };
    let a = run("1");
    assert!(!a.is_empty());
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
}

#[test]
fn scenario_file_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let text = "\
scenario = flat_identity
[manifold C]
coords = x, y
metric = identity
J = canonical
[map id]
source = C
target = C
components = x, y
[verify]
map = id
sampling = grid
count = 9
region = [-1, 1], [-1, 1]
checks = riemannian_map, totally_geodesic_map, pluriharmonic
";
    let path = write(dir.path(), "id.scn", text);
    let o = riemap(&["verify", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.trim_start().starts_with("pass ")).count(), 3);
}
