//! Scenarios shipped with the binary.

use crate::scenario::{parse_scenario, Scenario, ScenarioError};

pub struct Entry {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! shipped {
    ($($name:literal),* $(,)?) => {
        &[$(Entry { name: $name, text: include_str!(concat!("../scenarios/", $name, ".scn")) },)*]
    };
}

pub const CATALOG: &[Entry] = shipped![
    "linear_lagrangian",
    "lagrangian_cylinder",
    "circle_inclusion",
    "invariant_projection",
    "planar_projection",
    "horocycle_fibration",
    "latitude_circle",
    "equator_circle",
];

pub fn find(name: &str) -> Option<&'static Entry> {
    CATALOG.iter().find(|e| e.name == name)
}

pub fn load(name: &str) -> Option<Result<Scenario, ScenarioError>> {
    find(name).map(|e| parse_scenario(e.text))
}
