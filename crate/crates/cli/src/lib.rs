//! Scenario files, the shipped catalog and report rendering for the `riemap`
//! command-line tool.

pub mod catalog;
pub mod run;
pub mod scenario;

pub use run::{describe, run_scenario, CheckEntry, RunOptions, RunReport};
pub use scenario::{parse_scenario, Scenario, ScenarioError, Verification};
