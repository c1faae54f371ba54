//! Scenario-file driven front end. `scenario` owns the flat key = value
//! format and its validation; `run` executes a parsed scenario in one of
//! four modes and writes CSV artifacts.

pub mod run;
pub mod scenario;
