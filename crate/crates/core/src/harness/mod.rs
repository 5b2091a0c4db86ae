//! Scenario configuration, the mission state machine, and traces.

pub mod runner;
pub mod scenario;
pub mod trace;

pub use runner::{audit, default_bounds, heading_change, run_scenario, Audit, RunOutput, Summary};
pub use scenario::{
    builtin, crash_stop, default_gusts, scenario_a, scenario_b, scenario_c, InitialState, PathSpec,
    ScenarioConfig, BUILTIN_NAMES,
};
pub use trace::{
    emit_trace, load_trace, read_trace, write_trace, Stage, TraceRecord, TRACE_HEADER,
};
