//! Host side of the field bridge: an embedded guest interpreter, scripted
//! solver hooks, file formats and the benchmark harness behind the
//! `fieldbridge` binary.
//!
//! The numerical oracles live in [`fieldbridge_core`]; this crate only moves
//! data to and from guest scripts and measures what that costs.

pub mod bench;
pub mod bridge;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod scripted;

pub use bench::{
    cmd_bc_demo, cmd_heat, cmd_stress_bench, emit_report, read_report_csv, BcDemoSpec, BenchReport,
    BenchRow, HeatSpec, ReportFormat, StressBenchSpec,
};
pub use bridge::{
    close_session, open_session, release_lease, GuestError, GuestErrorKind, RefLease, ScriptSource,
    Session, TransferStats, TransferStrategy,
};
pub use error::{Error, Result};
pub use scripted::{
    eval_scripted_profile, load_weight_bundle, load_weight_file, scripted_fd_step, scripted_stress,
    scripted_stress_until, set_lame, LawKind,
};
