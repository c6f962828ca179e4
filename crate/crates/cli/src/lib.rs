//! IO companion of the pluripotential toolkit: configuration grammar, run
//! orchestration, file formats and the built-in verification suites.

pub mod config;
pub mod output;
pub mod runner;
pub mod suites;

/// Environment variable bounding the number of worker threads used for
/// independent checks and dual-backend runs.
pub const THREADS_ENV: &str = "PLURIGREEN_THREADS";

/// Reads and validates the thread override; `Err` carries the complaint.
pub fn thread_count() -> Result<usize, String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("{THREADS_ENV} must be an integer >= 1, got {v:?}")),
        },
        Err(_) => Ok(1),
    }
}
