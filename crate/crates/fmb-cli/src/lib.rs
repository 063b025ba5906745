//! IO, file formats, execution drivers, and the command-line surface of the
//! featuremetric benchmarking toolkit. The algorithmic core lives in
//! `fmb-core`; this crate adds everything that touches the filesystem.

pub mod calibration;
pub mod cmd;
pub mod formats;
pub mod manifest;
pub mod replay;
pub mod runner;

use thiserror::Error;

/// Exit-code convention: 0 ok, 2 usage, 3 numerical failure, 4 missing data.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return 4;
            }
        }
        if cause.downcast_ref::<fmb_core::gp::GpError>().is_some()
            || cause
                .downcast_ref::<fmb_core::monotonic::MonotonicError>()
                .is_some()
            || cause.downcast_ref::<fmb_core::linalg::LinalgError>().is_some()
        {
            return 3;
        }
        if let Some(a) = cause.downcast_ref::<fmb_core::analysis::AnalysisError>() {
            if matches!(
                a,
                fmb_core::analysis::AnalysisError::MissingRecords(..)
            ) {
                return 4;
            }
            return 3;
        }
        if cause.downcast_ref::<formats::FormatError>().is_some() {
            return 4;
        }
        if cause.downcast_ref::<calibration::CalibrationError>().is_some() {
            return 4;
        }
        if let Some(sim) = cause.downcast_ref::<fmb_core::sim::SimError>() {
            if matches!(sim, fmb_core::sim::SimError::MissingCounts(_)) {
                return 4;
            }
        }
    }
    1
}

/// Invalid flags or flag combinations detected after clap parsing.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);
