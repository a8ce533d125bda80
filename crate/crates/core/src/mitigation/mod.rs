//! RCAL, RC and NOX, plus pooled estimation and the counts interchange format.

pub mod estimate;
pub mod interchange;
pub mod nox;
pub mod rc;
pub mod rcal;

pub use estimate::{
    bootstrap, estimate_observable, pool, Estimate, MitigatedEstimate, Method, Observable, DEFAULT_BOOTSTRAP,
};
pub use interchange::{mitigate_records, read_records, write_records, CountsRecord, MitigationReport, Role};
pub use nox::{
    amplify, gamma_diagnostic, nox_combine, nox_family, systematic_bound, NoxFamily, NoxMember, DEFAULT_ALPHA,
};
pub use rc::{rc_compile, rc_dress, split_shots, RcEnsemble};
pub use rcal::{rcal_circuits, rcal_estimate, rcal_invert, RcalOutput};
