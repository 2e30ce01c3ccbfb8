//! Library surface of the `opnet` CLI: report rows and sweep execution,
//! shared between the binary and the integration suites.

pub mod report;
pub mod sweep;
