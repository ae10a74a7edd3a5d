//! Experiment checks over truncated polyanalytic Fock space operators,
//! plus the report types they emit. The binary in this crate is a thin
//! argument-parsing shell around [`checks::run_check`].

pub mod checks;
pub mod report;
