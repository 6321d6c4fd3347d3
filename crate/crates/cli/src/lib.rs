//! Library side of the `hopenum` command-line tool: graph input, workload
//! sampling, measured query execution and report writing.

pub mod commands;
pub mod constraint_file;
pub mod input;
pub mod metrics;
pub mod report;
pub mod workload;
