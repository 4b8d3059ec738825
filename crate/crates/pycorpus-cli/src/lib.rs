//! Filesystem half of the corpus pipeline: aligned corpus files,
//! repository tree scanning, pipeline configuration, and the command
//! implementations behind the `pycorpus` binary.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod scan;
