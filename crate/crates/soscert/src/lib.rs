//! File formats, configuration, conjecture transport, and the pipeline and
//! benchmark harness around `soscert-core`.

pub mod cli;
pub mod config;
pub mod http;
pub mod io;
pub mod lean_check;
pub mod pipeline;
