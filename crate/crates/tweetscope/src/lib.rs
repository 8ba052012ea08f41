//! File formats, pipeline commands and the annotation HTTP API built on
//! `tweetscope-core`.

pub mod archive;
pub mod artifact;
pub mod cases;
pub mod cli;
pub mod commands;
pub mod config;
pub mod server;
pub mod store;
