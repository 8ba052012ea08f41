#![no_std]

extern crate alloc;

pub mod annotate;
pub mod cluster;
pub mod ingest;
pub mod lda;
pub mod rng;
pub mod special;
pub mod textnorm;
pub mod timeseries;
