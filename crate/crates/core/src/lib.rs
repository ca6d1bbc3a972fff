pub mod config;
pub mod corpus_io;
pub mod dedup;
mod parallel;
pub mod rng;
pub mod run_controller;
pub mod shardstore;
pub mod stats;
pub mod tokenizer;
pub mod cli;
