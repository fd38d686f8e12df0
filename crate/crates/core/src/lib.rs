#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod creepsim;
pub mod csvio;
pub mod datasets;
pub mod evalmetrics;
pub mod neuralnet;
pub mod profilegen;
