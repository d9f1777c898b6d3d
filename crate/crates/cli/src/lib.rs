//! Command-line front end and example corpus for `dynledger`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod corpus;
pub mod input;
pub mod raster;
