//! Configuration files and subcommands behind the `rsimex` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
