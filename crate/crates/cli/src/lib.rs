//! Command-line front end for `mclass`.

pub mod args;
pub mod commands;
pub mod document;
pub mod plots;
