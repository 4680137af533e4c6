//! Library side of the `tailorder` command line tool.

pub mod commands;
pub mod error;
pub mod model;
pub mod output;
pub mod verify;
