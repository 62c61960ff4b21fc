//! Library surface of the command line tool: the config schema and
//! the CSV and SVG emitters. The binary is a thin dispatcher over
//! these, and integration tests exercise them directly.

pub mod config;
pub mod csvout;
pub mod error;
pub mod svg;
