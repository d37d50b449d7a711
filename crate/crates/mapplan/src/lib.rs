//! File formats, the knowledge-base generation client and the command-line
//! front end around `mapplan-core`.

pub mod bt_xml;
pub mod cli;
pub mod config;
pub mod json;
pub mod kms;
