//! The `triramsey` command line tool and its HTTP service.

pub mod cli;
pub mod service;
