//! Command line and HTTP front end for the ticket classifier.

pub mod commands;
pub mod config;
pub mod serve;
