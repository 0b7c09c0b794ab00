//! Std side of signflip: JSON problem files, the Clarabel backend, the
//! experiment runner and its exports, parallel oracles and verification
//! suites.

pub mod audit;
pub mod bound;
pub mod config;
pub mod experiment;
pub mod export;
pub mod io;
pub mod oracle;
pub mod verify;
