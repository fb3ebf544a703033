//! Oracles shared by the test targets.
#![allow(dead_code)]

pub mod checks;
pub mod trees;
