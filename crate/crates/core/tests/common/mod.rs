//! Independent oracles and planted scenarios shared by integration tests.
//!
//! Nothing here calls into the code under test for the computation being
//! checked; the oracles work on label-keyed tables built by the generator.
#![allow(dead_code)]

pub mod oracles;
pub mod scenarios;
