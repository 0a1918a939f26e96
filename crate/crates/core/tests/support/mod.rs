//! Helpers shared by the integration tests (and by the acceptance suite of
//! the command-line crate).
#![allow(dead_code)]

pub mod intent;
mod models;

#[allow(unused_imports)]
pub use models::*;
