pub mod error;
pub mod group_core;

pub use error::{Error, Result};
pub mod finite_group;
pub mod integrate;
pub mod measure;
pub mod pushforward;
pub mod subgroup_quotient;
pub mod verify;
pub mod cli;
