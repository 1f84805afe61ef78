pub mod abstractions;
pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod lia;
pub mod mortal;
pub mod qlinalg;
pub mod reflection;

pub use error::{Error, Result};
