pub mod cli;
pub mod control;
pub mod error;
pub mod func;
pub mod gittins;
pub mod horizon;
pub mod levy;
pub mod mc;
pub mod numerics;
pub mod oracle;
pub mod stopping;
pub mod wiener_hopf;

pub use error::{Error, Result};
