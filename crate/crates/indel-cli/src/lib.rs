pub mod commands;
pub mod error;
pub mod proto;
pub mod sync;

pub use error::CliError;
