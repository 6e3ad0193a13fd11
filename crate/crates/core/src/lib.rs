pub mod error;
pub mod linalg;

pub use error::{Error, Result};
pub mod exec;
mod json;
pub mod tower;
pub mod morphism;
pub mod nielsen;
pub mod oracle;
pub mod generate;
