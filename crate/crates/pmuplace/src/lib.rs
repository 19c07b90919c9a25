//! File formats, bundled cases, parallel drivers and the command-line
//! front end around [`pmuplace_core`].

pub mod cases;
pub mod cli;
mod error;
pub mod matpower;
pub mod native;
pub mod output;
pub mod run;
pub mod study;

pub use error::{Error, Result};
pub use study::{Study, StudyOptions};
