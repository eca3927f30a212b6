//! File formats, parallel execution and the command-line tool around
//! [`ncdf_core`].

pub mod cli;
pub mod csv_io;
pub mod error;
pub mod export;
pub mod parallel;

pub use csv_io::{load_csv, IngestReport, LoadOptions};
pub use error::{Error, Result};
pub use export::VizExport;
