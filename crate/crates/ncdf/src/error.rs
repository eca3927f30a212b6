use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] ncdf_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: missing header row", path.display())]
    MissingHeader { path: PathBuf },
    #[error("{}: no column named {name:?}", path.display())]
    UnknownColumn { path: PathBuf, name: String },
    #[error("{}: only {kept} valid rows after cleaning, need at least 2", path.display())]
    TooFewRows { path: PathBuf, kept: usize },
    #[error("{}: no numeric feature columns", path.display())]
    NoNumericColumns { path: PathBuf },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{n} rows exceed the export cap of {max_n}; export one window with --ws and --window, or raise --max-n")]
    ExportTooLarge { n: usize, max_n: usize },
    #[error("{0}")]
    Usage(String),
    #[error("malformed scores file: {0}")]
    ScoresFormat(String),
}

impl Error {
    /// 2 for bad arguments, 3 for anything the data caused.
    pub fn exit_code(&self) -> i32 {
        use ncdf_core::Error as Core;
        match self {
            Error::Usage(_) => 2,
            Error::Core(
                Core::InvalidParameter { .. } | Core::InvalidNorm(_) | Core::NormParse(_),
            ) => 2,
            _ => 3,
        }
    }
}
