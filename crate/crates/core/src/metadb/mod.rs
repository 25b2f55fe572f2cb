//! On-disk model database: header blocks, path resolution, provenance,
//! model ingestion and program generators.

mod generators;
mod header;
mod paths;
mod provenance;
mod store;

pub use generators::{generate_family, grid_frame_program, PROGRAM_SEPARATOR, ExternalGenerator, Generator, GeneratorParams, GeneratorRegistry, GridFrame};
pub use header::{parse_header, with_header, write_header, HeaderBlock, HEADER_DELIMITER};
pub use paths::{resolve_path, DbPath};
pub use provenance::{content_hash, merge_fragment, record_provenance, ProvenanceDetails, ProvenanceKind};
pub use store::{
    ingest_model, ingest_model_with, properties_json, render_file, Database, IndexRow, IngestOptions, IngestOutcome, ModelEntry,
    GEOMETRY_FILE, INDEX_FILE, LAYOUT_DIRS,
    PROGRAM_FILE, PROPERTIES_FILE, VALIDATION_FILE,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetaDbError {
    #[error("malformed header at line {line}: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("path {0} escapes the database root")]
    PathEscape(String),
    #[error("{0} does not exist")]
    NotFound(String),
    #[error("model id {0} is already in use")]
    DuplicateId(String),
    #[error("invalid model id {0:?}")]
    InvalidId(String),
    #[error("{kind} provenance requires {field}")]
    MissingField { kind: &'static str, field: &'static str },
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("generator {id} failed: {message}")]
    GeneratorFailed { id: String, message: String },
    #[error("invalid generator parameter {name}: {message}")]
    InvalidParameter { name: String, message: String },
    #[error("provenance cycle through {0}")]
    ProvenanceCycle(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("pipeline error: {0}")]
    Pipeline(String),
}

impl MetaDbError {
    pub(crate) fn io(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        MetaDbError::Io(format!("{context}: {e}"))
    }
}
