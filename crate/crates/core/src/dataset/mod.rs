//! Frame records, their on-disk layout, grammar validation and corpus
//! statistics.

pub mod generate;
pub mod io;
pub mod record;
pub mod stats;
pub mod validate;

pub use generate::{generate, generate_sequence, simulate_corpus, GeneratedSequence};
pub use io::{read_corpus, read_sequence, write_sequence, Corpus, Manifest, ManifestEntry};
pub use record::{FrameRecord, ToolKind, ToolRecord, SCHEMA_VERSION};
pub use stats::{corpus_stats, CorpusStats};
pub use validate::{validate_sequence, Limits, ValidationReport, Violation, ViolationKind};
