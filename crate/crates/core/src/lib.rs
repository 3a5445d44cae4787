//! Structuring pipeline for digitised archival documents.
//!
//! Pages arrive as ALTO XML ([`alto`]), are cleaned up token by token
//! ([`normalize`]), labelled and segmented into sections and sentences
//! ([`layout`]), annotated with dates and named entities ([`annotate`]) and
//! finally serialized as DocBook plus stand-off JSON sidecars ([`emit`]).
//! [`pipeline`] wires the stages together for one document; [`synth`]
//! generates newspaper pages with known counts for tests and benchmarks.

pub mod alto;
pub mod annotate;
pub mod emit;
pub mod layout;
pub mod normalize;
pub mod pipeline;
pub mod span;
pub mod synth;

pub use alto::{parse_alto, validate_page, AltoError, AltoPage, BBox, CollectionMeta};
pub use annotate::{Annotation, AnnotationKind, Gazetteer};
pub use emit::{EmittedBundle, StructuredDocument};
pub use layout::{BlockLabel, LayoutConfig, LogicalBlock, Section, Sentence};
pub use normalize::{Correction, Lexicon, NormalizedToken};
pub use pipeline::{process_document, PipelineResources};
pub use span::Span;
