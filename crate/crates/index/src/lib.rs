//! Inverted index over emitted document bundles: BM25 search with facets,
//! concordance, term timelines, entity cards and immutable snapshots.

pub mod bm25;
pub mod index;
pub mod query;
pub mod search;
pub mod snapshot;
pub mod text;

/// Relevance score type used across the crate.
pub type Score = f64;

pub use bm25::Bm25;
pub use index::{Index, IndexError, StoredDocument};
pub use query::{parse_query, Field, Query, QueryError};
pub use search::{
    ConcordanceResult, ConcordanceRow, EntityCard, FacetCount, Hit, LookupError, SearchRequest, SearchResult, Snippet,
    Timeline,
};
pub use snapshot::{current_snapshot, open_snapshot, write_snapshot};
