//! TIMEX2 corpus parsing, the QA dataset schema with validation, the
//! synthetic generator, paragraph-level splitting, and corpus statistics.

pub mod augment;
pub mod dataset;
pub mod split;
pub mod stats;
pub mod synthetic;
pub mod timex2;

pub use dataset::{Dataset, Paragraph, QAExample, RawRecord, RawTimex, RawToken};
pub use split::{split_dataset, DatasetSplit, SplitManifest, SplitRecords};
pub use stats::CorpusStats;
pub use synthetic::generate_synthetic;
pub use timex2::{parse_timex2, render_with_tags, split_paragraphs, ParsedDocument, TimexSpan};
