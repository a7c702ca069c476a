//! Mention detection toolkit for visually grounded dialogue.

pub mod annotation;
pub mod constraint;
pub mod corpus;
pub mod iob;
pub mod jsonl;
pub mod metrics;
pub mod np;
pub mod sample;
pub mod span;
pub mod splits;

pub use annotation::{parse, render, strip_markers, AnnotatedUtterance, AnnotationError, MarkerConfig};
pub use constraint::{ConstraintEngine, ConstraintError, Session, SessionService, TokenId, Vocab};
pub use corpus::{Corpus, CorpusError, Dialogue, Speaker, Utterance};
pub use iob::{IobLabel, TokenizationView};
pub use metrics::{evaluate, EvalReport, MetricsError, Prediction, PredictionSet};
pub use sample::{Sample, SampleBuilder, SampleError, WindowSpec};
pub use span::MentionSpan;
pub use splits::{FoldManifest, FoldSpec};
