//! Constrained decoding against a target utterance.
//!
//! A [`Session`] tracks the bytes emitted so far and answers, for every
//! token of a [`Vocab`], whether emitting it keeps the output a prefix of
//! some clean annotated reproduction of the target. Tokens are matched
//! byte by byte, so a token may end inside a multibyte character or inside
//! a padded marker.

mod automaton;
mod protocol;
mod session;
mod vocab;

use thiserror::Error;

use crate::annotation::AnnotationError;

pub use protocol::{serve, Request, SessionService};
pub use session::{ConstraintEngine, Session};
pub use vocab::{load_vocab, SpecialTokens, TokenId, Vocab};

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("malformed vocabulary: {0}")]
    MalformedVocab(String),
    #[error("marker not in vocabulary: {0}")]
    MarkerNotInVocab(String),
    #[error(transparent)]
    Markers(#[from] AnnotationError),
    #[error("target collides with a marker string")]
    MarkerCollision,
    #[error("token {0} is not allowed here")]
    DisallowedToken(TokenId),
    #[error("session already emitted end of sequence")]
    SessionDone,
}

impl ConstraintError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MalformedVocab(_) => "MalformedVocab",
            Self::MarkerNotInVocab(_) => "MarkerNotInVocab",
            Self::Markers(e) => e.code(),
            Self::MarkerCollision => "MarkerCollision",
            Self::DisallowedToken(_) => "DisallowedToken",
            Self::SessionDone => "SessionDone",
        }
    }
}
