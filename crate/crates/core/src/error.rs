use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("invalid lasso word: {0}")]
    Lasso(String),
    #[error("invalid grammar: {0}")]
    Grammar(String),
    #[error("invalid automaton: {0}")]
    Automaton(String),
    #[error("invalid run encoding: {0}")]
    Encoding(String),
    #[error("letter {0:?} has no image under the substitution")]
    UnmappedLetter(char),
    #[error("unknown corpus entry {0:?}")]
    UnknownEntry(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
