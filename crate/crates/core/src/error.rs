use thiserror::Error;

use crate::corpus::CorpusError;
use crate::evaluate::EvalError;
use crate::features::FeatureError;
use crate::learners::LearnerError;
use crate::store::StoreError;

/// Crate-wide error. Each variant prefixes the message with the module it
/// came from so CLI diagnostics stay attributable. The wrapped error is part
/// of the message rather than a `source`, so a rendered chain names it once.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus: {0}")]
    Corpus(CorpusError),
    #[error("features: {0}")]
    Features(FeatureError),
    #[error("learners: {0}")]
    Learner(LearnerError),
    #[error("evaluate: {0}")]
    Eval(EvalError),
    #[error("store: {0}")]
    Store(StoreError),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! wrap {
    ($($variant:ident($ty:ty)),*) => {$(
        impl From<$ty> for Error {
            fn from(e: $ty) -> Self {
                Error::$variant(e)
            }
        }
    )*};
}

wrap!(
    Corpus(CorpusError),
    Features(FeatureError),
    Learner(LearnerError),
    Eval(EvalError),
    Store(StoreError)
);
