//! Shuffle products on words, languages and grammars, exact counting
//! sequences, and pointing grammars compiled from linear differential
//! equations with polynomial coefficients.

pub mod dfinite;
pub mod error;
pub mod grammar;
pub mod series;
pub mod shuffle;
pub mod word;

pub use error::ParseError;
pub use series::{CoeffSeq, GrowthEstimate, Role, SeriesError};
pub use shuffle::{Barring, ShuffleError};
pub use word::{CountView, LanguageSlice, Letter, Symbol, Word};
