//! Büchi pushdown automata, 2-tape Büchi automata and the adherence,
//! δ-limit and ω-power operations, decided exactly on ultimately periodic
//! words, together with run counting and uncountability certificates.
//!
//! Everything infinite is represented by a [`LassoWord`] `u·v^ω`.

pub mod cfl;
pub mod cli;
pub mod corpus;
pub mod degree;
mod error;
mod graph;
pub mod ops;
pub mod pda;
mod pds;
pub mod relations;
pub mod words;

pub use cfl::{Cfg, ParseCount, Symbol};
pub use degree::DegreeLabel;
pub use error::Error;
pub use pda::{AmbiguityReport, Bpda, Certificate, Config};
pub use relations::{CardinalityClass, TwoTapeBa};
pub use words::{Alphabet, Dfa, FiniteWord, LassoWord};
