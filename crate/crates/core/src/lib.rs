//! Data-oriented parsing over Lexical-Functional Grammar representations.
//!
//! Corpus analyses (c-structure, f-structure and the φ correspondence) are
//! decomposed into fragments by the Root, Frontier and Discard operations.
//! Fragments are counted into two bags, given probabilities by a simple or
//! a discounted relative-frequency estimator, and recombined by leftmost
//! substitution plus unification to analyse new sentences. Three decoders
//! pick the most probable analysis: exhaustive enumeration, Monte Carlo
//! sampling, and Viterbi n-best search.
//!
//! ```
//! use lfg_dop::fragmentation::{enumerate_fragments, EnumerationConfig};
//! use lfg_dop::samples::kim_eats;
//!
//! let fragments = enumerate_fragments(&kim_eats(), &EnumerationConfig::without_discard(4));
//! assert_eq!(fragments.total(), 6);
//! ```
//!
//! The runnable programs under `examples/` walk through each stage.

pub mod evaluation;
pub mod fragmentation;
pub mod harness;
pub mod lfg;
pub mod notation;
pub mod parsing;
pub mod probability;
pub mod samples;
pub mod symbol;

pub use lfg::{GovernableFunctions, Representation};
pub use symbol::Sym;
