//! Special monoid presentations: rewriting, pieces, unit graphs and
//! Schützenberger graphs.

pub mod presentations;
pub mod rewriting;
pub mod pieces;
pub mod graph;
pub mod treecons;
pub mod units;
pub mod schutz;
pub mod analysis;

pub use presentations::{parse_presentation, Alphabet, Letter, SpecialPresentation, Word};
pub use rewriting::{Budget, Derivation, EqualityVerdict, Oracle, RewritingSystem, Strategy};
