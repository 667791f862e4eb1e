//! Spectra of configuration-model random multigraphs.
//!
//! Sample a multigraph with a prescribed degree sequence, build its
//! centered and degree-normalized adjacency matrix `M`, and compare the
//! empirical spectral distribution with the semicircle law. Also included:
//! the light-vertex pruning procedure with its birth-death trajectory, and
//! an exhaustive oracle over all matchings for tiny instances.

pub mod confmodel;
pub mod degseq;
pub mod error;
pub mod laplacian;
pub mod numeric;
pub mod oracle;
pub mod pruning;
pub mod seed;
pub mod spectra;

pub use confmodel::{adjacency_counts, enumerate_matchings, sample_matching, Matching, Multigraph};
pub use degseq::{condition_report, make_regular, make_two_valued, ConditionReport, DegreeSequence};
pub use error::{Error, Result};
