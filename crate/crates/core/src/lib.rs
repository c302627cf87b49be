//! Tree-isomorphism overlap between dependency treebanks and the
//! covariate analyses around it.

pub mod conllu;
pub mod eval;
pub mod experiments;
pub mod pipeline;
pub mod record;
pub mod report;
pub mod rng;
pub mod splits;
pub mod stats;
pub mod tree;
