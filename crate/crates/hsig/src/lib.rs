//! Higher-rank expected signatures of finite adapted processes.
//!
//! A discrete-time adapted process with finitely many outcomes is
//! represented as a filtration tree: depth-`t` nodes are the atoms of the
//! time-`t` sigma-algebra, each carrying a transition probability and a
//! state value. This crate computes
//!
//! * truncated signatures and expected signatures of such trees,
//! * higher-rank signatures built by iterating the construction over
//!   conditional signature processes,
//! * the induced semi-metrics between processes, which see the
//!   information flow of the filtration and not just the law of the paths,
//! * a signature kernel and the associated maximum mean discrepancy.
//!
//! Dynamic programs over the tree make ranks 0 and 1 fast; a generic
//! recursion covers higher ranks, with a brute-force path enumeration kept
//! alongside as a test oracle.
//!
//! Tensors and trees are immutable after construction and every operation
//! is a pure function, so values can be shared freely across threads; the
//! experiment module computes per-sample features on a scoped thread pool
//! against the shared basis cache.

pub mod dp;
pub mod experiment;
pub mod fixtures;
pub mod graded;
pub mod metrics;
pub mod process;
pub mod scalar;
pub mod sig;
pub mod tensor;

pub use graded::{Basis, CompositeWord, Gen, TensorR};
pub use process::{AdaptedFunctional, FiltrationTree, ProcessTree};
pub use scalar::Scalar;
pub use tensor::{NormMode, Tensor1, Word};
