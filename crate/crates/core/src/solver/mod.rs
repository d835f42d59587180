//! Exact optimization: LP relaxation kernel, branch-and-bound and the
//! end-to-end planning pipeline.

pub mod lp;
pub mod bnb;
pub mod exact;
pub mod greedy;
