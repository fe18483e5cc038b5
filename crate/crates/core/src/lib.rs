//! Imitation learning for planar in-hand manipulation, with a greedy shape
//! curriculum for transferring a learned skill to morphed objects.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curriculum;
pub mod harness;
pub mod imitation;
pub mod learner;
pub mod morphology;
pub mod physics;
