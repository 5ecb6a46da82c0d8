//! Equal-split piecewise constant (ESPC) learned index.
//!
//! The index partitions `[x(1), x(n)]` of a sorted key array into `K`
//! equal-length intervals and stores one half-integer rank estimate per
//! interval. A query locates its interval in constant time, reads the
//! estimate, and corrects it with an exponential search whose cost grows with
//! the logarithm of the prediction error.
//!
//! This crate is `no_std` (it needs `alloc`) and holds the algorithmic parts:
//!
//! - [`keys`]: the validated [`KeyArray`] and the brute-force rank oracle.
//! - [`search`]: instrumented binary and exponential search.
//! - [`espc`]: index construction, evaluation, sizing policies, the
//!   equal-probability two-layer variant and the binary index layout.
//! - [`stats`]: partition probabilities, order-2 Rényi entropy, the expected
//!   error bounds, density estimators and the Monte-Carlo `ρ̂` estimator.
//!
//! ```
//! use espc_core::{espc::EspcIndex, KeyArray};
//!
//! let keys = KeyArray::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
//! let index = EspcIndex::build(&keys, 2).unwrap();
//! let outcome = index.evaluate_rank(&keys, 2.9).unwrap();
//! assert_eq!(outcome.rank.get(), 3);
//! ```

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod espc;
pub mod keys;
pub mod search;
pub mod stats;

pub use espc::{EspcError, EspcIndex, HierIndex, SizingPolicy};
pub use keys::{Key, KeyArray, KeyError, KeyMode, Rank};
pub use search::{SearchError, SearchOutcome};
