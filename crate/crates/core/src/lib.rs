//! Space-shift-keying alphabets, prior design, prefix mapping, link
//! simulation and analytical error predictions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bits;
pub mod clique;
pub mod constellation;
pub mod design;
pub mod error;
pub mod framing;
pub mod gssk_props;
pub mod huffman;
pub mod link;
pub mod qam;
pub mod quadrature;
pub mod sim;

pub use constellation::{Alphabet, BinarySymbol, CodePartition};
pub use design::{DesignProblem, DesignSolution, Tilt};
pub use error::{Error, Result};
pub use huffman::PrefixCodebook;
pub use link::{DetectorMetric, LinkConfig};
