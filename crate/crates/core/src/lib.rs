//! Validated numerics for traveling waves of the suspension bridge equation
//! on a strip.

pub mod aliasing;
pub mod approximation;
pub mod bounds;
pub mod error;
pub mod fft;
pub mod interval;
pub mod linalg;
pub mod operators;
pub mod scalar;
pub mod sequences;
pub mod stability;
pub mod symbols;
mod util;

pub use error::{Error, Result};
pub use interval::Interval;
pub use scalar::{Scalar, ScalarKind};
pub use sequences::{alpha, CoeffSeq, IndexBox, Side};
pub use util::write_atomic;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/intervals.md")]
    mod intervals {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/symbols.md")]
    mod symbols {}
    #[doc = include_str!("../../../book/src/aliasing.md")]
    mod aliasing {}
    #[doc = include_str!("../../../book/src/certification.md")]
    mod certification {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
}
