//! Compiles the guide's Rust listings as doc-tests, one module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/psst-tail.md")]
pub mod psst_tail {}
#[doc = include_str!("../../../book/src/queue.md")]
pub mod queue {}
#[doc = include_str!("../../../book/src/hurst.md")]
pub mod hurst {}
#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
