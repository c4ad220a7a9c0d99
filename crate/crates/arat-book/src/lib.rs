//! Keeps the guide honest: every chapter of `book/` is included here as a
//! doc comment, so `cargo test --doc -p arat-book` compiles and runs the
//! book's code snippets against the real `arat` API.
//!
//! (mdBook itself cannot run snippets that depend on external crates; this
//! crate is the usual workaround.)

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/getting-started.md")]
pub mod getting_started {}

#[doc = include_str!("../../../book/src/spec-model.md")]
pub mod spec_model {}

#[doc = include_str!("../../../book/src/learning-loop.md")]
pub mod learning_loop {}

#[doc = include_str!("../../../book/src/selection.md")]
pub mod selection {}

#[doc = include_str!("../../../book/src/value-sources.md")]
pub mod value_sources {}

#[doc = include_str!("../../../book/src/memory-and-sampling.md")]
pub mod memory_and_sampling {}

#[doc = include_str!("../../../book/src/faults.md")]
pub mod faults {}

#[doc = include_str!("../../../book/src/report.md")]
pub mod report {}

#[doc = include_str!("../../../book/src/testbed.md")]
pub mod testbed {}
