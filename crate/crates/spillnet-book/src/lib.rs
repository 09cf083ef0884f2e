//! Doc-test harness for the guide in `book/`.
//!
//! mdbook renders the chapters but does not execute them, so each chapter is
//! also included here as module documentation: `cargo test --doc
//! -p spillnet-book` compiles and runs every fenced Rust block. One module
//! per chapter keeps failures attributable to the right file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/panel-data.md")]
pub mod panel_data {}

#[doc = include_str!("../../../book/src/imputation.md")]
pub mod imputation {}

#[doc = include_str!("../../../book/src/encoding.md")]
pub mod encoding {}

#[doc = include_str!("../../../book/src/information-flow.md")]
pub mod information_flow {}

#[doc = include_str!("../../../book/src/significance.md")]
pub mod significance {}

#[doc = include_str!("../../../book/src/networks.md")]
pub mod networks {}

#[doc = include_str!("../../../book/src/rolling.md")]
pub mod rolling {}
