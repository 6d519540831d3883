//! mdBook cannot compile a book's code blocks against a library crate, so
//! this shim includes each chapter as module documentation and lets
//! `cargo test --doc` execute every snippet. One module per chapter keeps
//! failures attributable to their source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grids.md")]
pub mod grids {}

#[doc = include_str!("../../../book/src/oscillation.md")]
pub mod oscillation {}

#[doc = include_str!("../../../book/src/perimeter.md")]
pub mod perimeter {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/rigidity.md")]
pub mod rigidity {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
