//! Keeps the guide in `book/` honest. Each chapter is included as the doc
//! comment of an empty module, so every fenced rust block in the book is
//! compiled and run by `cargo test -p guide-tests`. If the library drifts,
//! the book breaks here first.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/discriminants.md")]
pub mod discriminants {}

#[doc = include_str!("../../../book/src/newforms.md")]
pub mod newforms {}

#[doc = include_str!("../../../book/src/lfunctions.md")]
pub mod lfunctions {}

#[doc = include_str!("../../../book/src/kohnen-zagier.md")]
pub mod kohnen_zagier {}

#[doc = include_str!("../../../book/src/random-matrices.md")]
pub mod random_matrices {}

#[doc = include_str!("../../../book/src/excised.md")]
pub mod excised {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
