//! Runs the code blocks of the book under `book/src` as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/channel-model.md")]
pub mod channel_model {}
#[doc = include_str!("../../../book/src/alignment.md")]
pub mod alignment {}
#[doc = include_str!("../../../book/src/two-layer.md")]
pub mod two_layer {}
#[doc = include_str!("../../../book/src/max-sinr.md")]
pub mod max_sinr {}
#[doc = include_str!("../../../book/src/gradient.md")]
pub mod gradient {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/fixed-points.md")]
pub mod fixed_points {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
