#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod cli;
pub mod config;
pub mod cp_priors;
pub mod distributions;
pub mod divergence;
pub mod error;
pub mod evidence;
pub mod experiments;
pub mod mle;
pub mod model_priors;
pub mod numeric;
pub mod optimize;
pub mod parallel;
pub mod quadrature;
pub mod rng;
