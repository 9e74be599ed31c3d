//! Sub-Finsler geometry of the first Heisenberg group: convex-body norms,
//! intrinsic graphs, area variations, characteristics and stability.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bump;
pub mod characteristic;
pub mod codazzi;
pub mod convex_body;
pub mod error;
pub mod graph;
pub mod heisenberg;
pub mod ode;
pub mod quadrature;
pub mod stability;
pub mod variation;

pub use convex_body::{ConvexBody2D, PlaneVector, SupportFunction};
pub use error::{Error, Result};
pub use graph::{ClosedForm, ClosedFormGraph, GridGraph, IntrinsicGraph, Jet};
pub use heisenberg::{FrameVector, HPoint};
pub use quadrature::{QuadratureSpec, Rect};
