//! Copulas, their stochastic representations, and tail orders.

pub mod error;
pub mod numerics;

pub use error::{Result, TailError};
pub mod radial;

pub use radial::{RadialLaw, UpperTailClass};
pub mod generators;
pub use generators::{Generator, WilliamsonGen};
pub mod copulas;
pub use copulas::{copula_cdf, diagonal, survival_diagonal, CopulaModel, PickandsFn};
pub mod sampling;
pub use sampling::{RngStream, SampleMatrix, Side};
pub mod tailmetrics;
pub use tailmetrics::{tail_order_catalog, CatalogEntry, TailOrderEstimate, UGrid};
