//! Exact Fedosov/Wick deformation quantization on Kähler charts and its
//! comparison with Berezin-Toeplitz operators on CP¹.

pub mod antideriv;
pub mod chart;
pub mod error;
pub mod fedosov;
pub mod geometry;
pub mod hilbert;
pub mod poly;
pub mod quantizable;
pub mod weyl;
pub mod scalar;
pub mod symmetry;

pub use chart::{ChartFunction, Denominator, RingCtx};
pub use error::{Error, Result};
pub use poly::{Mono, Poly};
pub use scalar::{GaussRat, Scalar};
pub use geometry::{su2_action, GeometrySpec, KahlerGeometry, LieAlgebraAction, VectorField};
