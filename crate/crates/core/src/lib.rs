//! Quasi-local mass vectors of coordinate spheres in asymptotically
//! hyperbolic 3-manifolds.
//!
//! The pipeline is: an [`ah_metric::AHFamily`] in collar form gives coordinate
//! spheres ([`sphere_geometry`]), which are isometrically embedded in the
//! hyperboloid model ([`embed_h3`]); the mass functionals in [`quasilocal`]
//! pair the two mean curvatures against the embedding. [`killing_spinor`]
//! supplies the Killing-spinor norms used by the identity checks and
//! [`exhaustion`] runs sweeps over shrinking collar parameters.

pub mod ah_metric;
pub mod embed_h3;
pub mod error;
pub mod exhaustion;
pub mod fit;
pub mod killing_spinor;
pub mod lorentz;
pub mod ode;
pub mod quadrature;
pub mod quasilocal;
pub mod sphere_geometry;

pub use error::{Error, Result};
