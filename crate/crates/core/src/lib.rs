//! Weighted curvature, quasi-Einstein verification, energy functionals and
//! model families for smooth metric measure spaces `(M^n, g, v^m dvol, m)`.

pub mod conformal;
pub mod curvature;
pub mod dim;
pub mod error;
pub mod families;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod profile;
pub mod qe;
pub mod quadrature;
pub mod smms;
pub mod variational;

pub use dim::DimParam;
pub use error::{Error, Result};
pub use geometry::{Block, DensityPoint, Geometry, PointData};
pub use profile::{Catalog, ProfileFn, ProfileSpec};
pub use qe::{qe_verify, QEReport, QeOptions};
pub use smms::{CurvaturePoint, Density, Descriptor, Poles, RadialSmms};
pub use families::{FamilyKind, Status, Trajectory};
