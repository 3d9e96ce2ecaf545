//! Almost periodic functions with finite frequency support: multi-indices,
//! frequency bases, spatial structures with weights, action profiles, series
//! arithmetic and norms, and near-identity inversion.

pub mod basis;
pub mod index;
pub mod invert;
pub mod profile;
pub mod series;
pub mod structure;

pub use basis::{ExactInner, FrequencyBasis, RationalRelation, Ratio, RelationValue};
pub use index::MultiIndex;
pub use invert::{invert_near_identity, invert_near_identity_with, InvertOptions};
pub use profile::ActionProfile;
pub use series::{APSeries, Coef, CombineOp, DROP_TOL, REALITY_TOL};
pub use structure::{IndexSet, SpatialStructure};
