//! Two-party Bell polytopes: exact facet enumeration of the local polytope,
//! classification under local relabelings, a catalog of known inequality
//! families, quantum violation search and an explicit local model for
//! scenarios with two binary measurements on one side.

pub mod catalog;
pub mod error;
pub mod finemodel;
pub mod linalg;
pub mod polytope;
pub mod quantum;
pub mod scalar;
pub mod scenario;
pub mod symmetry;
pub mod vertices;

pub use catalog::{make, FamilyId};
pub use error::{Error, Result};
pub use finemodel::{certify_local, fine_model, JointDistribution, Locality};
pub use polytope::{
    enumerate_facets, enumerate_facets_with, is_facet, lhv_bound, EnumerationOptions,
    FacetCertificate, Inequality,
};
pub use quantum::{DensityMatrix, MeasurementSet, SeesawOptions};
pub use scalar::{Fp, Rational, Scalar};
pub use scenario::{cg_to_full, full_to_cg, CgVector, FullTable, Scenario};
pub use symmetry::{canonical_form, classify_orbits, OrbitReport, SymmetryElement};
pub use vertices::{enumerate_vertices, DeterministicStrategy};

/// Exact behavior in CG coordinates.
pub type CgVectorQ = CgVector<Rational>;
/// Floating-point behavior in CG coordinates.
pub type CgVectorF = CgVector<f64>;
/// Exact full probability table.
pub type FullTableQ = FullTable<Rational>;

/// Double-precision density matrix.
pub type DensityMatrix64 = quantum::DensityMatrix<f64>;
/// Double-precision measurement set.
pub type MeasurementSet64 = quantum::MeasurementSet<f64>;
/// Exact joint distribution from the local model construction.
pub type JointDistributionQ = finemodel::JointDistribution<Rational>;
