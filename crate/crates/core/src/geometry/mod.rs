//! Compact set models, candidate meshes and the UPC cusp machinery.

mod mesh;
mod set;
mod upc;

pub use mesh::{generate_mesh, CandidateMesh};
pub use set::{Ambient, BoundingBox, CompactSetModel, MEMBERSHIP_TOL};
pub use upc::{
    check_cusp_inclusion, coefficient_bound, cusp_set_samples, pyramid_image, AffineCoefficient,
    CoefficientBounds, InclusionReport, InclusionWitness, PyramidImage, PyramidSample, SampleGrid,
    UpcDescriptor, UpcValidation, UpcWitness,
};
