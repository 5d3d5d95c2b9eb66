//! The hyperbolic quadratic form over GF(2), its singular subspaces and the
//! polar space they form.

mod form;
pub mod gf2;
mod model;
mod quotient;
mod subspace;

pub use form::{Gf2Vector, QuadraticForm};
pub use model::{singular_subspace_count, verify_bs_axioms, AxiomReport, Budget, PolarSpaceModel, Route};
pub use quotient::Quotient;
pub use subspace::{SingularSubspace, SubspaceJson, MAX_VDIM};

/// All singular points of the rank-`n` hyperbolic form, increasing.
pub fn enumerate_points(n: usize) -> crate::Result<Vec<u32>> {
    if n < 2 {
        return Err(crate::Error::InvalidParameter(format!("rank {n} is below 2")));
    }
    Ok(PolarSpaceModel::hyperbolic(n)?.points().to_vec())
}
