//! Numerical machinery for Monge-Ampere and linearized Monge-Ampere problems
//! on two-dimensional convex domains.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Everything here is pure computation on uniform Cartesian grids:
//!
//! * [`domain`] and [`grid`]: convex domains, their discretization, finite
//!   differences and discrete `L^p` norms.
//! * [`ma`]: damped Newton solver for `det D^2 phi = g` with Dirichlet data,
//!   cofactor fields, convexity and boundary separation checks.
//! * [`lma`]: the linearized operator `Phi^{ij} u_{ij} = f`.
//! * [`section`]: sections, maximal interior heights, boundary localization,
//!   engulfing, volume scaling, dichotomy and rescalings.
//! * [`covering`]: greedy Vitali covering, the density covering verifier and
//!   the section maximal function.
//! * [`good_sets`]: quasi-paraboloid openings, the sets `G_M` and `A^loc`,
//!   distribution functions and power-decay fits.
//! * [`barrier`]: the explicit boundary supersolution and Holder moduli.
//! * [`iteration`]: bookkeeping for the geometric decay recursion.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod barrier;
pub mod covering;
pub mod domain;
pub mod error;
pub mod fit;
pub mod good_sets;
pub mod grid;
pub mod iteration;
pub mod linalg;
pub mod lma;
pub mod ma;
pub mod math;
pub mod section;

pub use domain::{ConvexDomain, DomainKind};
pub use error::{Error, Result};
pub use grid::{BoundaryData, Grid, MatrixField, NodeKind, Region, ScalarField, VectorField};
pub use ma::{CofactorField, MaOptions, PotentialField};
pub use math::{Point, Sym2};

/// Spatial dimension of every computation in this crate. Formulas that the
/// theory states for general `n` are written in terms of this constant.
pub const DIM: u32 = 2;
