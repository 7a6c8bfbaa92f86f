//! Equation-free computation of coarse saddle points and truncated-polynomial
//! parametrizations of their stable and unstable manifolds.
//!
//! The pipeline works on anything implementing [`CoarseMap`]: an analytic
//! map, the time-T map of an ODE, or an ensemble-averaged microscopic
//! simulator wrapped as a coarse timestepper. Saddles are located with
//! Newton/pseudo-arclength continuation ([`saddle`]), split into
//! eigen-coordinates ([`numlin::spectral_split`]), and the manifold graph
//! coefficients are found as the fixed point of a least-squares coefficient
//! map ([`fit`]). [`odeman`] solves the continuous-time invariance equation
//! by collocation when the vector field is known, and serves as the
//! cross-check.

pub mod blackbox;
pub mod error;
pub mod fit;
pub mod io;
pub mod models;
pub mod numlin;
pub mod odeman;
pub mod polyman;
pub mod saddle;

pub use blackbox::{iterate, CoarseMap, CoarseTimestepper, FnMap, TimestepperConfig};
pub use error::{Error, Result};
pub use fit::{coefficient_map, fit_manifold, invariance_residual, FitConfig, FitReport};
pub use numlin::{jacobian_fd, lstsq, solve_dense, spectral_split, FdScheme, SpectralSplit, SplitMode};
pub use polyman::{enumerate_basis, ManifoldKind, ManifoldModel, MultiIndex};
pub use saddle::{classify, continue_branch, newton_fixed_point, BranchPoint, Stability};
