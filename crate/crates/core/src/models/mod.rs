//! Built-in systems: the toy saddle map, the CO-oxidation mean-field ODE
//! with its RK4 time-T map, the lattice kinetic Monte Carlo simulator, and
//! reference settings for the surface reaction near its saddle.

pub mod kmc;
pub mod meanfield;
pub mod surface;
pub mod toy;

pub use kmc::{gillespie_run, kmc_timestepper, lift, restrict, KmcVariant, LatticeState, LiftMode, Species};
pub use meanfield::{meanfield_rhs, rk4_tmap, KmcParams, MeanField, Rk4TMap};
pub use toy::{toy_step, ToyMap};
