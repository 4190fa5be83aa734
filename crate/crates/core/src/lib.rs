//! Pseudo-spectral solver for the two-dimensional Boussinesq–Navier-Stokes
//! system with fractional dissipation, plus Littlewood–Paley tools and
//! diagnostics for checking the a priori estimates numerically.

pub mod checkpoint;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod fit;
pub mod io;
pub mod littlewood_paley;
pub mod random;
pub mod run;
pub mod spectral;
pub mod stability;
pub mod verify;
