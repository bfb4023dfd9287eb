//! Desk-scale workbench for density-increment experiments on finite abelian
//! groups: Fourier analysis on 𝔽_q^n and ℤ/N, exact 3AP counting, Bohr-set
//! calculus, and the almost-periodicity bootstrapping pipelines that drive
//! subspace and Bohr-set density increments.

pub mod bohr;
pub mod density;
pub mod error;
pub mod grp;
pub mod harmonic;
pub mod increment;
pub mod io;
pub mod verify;

pub use error::{Error, Result};
