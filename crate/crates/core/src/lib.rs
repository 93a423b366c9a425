//! Theta-expansions `x = [a_1 theta, a_2 theta, ...]` with `theta = 1/sqrt(m)`:
//! exact digit arithmetic in Q(theta), the invariant measure and its
//! constants, transfer operators, the Gauss-Kuzmin iteration and ergodic
//! Monte Carlo statistics.

pub mod contraction;
pub mod error;
pub mod expansion;
pub mod families;
pub mod gauss_kuzmin;
pub mod grid;
pub mod measure;
pub mod monte_carlo;
pub mod operator;
pub mod params;
pub mod qtheta;
pub mod quadrature;
pub mod series;

pub use error::{Error, Result};
pub use params::ThetaParams;
pub use qtheta::QThetaNumber;
