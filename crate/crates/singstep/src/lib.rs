pub mod bounds;
pub mod config;
pub mod doc;
pub mod l1;
pub mod error;
pub mod model;
pub mod ode;
pub mod pde;
pub mod mittag_leffler;
pub mod quadrature;
pub mod special;
pub mod table;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::*;
