//! Mass formulas for non-ordinary curves in cyclic-cover families over F_p.

pub mod error;
pub mod ext;
pub mod bivariate;
pub mod cartier;
pub mod cover;
pub mod factor;
pub mod field;
pub mod linalg;
pub mod mass;
pub mod oracle;
pub mod poly;
pub mod taut;

pub use error::{Error, Result};
