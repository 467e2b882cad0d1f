//! Phase-field tumor growth with nutrient coupling and Darcy-Forchheimer-Brinkman
//! flow, plus variance-based and active-subspace sensitivity analysis.

pub mod error;
pub mod io;
pub mod mesh;
pub mod model;
pub mod nonlocal;
pub mod sensitivity;
pub mod stepper;
pub mod velocity;

pub use error::{Error, Result};
