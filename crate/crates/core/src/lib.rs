//! Symbolic machinery for the translation and scaling symmetries of the
//! one-group neutron diffusion equation.

pub mod characteristics;
pub mod forms;
pub mod isovector;
pub mod kernel;
pub mod properties;
