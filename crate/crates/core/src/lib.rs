//! Exact number-field arithmetic, Weil heights and purely exponential
//! parametrizations of point sets.

pub mod dsl;
pub mod error;
pub mod experiments;
pub mod exppoly;
pub mod heights;
pub mod jobs;
pub mod matrixk;
pub mod numfield;

pub use error::{Error, ErrorClass, Result};
pub use numfield::{make_field, Field, FieldElement, FieldOptions, NumberField};
