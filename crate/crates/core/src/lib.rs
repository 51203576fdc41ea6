//! Subtyping for nested polymorphic session types.
//!
//! Pipeline: [`syntax`] parses programs, [`variance`] infers parameter
//! variances and checks validity, [`rename`] brings signatures into
//! alternating form, and [`subtype`] decides goals under seeded closures.
//! [`bpa`] translates basic process algebra into types, and [`simoracle`]
//! is a bounded simulation check used to test the algorithm.

pub mod syntax;
pub mod variance;
pub mod rename;
pub mod subtype;
pub mod bpa;
pub mod simoracle;
pub mod driver;
