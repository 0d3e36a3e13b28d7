//! Exactly solvable four-, five- and six-body models on the line with
//! inverse-square cluster interactions, and a numerical engine that checks
//! every closed form independently.

pub mod model;
pub mod orthopoly;
pub mod tridiag;
pub mod coords;
pub mod spectrum;
pub mod wavefunc;
pub mod admissibility;
pub mod numfmt;
pub mod oracle;
pub mod cli;
