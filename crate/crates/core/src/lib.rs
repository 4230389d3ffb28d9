//! Workbench for the modal logic of essence and accident.

pub mod bitset;
pub mod formula;
pub mod kripke;
pub mod semantics;
pub mod bisim;
pub mod hilbert;
pub mod decide;
pub mod random;
pub mod cli;
