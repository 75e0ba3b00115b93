//! Skillset compiler and explicit-state LTL model checker for layered
//! robotic architectures.
//!
//! The pipeline is: [`skill_lang`] parses a skillset, [`compile`] turns it
//! into labeled transition systems ([`lts`]), [`layer`] supplies models of
//! the functional and decision layers, [`system`] closes the network, and
//! [`ltl`] checks temporal properties over it.

pub mod compile;
pub mod diag;
pub mod layer;
pub mod lexer;
pub mod ltl;
pub mod lts;
pub mod skill_lang;
pub mod system;

pub use diag::{Diagnostic, Severity, Span};
