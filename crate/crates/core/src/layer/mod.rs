//! Models of the functional and decision layers.
//!
//! A layer model is a control graph over finite-domain integer variables
//! ([`GuardedTs`]); with no variables it is a plain transition system.
//! [`expand`] turns one into an [`Lts`](crate::lts::Lts) whose states are
//! (location, valuation) pairs.

mod ast;
mod builtin;
mod expand;
mod parser;

pub use ast::{
    AffineExpr, Edge, GuardedTs, LayerBinding, LayerKind, LayerTarget, Location, Operand, RelOp,
    Update, VarDecl, VarGuard, VarInit,
};
pub use builtin::{
    abstract_decision, abstract_functional, refined_goto, RefinedGotoParams, BATTERY_COUPLING,
    BATTERY_SYNC,
};
pub use expand::{expand, Valuation, DEFAULT_EXPANSION_BOUND};
pub use parser::parse_layer_model;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayerError {
    #[error("model {model}: expansion needs up to {needed} states, bound is {bound}")]
    BoundExceeded {
        model: String,
        needed: u128,
        bound: usize,
    },
    #[error("model {model}: {message}")]
    Invalid { model: String, message: String },
    #[error("builtin {name}: {message}")]
    Builtin { name: String, message: String },
}
