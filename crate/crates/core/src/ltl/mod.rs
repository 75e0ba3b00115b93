//! Linear temporal logic over component states.
//!
//! Properties talk about local states only (`goto @ Running`). A network
//! satisfies a formula when every infinite run does; runs are made infinite
//! by stutter closure.

mod buchi;
mod check;
mod eval;
mod formula;
mod parser;

pub use buchi::{ltl_to_buchi, Buchi, BuchiState, Literal};
pub use check::{model_check, valuation, CheckError, Engine, Lasso, Outcome, Step, Verdict};
pub use eval::{eval_word, LassoWord, Valuation};
pub use formula::{Atom, LtlFormula};
pub use parser::parse_ltl;
