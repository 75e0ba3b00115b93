//! The skillset language: resources, skills, guards and effects.

mod ast;
mod format;
mod parser;
mod validate;

pub use ast::{
    CmpOp, Effect, GuardExpr, Ident, InvariantDecl, Param, ResourceDecl, SkillDecl, SkillsetAst,
    TerminalCase, TransitionSpec,
};
pub use format::format_skillset;
pub use parser::{parse_skillset, parse_skillset_unchecked};
pub use validate::{lint_skillset, validate_skillset};

/// The example skillset used throughout the tests and documentation.
pub const CUSTOM_ROBOT: &str = r#"skillset custom_robot {
  resource {
    motion { state { On Off } initial Off transition all }
    battery { state { Normal Critical } initial Normal transition all }
  }
  skill goto {
    input { distance: Integer }
    output position: Position
    precondition { (motion == Off) && (battery != Critical) }
    start motion -> On
    invariant { in_movement { guard motion == On } }
    interrupt { effect { motion -> Off } }
    success { arrived { effect { motion -> Off } } }
    failure { blocked { effect { motion -> Off } } }
  }
}
"#;
