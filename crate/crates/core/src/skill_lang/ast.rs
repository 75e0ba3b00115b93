use std::fmt;

use serde::{Serialize, Serializer};

use crate::diag::Span;

/// An identifier together with the place it was written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            span: Span::default(),
        }
    }

    pub fn at(name: impl Into<String>, span: Span) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Serialize for Ident {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkillsetAst {
    pub name: Ident,
    pub resources: Vec<ResourceDecl>,
    pub skills: Vec<SkillDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceDecl {
    pub name: Ident,
    pub states: Vec<Ident>,
    pub initial: Ident,
    pub transitions: TransitionSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionSpec {
    All,
    Explicit(Vec<(Ident, Ident)>),
}

impl ResourceDecl {
    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == state)
    }

    /// Ordered pairs of distinct states the resource may move between on
    /// its own.
    pub fn allowed_changes(&self) -> Vec<(usize, usize)> {
        match &self.transitions {
            TransitionSpec::All => {
                let n = self.states.len();
                (0..n)
                    .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
                    .collect()
            }
            TransitionSpec::Explicit(pairs) => {
                let mut out = Vec::new();
                for (a, b) in pairs {
                    let (Some(a), Some(b)) = (self.state_index(&a.name), self.state_index(&b.name))
                    else {
                        continue;
                    };
                    if a != b && !out.contains(&(a, b)) {
                        out.push((a, b));
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Param {
    pub name: Ident,
    pub type_tag: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Effect {
    pub resource: Ident,
    pub state: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantDecl {
    pub name: Ident,
    pub guard: GuardExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TerminalCase {
    pub name: Ident,
    pub effects: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkillDecl {
    pub name: Ident,
    pub inputs: Vec<Param>,
    pub outputs: Vec<Param>,
    /// `None` behaves as `true`.
    pub precondition: Option<GuardExpr>,
    pub start_effects: Vec<Effect>,
    pub invariants: Vec<InvariantDecl>,
    pub interrupt_effects: Vec<Effect>,
    pub success_cases: Vec<TerminalCase>,
    pub failure_cases: Vec<TerminalCase>,
}

impl SkillDecl {
    pub fn new(name: impl Into<String>) -> Self {
        SkillDecl {
            name: Ident::new(name),
            inputs: Vec::new(),
            outputs: Vec::new(),
            precondition: None,
            start_effects: Vec::new(),
            invariants: Vec::new(),
            interrupt_effects: Vec::new(),
            success_cases: Vec::new(),
            failure_cases: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// Boolean expression over resource-state atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GuardExpr {
    Atom {
        resource: Ident,
        op: CmpOp,
        state: Ident,
    },
    Not(Box<GuardExpr>),
    And(Box<GuardExpr>, Box<GuardExpr>),
    Or(Box<GuardExpr>, Box<GuardExpr>),
}

impl GuardExpr {
    pub fn atom(resource: &str, op: CmpOp, state: &str) -> Self {
        GuardExpr::Atom {
            resource: Ident::new(resource),
            op,
            state: Ident::new(state),
        }
    }

    pub fn and(self, rhs: GuardExpr) -> Self {
        GuardExpr::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: GuardExpr) -> Self {
        GuardExpr::Or(Box::new(self), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        GuardExpr::Not(Box::new(self))
    }

    /// Visits every atom in left-to-right order.
    pub fn atoms(&self) -> Vec<(&Ident, CmpOp, &Ident)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a Ident, CmpOp, &'a Ident)>) {
        match self {
            GuardExpr::Atom {
                resource,
                op,
                state,
            } => out.push((resource, *op, state)),
            GuardExpr::Not(e) => e.collect_atoms(out),
            GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates the guard given a lookup from resource name to its current
    /// state name.
    pub fn eval<'s>(&self, state_of: &impl Fn(&str) -> Option<&'s str>) -> bool {
        match self {
            GuardExpr::Atom {
                resource,
                op,
                state,
            } => {
                let current = state_of(&resource.name);
                let equal = current == Some(state.name.as_str());
                match op {
                    CmpOp::Eq => equal,
                    CmpOp::Ne => !equal,
                }
            }
            GuardExpr::Not(e) => !e.eval(state_of),
            GuardExpr::And(a, b) => a.eval(state_of) && b.eval(state_of),
            GuardExpr::Or(a, b) => a.eval(state_of) || b.eval(state_of),
        }
    }
}
