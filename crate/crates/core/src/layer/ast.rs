use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::diag::{Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerKind {
    Functional,
    Decision,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::Functional => "functional",
            LayerKind::Decision => "decision",
        })
    }
}

/// The skill interface a model implements (`for functional goto`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTarget {
    pub kind: LayerKind,
    pub skill: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarInit {
    Const(i64),
    /// Any value of the domain, chosen once at start-up.
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: VarInit,
    pub span: Span,
}

impl VarDecl {
    pub fn new(name: &str, lo: i64, hi: i64, init: VarInit) -> Self {
        VarDecl {
            name: name.to_string(),
            lo,
            hi,
            init,
            span: Span::default(),
        }
    }

    pub fn domain_size(&self) -> u128 {
        (self.hi as i128 - self.lo as i128 + 1).max(0) as u128
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub initial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Const(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarGuard {
    Cmp(Operand, RelOp, Operand),
    Not(Box<VarGuard>),
    And(Box<VarGuard>, Box<VarGuard>),
    Or(Box<VarGuard>, Box<VarGuard>),
}

impl VarGuard {
    pub fn cmp(var: &str, op: RelOp, value: i64) -> Self {
        VarGuard::Cmp(Operand::Var(var.into()), op, Operand::Const(value))
    }

    pub fn and(self, rhs: VarGuard) -> Self {
        VarGuard::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: VarGuard) -> Self {
        VarGuard::Or(Box::new(self), Box::new(rhs))
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            VarGuard::Cmp(a, _, b) => {
                for op in [a, b] {
                    if let Operand::Var(v) = op {
                        out.push(v);
                    }
                }
            }
            VarGuard::Not(g) => g.collect_vars(out),
            VarGuard::And(a, b) | VarGuard::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }
}

/// `c0 + c1*x1 + c2*x2 + …`
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AffineExpr {
    pub constant: i64,
    pub terms: Vec<(i64, String)>,
}

impl AffineExpr {
    pub fn constant(c: i64) -> Self {
        AffineExpr {
            constant: c,
            terms: Vec::new(),
        }
    }

    /// `var + delta`
    pub fn offset(var: &str, delta: i64) -> Self {
        AffineExpr {
            constant: delta,
            terms: vec![(1, var.to_string())],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub var: String,
    pub expr: AffineExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub event: String,
    pub internal: bool,
    pub guard: Option<VarGuard>,
    /// Applied simultaneously.
    pub updates: Vec<Update>,
    pub span: Span,
}

impl Edge {
    pub fn new(source: &str, target: &str, event: &str) -> Self {
        Edge {
            source: source.to_string(),
            target: target.to_string(),
            event: event.to_string(),
            internal: false,
            guard: None,
            updates: Vec::new(),
            span: Span::default(),
        }
    }

    pub fn internal(mut self) -> Self {
        self.internal = true;
        self
    }

    pub fn when(mut self, guard: VarGuard) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn set(mut self, var: &str, expr: AffineExpr) -> Self {
        self.updates.push(Update {
            var: var.to_string(),
            expr,
        });
        self
    }
}

/// A control graph over bounded integer variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedTs {
    pub name: String,
    pub target: Option<LayerTarget>,
    pub variables: Vec<VarDecl>,
    pub locations: Vec<Location>,
    pub edges: Vec<Edge>,
}

impl GuardedTs {
    pub fn variable(&self, name: &str) -> Option<&VarDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn initial_location(&self) -> Option<usize> {
        self.locations.iter().position(|l| l.initial)
    }

    /// Event of the start-up step that picks `any` initial values.
    pub fn init_event(&self) -> String {
        format!("auto_init_{}", self.name)
    }

    pub fn needs_init_step(&self) -> bool {
        self.variables.iter().any(|v| v.init == VarInit::Any)
    }

    /// Events private to this model: edges marked `internal`, plus the
    /// start-up step.
    pub fn internal_events(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .edges
            .iter()
            .filter(|e| e.internal)
            .map(|e| e.event.clone())
            .collect();
        if self.needs_init_step() {
            out.insert(self.init_event());
        }
        out
    }

    /// Scope and well-formedness checks.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let mut err = |span: Span, msg: String| diags.push(Diagnostic::error(span, msg));

        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                err(v.span, format!("duplicate variable {}", v.name));
            }
            if v.lo > v.hi {
                err(
                    v.span,
                    format!("empty domain [{}, {}] for {}", v.lo, v.hi, v.name),
                );
            }
            if let VarInit::Const(c) = v.init {
                if c < v.lo || c > v.hi {
                    err(
                        v.span,
                        format!("initial value {c} of {} is outside its domain", v.name),
                    );
                }
            }
        }
        let mut seen = BTreeSet::new();
        for l in &self.locations {
            if !seen.insert(l.name.as_str()) {
                err(Span::default(), format!("duplicate location {}", l.name));
            }
        }
        match self.locations.iter().filter(|l| l.initial).count() {
            1 => {}
            0 => err(Span::default(), "no initial location".to_string()),
            _ => err(
                Span::default(),
                "more than one initial location".to_string(),
            ),
        }
        let internal = self.internal_events();
        for e in &self.edges {
            for loc in [&e.source, &e.target] {
                if self.location_index(loc).is_none() {
                    err(e.span, format!("unknown location {loc}"));
                }
            }
            if e.event == crate::lts::STUTTER {
                err(e.span, format!("event name {} is reserved", e.event));
            }
            if !e.internal && internal.contains(&e.event) {
                err(
                    e.span,
                    format!("event {} is both internal and external", e.event),
                );
            }
            let mut vars: Vec<&str> = e
                .guard
                .as_ref()
                .map(VarGuard::variables)
                .unwrap_or_default();
            for u in &e.updates {
                vars.push(&u.var);
                vars.extend(u.expr.terms.iter().map(|(_, v)| v.as_str()));
            }
            for v in vars {
                if self.variable(v).is_none() {
                    err(e.span, format!("unknown variable {v}"));
                }
            }
            let mut assigned = BTreeSet::new();
            for u in &e.updates {
                if !assigned.insert(u.var.as_str()) {
                    err(
                        e.span,
                        format!("variable {} assigned twice on one edge", u.var),
                    );
                }
            }
        }
        diags
    }
}

/// A model together with renamings of its local event names to compiled
/// event names, beyond the short interface names every model may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerBinding {
    pub model: GuardedTs,
    pub aliases: BTreeMap<String, String>,
}

impl LayerBinding {
    pub fn new(model: GuardedTs) -> Self {
        LayerBinding {
            model,
            aliases: BTreeMap::new(),
        }
    }

    pub fn alias(mut self, local: &str, event: &str) -> Self {
        self.aliases.insert(local.to_string(), event.to_string());
        self
    }
}

impl From<GuardedTs> for LayerBinding {
    fn from(model: GuardedTs) -> Self {
        LayerBinding::new(model)
    }
}
