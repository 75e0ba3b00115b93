use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

/// `component @ state`: the component's local state is `state`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Atom {
    pub component: String,
    pub state: String,
}

impl Atom {
    pub fn new(component: &str, state: &str) -> Self {
        Atom {
            component: component.to_string(),
            state: state.to_string(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.component, self.state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlFormula {
    True,
    False,
    Atom(Atom),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Implies(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Eventually(Box<LtlFormula>),
    Always(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Release(Box<LtlFormula>, Box<LtlFormula>),
}

use LtlFormula as L;

impl LtlFormula {
    pub fn atom(component: &str, state: &str) -> Self {
        L::Atom(Atom::new(component, state))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        L::Not(Box::new(self))
    }

    pub fn and(self, rhs: Self) -> Self {
        L::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Self) -> Self {
        L::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Self) -> Self {
        L::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Self {
        L::Next(Box::new(self))
    }

    pub fn eventually(self) -> Self {
        L::Eventually(Box::new(self))
    }

    pub fn always(self) -> Self {
        L::Always(Box::new(self))
    }

    pub fn until(self, rhs: Self) -> Self {
        L::Until(Box::new(self), Box::new(rhs))
    }

    pub fn release(self, rhs: Self) -> Self {
        L::Release(Box::new(self), Box::new(rhs))
    }

    /// Operator nesting depth; constants and atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            L::True | L::False | L::Atom(_) => 0,
            L::Not(a) | L::Next(a) | L::Eventually(a) | L::Always(a) => 1 + a.depth(),
            L::And(a, b) | L::Or(a, b) | L::Implies(a, b) | L::Until(a, b) | L::Release(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<&Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a Atom>) {
        match self {
            L::True | L::False => {}
            L::Atom(a) => {
                out.insert(a);
            }
            L::Not(a) | L::Next(a) | L::Eventually(a) | L::Always(a) => a.collect_atoms(out),
            L::And(a, b) | L::Or(a, b) | L::Implies(a, b) | L::Until(a, b) | L::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Negation normal form over `true`, `false`, literals, `&&`, `||`, `X`,
    /// `U` and `R`.
    pub fn to_nnf(&self) -> Self {
        self.nnf(false)
    }

    /// NNF of `!self`.
    pub fn negate(&self) -> Self {
        self.nnf(true)
    }

    fn nnf(&self, neg: bool) -> Self {
        match (self, neg) {
            (L::True, false) | (L::False, true) => L::True,
            (L::True, true) | (L::False, false) => L::False,
            (L::Atom(a), false) => L::Atom(a.clone()),
            (L::Atom(a), true) => L::Atom(a.clone()).not(),
            (L::Not(a), _) => a.nnf(!neg),
            (L::And(a, b), false) | (L::Or(a, b), true) => a.nnf(neg).and(b.nnf(neg)),
            (L::Or(a, b), false) | (L::And(a, b), true) => a.nnf(neg).or(b.nnf(neg)),
            (L::Implies(a, b), false) => a.nnf(true).or(b.nnf(false)),
            (L::Implies(a, b), true) => a.nnf(false).and(b.nnf(true)),
            (L::Next(a), _) => a.nnf(neg).next(),
            (L::Eventually(a), false) | (L::Always(a), true) => L::True.until(a.nnf(neg)),
            (L::Always(a), false) | (L::Eventually(a), true) => L::False.release(a.nnf(neg)),
            (L::Until(a, b), false) => a.nnf(false).until(b.nnf(false)),
            (L::Until(a, b), true) => a.nnf(true).release(b.nnf(true)),
            (L::Release(a, b), false) => a.nnf(false).release(b.nnf(false)),
            (L::Release(a, b), true) => a.nnf(true).until(b.nnf(true)),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            L::True | L::False | L::Atom(_) => true,
            L::Not(a) => matches!(**a, L::Atom(_)),
            L::And(a, b) | L::Or(a, b) | L::Until(a, b) | L::Release(a, b) => {
                a.is_nnf() && b.is_nnf()
            }
            L::Next(a) => a.is_nnf(),
            L::Implies(..) | L::Eventually(_) | L::Always(_) => false,
        }
    }
}

/// Fully parenthesized; parses back to the same formula.
impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            L::True => f.write_str("true"),
            L::False => f.write_str("false"),
            L::Atom(a) => write!(f, "({a})"),
            L::Not(a) => write!(f, "!{a}"),
            L::Next(a) => write!(f, "X {a}"),
            L::Eventually(a) => write!(f, "F {a}"),
            L::Always(a) => write!(f, "G {a}"),
            L::And(a, b) => write!(f, "({a} && {b})"),
            L::Or(a, b) => write!(f, "({a} || {b})"),
            L::Implies(a, b) => write!(f, "({a} -> {b})"),
            L::Until(a, b) => write!(f, "({a} U {b})"),
            L::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}
