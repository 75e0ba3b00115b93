use std::collections::BTreeSet;

use super::formula::{Atom, LtlFormula};

/// Atoms that hold at one position.
pub type Valuation = BTreeSet<Atom>;

/// The infinite word `prefix · cycle^ω`. The cycle must not be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<Valuation>,
    pub cycle: Vec<Valuation>,
}

impl LassoWord {
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn at(&self, i: usize) -> &Valuation {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[i - self.prefix.len()]
        }
    }

    fn succ(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.prefix.len()
        }
    }
}

/// Truth of `f` at the first position of `word`.
///
/// The word is a finite graph in which every position has exactly one
/// successor, so temporal operators are evaluated position-wise as least
/// (`U`, `F`) or greatest (`R`, `G`) fixpoints.
pub fn eval_word(f: &LtlFormula, word: &LassoWord) -> bool {
    assert!(!word.cycle.is_empty(), "lasso word needs a non-empty cycle");
    sat(f, word)[0]
}

fn sat(f: &LtlFormula, w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    match f {
        LtlFormula::True => vec![true; n],
        LtlFormula::False => vec![false; n],
        LtlFormula::Atom(a) => (0..n).map(|i| w.at(i).contains(a)).collect(),
        LtlFormula::Not(a) => sat(a, w).into_iter().map(|x| !x).collect(),
        LtlFormula::And(a, b) => zip(sat(a, w), sat(b, w), |x, y| x && y),
        LtlFormula::Or(a, b) => zip(sat(a, w), sat(b, w), |x, y| x || y),
        LtlFormula::Implies(a, b) => zip(sat(a, w), sat(b, w), |x, y| !x || y),
        LtlFormula::Next(a) => {
            let s = sat(a, w);
            (0..n).map(|i| s[w.succ(i)]).collect()
        }
        LtlFormula::Eventually(a) => until(&vec![true; n], &sat(a, w), w),
        LtlFormula::Always(a) => release(&vec![false; n], &sat(a, w), w),
        LtlFormula::Until(a, b) => until(&sat(a, w), &sat(b, w), w),
        LtlFormula::Release(a, b) => release(&sat(a, w), &sat(b, w), w),
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

fn until(a: &[bool], b: &[bool], w: &LassoWord) -> Vec<bool> {
    let mut s = b.to_vec();
    loop {
        let mut changed = false;
        for i in 0..s.len() {
            if !s[i] && a[i] && s[w.succ(i)] {
                s[i] = true;
                changed = true;
            }
        }
        if !changed {
            return s;
        }
    }
}

fn release(a: &[bool], b: &[bool], w: &LassoWord) -> Vec<bool> {
    let mut s = b.to_vec();
    loop {
        let mut changed = false;
        for i in 0..s.len() {
            if s[i] && !a[i] && !s[w.succ(i)] {
                s[i] = false;
                changed = true;
            }
        }
        if !changed {
            return s;
        }
    }
}
