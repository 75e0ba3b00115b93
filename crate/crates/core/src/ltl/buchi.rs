use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use super::eval::{LassoWord, Valuation};
use super::formula::{Atom, LtlFormula};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn holds(&self, val: impl Fn(&Atom) -> bool) -> bool {
        val(&self.atom) == self.positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiState {
    /// Conjunction of literals the current letter must satisfy.
    pub label: Vec<Literal>,
    pub accepting: bool,
}

/// A state-labeled Büchi automaton. A run reads letter `i` in state `q_i`
/// and is accepted when it visits accepting states infinitely often.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Buchi {
    pub states: Vec<BuchiState>,
    pub initial: Vec<usize>,
    pub successors: Vec<Vec<usize>>,
}

impl Buchi {
    pub fn label_holds(&self, q: usize, val: impl Fn(&Atom) -> bool) -> bool {
        self.states[q].label.iter().all(|l| l.holds(&val))
    }

    /// Whether the automaton accepts `prefix · cycle^ω`.
    pub fn accepts_lasso(&self, word: &LassoWord) -> bool {
        let n = word.len();
        let letters: Vec<&Valuation> = word.prefix.iter().chain(&word.cycle).collect();
        let succ = |i: usize| if i + 1 < n { i + 1 } else { word.prefix.len() };
        // fits[q * n + i]: state q may read letter i
        let fits: Vec<bool> = (0..self.states.len())
            .flat_map(|q| {
                letters
                    .iter()
                    .map(move |l| self.label_holds(q, |a| l.contains(a)))
            })
            .collect();
        let next = |node: usize| {
            let (q, i) = (node / n, node % n);
            let j = succ(i);
            self.successors[q]
                .iter()
                .map(move |&r| r * n + j)
                .filter(|&m| fits[m])
        };

        let mut seen = vec![false; self.states.len() * n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &q in &self.initial {
            if fits[q * n] && !seen[q * n] {
                seen[q * n] = true;
                queue.push_back(q * n);
            }
        }
        while let Some(node) = queue.pop_front() {
            for m in next(node) {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        (0..seen.len())
            .filter(|&v| seen[v] && self.states[v / n].accepting)
            .any(|seed| {
                let mut inner = vec![false; seen.len()];
                let mut queue: VecDeque<usize> = next(seed).collect();
                while let Some(node) = queue.pop_front() {
                    if node == seed {
                        return true;
                    }
                    if !inner[node] {
                        inner[node] = true;
                        queue.extend(next(node));
                    }
                }
                false
            })
    }
}

const INIT: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<LtlFormula>,
    old: BTreeSet<LtlFormula>,
    next: BTreeSet<LtlFormula>,
}

impl Node {
    fn with(&self, add_new: &[&LtlFormula], add_next: Option<&LtlFormula>) -> Node {
        let mut n = self.clone();
        for f in add_new {
            if !n.old.contains(*f) {
                n.new.insert((*f).clone());
            }
        }
        n.next.extend(add_next.cloned());
        n
    }
}

fn complement(f: &LtlFormula) -> LtlFormula {
    match f {
        LtlFormula::Not(a) => (**a).clone(),
        other => other.clone().not(),
    }
}

/// Tableau expansion into a generalized Büchi automaton, one acceptance
/// set per `U` subformula. Nodes are stored in creation order.
fn tableau(f: &LtlFormula) -> Vec<Node> {
    let mut stored: Vec<Node> = Vec::new();
    let mut stack = vec![Node {
        incoming: [INIT].into(),
        new: [f.clone()].into(),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    while let Some(mut node) = stack.pop() {
        let Some(eta) = node.new.pop_first() else {
            if let Some(twin) = stored
                .iter_mut()
                .find(|s| s.old == node.old && s.next == node.next)
            {
                twin.incoming.extend(node.incoming);
                continue;
            }
            let id = stored.len();
            let succ = Node {
                incoming: [id].into(),
                new: node.next.clone(),
                old: BTreeSet::new(),
                next: BTreeSet::new(),
            };
            stored.push(node);
            stack.push(succ);
            continue;
        };
        if node.old.contains(&eta) {
            stack.push(node);
            continue;
        }
        match &eta {
            LtlFormula::True => stack.push(node),
            LtlFormula::False => {}
            LtlFormula::Atom(_) | LtlFormula::Not(_) => {
                if !node.old.contains(&complement(&eta)) {
                    node.old.insert(eta);
                    stack.push(node);
                }
            }
            LtlFormula::And(a, b) => {
                let mut n = node.with(&[a, b], None);
                n.old.insert(eta.clone());
                stack.push(n);
            }
            LtlFormula::Next(a) => {
                let mut n = node.with(&[], Some(a));
                n.old.insert(eta.clone());
                stack.push(n);
            }
            LtlFormula::Or(a, b) => {
                let mut left = node.with(&[a], None);
                let mut right = node.with(&[b], None);
                left.old.insert(eta.clone());
                right.old.insert(eta.clone());
                stack.push(right);
                stack.push(left);
            }
            LtlFormula::Until(a, b) => {
                let mut wait = node.with(&[a], Some(&eta));
                let mut done = node.with(&[b], None);
                wait.old.insert(eta.clone());
                done.old.insert(eta.clone());
                stack.push(done);
                stack.push(wait);
            }
            LtlFormula::Release(a, b) => {
                let mut wait = node.with(&[b], Some(&eta));
                let mut done = node.with(&[a, b], None);
                wait.old.insert(eta.clone());
                done.old.insert(eta.clone());
                stack.push(done);
                stack.push(wait);
            }
            LtlFormula::Implies(..) | LtlFormula::Eventually(_) | LtlFormula::Always(_) => {
                unreachable!("formula is in negation normal form")
            }
        }
    }
    stored
}

fn untils(f: &LtlFormula, out: &mut BTreeSet<LtlFormula>) {
    match f {
        LtlFormula::True | LtlFormula::False | LtlFormula::Atom(_) => {}
        LtlFormula::Not(a)
        | LtlFormula::Next(a)
        | LtlFormula::Eventually(a)
        | LtlFormula::Always(a) => untils(a, out),
        LtlFormula::Until(a, b) => {
            out.insert(f.clone());
            untils(a, out);
            untils(b, out);
        }
        LtlFormula::And(a, b)
        | LtlFormula::Or(a, b)
        | LtlFormula::Implies(a, b)
        | LtlFormula::Release(a, b) => {
            untils(a, out);
            untils(b, out);
        }
    }
}

/// Translates a formula into a Büchi automaton accepting exactly its
/// models. The formula is put in negation normal form first.
pub fn ltl_to_buchi(f: &LtlFormula) -> Buchi {
    let f = if f.is_nnf() { f.clone() } else { f.to_nnf() };
    let nodes = tableau(&f);
    let mut goals = BTreeSet::new();
    untils(&f, &mut goals);
    let fair: Vec<Vec<bool>> = goals
        .iter()
        .map(|u| {
            let LtlFormula::Until(_, rhs) = u else {
                unreachable!()
            };
            nodes
                .iter()
                .map(|n| !n.old.contains(u) || **rhs == LtlFormula::True || n.old.contains(&**rhs))
                .collect()
        })
        .collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (r, n) in nodes.iter().enumerate() {
        for &q in n.incoming.iter().filter(|&&q| q != INIT) {
            succ[q].push(r);
        }
    }
    let labels: Vec<Vec<Literal>> = nodes
        .iter()
        .map(|n| {
            n.old
                .iter()
                .filter_map(|g| match g {
                    LtlFormula::Atom(a) => Some(Literal {
                        atom: a.clone(),
                        positive: true,
                    }),
                    LtlFormula::Not(inner) => match &**inner {
                        LtlFormula::Atom(a) => Some(Literal {
                            atom: a.clone(),
                            positive: false,
                        }),
                        _ => None,
                    },
                    _ => None,
                })
                .collect()
        })
        .collect();
    let initial: Vec<usize> = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.incoming.contains(&INIT))
        .map(|(i, _)| i)
        .collect();

    // Counter degeneralization over the reachable part.
    let k = fair.len().max(1);
    let in_set = |q: usize, i: usize| fair.get(i).is_none_or(|set| set[q]);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    for &q in &initial {
        index.insert((q, 0), order.len());
        order.push((q, 0));
        queue.push_back((q, 0));
    }
    let mut successors: Vec<Vec<usize>> = Vec::new();
    while let Some((q, i)) = queue.pop_front() {
        let j = if in_set(q, i) { (i + 1) % k } else { i };
        let mut out = Vec::new();
        for &r in &succ[q] {
            let id = *index.entry((r, j)).or_insert_with(|| {
                order.push((r, j));
                queue.push_back((r, j));
                order.len() - 1
            });
            out.push(id);
        }
        successors.push(out);
    }
    let states = order
        .iter()
        .map(|&(q, i)| BuchiState {
            label: labels[q].clone(),
            accepting: i == 0 && in_set(q, 0),
        })
        .collect();
    Buchi {
        states,
        initial: (0..initial.len()).collect(),
        successors,
    }
}
