use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::lts::{Event, GlobalState, Network};

use super::buchi::{ltl_to_buchi, Buchi};
use super::eval::{eval_word, LassoWord, Valuation};
use super::formula::{Atom, LtlFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Nested depth-first search on the fly.
    Ndfs,
    /// Strongly connected components of the explicit product.
    Scc,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("atom {0}: no component with that name")]
    UnknownComponent(Atom),
    #[error("atom {0}: the component has no such state")]
    UnknownState(Atom),
    #[error("the network must be stutter-closed before checking")]
    NotStutterClosed,
    #[error("product exceeds {0} states")]
    BoundExceeded(usize),
}

/// A global state and the event taken from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub state: GlobalState,
    pub event: Event,
}

/// A run `prefix · cycle^ω`. The last event of the prefix leads to the
/// first state of the cycle, and the last event of the cycle back to it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lasso {
    pub prefix: Vec<Step>,
    pub cycle: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Violated(Lasso),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Product states discovered.
    pub states_explored: usize,
    pub time_ms: u64,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn lasso(&self) -> Option<&Lasso> {
        match &self.outcome {
            Outcome::Holds => None,
            Outcome::Violated(l) => Some(l),
        }
    }

    /// The verdict as JSON. With `timing` off, `time_ms` is omitted and the
    /// output depends on the inputs only.
    pub fn to_json(&self, net: &Network, timing: bool) -> String {
        let steps = |s| steps_json(net, s);
        let json = VerdictJson {
            verdict: if self.holds() { "holds" } else { "violated" },
            states_explored: self.states_explored,
            time_ms: timing.then_some(self.time_ms),
            lasso: self.lasso().map(|l| LassoJson {
                prefix: steps(&l.prefix),
                cycle: steps(&l.cycle),
            }),
        };
        serde_json::to_string_pretty(&json).expect("verdict serializes")
    }
}

fn steps_json<'a>(net: &'a Network, steps: &'a [Step]) -> Vec<StepJson<'a>> {
    steps
        .iter()
        .map(|st| StepJson {
            event: st.event.name(),
            state: StateJson(net.describe(&st.state)),
        })
        .collect()
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    verdict: &'static str,
    states_explored: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lasso: Option<LassoJson<'a>>,
}

#[derive(Serialize)]
struct LassoJson<'a> {
    prefix: Vec<StepJson<'a>>,
    cycle: Vec<StepJson<'a>>,
}

#[derive(Serialize)]
struct StepJson<'a> {
    event: &'a str,
    state: StateJson<'a>,
}

/// Component → local state, in component order.
struct StateJson<'a>(Vec<(&'a str, &'a str)>);

impl Serialize for StateJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (c, q) in &self.0 {
            map.serialize_entry(c, q)?;
        }
        map.end()
    }
}

/// Atom positions in a network: component index and local state index.
fn resolve(net: &Network, f: &LtlFormula) -> Result<HashMap<Atom, (usize, u32)>, CheckError> {
    let mut out = HashMap::new();
    for a in f.atoms() {
        let c = net
            .component_index(&a.component)
            .ok_or_else(|| CheckError::UnknownComponent(a.clone()))?;
        let q = net.components()[c]
            .state_index(&a.state)
            .ok_or_else(|| CheckError::UnknownState(a.clone()))?;
        out.insert(a.clone(), (c, q as u32));
    }
    Ok(out)
}

/// The atoms of `f` that hold in `g`.
pub fn valuation(net: &Network, f: &LtlFormula, g: &GlobalState) -> Result<Valuation, CheckError> {
    let atoms = resolve(net, f)?;
    Ok(atoms
        .into_iter()
        .filter(|(_, (c, q))| g.local(*c) == *q)
        .map(|(a, _)| a)
        .collect())
}

type PState = (GlobalState, usize);

struct Product<'a> {
    net: &'a Network,
    buchi: Buchi,
    atoms: HashMap<Atom, (usize, u32)>,
}

impl Product<'_> {
    fn fits(&self, b: usize, g: &GlobalState) -> bool {
        self.buchi.label_holds(b, |a| {
            let (c, q) = self.atoms[a];
            g.local(c) == q
        })
    }

    fn initial(&self) -> Vec<PState> {
        let g = self.net.initial_state();
        self.buchi
            .initial
            .iter()
            .filter(|&&b| self.fits(b, &g))
            .map(|&b| (g.clone(), b))
            .collect()
    }

    /// Successors in the fixed order: network steps, then automaton moves.
    fn post(&self, (g, b): &PState) -> Vec<(usize, PState)> {
        let mut out = Vec::new();
        for (ev, h) in self.net.steps(g) {
            for &c in &self.buchi.successors[*b] {
                if self.fits(c, &h) {
                    out.push((ev, (h.clone(), c)));
                }
            }
        }
        out
    }

    fn accepting(&self, s: &PState) -> bool {
        self.buchi.states[s.1].accepting
    }
}

/// Interned product states.
struct Store {
    states: Vec<PState>,
    index: HashMap<PState, usize>,
    max: usize,
}

impl Store {
    fn new(max: usize) -> Self {
        Store {
            states: Vec::new(),
            index: HashMap::new(),
            max: max.max(1),
        }
    }

    fn intern(&mut self, s: PState) -> Result<usize, CheckError> {
        if let Some(&i) = self.index.get(&s) {
            return Ok(i);
        }
        if self.states.len() >= self.max {
            return Err(CheckError::BoundExceeded(self.max));
        }
        self.index.insert(s.clone(), self.states.len());
        self.states.push(s);
        Ok(self.states.len() - 1)
    }
}

/// Checks whether every run of `net` satisfies `f`.
pub fn model_check(
    net: &Network,
    f: &LtlFormula,
    engine: Engine,
    max_states: usize,
) -> Result<Verdict, CheckError> {
    let start = Instant::now();
    if !net.is_stutter_closed() {
        return Err(CheckError::NotStutterClosed);
    }
    let atoms = resolve(net, f)?;
    let product = Product {
        net,
        buchi: ltl_to_buchi(&f.negate()),
        atoms,
    };
    let mut store = Store::new(max_states);
    let found = match engine {
        Engine::Ndfs => ndfs(&product, &mut store)?,
        Engine::Scc => scc(&product, &mut store)?,
    };
    let outcome = match found {
        None => Outcome::Holds,
        Some((prefix, cycle)) => {
            let to_steps = |path: Vec<(usize, usize)>| {
                path.into_iter()
                    .map(|(s, ev)| Step {
                        state: store.states[s].0.clone(),
                        event: net.event(ev).clone(),
                    })
                    .collect()
            };
            Outcome::Violated(Lasso {
                prefix: to_steps(prefix),
                cycle: to_steps(cycle),
            })
        }
    };
    Ok(Verdict {
        outcome,
        states_explored: store.states.len(),
        time_ms: start.elapsed().as_millis() as u64,
    })
}

/// Product-level lasso: (state, event leaving it) pairs.
type RawLasso = (Vec<(usize, usize)>, Vec<(usize, usize)>);

struct Frame {
    state: usize,
    succs: Vec<(usize, usize)>,
    next: usize,
    /// Event that led here from the frame below.
    via: usize,
}

fn expand(p: &Product, store: &mut Store, s: usize) -> Result<Vec<(usize, usize)>, CheckError> {
    let from = store.states[s].clone();
    p.post(&from)
        .into_iter()
        .map(|(ev, t)| Ok((ev, store.intern(t)?)))
        .collect()
}

/// Nested depth-first search with cyan states: a cycle is reported as soon
/// as a search reaches a state still on the outer stack.
fn ndfs(p: &Product, store: &mut Store) -> Result<Option<RawLasso>, CheckError> {
    let mut cyan: Vec<bool> = Vec::new();
    let mut done: Vec<bool> = Vec::new();
    let mut red: Vec<bool> = Vec::new();
    let grow = |v: &mut Vec<bool>, n: usize| {
        if v.len() < n {
            v.resize(n, false);
        }
    };

    let roots = p.initial();
    for root in roots {
        let root = store.intern(root)?;
        grow(&mut done, store.states.len());
        if done[root] {
            continue;
        }
        let mut stack: Vec<Frame> = Vec::new();
        let succs = expand(p, store, root)?;
        grow(&mut cyan, store.states.len());
        cyan[root] = true;
        stack.push(Frame {
            state: root,
            succs,
            next: 0,
            via: usize::MAX,
        });
        while let Some(top) = stack.last_mut() {
            let s = top.state;
            if top.next < top.succs.len() {
                let (ev, t) = top.succs[top.next];
                top.next += 1;
                grow(&mut cyan, store.states.len());
                grow(&mut done, store.states.len());
                if cyan[t] && (p.accepting(&store.states[s]) || p.accepting(&store.states[t])) {
                    return Ok(Some(close_on_stack(&stack, t, vec![(s, ev)])));
                }
                if !cyan[t] && !done[t] {
                    let succs = expand(p, store, t)?;
                    grow(&mut cyan, store.states.len());
                    cyan[t] = true;
                    stack.push(Frame {
                        state: t,
                        succs,
                        next: 0,
                        via: ev,
                    });
                }
                continue;
            }
            if p.accepting(&store.states[s]) {
                if let Some((path, t)) = red_search(p, store, s, &cyan, &done, &mut red)? {
                    return Ok(Some(close_on_stack(&stack, t, path)));
                }
            }
            grow(&mut done, store.states.len());
            done[s] = true;
            cyan[s] = false;
            stack.pop();
        }
    }
    Ok(None)
}

/// Lasso whose cycle runs from `t` (on the stack) up to the top of the
/// stack and then along `tail` back to `t`.
fn close_on_stack(stack: &[Frame], t: usize, tail: Vec<(usize, usize)>) -> RawLasso {
    let k = stack
        .iter()
        .position(|f| f.state == t)
        .expect("target is on the stack");
    let leave = |i: usize| stack[i + 1].via;
    let prefix = (0..k).map(|i| (stack[i].state, leave(i))).collect();
    let mut cycle: Vec<(usize, usize)> = (k..stack.len() - 1)
        .map(|i| (stack[i].state, leave(i)))
        .collect();
    cycle.extend(tail);
    (prefix, cycle)
}

/// Inner search from an accepting `seed` for a state on the outer stack.
/// Product path as `(state, event)` steps, and the state it ends in.
type RedPath = (Vec<(usize, usize)>, usize);

/// Returns the path from the seed and the stack state it reaches.
fn red_search(
    p: &Product,
    store: &mut Store,
    seed: usize,
    cyan: &[bool],
    done: &[bool],
    red: &mut Vec<bool>,
) -> Result<Option<RedPath>, CheckError> {
    let mut stack = vec![Frame {
        state: seed,
        succs: expand(p, store, seed)?,
        next: 0,
        via: usize::MAX,
    }];
    while let Some(top) = stack.last_mut() {
        if top.next == top.succs.len() {
            stack.pop();
            continue;
        }
        let (ev, t) = top.succs[top.next];
        top.next += 1;
        if red.len() < store.states.len() {
            red.resize(store.states.len(), false);
        }
        if cyan.get(t).copied().unwrap_or(false) {
            let mut path: Vec<(usize, usize)> = Vec::new();
            for i in 0..stack.len() {
                let leave = if i + 1 < stack.len() {
                    stack[i + 1].via
                } else {
                    ev
                };
                path.push((stack[i].state, leave));
            }
            return Ok(Some((path, t)));
        }
        if done.get(t).copied().unwrap_or(false) && !red[t] {
            red[t] = true;
            let succs = expand(p, store, t)?;
            stack.push(Frame {
                state: t,
                succs,
                next: 0,
                via: ev,
            });
        }
    }
    Ok(None)
}

/// Tarjan's algorithm on the explicit product; any nontrivial component
/// with an accepting state yields a counterexample.
fn scc(p: &Product, store: &mut Store) -> Result<Option<RawLasso>, CheckError> {
    let mut edges: Vec<Vec<(usize, usize)>> = Vec::new();
    let roots: Vec<usize> = p
        .initial()
        .into_iter()
        .map(|s| store.intern(s))
        .collect::<Result<_, _>>()?;
    let mut head = 0;
    while head < store.states.len() {
        edges.push(expand(p, store, head)?);
        head += 1;
    }
    let n = store.states.len();

    let mut comp = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut num = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut ncomp = 0;
    for v0 in 0..n {
        if num[v0] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(v0, 0)];
        num[v0] = counter;
        low[v0] = counter;
        counter += 1;
        stack.push(v0);
        on_stack[v0] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < edges[v].len() {
                let w = edges[v][*i].1;
                *i += 1;
                if num[w] == usize::MAX {
                    num[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(num[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == num[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    let mut size = vec![0usize; ncomp];
    for &c in &comp {
        size[c] += 1;
    }
    let nontrivial = |v: usize| size[comp[v]] > 1 || edges[v].iter().any(|&(_, w)| w == v);
    let Some(seed) = (0..n).find(|&v| p.accepting(&store.states[v]) && nontrivial(v)) else {
        return Ok(None);
    };

    // Shortest path from a root to the seed, then back to the seed within
    // its component.
    let bfs = |from: &[usize], goal: usize, within: Option<usize>| -> Vec<(usize, usize)> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &r in from {
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
        let mut reached = from.contains(&goal) && within.is_none();
        while !reached {
            let Some(v) = queue.pop_front() else { break };
            for &(ev, w) in &edges[v] {
                if within.is_some_and(|c| comp[w] != c) {
                    continue;
                }
                if w == goal && (within.is_some() || !seen[w]) {
                    parent[w] = Some((v, ev));
                    reached = true;
                    break;
                }
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, ev));
                    queue.push_back(w);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = goal;
        while let Some((v, ev)) = parent[cur] {
            path.push((v, ev));
            parent[cur] = None;
            if from.contains(&v) && within.is_none() {
                break;
            }
            if within.is_some() && v == goal {
                break;
            }
            cur = v;
        }
        path.reverse();
        path
    };
    let prefix = bfs(&roots, seed, None);
    let cycle = bfs(&[seed], seed, Some(comp[seed]));
    Ok(Some((prefix, cycle)))
}

impl Lasso {
    /// Global states in run order, cycle unrolled once.
    pub fn states(&self) -> impl Iterator<Item = &GlobalState> {
        self.prefix.iter().chain(&self.cycle).map(|s| &s.state)
    }

    /// The atom valuations of `f` along the lasso.
    pub fn word(&self, net: &Network, f: &LtlFormula) -> Result<LassoWord, CheckError> {
        let val = |steps: &[Step]| -> Result<Vec<Valuation>, CheckError> {
            steps.iter().map(|s| valuation(net, f, &s.state)).collect()
        };
        Ok(LassoWord {
            prefix: val(&self.prefix)?,
            cycle: val(&self.cycle)?,
        })
    }

    /// Checks that the lasso is a run of `net` from its initial state and
    /// that it violates `f`.
    pub fn validate(&self, net: &Network, f: &LtlFormula) -> Result<(), String> {
        if self.cycle.is_empty() {
            return Err("empty cycle".into());
        }
        let first = &self.prefix.first().unwrap_or(&self.cycle[0]).state;
        if *first != net.initial_state() {
            return Err("lasso does not start in the initial state".into());
        }
        let all: Vec<&Step> = self.prefix.iter().chain(&self.cycle).collect();
        for (i, step) in all.iter().enumerate() {
            let next = all.get(i + 1).copied().unwrap_or(&self.cycle[0]);
            let succ = net
                .successors(&step.state, &step.event)
                .map_err(|e| e.to_string())?;
            if !succ.contains(&next.state) {
                return Err(format!(
                    "step {i}: {} does not lead from {} to {}",
                    step.event,
                    net.state_label(&step.state),
                    net.state_label(&next.state)
                ));
            }
        }
        let word = self.word(net, f).map_err(|e| e.to_string())?;
        if !eval_word(&f.clone().not(), &word) {
            return Err("the lasso satisfies the formula".into());
        }
        Ok(())
    }
}
