//! Labeled transition systems and their synchronized composition.
//!
//! A [`Network`] runs its components in lock-step on shared events: an
//! event fires globally when every component whose alphabet contains it can
//! take it, and components that do not know the event stay put.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Reserved event that loops on deadlocked global states once a network is
/// stutter-closed.
pub const STUTTER: &str = "__stutter";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtsError {
    #[error("component {lts}: unknown state {state}")]
    UnknownState { lts: String, state: String },
    #[error("component {lts}: no initial state")]
    MissingInitial { lts: String },
    #[error("component {lts}: event {event} is used but not in the alphabet")]
    EventNotInAlphabet { lts: String, event: String },
    #[error("component {lts}: event name {event} is reserved")]
    ReservedEvent { lts: String, event: String },
    #[error("duplicate component name {0}")]
    DuplicateComponent(String),
    #[error("a network needs at least one component")]
    EmptyNetwork,
    #[error("global state has {found} entries, expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("local state {index} is out of range for component {component}")]
    LocalStateOutOfRange { component: String, index: u32 },
    #[error("unknown event {0}")]
    UnknownEvent(String),
    #[error("state space truncated: more than {0} states")]
    Truncated(usize),
}

/// An event name. Cloning is cheap; equality and order are by name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event(Arc<str>);

impl Event {
    pub fn new(name: &str) -> Self {
        Event(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_stutter(&self) -> bool {
        &*self.0 == STUTTER
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Event {
    fn from(s: &str) -> Self {
        Event::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: usize,
    pub event: Event,
    pub target: usize,
}

/// A finite labeled transition system. Transitions are kept sorted and
/// deduplicated; nondeterminism is allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    name: String,
    states: Vec<String>,
    initial: usize,
    alphabet: BTreeSet<Event>,
    transitions: Vec<Transition>,
}

impl Lts {
    pub fn new(
        name: &str,
        states: Vec<String>,
        initial: usize,
        alphabet: BTreeSet<Event>,
        transitions: Vec<Transition>,
    ) -> Result<Self, LtsError> {
        if initial >= states.len() {
            return Err(LtsError::MissingInitial { lts: name.into() });
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(LtsError::UnknownState {
                    lts: name.into(),
                    state: format!("{s} (declared twice)"),
                });
            }
        }
        for t in &transitions {
            if t.source >= states.len() || t.target >= states.len() {
                return Err(LtsError::UnknownState {
                    lts: name.into(),
                    state: format!("#{}", t.source.max(t.target)),
                });
            }
            if !alphabet.contains(&t.event) {
                return Err(LtsError::EventNotInAlphabet {
                    lts: name.into(),
                    event: t.event.to_string(),
                });
            }
        }
        let mut transitions = transitions;
        transitions.sort();
        transitions.dedup();
        Ok(Lts {
            name: name.to_string(),
            states,
            initial,
            alphabet,
            transitions,
        })
    }

    pub fn builder(name: &str) -> LtsBuilder {
        LtsBuilder {
            name: name.to_string(),
            states: Vec::new(),
            index: HashMap::new(),
            initial: None,
            alphabet: BTreeSet::new(),
            transitions: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn alphabet(&self) -> &BTreeSet<Event> {
        &self.alphabet
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn outgoing(&self, state: usize) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.source == state)
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Renames events; several old names may map onto one new name.
    pub fn map_events(&self, mut f: impl FnMut(&Event) -> Event) -> Lts {
        let mut map = HashMap::new();
        let mut rename = |e: &Event| map.entry(e.clone()).or_insert_with(|| f(e)).clone();
        let alphabet = self.alphabet.iter().map(&mut rename).collect();
        let mut transitions: Vec<Transition> = self
            .transitions
            .iter()
            .map(|t| Transition {
                source: t.source,
                event: rename(&t.event),
                target: t.target,
            })
            .collect();
        transitions.sort();
        transitions.dedup();
        Lts {
            name: self.name.clone(),
            states: self.states.clone(),
            initial: self.initial,
            alphabet,
            transitions,
        }
    }

    /// Drops the given events from the alphabet together with their
    /// transitions.
    pub fn without_events(&self, drop: &BTreeSet<Event>) -> Lts {
        Lts {
            name: self.name.clone(),
            states: self.states.clone(),
            initial: self.initial,
            alphabet: self.alphabet.difference(drop).cloned().collect(),
            transitions: self
                .transitions
                .iter()
                .filter(|t| !drop.contains(&t.event))
                .cloned()
                .collect(),
        }
    }
}

pub struct LtsBuilder {
    name: String,
    states: Vec<String>,
    index: HashMap<String, usize>,
    initial: Option<usize>,
    alphabet: BTreeSet<Event>,
    transitions: Vec<Transition>,
}

impl LtsBuilder {
    /// Adds a state if it is new; returns its index either way.
    pub fn state(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.states.len();
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        let i = self.state(name);
        self.initial = Some(i);
        self
    }

    pub fn event(&mut self, name: &str) -> &mut Self {
        self.alphabet.insert(Event::new(name));
        self
    }

    pub fn transition(&mut self, source: &str, event: &str, target: &str) -> &mut Self {
        let source = self.state(source);
        let target = self.state(target);
        let event = Event::new(event);
        self.alphabet.insert(event.clone());
        self.transitions.push(Transition {
            source,
            event,
            target,
        });
        self
    }

    pub fn build(&self) -> Result<Lts, LtsError> {
        let initial = self.initial.ok_or_else(|| LtsError::MissingInitial {
            lts: self.name.clone(),
        })?;
        Lts::new(
            &self.name,
            self.states.clone(),
            initial,
            self.alphabet.clone(),
            self.transitions.clone(),
        )
    }
}

/// One local state per component, in component order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(Vec<u32>);

impl GlobalState {
    pub fn new(locals: Vec<u32>) -> Self {
        GlobalState(locals)
    }

    pub fn locals(&self) -> &[u32] {
        &self.0
    }

    pub fn local(&self, component: usize) -> u32 {
        self.0[component]
    }
}

/// Exploration statistics, as reported by `explore`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReachStats {
    pub states: usize,
    pub transitions: usize,
    pub deadlocks: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone)]
struct EventTable {
    /// Components that have the event in their alphabet, ascending.
    participants: Vec<usize>,
    /// `moves[slot][local]` lists targets of participant `slot` from `local`.
    moves: Vec<Vec<Vec<u32>>>,
}

/// A set of components composed by multi-way rendezvous on shared events.
#[derive(Debug, Clone)]
pub struct Network {
    components: Vec<Lts>,
    events: Vec<Event>,
    tables: Vec<EventTable>,
    stutter: Option<Event>,
}

impl Network {
    pub fn new(components: Vec<Lts>) -> Result<Self, LtsError> {
        if components.is_empty() {
            return Err(LtsError::EmptyNetwork);
        }
        let mut names = BTreeSet::new();
        for c in &components {
            if !names.insert(c.name()) {
                return Err(LtsError::DuplicateComponent(c.name().to_string()));
            }
            if let Some(e) = c.alphabet().iter().find(|e| e.is_stutter()) {
                return Err(LtsError::ReservedEvent {
                    lts: c.name().to_string(),
                    event: e.to_string(),
                });
            }
        }
        let events: Vec<Event> = components
            .iter()
            .flat_map(|c| c.alphabet().iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let tables = events
            .iter()
            .map(|e| {
                let participants: Vec<usize> = components
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.alphabet().contains(e))
                    .map(|(i, _)| i)
                    .collect();
                let moves = participants
                    .iter()
                    .map(|&i| {
                        let c = &components[i];
                        let mut per_state = vec![Vec::new(); c.states().len()];
                        for t in c.transitions().iter().filter(|t| &t.event == e) {
                            per_state[t.source].push(t.target as u32);
                        }
                        per_state
                    })
                    .collect();
                EventTable {
                    participants,
                    moves,
                }
            })
            .collect();
        Ok(Network {
            components,
            events,
            tables,
            stutter: None,
        })
    }

    pub fn components(&self) -> &[Lts] {
        &self.components
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name() == name)
    }

    /// The global alphabet, sorted. Includes the stutter event once closed.
    pub fn events(&self) -> Vec<Event> {
        let mut all = self.events.clone();
        all.extend(self.stutter.clone());
        all
    }

    pub fn event(&self, id: usize) -> &Event {
        self.events
            .get(id)
            .or(self.stutter.as_ref())
            .expect("event id out of range")
    }

    pub fn event_id(&self, name: &str) -> Option<usize> {
        if let Ok(i) = self.events.binary_search_by(|e| e.name().cmp(name)) {
            return Some(i);
        }
        match &self.stutter {
            Some(s) if s.name() == name => Some(self.events.len()),
            _ => None,
        }
    }

    pub fn is_stutter_closed(&self) -> bool {
        self.stutter.is_some()
    }

    pub fn initial_state(&self) -> GlobalState {
        GlobalState(self.components.iter().map(|c| c.initial() as u32).collect())
    }

    pub fn check_state(&self, g: &GlobalState) -> Result<(), LtsError> {
        if g.0.len() != self.components.len() {
            return Err(LtsError::Arity {
                expected: self.components.len(),
                found: g.0.len(),
            });
        }
        for (c, &q) in self.components.iter().zip(&g.0) {
            if q as usize >= c.states().len() {
                return Err(LtsError::LocalStateOutOfRange {
                    component: c.name().to_string(),
                    index: q,
                });
            }
        }
        Ok(())
    }

    /// Local state names of `g`, paired with component names.
    pub fn describe<'a>(&'a self, g: &GlobalState) -> Vec<(&'a str, &'a str)> {
        self.components
            .iter()
            .zip(&g.0)
            .map(|(c, &q)| (c.name(), c.states()[q as usize].as_str()))
            .collect()
    }

    pub fn state_label(&self, g: &GlobalState) -> String {
        let parts: Vec<&str> = self.describe(g).into_iter().map(|(_, s)| s).collect();
        format!("({})", parts.join(","))
    }

    fn event_successors(&self, id: usize, g: &GlobalState, out: &mut Vec<GlobalState>) {
        let table = &self.tables[id];
        let mut options: Vec<&[u32]> = Vec::with_capacity(table.participants.len());
        for (slot, &comp) in table.participants.iter().enumerate() {
            let targets = &table.moves[slot][g.0[comp] as usize];
            if targets.is_empty() {
                return;
            }
            options.push(targets);
        }
        // Odometer over the participants' choices, last participant fastest.
        let mut choice = vec![0usize; options.len()];
        loop {
            let mut next = g.0.clone();
            for (slot, &comp) in table.participants.iter().enumerate() {
                next[comp] = options[slot][choice[slot]];
            }
            out.push(GlobalState(next));
            let mut k = options.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }

    /// All global steps from `g` in the fixed exploration order: events by
    /// name, then component choices. The stutter loop appears only on
    /// deadlocks of a closed network.
    pub fn steps(&self, g: &GlobalState) -> Vec<(usize, GlobalState)> {
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for id in 0..self.events.len() {
            buf.clear();
            self.event_successors(id, g, &mut buf);
            out.extend(buf.drain(..).map(|s| (id, s)));
        }
        if out.is_empty() && self.stutter.is_some() {
            out.push((self.events.len(), g.clone()));
        }
        out
    }

    fn has_step(&self, g: &GlobalState) -> bool {
        let mut buf = Vec::new();
        (0..self.events.len()).any(|id| {
            self.event_successors(id, g, &mut buf);
            !buf.is_empty()
        })
    }

    /// Global successors of `g` under event `a`, sorted.
    pub fn successors(&self, g: &GlobalState, a: &Event) -> Result<Vec<GlobalState>, LtsError> {
        self.check_state(g)?;
        let id = self
            .event_id(a.name())
            .ok_or_else(|| LtsError::UnknownEvent(a.to_string()))?;
        let mut out = Vec::new();
        if id == self.events.len() {
            if !self.has_step(g) {
                out.push(g.clone());
            }
        } else {
            self.event_successors(id, g, &mut out);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn enabled_events(&self, g: &GlobalState) -> Result<Vec<Event>, LtsError> {
        self.check_state(g)?;
        let mut ids: Vec<usize> = self.steps(g).into_iter().map(|(id, _)| id).collect();
        ids.dedup();
        Ok(ids.into_iter().map(|id| self.event(id).clone()).collect())
    }

    /// Same components, with a `__stutter` self-loop on every deadlocked
    /// global state. The loop is generated during exploration.
    pub fn stutter_close(&self) -> Network {
        let mut closed = self.clone();
        closed.stutter = Some(Event::new(STUTTER));
        closed
    }

    /// Breadth-first exploration from the initial state. Transition and
    /// deadlock counts ignore stutter loops. Exploration stops as soon as a
    /// new state would exceed `max_states`.
    pub fn reachable(&self, max_states: usize) -> ReachStats {
        let max_states = max_states.max(1);
        let mut stats = ReachStats {
            states: 1,
            transitions: 0,
            deadlocks: 0,
            truncated: false,
        };
        let init = self.initial_state();
        let mut seen = std::collections::HashSet::new();
        seen.insert(init.clone());
        let mut queue = VecDeque::from([init]);
        while let Some(g) = queue.pop_front() {
            let steps: Vec<_> = self
                .steps(&g)
                .into_iter()
                .filter(|(id, _)| *id < self.events.len())
                .collect();
            if steps.is_empty() {
                stats.deadlocks += 1;
            }
            for (_, next) in steps {
                stats.transitions += 1;
                if !seen.contains(&next) {
                    if seen.len() >= max_states {
                        stats.truncated = true;
                        return stats;
                    }
                    seen.insert(next.clone());
                    stats.states += 1;
                    queue.push_back(next);
                }
            }
        }
        stats
    }

    /// Reachable global states in breadth-first order.
    pub fn reachable_states(&self, max_states: usize) -> Result<Vec<GlobalState>, LtsError> {
        let init = self.initial_state();
        let mut index = HashMap::new();
        index.insert(init.clone(), 0usize);
        let mut order = vec![init];
        let mut head = 0;
        while head < order.len() {
            let g = order[head].clone();
            head += 1;
            for (_, next) in self.steps(&g) {
                if !index.contains_key(&next) {
                    if order.len() >= max_states {
                        return Err(LtsError::Truncated(max_states));
                    }
                    index.insert(next.clone(), order.len());
                    order.push(next);
                }
            }
        }
        Ok(order)
    }

    /// Materializes the reachable global transition relation as one LTS.
    /// State names are the tuples of local state names.
    pub fn product_explicit(&self, max_states: usize) -> Result<Lts, LtsError> {
        let order = self.reachable_states(max_states)?;
        let index: HashMap<&GlobalState, usize> =
            order.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut alphabet = BTreeSet::new();
        let mut transitions = Vec::new();
        for (i, g) in order.iter().enumerate() {
            for (id, next) in self.steps(g) {
                let event = self.event(id).clone();
                alphabet.insert(event.clone());
                transitions.push(Transition {
                    source: i,
                    event,
                    target: index[&next],
                });
            }
        }
        let states = order.iter().map(|g| self.state_label(g)).collect();
        let name = self
            .components
            .iter()
            .map(Lts::name)
            .collect::<Vec<_>>()
            .join("||");
        Lts::new(&name, states, 0, alphabet, transitions)
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: one node per state, edges labeled with event names,
/// the initial state marked by an arrow from a point node.
pub fn lts_to_dot(lts: &Lts) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(lts.name()));
    out.push_str("  rankdir=LR;\n");
    out.push_str("  __start [shape=point];\n");
    for (i, s) in lts.states().iter().enumerate() {
        let shape = if i == lts.initial() {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  s{i} [label=\"{}\", shape={shape}];", dot_escape(s));
    }
    let _ = writeln!(out, "  __start -> s{};", lts.initial());
    for t in lts.transitions() {
        let _ = writeln!(
            out,
            "  s{} -> s{} [label=\"{}\"];",
            t.source,
            t.target,
            dot_escape(t.event.name())
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toggler(name: &str, ev: &str) -> Lts {
        Lts::builder(name)
            .initial("a")
            .transition("a", ev, "b")
            .transition("b", ev, "a")
            .build()
            .unwrap()
    }

    #[test]
    fn single_deadlocked_state() {
        let lts = Lts::builder("x").initial("only").build().unwrap();
        let net = Network::new(vec![lts]).unwrap();
        assert_eq!(
            net.reachable(10),
            ReachStats {
                states: 1,
                transitions: 0,
                deadlocks: 1,
                truncated: false
            }
        );
        assert!(net.enabled_events(&net.initial_state()).unwrap().is_empty());

        let closed = net.stutter_close();
        let g = closed.initial_state();
        assert_eq!(
            closed.enabled_events(&g).unwrap(),
            vec![Event::new(STUTTER)]
        );
        assert_eq!(
            closed.successors(&g, &Event::new(STUTTER)).unwrap(),
            vec![g]
        );
    }

    #[test]
    fn independent_components_multiply() {
        let mut a = Lts::builder("a");
        a.initial("0");
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    a.transition(&i.to_string(), &format!("a{i}{j}"), &j.to_string());
                }
            }
        }
        let mut b = Lts::builder("b");
        b.initial("0");
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    b.transition(&i.to_string(), &format!("b{i}{j}"), &j.to_string());
                }
            }
        }
        let net = Network::new(vec![a.build().unwrap(), b.build().unwrap()]).unwrap();
        let stats = net.reachable(1000);
        assert_eq!(stats.states, 12);
        assert_eq!(stats.deadlocks, 0);
    }

    #[test]
    fn shared_event_blocks_when_one_side_cannot_move() {
        let left = toggler("left", "go");
        let right = Lts::builder("right")
            .initial("a")
            .transition("b", "go", "a")
            .build()
            .unwrap();
        let net = Network::new(vec![left, right]).unwrap();
        let g = net.initial_state();
        assert!(net.successors(&g, &Event::new("go")).unwrap().is_empty());
    }

    #[test]
    fn truncation() {
        let net = Network::new(vec![toggler("t", "flip")]).unwrap();
        assert!(net.reachable(1).truncated);
        assert!(!net.reachable(2).truncated);
        assert_eq!(net.product_explicit(1), Err(LtsError::Truncated(1)));
    }

    #[test]
    fn malformed_global_state() {
        let net = Network::new(vec![toggler("t", "flip")]).unwrap();
        let bad = GlobalState::new(vec![0, 0]);
        assert!(matches!(
            net.successors(&bad, &Event::new("flip")),
            Err(LtsError::Arity { .. })
        ));
        let bad = GlobalState::new(vec![7]);
        assert!(matches!(
            net.enabled_events(&bad),
            Err(LtsError::LocalStateOutOfRange { .. })
        ));
        assert!(matches!(
            net.successors(&net.initial_state(), &Event::new("nope")),
            Err(LtsError::UnknownEvent(_))
        ));
    }

    #[test]
    fn duplicate_components_and_reserved_events() {
        assert_eq!(
            Network::new(vec![toggler("t", "x"), toggler("t", "y")]).unwrap_err(),
            LtsError::DuplicateComponent("t".into())
        );
        assert!(matches!(
            Network::new(vec![toggler("t", STUTTER)]),
            Err(LtsError::ReservedEvent { .. })
        ));
        assert_eq!(Network::new(vec![]).unwrap_err(), LtsError::EmptyNetwork);
    }

    #[test]
    fn nondeterministic_rendezvous_enumerates_all_combinations() {
        let a = Lts::builder("a")
            .initial("0")
            .transition("0", "s", "1")
            .transition("0", "s", "2")
            .build()
            .unwrap();
        let b = Lts::builder("b")
            .initial("0")
            .transition("0", "s", "x")
            .transition("0", "s", "y")
            .build()
            .unwrap();
        let net = Network::new(vec![a, b]).unwrap();
        let succ = net
            .successors(&net.initial_state(), &Event::new("s"))
            .unwrap();
        assert_eq!(succ.len(), 4);
    }

    #[test]
    fn dot_marks_initial_state() {
        let dot = lts_to_dot(&toggler("t", "flip"));
        assert!(dot.starts_with("digraph \"t\" {"));
        assert!(dot.contains("__start -> s0;"));
        assert!(dot.contains("s0 -> s1 [label=\"flip\"];"));
    }
}
