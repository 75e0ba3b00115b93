//! Compilation of a skillset into transition systems.
//!
//! Every skill becomes a six-state lifecycle automaton and every resource a
//! state machine. Guards are realized by synchronization: an event that a
//! guard protects is added to each constrained resource with self-loops at
//! the states that satisfy it, so the rendezvous fires only when all of
//! them agree. Effects are transitions of the target resource on the event
//! that carries them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use serde::{Serialize, Serializer};

use crate::diag::Diagnostic;
use crate::lts::{lts_to_dot, Lts, LtsBuilder};
use crate::skill_lang::{
    validate_skillset, CmpOp, Effect, GuardExpr, ResourceDecl, SkillDecl, SkillsetAst,
};

/// Upper bound on the number of disjuncts a guard may expand to.
pub const MAX_DISJUNCTS: usize = 64;

pub const LIFECYCLE_STATES: [&str; 6] = [
    "Ready",
    "Checking",
    "Validating",
    "Starting",
    "Running",
    "Interrupting",
];

/// Which resources change state on their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Autonomy {
    /// Resources that some skill effect assigns are driven by those effects
    /// only; the others follow their `transition` clause freely.
    #[default]
    UnlessEffectTargeted,
    /// Every resource follows its `transition` clause freely.
    Always,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompileOptions {
    pub autonomy: Autonomy,
}

/// Allowed local states per resource; a conjunction. Resources absent from
/// the map are unconstrained.
pub type Cube = BTreeMap<usize, BTreeSet<usize>>;

/// An event guarded by a conjunction of resource constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedEvent {
    pub event: String,
    pub cube: Cube,
}

/// Event names generated for one skill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventScheme {
    pub skill: String,
    pub request: String,
    pub precond_success: Vec<GuardedEvent>,
    pub precond_failure: Vec<GuardedEvent>,
    pub validate_success: String,
    pub validate_failure: String,
    pub start_hook: String,
    pub success: Vec<(String, String)>,
    pub failure: Vec<(String, String)>,
    pub interrupt: String,
    pub interrupted: String,
    /// `(invariant, violation event)`
    pub inv_violations: Vec<(String, GuardedEvent)>,
}

/// An interface event with the short name layer models may use for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceEvent {
    pub local: String,
    pub event: String,
}

impl Serialize for InterfaceEvent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.event)
    }
}

impl EventScheme {
    fn new(skill: &str) -> Self {
        EventScheme {
            skill: skill.to_string(),
            request: format!("request_{skill}"),
            precond_success: Vec::new(),
            precond_failure: Vec::new(),
            validate_success: format!("validate_success_{skill}"),
            validate_failure: format!("validate_failure_{skill}"),
            start_hook: format!("start_hook_{skill}"),
            success: Vec::new(),
            failure: Vec::new(),
            interrupt: format!("interrupt_{skill}"),
            interrupted: format!("interrupted_{skill}"),
            inv_violations: Vec::new(),
        }
    }

    pub fn functional_interface(&self) -> Vec<InterfaceEvent> {
        let ev = |local: String, event: &String| InterfaceEvent {
            local,
            event: event.clone(),
        };
        let mut out = vec![
            ev("validate_success".into(), &self.validate_success),
            ev("validate_failure".into(), &self.validate_failure),
            ev("start_hook".into(), &self.start_hook),
        ];
        out.extend(
            self.success
                .iter()
                .map(|(c, e)| ev(format!("success_{c}"), e)),
        );
        out.extend(
            self.failure
                .iter()
                .map(|(c, e)| ev(format!("failure_{c}"), e)),
        );
        out.push(ev("interrupted".into(), &self.interrupted));
        out
    }

    pub fn decision_interface(&self) -> Vec<InterfaceEvent> {
        vec![
            InterfaceEvent {
                local: "request".into(),
                event: self.request.clone(),
            },
            InterfaceEvent {
                local: "interrupt".into(),
                event: self.interrupt.clone(),
            },
        ]
    }

    pub fn all_events(&self) -> Vec<&str> {
        let mut out = vec![self.request.as_str()];
        out.extend(self.precond_success.iter().map(|g| g.event.as_str()));
        out.extend(self.precond_failure.iter().map(|g| g.event.as_str()));
        out.extend([
            self.validate_success.as_str(),
            self.validate_failure.as_str(),
            self.start_hook.as_str(),
        ]);
        out.extend(self.success.iter().map(|(_, e)| e.as_str()));
        out.extend(self.failure.iter().map(|(_, e)| e.as_str()));
        out.extend([self.interrupt.as_str(), self.interrupted.as_str()]);
        out.extend(self.inv_violations.iter().map(|(_, g)| g.event.as_str()));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkillInterface {
    pub name: String,
    pub functional: Vec<InterfaceEvent>,
    pub decision: Vec<InterfaceEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceInterface {
    pub name: String,
    pub states: Vec<String>,
    pub autonomous: Vec<String>,
}

/// The synchronization interfaces a compiled skillset offers to layer
/// models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub skillset: String,
    pub skills: Vec<SkillInterface>,
    pub resources: Vec<ResourceInterface>,
}

impl Manifest {
    pub fn skill(&self, name: &str) -> Option<&SkillInterface> {
        self.skills.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Output of [`compile`]: one lifecycle automaton per skill followed by one
/// automaton per resource. The components form an open system until layer
/// models are attached.
#[derive(Debug, Clone)]
pub struct CompiledSkillset {
    pub components: Vec<Lts>,
    pub schemes: Vec<EventScheme>,
    pub manifest: Manifest,
}

impl CompiledSkillset {
    pub fn component(&self, name: &str) -> Option<&Lts> {
        self.components.iter().find(|c| c.name() == name)
    }
}

pub fn compile(ast: &SkillsetAst) -> Result<CompiledSkillset, Vec<Diagnostic>> {
    compile_with(ast, CompileOptions::default())
}

pub fn compile_with(
    ast: &SkillsetAst,
    options: CompileOptions,
) -> Result<CompiledSkillset, Vec<Diagnostic>> {
    let mut diags = validate_skillset(ast);
    if !diags.is_empty() {
        return Err(diags);
    }
    for skill in &ast.skills {
        if ast.resources.iter().any(|r| r.name.name == skill.name.name) {
            diags.push(Diagnostic::error(
                skill.name.span,
                format!("skill {} has the same name as a resource", skill.name),
            ));
        }
    }

    let mut schemes = Vec::new();
    for skill in &ast.skills {
        match event_scheme(ast, skill) {
            Ok(s) => schemes.push(s),
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let targeted: BTreeSet<&str> = ast
        .skills
        .iter()
        .flat_map(all_effects)
        .map(|e| e.resource.as_str())
        .collect();
    let autonomous: Vec<Vec<(usize, usize)>> = ast
        .resources
        .iter()
        .map(|r| match options.autonomy {
            Autonomy::UnlessEffectTargeted if targeted.contains(r.name.as_str()) => Vec::new(),
            _ => r.allowed_changes(),
        })
        .collect();

    let mut owner: HashMap<String, String> = HashMap::new();
    let mut claim = |event: &str, by: String, diags: &mut Vec<Diagnostic>| {
        if let Some(prev) = owner.insert(event.to_string(), by.clone()) {
            diags.push(Diagnostic::error(
                Default::default(),
                format!("event name {event} is generated by both {prev} and {by}"),
            ));
        }
    };
    for scheme in &schemes {
        for e in scheme.all_events() {
            claim(e, format!("skill {}", scheme.skill), &mut diags);
        }
    }
    for (res, pairs) in ast.resources.iter().zip(&autonomous) {
        for &(a, b) in pairs {
            claim(
                &auto_event(res, a, b),
                format!("resource {}", res.name),
                &mut diags,
            );
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut components = Vec::new();
    for (skill, scheme) in ast.skills.iter().zip(&schemes) {
        components.push(lifecycle_automaton(skill, scheme));
    }
    for (idx, pairs) in autonomous.iter().enumerate() {
        components.push(resource_automaton(ast, idx, pairs, &ast.skills, &schemes));
    }

    let manifest = Manifest {
        skillset: ast.name.name.clone(),
        skills: schemes
            .iter()
            .map(|s| SkillInterface {
                name: s.skill.clone(),
                functional: s.functional_interface(),
                decision: s.decision_interface(),
            })
            .collect(),
        resources: ast
            .resources
            .iter()
            .zip(&autonomous)
            .map(|(r, pairs)| ResourceInterface {
                name: r.name.name.clone(),
                states: r.states.iter().map(|s| s.name.clone()).collect(),
                autonomous: pairs.iter().map(|&(a, b)| auto_event(r, a, b)).collect(),
            })
            .collect(),
    };
    Ok(CompiledSkillset {
        components,
        schemes,
        manifest,
    })
}

pub fn auto_event(res: &ResourceDecl, from: usize, to: usize) -> String {
    format!("auto_{}_{}_{}", res.name, res.states[from], res.states[to])
}

fn all_effects(skill: &SkillDecl) -> impl Iterator<Item = &Effect> {
    skill
        .start_effects
        .iter()
        .chain(&skill.interrupt_effects)
        .chain(skill.success_cases.iter().flat_map(|c| &c.effects))
        .chain(skill.failure_cases.iter().flat_map(|c| &c.effects))
}

/// Disjunctive normal form of `guard` (or of its negation) as a list of
/// satisfiable cubes.
pub fn guard_dnf(
    ast: &SkillsetAst,
    guard: &GuardExpr,
    negate: bool,
) -> Result<Vec<Cube>, Diagnostic> {
    let too_big = || {
        let span = guard
            .atoms()
            .first()
            .map(|(r, _, _)| r.span)
            .unwrap_or_default();
        Diagnostic::error(
            span,
            format!("guard expands to more than {MAX_DISJUNCTS} disjuncts"),
        )
    };
    let cubes = match guard {
        GuardExpr::Atom {
            resource,
            op,
            state,
        } => {
            let ridx = ast
                .resources
                .iter()
                .position(|r| r.name.name == resource.name)
                .expect("validated guard");
            let res = &ast.resources[ridx];
            let sidx = res.state_index(state.as_str()).expect("validated guard");
            let positive = (*op == CmpOp::Eq) != negate;
            let allowed: BTreeSet<usize> = (0..res.states.len())
                .filter(|&s| (s == sidx) == positive)
                .collect();
            let mut cube = Cube::new();
            if allowed.len() < res.states.len() {
                if allowed.is_empty() {
                    return Ok(Vec::new());
                }
                cube.insert(ridx, allowed);
            }
            vec![cube]
        }
        GuardExpr::Not(inner) => guard_dnf(ast, inner, !negate)?,
        GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
            let conjunctive = matches!(guard, GuardExpr::And(..)) != negate;
            let left = guard_dnf(ast, a, negate)?;
            let right = guard_dnf(ast, b, negate)?;
            if conjunctive {
                if left.len() * right.len() > MAX_DISJUNCTS {
                    return Err(too_big());
                }
                let mut out = Vec::new();
                for l in &left {
                    for r in &right {
                        if let Some(c) = intersect(l, r) {
                            out.push(c);
                        }
                    }
                }
                out
            } else {
                left.into_iter().chain(right).collect()
            }
        }
    };
    let mut unique: Vec<Cube> = Vec::new();
    for c in cubes {
        if !unique.contains(&c) {
            unique.push(c);
        }
    }
    if unique.len() > MAX_DISJUNCTS {
        return Err(too_big());
    }
    Ok(unique)
}

fn intersect(a: &Cube, b: &Cube) -> Option<Cube> {
    let mut out = a.clone();
    for (r, states) in b {
        match out.get_mut(r) {
            Some(existing) => {
                existing.retain(|s| states.contains(s));
                if existing.is_empty() {
                    return None;
                }
            }
            None => {
                out.insert(*r, states.clone());
            }
        }
    }
    Some(out)
}

/// Names the events realizing a list of cubes. With `numbered`, events are
/// `prefix_1`, `prefix_2`, … (a single cube keeps the bare prefix);
/// otherwise each event is suffixed by the names of the resources its cube
/// constrains.
fn name_cubes(
    ast: &SkillsetAst,
    prefix: &str,
    cubes: Vec<Cube>,
    numbered: bool,
) -> Vec<GuardedEvent> {
    let mut names: Vec<String> = if numbered {
        if cubes.len() == 1 {
            vec![prefix.to_string()]
        } else {
            (1..=cubes.len()).map(|k| format!("{prefix}_{k}")).collect()
        }
    } else {
        cubes
            .iter()
            .map(|c| {
                let mut name = prefix.to_string();
                for r in c.keys() {
                    name.push('_');
                    name.push_str(ast.resources[*r].name.as_str());
                }
                name
            })
            .collect()
    };
    let mut counts: HashMap<String, usize> = HashMap::new();
    for n in &names {
        *counts.entry(n.clone()).or_default() += 1;
    }
    let mut seen: HashMap<String, usize> = HashMap::new();
    for n in names.iter_mut() {
        if counts[n.as_str()] > 1 {
            let k = seen.entry(n.clone()).or_default();
            *k += 1;
            *n = format!("{n}_{k}");
        }
    }
    names
        .into_iter()
        .zip(cubes)
        .map(|(event, cube)| GuardedEvent { event, cube })
        .collect()
}

pub fn event_scheme(ast: &SkillsetAst, skill: &SkillDecl) -> Result<EventScheme, Diagnostic> {
    let name = skill.name.as_str();
    let mut scheme = EventScheme::new(name);
    let (success, failure) = match &skill.precondition {
        None => (vec![Cube::new()], Vec::new()),
        Some(pre) => (guard_dnf(ast, pre, false)?, guard_dnf(ast, pre, true)?),
    };
    scheme.precond_success = name_cubes(ast, &format!("precond_success_{name}"), success, true);
    scheme.precond_failure = name_cubes(ast, &format!("precond_failure_{name}"), failure, false);
    scheme.success = skill
        .success_cases
        .iter()
        .map(|c| (c.name.name.clone(), format!("success_{name}_{}", c.name)))
        .collect();
    scheme.failure = skill
        .failure_cases
        .iter()
        .map(|c| (c.name.name.clone(), format!("failure_{name}_{}", c.name)))
        .collect();
    for inv in &skill.invariants {
        let violations = guard_dnf(ast, &inv.guard, true)?;
        let prefix = format!("inv_violation_{name}_{}", inv.name);
        for ge in name_cubes(ast, &prefix, violations, false) {
            scheme.inv_violations.push((inv.name.name.clone(), ge));
        }
    }
    Ok(scheme)
}

/// The skill lifecycle: request, precondition check, functional-layer
/// validation, start, then termination by success, failure, interruption
/// or invariant violation.
pub fn lifecycle_automaton(skill: &SkillDecl, scheme: &EventScheme) -> Lts {
    let mut b = Lts::builder(skill.name.as_str());
    for s in LIFECYCLE_STATES {
        b.state(s);
    }
    b.initial("Ready");
    b.transition("Ready", &scheme.request, "Checking");
    for g in &scheme.precond_success {
        b.transition("Checking", &g.event, "Validating");
    }
    for g in &scheme.precond_failure {
        b.transition("Checking", &g.event, "Ready");
    }
    b.transition("Validating", &scheme.validate_success, "Starting");
    b.transition("Validating", &scheme.validate_failure, "Ready");
    b.transition("Starting", &scheme.start_hook, "Running");
    for (_, e) in scheme.success.iter().chain(&scheme.failure) {
        b.transition("Running", e, "Ready");
    }
    b.transition("Running", &scheme.interrupt, "Interrupting");
    b.transition("Interrupting", &scheme.interrupted, "Ready");
    for (_, g) in &scheme.inv_violations {
        b.transition("Running", &g.event, "Ready");
    }
    b.build().expect("lifecycle automaton is well formed")
}

#[derive(Default)]
struct Usage {
    sources: Option<BTreeSet<usize>>,
    target: Option<usize>,
}

/// A resource automaton: autonomous changes listed in `autonomous`, plus
/// one transition per (allowed source state, guard or effect event).
pub fn resource_automaton(
    ast: &SkillsetAst,
    idx: usize,
    autonomous: &[(usize, usize)],
    skills: &[SkillDecl],
    schemes: &[EventScheme],
) -> Lts {
    let res = &ast.resources[idx];
    let mut usage: BTreeMap<String, Usage> = BTreeMap::new();

    let constrain = |usage: &mut BTreeMap<String, Usage>, g: &GuardedEvent| {
        if let Some(states) = g.cube.get(&idx) {
            usage.entry(g.event.clone()).or_default().sources = Some(states.clone());
        }
    };
    let assign = |usage: &mut BTreeMap<String, Usage>, event: &str, effects: &[Effect]| {
        for e in effects.iter().filter(|e| e.resource.name == res.name.name) {
            usage.entry(event.to_string()).or_default().target = res.state_index(e.state.as_str());
        }
    };

    for (skill, scheme) in skills.iter().zip(schemes) {
        for g in scheme.precond_success.iter().chain(&scheme.precond_failure) {
            constrain(&mut usage, g);
        }
        assign(&mut usage, &scheme.start_hook, &skill.start_effects);
        for ((_, event), case) in scheme.success.iter().zip(&skill.success_cases) {
            assign(&mut usage, event, &case.effects);
        }
        for ((_, event), case) in scheme.failure.iter().zip(&skill.failure_cases) {
            assign(&mut usage, event, &case.effects);
        }
        assign(&mut usage, &scheme.interrupted, &skill.interrupt_effects);
        for (_, g) in &scheme.inv_violations {
            constrain(&mut usage, g);
            assign(&mut usage, &g.event, &skill.interrupt_effects);
        }
    }

    let mut b: LtsBuilder = Lts::builder(res.name.as_str());
    for s in &res.states {
        b.state(s.as_str());
    }
    b.initial(res.initial.as_str());
    let state = |i: usize| res.states[i].as_str();
    for &(from, to) in autonomous {
        b.transition(state(from), &auto_event(res, from, to), state(to));
    }
    for (event, u) in &usage {
        b.event(event);
        let sources: Vec<usize> = match &u.sources {
            Some(s) => s.iter().copied().collect(),
            None => (0..res.states.len()).collect(),
        };
        for p in sources {
            b.transition(state(p), event, state(u.target.unwrap_or(p)));
        }
    }
    b.build().expect("resource automaton is well formed")
}

/// One digraph per component, preceded by a comment legend of the
/// interface events.
pub fn export_dot(compiled: &CompiledSkillset) -> String {
    let mut out = String::new();
    for skill in &compiled.manifest.skills {
        let names = |v: &[InterfaceEvent]| {
            v.iter()
                .map(|e| e.event.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(
            out,
            "// {} functional: {}",
            skill.name,
            names(&skill.functional)
        );
        let _ = writeln!(
            out,
            "// {} decision: {}",
            skill.name,
            names(&skill.decision)
        );
    }
    for c in &compiled.components {
        out.push_str(&lts_to_dot(c));
    }
    out
}
