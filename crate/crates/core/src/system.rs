//! Closing a compiled skillset with layer models.
//!
//! Every skill offers a functional and a decision interface; each must be
//! implemented by exactly one attached model before the network describes
//! a closed system. Attached models may also drive a resource's autonomous
//! events, in which case that resource's other autonomous events are
//! removed.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::compile::{CompiledSkillset, SkillInterface};
use crate::layer::{
    abstract_decision, abstract_functional, expand, refined_goto, LayerBinding, LayerError,
    LayerKind, RefinedGotoParams, DEFAULT_EXPANSION_BOUND,
};
use crate::lts::{Event, Lts, LtsError, Network};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error("model {model}: unknown skill {skill}")]
    UnknownSkill { model: String, skill: String },
    #[error("model {model}: event {event} is not part of {scope}")]
    NonConforming {
        model: String,
        event: String,
        scope: String,
    },
    #[error("model {model}: internal event {event} collides with {other}")]
    InternalCollision {
        model: String,
        event: String,
        other: String,
    },
    #[error("{kind} interface of skill {skill} is implemented by both {first} and {second}")]
    DoublyCovered {
        kind: LayerKind,
        skill: String,
        first: String,
        second: String,
    },
    #[error("{kind} interface of skill {skill} is not implemented by any model")]
    Uncovered { kind: LayerKind, skill: String },
    #[error("builtin {spec}: {message}")]
    Builtin { spec: String, message: String },
}

/// A model ready to be attached: either a guarded model with its bindings
/// or an explicit LTS whose events already carry compiled names.
#[derive(Debug, Clone)]
pub enum Attachment {
    Model(LayerBinding),
    Explicit(Lts),
}

impl From<LayerBinding> for Attachment {
    fn from(b: LayerBinding) -> Self {
        Attachment::Model(b)
    }
}

impl From<Lts> for Attachment {
    fn from(l: Lts) -> Self {
        Attachment::Explicit(l)
    }
}

/// A stutter-closed network with the bookkeeping needed to compare it with
/// other closures.
#[derive(Debug, Clone)]
pub struct ClosedSystem {
    pub network: Network,
    /// Events private to attached models.
    pub internal_events: BTreeSet<Event>,
    /// Autonomous resource events dropped by coupling.
    pub removed_events: BTreeSet<Event>,
}

pub struct SystemBuilder<'c> {
    compiled: &'c CompiledSkillset,
    attachments: Vec<Attachment>,
    auto_abstract: bool,
    bound: usize,
}

struct Attached {
    lts: Lts,
    internal: BTreeSet<String>,
    covers: Vec<(LayerKind, String)>,
}

fn interface_events(skill: &SkillInterface, kind: LayerKind) -> impl Iterator<Item = &str> {
    let list = match kind {
        LayerKind::Functional => &skill.functional,
        LayerKind::Decision => &skill.decision,
    };
    list.iter().map(|e| e.event.as_str())
}

impl<'c> SystemBuilder<'c> {
    pub fn new(compiled: &'c CompiledSkillset) -> Self {
        SystemBuilder {
            compiled,
            attachments: Vec::new(),
            auto_abstract: false,
            bound: DEFAULT_EXPANSION_BOUND,
        }
    }

    pub fn attach(mut self, a: impl Into<Attachment>) -> Self {
        self.attachments.push(a.into());
        self
    }

    /// Fill uncovered interfaces with the most abstract models.
    pub fn auto_abstract(mut self, on: bool) -> Self {
        self.auto_abstract = on;
        self
    }

    /// Largest state space a single guarded model may expand to.
    pub fn expansion_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    fn autonomous_events(&self) -> BTreeSet<&'c str> {
        self.compiled
            .manifest
            .resources
            .iter()
            .flat_map(|r| r.autonomous.iter().map(String::as_str))
            .collect()
    }

    fn prepare_model(&self, b: &LayerBinding) -> Result<Attached, SystemError> {
        let model = &b.model;
        let manifest = &self.compiled.manifest;
        let autonomous = self.autonomous_events();
        let target = match &model.target {
            Some(t) => Some((
                t.kind,
                manifest
                    .skill(&t.skill)
                    .ok_or_else(|| SystemError::UnknownSkill {
                        model: model.name.clone(),
                        skill: t.skill.clone(),
                    })?,
            )),
            None => None,
        };
        let internal = model.internal_events();
        let mut rename: BTreeMap<String, String> = BTreeMap::new();
        for e in &model.edges {
            if internal.contains(&e.event) || rename.contains_key(&e.event) {
                continue;
            }
            let local = e.event.as_str();
            let candidate = b.aliases.get(local).map(String::as_str).unwrap_or(local);
            let mapped = match target {
                Some((kind, skill)) => {
                    let list = match kind {
                        LayerKind::Functional => &skill.functional,
                        LayerKind::Decision => &skill.decision,
                    };
                    list.iter()
                        .find(|i| i.local == candidate || i.event == candidate)
                        .map(|i| i.event.as_str())
                        .or_else(|| autonomous.contains(candidate).then_some(candidate))
                }
                None => manifest
                    .skills
                    .iter()
                    .flat_map(|s| {
                        interface_events(s, LayerKind::Functional)
                            .chain(interface_events(s, LayerKind::Decision))
                    })
                    .chain(autonomous.iter().copied())
                    .find(|ev| *ev == candidate),
            };
            let Some(mapped) = mapped else {
                let scope = match target {
                    Some((kind, skill)) => format!("the {kind} interface of skill {}", skill.name),
                    None => "the compiled manifest".to_string(),
                };
                return Err(SystemError::NonConforming {
                    model: model.name.clone(),
                    event: e.event.clone(),
                    scope,
                });
            };
            rename.insert(e.event.clone(), mapped.to_string());
        }
        let lts = expand(model, self.bound)?;
        let lts = lts.map_events(|e| match rename.get(e.name()) {
            Some(n) => Event::new(n),
            None => e.clone(),
        });
        let covers = match target {
            Some((kind, skill)) => vec![(kind, skill.name.clone())],
            None => self.covered_by(&lts),
        };
        Ok(Attached {
            lts,
            internal,
            covers,
        })
    }

    fn prepare_explicit(&self, lts: &Lts) -> Result<Attached, SystemError> {
        let manifest = &self.compiled.manifest;
        let autonomous = self.autonomous_events();
        for e in lts.alphabet() {
            let known = autonomous.contains(e.name())
                || manifest.skills.iter().any(|s| {
                    interface_events(s, LayerKind::Functional)
                        .chain(interface_events(s, LayerKind::Decision))
                        .any(|x| x == e.name())
                });
            if !known {
                return Err(SystemError::NonConforming {
                    model: lts.name().to_string(),
                    event: e.to_string(),
                    scope: "the compiled manifest".to_string(),
                });
            }
        }
        Ok(Attached {
            lts: lts.clone(),
            internal: BTreeSet::new(),
            covers: self.covered_by(lts),
        })
    }

    /// Interfaces an untargeted model takes part in.
    fn covered_by(&self, lts: &Lts) -> Vec<(LayerKind, String)> {
        let mut out = Vec::new();
        for s in &self.compiled.manifest.skills {
            for kind in [LayerKind::Functional, LayerKind::Decision] {
                if interface_events(s, kind).any(|e| lts.alphabet().contains(&Event::new(e))) {
                    out.push((kind, s.name.clone()));
                }
            }
        }
        out
    }

    pub fn build(self) -> Result<ClosedSystem, SystemError> {
        let mut attached = Vec::new();
        for a in &self.attachments {
            attached.push(match a {
                Attachment::Model(b) => self.prepare_model(b)?,
                Attachment::Explicit(l) => self.prepare_explicit(l)?,
            });
        }

        let compiled_events: BTreeSet<&Event> = self
            .compiled
            .components
            .iter()
            .flat_map(|c| c.alphabet())
            .collect();
        for (i, a) in attached.iter().enumerate() {
            for ev in &a.internal {
                let ev_key = Event::new(ev);
                let other = if compiled_events.contains(&ev_key) {
                    Some("a compiled event".to_string())
                } else {
                    attached
                        .iter()
                        .enumerate()
                        .find(|(j, b)| *j != i && b.lts.alphabet().contains(&ev_key))
                        .map(|(_, b)| format!("an event of model {}", b.lts.name()))
                };
                if let Some(other) = other {
                    return Err(SystemError::InternalCollision {
                        model: a.lts.name().to_string(),
                        event: ev.clone(),
                        other,
                    });
                }
            }
        }

        let mut owner: BTreeMap<(LayerKind, String), String> = BTreeMap::new();
        for a in &attached {
            for key in &a.covers {
                if let Some(first) = owner.insert(key.clone(), a.lts.name().to_string()) {
                    return Err(SystemError::DoublyCovered {
                        kind: key.0,
                        skill: key.1.clone(),
                        first,
                        second: a.lts.name().to_string(),
                    });
                }
            }
        }
        let skills = &self.compiled.manifest.skills;
        let uncovered = |kind: LayerKind| {
            skills
                .iter()
                .filter(|s| !owner.contains_key(&(kind, s.name.clone())))
                .collect::<Vec<_>>()
        };
        let missing_functional = uncovered(LayerKind::Functional);
        let missing_decision = uncovered(LayerKind::Decision);
        let mut extra = Vec::new();
        if self.auto_abstract {
            extra.extend(missing_functional.iter().map(|s| abstract_functional(s)));
            if !missing_decision.is_empty() || skills.is_empty() {
                extra.push(abstract_decision(missing_decision.iter().copied()));
            }
        } else if let Some((kind, s)) = missing_functional
            .first()
            .map(|s| (LayerKind::Functional, s))
            .or_else(|| missing_decision.first().map(|s| (LayerKind::Decision, s)))
        {
            return Err(SystemError::Uncovered {
                kind,
                skill: s.name.clone(),
            });
        }

        let models: Vec<&Lts> = attached.iter().map(|a| &a.lts).chain(&extra).collect();
        let mut removed = BTreeSet::new();
        for r in &self.compiled.manifest.resources {
            let driven = r
                .autonomous
                .iter()
                .any(|e| models.iter().any(|m| m.alphabet().contains(&Event::new(e))));
            if driven {
                removed.extend(
                    r.autonomous
                        .iter()
                        .map(|e| Event::new(e))
                        .filter(|e| !models.iter().any(|m| m.alphabet().contains(e))),
                );
            }
        }

        let mut components: Vec<Lts> = self
            .compiled
            .components
            .iter()
            .map(|c| c.without_events(&removed))
            .collect();
        components.extend(models.into_iter().cloned());
        let network = Network::new(components)?.stutter_close();
        let internal_events = attached
            .iter()
            .flat_map(|a| a.internal.iter().map(|e| Event::new(e)))
            .collect();
        Ok(ClosedSystem {
            network,
            internal_events,
            removed_events: removed,
        })
    }
}

/// Resolves a `--builtin` selector: `refined-goto[:Bmax=N,Dmax=N,skill=S]`,
/// `abstract-functional:SKILL` or `abstract-decision`.
pub fn builtin_attachment(
    spec: &str,
    compiled: &CompiledSkillset,
) -> Result<Attachment, SystemError> {
    let fail = |message: String| SystemError::Builtin {
        spec: spec.to_string(),
        message,
    };
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let manifest = &compiled.manifest;
    let skill = |name: &str| {
        manifest
            .skill(name)
            .ok_or_else(|| fail(format!("unknown skill {name}")))
    };
    match name {
        "refined-goto" => {
            let mut params = RefinedGotoParams::default();
            let mut target = "goto";
            for kv in args.split(',').filter(|s| !s.is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| fail(format!("expected KEY=VALUE, got {kv}")))?;
                let number = || {
                    v.trim()
                        .parse::<i64>()
                        .map_err(|_| fail(format!("{k} needs an integer, got {v}")))
                };
                match k.trim() {
                    "Bmax" => params.battery_max = number()?,
                    "Dmax" => params.distance_max = number()?,
                    "skill" => target = v.trim(),
                    other => return Err(fail(format!("unknown parameter {other}"))),
                }
            }
            Ok(refined_goto(skill(target)?, params)?.into())
        }
        "abstract-functional" => Ok(abstract_functional(skill(args)?).into()),
        "abstract-decision" if args.is_empty() => {
            Ok(abstract_decision(manifest.skills.iter()).into())
        }
        "abstract-decision" => {
            let list = args
                .split(',')
                .map(|s| skill(s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(abstract_decision(list).into())
        }
        other => Err(fail(format!(
            "unknown builtin {other}; expected refined-goto, abstract-functional or abstract-decision"
        ))),
    }
}
