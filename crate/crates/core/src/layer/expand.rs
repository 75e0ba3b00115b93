use std::collections::{HashSet, VecDeque};

use crate::lts::Lts;

use super::ast::*;
use super::LayerError;

pub const DEFAULT_EXPANSION_BOUND: usize = 1_000_000;

/// Variable values in declaration order.
pub type Valuation = Vec<i64>;

const PRE_INITIAL: &str = "__init";

fn state_name(model: &GuardedTs, loc: usize, val: &[i64]) -> String {
    let loc = &model.locations[loc].name;
    if model.variables.is_empty() {
        return loc.clone();
    }
    let parts: Vec<String> = model
        .variables
        .iter()
        .zip(val)
        .map(|(v, x)| format!("{}={x}", v.name))
        .collect();
    format!("{loc}[{}]", parts.join(","))
}

fn var_index(model: &GuardedTs, name: &str) -> usize {
    model
        .variables
        .iter()
        .position(|v| v.name == name)
        .expect("checked model")
}

fn operand(model: &GuardedTs, op: &Operand, val: &[i64]) -> i64 {
    match op {
        Operand::Var(v) => val[var_index(model, v)],
        Operand::Const(c) => *c,
    }
}

fn holds(model: &GuardedTs, g: &VarGuard, val: &[i64]) -> bool {
    match g {
        VarGuard::Cmp(a, op, b) => op.holds(operand(model, a, val), operand(model, b, val)),
        VarGuard::Not(inner) => !holds(model, inner, val),
        VarGuard::And(a, b) => holds(model, a, val) && holds(model, b, val),
        VarGuard::Or(a, b) => holds(model, a, val) || holds(model, b, val),
    }
}

/// Applies the edge's updates simultaneously; `None` when a value would
/// leave its domain.
fn apply(model: &GuardedTs, edge: &Edge, val: &[i64]) -> Option<Valuation> {
    let mut next = val.to_vec();
    for u in &edge.updates {
        let mut x = u.expr.constant as i128;
        for (coef, var) in &u.expr.terms {
            x += *coef as i128 * val[var_index(model, var)] as i128;
        }
        let idx = var_index(model, &u.var);
        let decl = &model.variables[idx];
        if x < decl.lo as i128 || x > decl.hi as i128 {
            return None;
        }
        next[idx] = x as i64;
    }
    Some(next)
}

fn initial_valuations(model: &GuardedTs) -> Vec<Valuation> {
    let mut out: Vec<Valuation> = vec![Vec::new()];
    for v in &model.variables {
        let choices: Vec<i64> = match v.init {
            VarInit::Const(c) => vec![c],
            VarInit::Any => (v.lo..=v.hi).collect(),
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

/// Explicit semantics of a guarded model: the part reachable from the
/// initial location, with one state per (location, valuation). When some
/// variable starts as `any`, a pre-initial state `__init` branches to
/// every admissible start through the model's `auto_init_<name>` event.
pub fn expand(model: &GuardedTs, bound: usize) -> Result<Lts, LayerError> {
    if let Some(d) = model.check().into_iter().next() {
        return Err(LayerError::Invalid {
            model: model.name.clone(),
            message: d.message,
        });
    }
    let needed = model
        .variables
        .iter()
        .fold(model.locations.len() as u128, |acc, v| {
            acc.saturating_mul(v.domain_size())
        })
        + u128::from(model.needs_init_step());
    if needed > bound as u128 {
        return Err(LayerError::BoundExceeded {
            model: model.name.clone(),
            needed,
            bound,
        });
    }

    let init_loc = model.initial_location().expect("checked model");
    let mut b = Lts::builder(&model.name);
    for e in &model.edges {
        b.event(&e.event);
    }
    let starts = initial_valuations(model);
    if model.needs_init_step() {
        b.initial(PRE_INITIAL);
        let init_event = model.init_event();
        b.event(&init_event);
        for val in &starts {
            b.transition(PRE_INITIAL, &init_event, &state_name(model, init_loc, val));
        }
    } else {
        b.initial(&state_name(model, init_loc, &starts[0]));
    }

    let edges_from: Vec<Vec<&Edge>> = (0..model.locations.len())
        .map(|l| {
            model
                .edges
                .iter()
                .filter(|e| model.location_index(&e.source) == Some(l))
                .collect()
        })
        .collect();

    let mut seen: HashSet<(usize, Valuation)> = HashSet::new();
    let mut queue = VecDeque::new();
    for val in starts {
        if seen.insert((init_loc, val.clone())) {
            queue.push_back((init_loc, val));
        }
    }
    while let Some((loc, val)) = queue.pop_front() {
        let from = state_name(model, loc, &val);
        b.state(&from);
        for edge in &edges_from[loc] {
            if let Some(g) = &edge.guard {
                if !holds(model, g, &val) {
                    continue;
                }
            }
            let Some(next) = apply(model, edge, &val) else {
                continue;
            };
            let target = model.location_index(&edge.target).expect("checked model");
            b.transition(&from, &edge.event, &state_name(model, target, &next));
            if seen.insert((target, next.clone())) {
                queue.push_back((target, next));
            }
        }
    }
    Ok(b.build().expect("expansion is well formed"))
}
