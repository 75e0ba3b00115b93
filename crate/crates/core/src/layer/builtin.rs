use crate::compile::{InterfaceEvent, SkillInterface};
use crate::lts::Lts;

use super::ast::*;
use super::LayerError;

/// Battery's autonomous Normal → Critical change, which the refined goto
/// model drives once its charge falls below one step's worth.
pub const BATTERY_COUPLING: &str = "auto_battery_Normal_Critical";

/// Local name of the coupling edge in the refined goto model.
pub const BATTERY_SYNC: &str = "battery_critical_sync";

/// Battery units consumed per meter travelled.
const UNITS_PER_STEP: i64 = 2;

fn self_loops(name: &str, state: &str, events: &[&InterfaceEvent]) -> Lts {
    let mut b = Lts::builder(name);
    b.initial(state);
    for e in events {
        b.transition(state, &e.event, state);
    }
    b.build().expect("single-state model")
}

/// The most abstract functional layer for one skill: any interface event,
/// at any time.
pub fn abstract_functional(skill: &SkillInterface) -> Lts {
    let events: Vec<&InterfaceEvent> = skill.functional.iter().collect();
    self_loops(&format!("F_{}", skill.name), "f0", &events)
}

/// The most abstract decision layer: requests and interrupts of the given
/// skills, at any time.
pub fn abstract_decision<'a>(skills: impl IntoIterator<Item = &'a SkillInterface>) -> Lts {
    let events: Vec<&InterfaceEvent> = skills.into_iter().flat_map(|s| &s.decision).collect();
    self_loops("decision", "d0", &events)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefinedGotoParams {
    /// Largest battery level; the actual level is chosen at start-up.
    pub battery_max: i64,
    /// Largest requested distance, in meters.
    pub distance_max: i64,
}

impl Default for RefinedGotoParams {
    fn default() -> Self {
        RefinedGotoParams {
            battery_max: 6,
            distance_max: 2,
        }
    }
}

/// Functional-layer model of a moving skill with a distance `d` and a
/// battery level `blevel`.
///
/// Locations: `idle` → `validated` → `started` → `moving` → `idle`. The
/// battery level is picked once at start-up and never grows; every request
/// picks a fresh distance in `[1, distance_max]`. Each `move` covers one
/// meter for two units. The run ends in success once `d` reaches 0, and in
/// failure when the charge left cannot cover another meter. An interruption
/// is acknowledged only once the robot has moved. Whenever `blevel < 2`
/// the model lets the battery resource switch from Normal to Critical.
pub fn refined_goto(
    skill: &SkillInterface,
    params: RefinedGotoParams,
) -> Result<LayerBinding, LayerError> {
    let fail = |message: String| LayerError::Builtin {
        name: "refined-goto".into(),
        message,
    };
    if params.battery_max < UNITS_PER_STEP {
        return Err(fail(format!(
            "Bmax must be at least {UNITS_PER_STEP}, got {}",
            params.battery_max
        )));
    }
    if params.distance_max < 1 {
        return Err(fail(format!(
            "Dmax must be at least 1, got {}",
            params.distance_max
        )));
    }
    let locals: Vec<&str> = skill.functional.iter().map(|e| e.local.as_str()).collect();
    let successes: Vec<&str> = locals
        .iter()
        .copied()
        .filter(|l| l.starts_with("success_"))
        .collect();
    let failures: Vec<&str> = locals
        .iter()
        .copied()
        .filter(|l| l.starts_with("failure_"))
        .collect();
    if successes.is_empty() || failures.is_empty() {
        return Err(fail(format!(
            "skill {} needs at least one success and one failure case",
            skill.name
        )));
    }

    let can_step =
        VarGuard::cmp("d", RelOp::Ge, 1).and(VarGuard::cmp("blevel", RelOp::Ge, UNITS_PER_STEP));
    let exhausted = VarGuard::cmp("blevel", RelOp::Lt, UNITS_PER_STEP);
    let step = |from: &str| {
        Edge::new(from, "moving", "move")
            .internal()
            .when(can_step.clone())
            .set("d", AffineExpr::offset("d", -1))
            .set("blevel", AffineExpr::offset("blevel", -UNITS_PER_STEP))
    };

    let mut edges = Vec::new();
    for dist in 1..=params.distance_max {
        edges.push(
            Edge::new("idle", "validated", "validate_success")
                .when(VarGuard::cmp("blevel", RelOp::Ge, UNITS_PER_STEP))
                .set("d", AffineExpr::constant(dist)),
        );
    }
    edges.push(Edge::new("idle", "idle", "validate_failure").when(exhausted.clone()));
    edges.push(Edge::new("validated", "started", "start_hook"));
    edges.push(step("started"));
    edges.push(step("moving"));
    for s in &successes {
        edges.push(Edge::new("moving", "idle", s).when(VarGuard::cmp("d", RelOp::Eq, 0)));
    }
    for f in &failures {
        edges.push(
            Edge::new("moving", "idle", f)
                .when(VarGuard::cmp("d", RelOp::Ge, 1).and(exhausted.clone())),
        );
    }
    edges.push(Edge::new("moving", "idle", "interrupted"));
    let locations = ["idle", "validated", "started", "moving"];
    for loc in locations {
        edges.push(Edge::new(loc, loc, BATTERY_SYNC).when(exhausted.clone()));
    }

    let model = GuardedTs {
        name: format!("refined_{}", skill.name),
        target: Some(LayerTarget {
            kind: LayerKind::Functional,
            skill: skill.name.clone(),
        }),
        variables: vec![
            VarDecl::new("blevel", 0, params.battery_max, VarInit::Any),
            VarDecl::new("d", 0, params.distance_max, VarInit::Const(0)),
        ],
        locations: locations
            .iter()
            .map(|l| Location {
                name: l.to_string(),
                initial: *l == "idle",
            })
            .collect(),
        edges,
    };
    Ok(LayerBinding::new(model).alias(BATTERY_SYNC, BATTERY_COUPLING))
}
