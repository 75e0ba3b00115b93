use std::collections::HashSet;

use crate::diag::Diagnostic;

use super::ast::*;

/// Checks every well-formedness rule of a skillset. Returns one error per
/// violation, and nothing else: an empty result means the AST is valid.
pub fn validate_skillset(ast: &SkillsetAst) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let mut seen = HashSet::new();
    for res in &ast.resources {
        if !seen.insert(res.name.as_str()) {
            diags.push(Diagnostic::error(
                res.name.span,
                format!("duplicate resource name {}", res.name),
            ));
        }
        check_resource(res, &mut diags);
    }

    let mut seen = HashSet::new();
    for skill in &ast.skills {
        if !seen.insert(skill.name.as_str()) {
            diags.push(Diagnostic::error(
                skill.name.span,
                format!("duplicate skill name {}", skill.name),
            ));
        }
        check_skill(ast, skill, &mut diags);
    }
    diags
}

/// Non-fatal observations about a valid skillset.
pub fn lint_skillset(ast: &SkillsetAst) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for skill in &ast.skills {
        if skill.precondition.is_none() {
            diags.push(Diagnostic::warning(
                skill.name.span,
                format!(
                    "skill {} has no precondition; treated as always true",
                    skill.name
                ),
            ));
        }
        if skill.start_effects.len() > 1 {
            diags.push(Diagnostic::warning(
                skill.name.span,
                format!("skill {} declares several start effects", skill.name),
            ));
        }
    }
    for res in &ast.resources {
        let used = ast
            .skills
            .iter()
            .any(|s| skill_mentions(s, res.name.as_str()));
        if !used {
            diags.push(Diagnostic::warning(
                res.name.span,
                format!("resource {} is not used by any skill", res.name),
            ));
        }
    }
    diags
}

fn skill_mentions(skill: &SkillDecl, resource: &str) -> bool {
    let in_guard = |g: &GuardExpr| g.atoms().iter().any(|(r, _, _)| r.as_str() == resource);
    let in_effects = |es: &[Effect]| es.iter().any(|e| e.resource.as_str() == resource);
    skill.precondition.as_ref().is_some_and(in_guard)
        || skill.invariants.iter().any(|i| in_guard(&i.guard))
        || in_effects(&skill.start_effects)
        || in_effects(&skill.interrupt_effects)
        || skill
            .success_cases
            .iter()
            .chain(&skill.failure_cases)
            .any(|c| in_effects(&c.effects))
}

fn check_resource(res: &ResourceDecl, diags: &mut Vec<Diagnostic>) {
    if res.states.is_empty() {
        diags.push(Diagnostic::error(
            res.name.span,
            format!("resource {} declares no states", res.name),
        ));
    }
    let mut seen = HashSet::new();
    for st in &res.states {
        if !seen.insert(st.as_str()) {
            diags.push(Diagnostic::error(
                st.span,
                format!("duplicate state name {} in resource {}", st, res.name),
            ));
        }
    }
    if res.state_index(res.initial.as_str()).is_none() {
        diags.push(Diagnostic::error(
            res.initial.span,
            format!(
                "initial state {} not declared in resource {}",
                res.initial, res.name
            ),
        ));
    }
    if let TransitionSpec::Explicit(pairs) = &res.transitions {
        for (from, to) in pairs {
            for st in [from, to] {
                if res.state_index(st.as_str()).is_none() {
                    diags.push(Diagnostic::error(
                        st.span,
                        format!("unknown state {} of resource {}", st, res.name),
                    ));
                }
            }
        }
    }
}

fn check_skill(ast: &SkillsetAst, skill: &SkillDecl, diags: &mut Vec<Diagnostic>) {
    if let Some(pre) = &skill.precondition {
        check_guard(ast, pre, diags);
    }
    check_effects(ast, &skill.start_effects, diags);
    check_effects(ast, &skill.interrupt_effects, diags);

    let mut seen = HashSet::new();
    for inv in &skill.invariants {
        if !seen.insert(inv.name.as_str()) {
            diags.push(Diagnostic::error(
                inv.name.span,
                format!(
                    "duplicate invariant name {} in skill {}",
                    inv.name, skill.name
                ),
            ));
        }
        check_guard(ast, &inv.guard, diags);
    }
    for (kind, cases) in [
        ("success", &skill.success_cases),
        ("failure", &skill.failure_cases),
    ] {
        let mut seen = HashSet::new();
        for case in cases {
            if !seen.insert(case.name.as_str()) {
                diags.push(Diagnostic::error(
                    case.name.span,
                    format!(
                        "duplicate {kind} name {} in skill {}",
                        case.name, skill.name
                    ),
                ));
            }
            check_effects(ast, &case.effects, diags);
        }
    }
}

fn lookup<'a>(
    ast: &'a SkillsetAst,
    resource: &Ident,
    state: &Ident,
    diags: &mut Vec<Diagnostic>,
) -> Option<&'a ResourceDecl> {
    let Some(res) = ast.resources.iter().find(|r| r.name.name == resource.name) else {
        diags.push(Diagnostic::error(
            resource.span,
            format!("unknown resource {resource}"),
        ));
        return None;
    };
    if res.state_index(state.as_str()).is_none() {
        diags.push(Diagnostic::error(
            resource.span,
            format!("unknown state {state} of resource {resource}"),
        ));
    }
    Some(res)
}

fn check_guard(ast: &SkillsetAst, guard: &GuardExpr, diags: &mut Vec<Diagnostic>) {
    for (resource, _, state) in guard.atoms() {
        lookup(ast, resource, state, diags);
    }
}

fn check_effects(ast: &SkillsetAst, effects: &[Effect], diags: &mut Vec<Diagnostic>) {
    let mut targeted = HashSet::new();
    for eff in effects {
        lookup(ast, &eff.resource, &eff.state, diags);
        if !targeted.insert(eff.resource.as_str()) {
            diags.push(Diagnostic::error(
                eff.resource.span,
                format!(
                    "resource {} is assigned twice by the same effect",
                    eff.resource
                ),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skill_lang::{parse_skillset, parse_skillset_unchecked, CUSTOM_ROBOT};

    fn listing() -> SkillsetAst {
        parse_skillset(CUSTOM_ROBOT).unwrap()
    }

    #[test]
    fn custom_robot_is_valid() {
        assert!(validate_skillset(&listing()).is_empty());
        assert!(lint_skillset(&listing()).is_empty());
    }

    #[test]
    fn undeclared_initial_state() {
        let ast = parse_skillset_unchecked(
            "skillset s { resource { motion { state { On } initial Off transition all } } }",
        )
        .unwrap();
        let diags = validate_skillset(&ast);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("initial state Off not declared"));
    }

    #[test]
    fn duplicate_skill() {
        let mut ast = listing();
        ast.skills.push(ast.skills[0].clone());
        let diags = validate_skillset(&ast);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("duplicate skill name"));
    }

    #[test]
    fn double_assignment_in_one_effect() {
        let ast = parse_skillset_unchecked(
            "skillset s { resource { m { state { A B } initial A transition all } }
             skill k { success { done { effect { m -> A m -> B } } } } }",
        )
        .unwrap();
        let diags = validate_skillset(&ast);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("assigned twice"));
    }

    /// Every single-field corruption of the example yields at least one
    /// diagnostic.
    #[test]
    fn single_field_mutations_are_caught() {
        let base = listing();
        let bogus = Ident::new("Bogus");
        let mut mutants: Vec<SkillsetAst> = Vec::new();

        let mut m = base.clone();
        m.resources[1].name = Ident::new("motion");
        mutants.push(m);
        let mut m = base.clone();
        m.resources[0].initial = bogus.clone();
        mutants.push(m);
        let mut m = base.clone();
        m.resources[0].states[1] = Ident::new("On");
        mutants.push(m);
        let mut m = base.clone();
        m.resources[0].states.clear();
        mutants.push(m);
        let mut m = base.clone();
        m.resources[0].transitions =
            TransitionSpec::Explicit(vec![(Ident::new("On"), bogus.clone())]);
        mutants.push(m);
        let mut m = base.clone();
        m.skills.push(base.skills[0].clone());
        mutants.push(m);

        type Mutation = Box<dyn Fn(&mut SkillDecl)>;
        let skill_mutations: Vec<Mutation> = vec![
            Box::new(|s| s.precondition = Some(GuardExpr::atom("wheels", CmpOp::Eq, "Off"))),
            Box::new(|s| s.precondition = Some(GuardExpr::atom("motion", CmpOp::Ne, "Bogus"))),
            Box::new(|s| s.start_effects[0].state = Ident::new("Bogus")),
            Box::new(|s| s.start_effects[0].resource = Ident::new("wheels")),
            Box::new(|s| s.invariants[0].guard = GuardExpr::atom("motion", CmpOp::Eq, "Fast")),
            Box::new(|s| s.invariants.push(s.invariants[0].clone())),
            Box::new(|s| s.interrupt_effects[0].state = Ident::new("Bogus")),
            Box::new(|s| s.success_cases[0].effects[0].resource = Ident::new("wheels")),
            Box::new(|s| s.success_cases.push(s.success_cases[0].clone())),
            Box::new(|s| s.failure_cases[0].effects[0].state = Ident::new("Bogus")),
            Box::new(|s| s.failure_cases.push(s.failure_cases[0].clone())),
            Box::new(|s| {
                let e = s.interrupt_effects[0].clone();
                s.interrupt_effects.push(e)
            }),
        ];
        for f in &skill_mutations {
            let mut m = base.clone();
            f(&mut m.skills[0]);
            mutants.push(m);
        }

        for (i, m) in mutants.iter().enumerate() {
            assert!(
                !validate_skillset(m).is_empty(),
                "mutant {i} passed validation"
            );
        }
    }

    #[test]
    fn missing_precondition_is_only_a_warning() {
        let ast = parse_skillset("skillset s { skill k { } }").unwrap();
        let lints = lint_skillset(&ast);
        assert_eq!(lints.len(), 1);
        assert!(!lints[0].is_error());
    }
}
