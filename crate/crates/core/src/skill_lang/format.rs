use std::fmt::Write;

use super::ast::*;

/// Pretty-prints a skillset in canonical layout. The output re-parses to
/// an equal AST.
pub fn format_skillset(ast: &SkillsetAst) -> String {
    let mut out = String::new();
    if ast.resources.is_empty() && ast.skills.is_empty() {
        let _ = writeln!(out, "skillset {} {{}}", ast.name);
        return out;
    }
    let _ = writeln!(out, "skillset {} {{", ast.name);
    if !ast.resources.is_empty() {
        out.push_str("  resource {\n");
        for res in &ast.resources {
            let states: Vec<&str> = res.states.iter().map(Ident::as_str).collect();
            let transitions = match &res.transitions {
                TransitionSpec::All => "all".to_string(),
                TransitionSpec::Explicit(pairs) => {
                    let body: Vec<String> =
                        pairs.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
                    if body.is_empty() {
                        "{}".to_string()
                    } else {
                        format!("{{ {} }}", body.join(" "))
                    }
                }
            };
            let _ = writeln!(
                out,
                "    {} {{ state {{ {} }} initial {} transition {} }}",
                res.name,
                states.join(" "),
                res.initial,
                transitions
            );
        }
        out.push_str("  }\n");
    }
    for skill in &ast.skills {
        format_skill(&mut out, skill);
    }
    out.push_str("}\n");
    out
}

fn format_skill(out: &mut String, skill: &SkillDecl) {
    let _ = writeln!(out, "  skill {} {{", skill.name);
    if !skill.inputs.is_empty() {
        let params: Vec<String> = skill
            .inputs
            .iter()
            .map(|p| format!("{}: {}", p.name, p.type_tag))
            .collect();
        let _ = writeln!(out, "    input {{ {} }}", params.join(" "));
    }
    for p in &skill.outputs {
        let _ = writeln!(out, "    output {}: {}", p.name, p.type_tag);
    }
    if let Some(pre) = &skill.precondition {
        let _ = writeln!(out, "    precondition {{ {} }}", format_guard(pre));
    }
    for e in &skill.start_effects {
        let _ = writeln!(out, "    start {} -> {}", e.resource, e.state);
    }
    if !skill.invariants.is_empty() {
        out.push_str("    invariant {\n");
        for inv in &skill.invariants {
            let _ = writeln!(
                out,
                "      {} {{ guard {} }}",
                inv.name,
                format_guard(&inv.guard)
            );
        }
        out.push_str("    }\n");
    }
    if !skill.interrupt_effects.is_empty() {
        let _ = writeln!(
            out,
            "    interrupt {{ effect {{ {} }} }}",
            format_effects(&skill.interrupt_effects)
        );
    }
    for (kw, cases) in [
        ("success", &skill.success_cases),
        ("failure", &skill.failure_cases),
    ] {
        for case in cases {
            let _ = writeln!(
                out,
                "    {kw} {{ {} {{ effect {{ {} }} }} }}",
                case.name,
                format_effects(&case.effects)
            );
        }
    }
    out.push_str("  }\n");
}

fn format_effects(effects: &[Effect]) -> String {
    effects
        .iter()
        .map(|e| format!("{} -> {}", e.resource, e.state))
        .collect::<Vec<_>>()
        .join(" ")
}

// `||` binds loosest, then `&&`, then `!`.
fn format_guard(g: &GuardExpr) -> String {
    fn go(g: &GuardExpr, out: &mut String) {
        match g {
            GuardExpr::Atom {
                resource,
                op,
                state,
            } => {
                let _ = write!(out, "{resource} {} {state}", op.symbol());
            }
            GuardExpr::Not(inner) => {
                out.push('!');
                wrap(inner, 3, out);
            }
            GuardExpr::And(a, b) => {
                wrap(a, 2, out);
                out.push_str(" && ");
                wrap(b, 3, out);
            }
            GuardExpr::Or(a, b) => {
                wrap(a, 1, out);
                out.push_str(" || ");
                wrap(b, 2, out);
            }
        }
    }
    // Atoms are parenthesized whenever they are an operand.
    fn wrap(g: &GuardExpr, min: u8, out: &mut String) {
        let needs_parens = match g {
            GuardExpr::Atom { .. } => true,
            GuardExpr::Or(..) => min > 1,
            GuardExpr::And(..) => min > 2,
            GuardExpr::Not(..) => false,
        };
        if needs_parens {
            out.push('(');
            go(g, out);
            out.push(')');
        } else {
            go(g, out);
        }
    }
    let mut out = String::new();
    go(g, &mut out);
    out
}
