use crate::diag::Diagnostic;
use crate::lexer::{tokenize, Cursor};

use super::ast::*;
use super::validate::validate_skillset;

const KEYWORDS: &[&str] = &[
    "skillset",
    "resource",
    "state",
    "initial",
    "transition",
    "all",
    "skill",
    "input",
    "output",
    "precondition",
    "start",
    "invariant",
    "guard",
    "interrupt",
    "effect",
    "success",
    "failure",
];

/// Parses and validates a skillset. Any error diagnostic fails the parse;
/// warnings are available separately through [`super::lint_skillset`].
pub fn parse_skillset(text: &str) -> Result<SkillsetAst, Vec<Diagnostic>> {
    let ast = parse_skillset_unchecked(text).map_err(|d| vec![d])?;
    let errors = validate_skillset(&ast);
    if errors.is_empty() {
        Ok(ast)
    } else {
        Err(errors)
    }
}

/// Syntax only: no name resolution.
pub fn parse_skillset_unchecked(text: &str) -> Result<SkillsetAst, Diagnostic> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        cur: Cursor::new(tokens, KEYWORDS),
    };
    let ast = p.skillset()?;
    p.cur.expect_eof()?;
    Ok(ast)
}

struct Parser<'k> {
    cur: Cursor<'k>,
}

impl Parser<'_> {
    fn ident(&mut self) -> Result<Ident, Diagnostic> {
        let (name, span) = self.cur.expect_ident()?;
        Ok(Ident::at(name, span))
    }

    fn skillset(&mut self) -> Result<SkillsetAst, Diagnostic> {
        self.cur.expect_keyword("skillset")?;
        let name = self.ident()?;
        self.cur.expect_sym("{")?;
        let mut resources = Vec::new();
        let mut skills = Vec::new();
        loop {
            if self.cur.eat_keyword("resource") {
                self.cur.expect_sym("{")?;
                while !self.cur.eat_sym("}") {
                    resources.push(self.resource()?);
                }
            } else if self.cur.eat_keyword("skill") {
                skills.push(self.skill()?);
            } else if self.cur.eat_sym("}") {
                break;
            } else {
                return Err(self.cur.unexpected(&["`resource`", "`skill`", "`}`"]));
            }
        }
        Ok(SkillsetAst {
            name,
            resources,
            skills,
        })
    }

    fn resource(&mut self) -> Result<ResourceDecl, Diagnostic> {
        if !self.cur.is_ident() {
            return Err(self.cur.unexpected(&["resource name", "`}`"]));
        }
        let name = self.ident()?;
        self.cur.expect_sym("{")?;
        self.cur.expect_keyword("state")?;
        self.cur.expect_sym("{")?;
        let mut states = vec![self.ident()?];
        while !self.cur.eat_sym("}") {
            states.push(self.ident()?);
        }
        self.cur.expect_keyword("initial")?;
        let initial = self.ident()?;
        self.cur.expect_keyword("transition")?;
        let transitions = if self.cur.eat_keyword("all") {
            TransitionSpec::All
        } else if self.cur.eat_sym("{") {
            let mut pairs = Vec::new();
            while !self.cur.eat_sym("}") {
                let from = self.ident()?;
                self.cur.expect_sym("->")?;
                let to = self.ident()?;
                pairs.push((from, to));
            }
            TransitionSpec::Explicit(pairs)
        } else {
            return Err(self.cur.unexpected(&["`all`", "`{`"]));
        };
        self.cur.expect_sym("}")?;
        Ok(ResourceDecl {
            name,
            states,
            initial,
            transitions,
        })
    }

    fn skill(&mut self) -> Result<SkillDecl, Diagnostic> {
        let name = self.ident()?;
        self.cur.expect_sym("{")?;
        let mut skill = SkillDecl::new("");
        skill.name = name;

        if self.cur.eat_keyword("input") {
            self.cur.expect_sym("{")?;
            while !self.cur.eat_sym("}") {
                skill.inputs.push(self.param()?);
            }
        }
        while self.cur.eat_keyword("output") {
            skill.outputs.push(self.param()?);
        }
        if self.cur.eat_keyword("precondition") {
            self.cur.expect_sym("{")?;
            skill.precondition = Some(self.guard()?);
            self.cur.expect_sym("}")?;
        }
        while self.cur.eat_keyword("start") {
            skill.start_effects.push(self.effect()?);
        }
        if self.cur.eat_keyword("invariant") {
            self.cur.expect_sym("{")?;
            while !self.cur.eat_sym("}") {
                let name = self.ident()?;
                self.cur.expect_sym("{")?;
                self.cur.expect_keyword("guard")?;
                let guard = self.guard()?;
                self.cur.expect_sym("}")?;
                skill.invariants.push(InvariantDecl { name, guard });
            }
        }
        if self.cur.eat_keyword("interrupt") {
            self.cur.expect_sym("{")?;
            skill.interrupt_effects = self.effect_block()?;
            self.cur.expect_sym("}")?;
        }
        while self.cur.eat_keyword("success") {
            skill.success_cases.push(self.terminal_case()?);
        }
        while self.cur.eat_keyword("failure") {
            skill.failure_cases.push(self.terminal_case()?);
        }
        if !self.cur.eat_sym("}") {
            return Err(self.cur.unexpected(&[
                "`input`",
                "`output`",
                "`precondition`",
                "`start`",
                "`invariant`",
                "`interrupt`",
                "`success`",
                "`failure`",
                "`}`",
            ]));
        }
        Ok(skill)
    }

    fn param(&mut self) -> Result<Param, Diagnostic> {
        let name = self.ident()?;
        self.cur.expect_sym(":")?;
        let type_tag = self.ident()?;
        Ok(Param { name, type_tag })
    }

    fn effect(&mut self) -> Result<Effect, Diagnostic> {
        let resource = self.ident()?;
        self.cur.expect_sym("->")?;
        let state = self.ident()?;
        Ok(Effect { resource, state })
    }

    /// `effect { e* }`
    fn effect_block(&mut self) -> Result<Vec<Effect>, Diagnostic> {
        self.cur.expect_keyword("effect")?;
        self.cur.expect_sym("{")?;
        let mut effects = Vec::new();
        while !self.cur.eat_sym("}") {
            effects.push(self.effect()?);
        }
        Ok(effects)
    }

    fn terminal_case(&mut self) -> Result<TerminalCase, Diagnostic> {
        self.cur.expect_sym("{")?;
        let name = self.ident()?;
        self.cur.expect_sym("{")?;
        let effects = self.effect_block()?;
        self.cur.expect_sym("}")?;
        self.cur.expect_sym("}")?;
        Ok(TerminalCase { name, effects })
    }

    fn guard(&mut self) -> Result<GuardExpr, Diagnostic> {
        let mut lhs = self.conjunction()?;
        while self.cur.eat_sym("||") {
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<GuardExpr, Diagnostic> {
        let mut lhs = self.unary()?;
        while self.cur.eat_sym("&&") {
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<GuardExpr, Diagnostic> {
        if self.cur.eat_sym("!") {
            return Ok(self.unary()?.not());
        }
        if self.cur.eat_sym("(") {
            let inner = self.guard()?;
            self.cur.expect_sym(")")?;
            return Ok(inner);
        }
        if !self.cur.is_ident() {
            return Err(self.cur.unexpected(&["resource name", "`!`", "`(`"]));
        }
        let resource = self.ident()?;
        let op = if self.cur.eat_sym("==") {
            CmpOp::Eq
        } else if self.cur.eat_sym("!=") {
            CmpOp::Ne
        } else {
            return Err(self.cur.unexpected(&["`==`", "`!=`"]));
        };
        let state = self.ident()?;
        Ok(GuardExpr::Atom {
            resource,
            op,
            state,
        })
    }
}
