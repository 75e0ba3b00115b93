use crate::diag::Diagnostic;
use crate::lexer::{tokenize, Cursor, TokenKind};

use super::ast::*;

const KEYWORDS: &[&str] = &[
    "model",
    "for",
    "functional",
    "decision",
    "var",
    "in",
    "init",
    "any",
    "loc",
    "initial",
    "edge",
    "on",
    "internal",
    "when",
    "do",
];

/// Parses and scope-checks a layer model.
pub fn parse_layer_model(text: &str) -> Result<GuardedTs, Vec<Diagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        cur: Cursor::new(tokens, KEYWORDS),
    };
    let model = p.model().map_err(|d| vec![d])?;
    p.cur.expect_eof().map_err(|d| vec![d])?;
    let diags = model.check();
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(diags)
    }
}

struct Parser<'k> {
    cur: Cursor<'k>,
}

impl Parser<'_> {
    fn ident(&mut self) -> Result<String, Diagnostic> {
        Ok(self.cur.expect_ident()?.0)
    }

    fn model(&mut self) -> Result<GuardedTs, Diagnostic> {
        self.cur.expect_keyword("model")?;
        let name = self.ident()?;
        let target = if self.cur.eat_keyword("for") {
            let kind = if self.cur.eat_keyword("functional") {
                LayerKind::Functional
            } else if self.cur.eat_keyword("decision") {
                LayerKind::Decision
            } else {
                return Err(self.cur.unexpected(&["`functional`", "`decision`"]));
            };
            Some(LayerTarget {
                kind,
                skill: self.ident()?,
            })
        } else {
            None
        };
        self.cur.expect_sym("{")?;
        let mut model = GuardedTs {
            name,
            target,
            variables: Vec::new(),
            locations: Vec::new(),
            edges: Vec::new(),
        };
        while self.cur.is_keyword("var") {
            model.variables.push(self.var_decl()?);
        }
        while self.cur.eat_keyword("loc") {
            let name = self.ident()?;
            let initial = self.cur.eat_keyword("initial");
            model.locations.push(Location { name, initial });
        }
        while self.cur.is_keyword("edge") {
            model.edges.push(self.edge()?);
        }
        if !self.cur.eat_sym("}") {
            return Err(self.cur.unexpected(&["`var`", "`loc`", "`edge`", "`}`"]));
        }
        Ok(model)
    }

    fn var_decl(&mut self) -> Result<VarDecl, Diagnostic> {
        let span = self.cur.expect_keyword("var")?;
        let name = self.ident()?;
        self.cur.expect_keyword("in")?;
        self.cur.expect_sym("[")?;
        let (lo, _) = self.cur.expect_int()?;
        self.cur.expect_sym(",")?;
        let (hi, _) = self.cur.expect_int()?;
        self.cur.expect_sym("]")?;
        self.cur.expect_keyword("init")?;
        let init = if self.cur.eat_keyword("any") {
            VarInit::Any
        } else {
            VarInit::Const(self.cur.expect_int()?.0)
        };
        Ok(VarDecl {
            name,
            lo,
            hi,
            init,
            span,
        })
    }

    fn edge(&mut self) -> Result<Edge, Diagnostic> {
        let span = self.cur.expect_keyword("edge")?;
        let source = self.ident()?;
        self.cur.expect_sym("->")?;
        let target = self.ident()?;
        self.cur.expect_keyword("on")?;
        let event = self.ident()?;
        let mut edge = Edge::new(&source, &target, &event);
        edge.span = span;
        edge.internal = self.cur.eat_keyword("internal");
        if self.cur.eat_keyword("when") {
            edge.guard = Some(self.guard()?);
        }
        if self.cur.eat_keyword("do") {
            while self.cur.is_ident() {
                let var = self.ident()?;
                self.cur.expect_sym(":=")?;
                let expr = self.expr()?;
                edge.updates.push(Update { var, expr });
                self.cur.eat_sym(",");
            }
        }
        Ok(edge)
    }

    fn guard(&mut self) -> Result<VarGuard, Diagnostic> {
        let mut lhs = self.conjunction()?;
        while self.cur.eat_sym("||") {
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<VarGuard, Diagnostic> {
        let mut lhs = self.unary()?;
        while self.cur.eat_sym("&&") {
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<VarGuard, Diagnostic> {
        if self.cur.eat_sym("!") {
            return Ok(VarGuard::Not(Box::new(self.unary()?)));
        }
        if self.cur.eat_sym("(") {
            let g = self.guard()?;
            self.cur.expect_sym(")")?;
            return Ok(g);
        }
        let lhs = self.operand()?;
        let op = [
            ("==", RelOp::Eq),
            ("!=", RelOp::Ne),
            ("<=", RelOp::Le),
            (">=", RelOp::Ge),
            ("<", RelOp::Lt),
            (">", RelOp::Gt),
        ]
        .into_iter()
        .find(|(s, _)| self.cur.is_sym(s))
        .map(|(_, op)| op)
        .ok_or_else(|| {
            self.cur
                .unexpected(&["`==`", "`!=`", "`<`", "`<=`", "`>`", "`>=`"])
        })?;
        self.cur.bump();
        let rhs = self.operand()?;
        Ok(VarGuard::Cmp(lhs, op, rhs))
    }

    fn operand(&mut self) -> Result<Operand, Diagnostic> {
        if self.cur.is_ident() {
            Ok(Operand::Var(self.ident()?))
        } else if self.cur.is_sym("-") || matches!(self.cur.peek().kind, TokenKind::Int(_)) {
            Ok(Operand::Const(self.cur.expect_int()?.0))
        } else {
            Err(self.cur.unexpected(&["variable", "integer", "`!`", "`(`"]))
        }
    }

    fn expr(&mut self) -> Result<AffineExpr, Diagnostic> {
        let mut expr = AffineExpr::default();
        let mut sign = if self.cur.eat_sym("-") { -1 } else { 1 };
        loop {
            self.term(sign, &mut expr)?;
            if self.cur.eat_sym("+") {
                sign = 1;
            } else if self.cur.eat_sym("-") {
                sign = -1;
            } else {
                return Ok(expr);
            }
        }
    }

    /// `INT`, `IDENT` or `INT * IDENT`
    fn term(&mut self, sign: i64, expr: &mut AffineExpr) -> Result<(), Diagnostic> {
        if self.cur.is_ident() {
            let v = self.ident()?;
            expr.terms.push((sign, v));
            return Ok(());
        }
        let (n, _) = match self.cur.peek().kind {
            TokenKind::Int(_) => self.cur.expect_int()?,
            _ => return Err(self.cur.unexpected(&["variable", "integer"])),
        };
        if self.cur.eat_sym("*") {
            let v = self.ident()?;
            expr.terms.push((sign * n, v));
        } else {
            expr.constant += sign * n;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFINED: &str = "
model goto_fl for functional goto {
  var blevel in [0, 6] init any
  var d in [0, 2] init 0
  loc idle initial
  loc validated
  loc started
  loc moving
  edge idle -> validated on validate_success when blevel >= 2 do d := 2
  edge idle -> idle on validate_failure when blevel < 2
  edge validated -> started on start_hook
  edge started -> moving on move internal when d >= 1 && blevel >= 2 do d := d - 1 blevel := blevel - 2
  edge moving -> moving on move internal when d >= 1 && blevel >= 2 do d := d - 1, blevel := blevel - 2
  edge moving -> idle on success_arrived when d == 0
  edge moving -> idle on failure_blocked when d >= 1 && blevel < 2
  edge moving -> idle on interrupted
}";

    #[test]
    fn refined_model_parses() {
        let m = parse_layer_model(REFINED).unwrap();
        assert_eq!(m.name, "goto_fl");
        assert_eq!(
            m.target,
            Some(LayerTarget {
                kind: LayerKind::Functional,
                skill: "goto".into()
            })
        );
        let vars: Vec<_> = m.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(vars, ["blevel", "d"]);
        assert_eq!(m.variables[0].init, VarInit::Any);
        assert_eq!(m.edges.len(), 8);
        let mv = &m.edges[3];
        assert!(mv.internal);
        assert_eq!(
            mv.updates,
            vec![
                Update {
                    var: "d".into(),
                    expr: AffineExpr::offset("d", -1)
                },
                Update {
                    var: "blevel".into(),
                    expr: AffineExpr::offset("blevel", -2)
                },
            ]
        );
        assert_eq!(m.edges[3].updates, m.edges[4].updates);
    }

    #[test]
    fn bare_lts_model() {
        let m = parse_layer_model(
            "model F { loc f0 initial
               edge f0 -> f0 on validate_success_goto
               edge f0 -> f0 on validate_failure_goto
               edge f0 -> f0 on start_hook_goto
               edge f0 -> f0 on success_goto_arrived
               edge f0 -> f0 on failure_goto_blocked
               edge f0 -> f0 on interrupted_goto }",
        )
        .unwrap();
        assert!(m.variables.is_empty());
        assert_eq!(m.edges.len(), 6);
        assert!(m.target.is_none());
    }

    #[test]
    fn scope_errors() {
        let errs = parse_layer_model("model m { loc a initial edge a -> a on tick when x < 2 }")
            .unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("unknown variable x"));

        let errs = parse_layer_model("model m { loc a initial edge a -> b on tick }").unwrap_err();
        assert!(errs[0].message.contains("unknown location b"));

        let errs =
            parse_layer_model("model m { var x in [0, 1] init 5 loc a initial }").unwrap_err();
        assert!(errs[0].message.contains("outside its domain"));

        let errs = parse_layer_model("model m { loc a loc b }").unwrap_err();
        assert!(errs[0].message.contains("no initial location"));
    }

    #[test]
    fn affine_expressions() {
        let m = parse_layer_model(
            "model m { var x in [-3, 3] init -1 var y in [0, 1] init 0 loc a initial
               edge a -> a on t do x := -x + 2*y - 1 }",
        )
        .unwrap();
        assert_eq!(m.variables[0].lo, -3);
        assert_eq!(m.variables[0].init, VarInit::Const(-1));
        assert_eq!(
            m.edges[0].updates[0].expr,
            AffineExpr {
                constant: -1,
                terms: vec![(-1, "x".into()), (2, "y".into())]
            }
        );
    }

    #[test]
    fn syntax_error_has_span() {
        let errs =
            parse_layer_model("model m {\n  loc a initial\n  edge a -> a tick\n}").unwrap_err();
        assert_eq!((errs[0].span.line, errs[0].span.column), (3, 15));
        assert!(errs[0].message.contains("`on`"));
    }
}
