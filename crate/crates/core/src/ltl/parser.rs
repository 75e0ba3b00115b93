use crate::diag::Diagnostic;
use crate::lexer::{tokenize, Cursor, TokenKind};

use super::formula::{Atom, LtlFormula};

const KEYWORDS: &[&str] = &["true", "false", "X", "F", "G", "U", "R"];

/// Parses an LTL property.
///
/// Precedence, tightest first: `!`, `X`, `F`, `G`; then `U` and `R`
/// (right-associative); `&&`; `||`; `->` (right-associative). Atoms are
/// written `component @ state`. Runs of unary temporal operators may be
/// glued together, as in `FG p` or `GF p`.
pub fn parse_ltl(text: &str) -> Result<LtlFormula, Diagnostic> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        cur: Cursor::new(tokens, KEYWORDS),
    };
    let f = p.implication()?;
    p.cur.expect_eof()?;
    Ok(f)
}

struct Parser<'k> {
    cur: Cursor<'k>,
}

fn unary_run(s: &str) -> bool {
    s.len() > 1 && s.chars().all(|c| matches!(c, 'X' | 'F' | 'G'))
}

impl Parser<'_> {
    fn implication(&mut self) -> Result<LtlFormula, Diagnostic> {
        let lhs = self.disjunction()?;
        if self.cur.eat_sym("->") {
            return Ok(lhs.implies(self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<LtlFormula, Diagnostic> {
        let mut lhs = self.conjunction()?;
        while self.cur.eat_sym("||") {
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<LtlFormula, Diagnostic> {
        let mut lhs = self.binary()?;
        while self.cur.eat_sym("&&") {
            lhs = lhs.and(self.binary()?);
        }
        Ok(lhs)
    }

    fn binary(&mut self) -> Result<LtlFormula, Diagnostic> {
        let lhs = self.unary()?;
        if self.cur.eat_keyword("U") {
            Ok(lhs.until(self.binary()?))
        } else if self.cur.eat_keyword("R") {
            Ok(lhs.release(self.binary()?))
        } else {
            Ok(lhs)
        }
    }

    fn is_atom_start(&self) -> bool {
        matches!(self.cur.peek().kind, TokenKind::Ident(_))
            && matches!(self.cur.peek_at(1).kind, TokenKind::Sym("@"))
    }

    fn unary(&mut self) -> Result<LtlFormula, Diagnostic> {
        if self.is_atom_start() {
            return self.atom();
        }
        if self.cur.eat_sym("!") {
            return Ok(self.unary()?.not());
        }
        for (kw, op) in [
            ("X", LtlFormula::next as fn(LtlFormula) -> LtlFormula),
            ("F", LtlFormula::eventually),
            ("G", LtlFormula::always),
        ] {
            if self.cur.eat_keyword(kw) {
                return Ok(op(self.unary()?));
            }
        }
        if let TokenKind::Ident(s) = &self.cur.peek().kind {
            if unary_run(s) {
                let ops = s.clone();
                self.cur.bump();
                let mut f = self.unary()?;
                for c in ops.chars().rev() {
                    f = match c {
                        'X' => f.next(),
                        'F' => f.eventually(),
                        _ => f.always(),
                    };
                }
                return Ok(f);
            }
        }
        if self.cur.eat_keyword("true") {
            return Ok(LtlFormula::True);
        }
        if self.cur.eat_keyword("false") {
            return Ok(LtlFormula::False);
        }
        if self.cur.eat_sym("(") {
            let f = self.implication()?;
            self.cur.expect_sym(")")?;
            return Ok(f);
        }
        Err(self.cur.unexpected(&[
            "`component @ state`",
            "`true`",
            "`false`",
            "`!`",
            "`X`",
            "`F`",
            "`G`",
            "`(`",
        ]))
    }

    fn atom(&mut self) -> Result<LtlFormula, Diagnostic> {
        let component = self.any_ident()?;
        self.cur.expect_sym("@")?;
        let state = self.any_ident()?;
        Ok(LtlFormula::Atom(Atom { component, state }))
    }

    /// Identifiers in atoms may coincide with operator names.
    fn any_ident(&mut self) -> Result<String, Diagnostic> {
        match &self.cur.peek().kind {
            TokenKind::Ident(s) => {
                let s = s.clone();
                self.cur.bump();
                Ok(s)
            }
            _ => Err(self.cur.unexpected(&["identifier"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running() -> LtlFormula {
        LtlFormula::atom("goto", "Running")
    }

    #[test]
    fn property_one() {
        let f = parse_ltl("F G !(goto @ Running)").unwrap();
        assert_eq!(f, running().not().always().eventually());
        assert_eq!(parse_ltl("FG !(goto @ Running)").unwrap(), f);
    }

    #[test]
    fn property_two() {
        let f = parse_ltl("F G (battery @ Critical) -> F G !(goto @ Running)").unwrap();
        let critical = LtlFormula::atom("battery", "Critical");
        assert_eq!(
            f,
            critical
                .always()
                .eventually()
                .implies(running().not().always().eventually())
        );
    }

    #[test]
    fn precedence() {
        let p = || LtlFormula::atom("c", "p");
        let q = || LtlFormula::atom("c", "q");
        let f = parse_ltl("c@p U c@q && c@p || !c@q -> c@p -> c@q").unwrap();
        let expected = p()
            .until(q())
            .and(p())
            .or(q().not())
            .implies(p().implies(q()));
        assert_eq!(f, expected);
        assert_eq!(
            parse_ltl("c@p U c@q U c@p").unwrap(),
            p().until(q().until(p()))
        );
        assert_eq!(
            parse_ltl("X F c@p R c@q").unwrap(),
            p().eventually().next().release(q())
        );
    }

    #[test]
    fn keywords_as_atom_names() {
        let f = parse_ltl("F @ G").unwrap();
        assert_eq!(f, LtlFormula::atom("F", "G"));
        assert_eq!(
            parse_ltl("GF F_goto @ f0").unwrap(),
            LtlFormula::atom("F_goto", "f0").eventually().always()
        );
    }

    #[test]
    fn display_round_trip() {
        for text in [
            "F G !(goto @ Running)",
            "F G (battery @ Critical) -> F G !(goto @ Running)",
            "(a @ x U b @ y) R X !true",
            "false || GXF c @ s",
        ] {
            let f = parse_ltl(text).unwrap();
            assert_eq!(parse_ltl(&f.to_string()).unwrap(), f, "{text}");
        }
    }

    #[test]
    fn errors() {
        let e = parse_ltl("F G").unwrap_err();
        assert!(e.message.contains("expected one of"), "{e}");
        let e = parse_ltl("goto @").unwrap_err();
        assert!(e.message.contains("identifier"), "{e}");
        assert!(parse_ltl("(goto @ Running").is_err());
        assert!(parse_ltl("goto @ Running goto").is_err());
        assert!(parse_ltl("").is_err());
    }
}
