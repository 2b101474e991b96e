use super::Formula;
use crate::diag::{Diagnostic, Pos};
use crate::lex::{end_pos, tokenize_at, Cursor, Tok};

/// Concrete expression syntax.
///
/// * `Ppr`: `implies`, `AND`, `OR`, `NOT` (case-insensitive); the symbolic
///   operators are accepted as well.
/// * `Dm`: `=>`, `&&`, `||`, `!`, `==`, `true`, `false`; `&` and `|` are
///   aliases.
/// * `Cdc`: the `Dm` syntax plus qualified references `model#element`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    Ppr,
    Dm,
    Cdc,
}

pub fn parse_expr(src: &str, dialect: Dialect) -> Result<Formula, Diagnostic> {
    parse_expr_at(src, dialect, Pos::START)
}

/// Parses a complete expression whose first character sits at `origin`.
pub fn parse_expr_at(src: &str, dialect: Dialect, origin: Pos) -> Result<Formula, Diagnostic> {
    let toks = tokenize_at(src, origin)?;
    let mut end = end_pos(src);
    if end.line == 1 {
        end.column += origin.column - 1;
    }
    end.line += origin.line - 1;
    let mut cur = Cursor::new(&toks, end);
    let f = parse_expr_tokens(&mut cur, dialect)?;
    if !cur.at_end() {
        return Err(cur.unexpected("an operator or end of expression"));
    }
    Ok(f)
}

/// Parses the longest expression starting at the cursor and leaves the
/// cursor on the first token that cannot continue it.
pub fn parse_expr_tokens(cur: &mut Cursor<'_>, dialect: Dialect) -> Result<Formula, Diagnostic> {
    Parser { dialect }.implies(cur)
}

struct Parser {
    dialect: Dialect,
}

impl Parser {
    fn word(&self, cur: &Cursor<'_>, kw: &str) -> bool {
        self.dialect == Dialect::Ppr && matches!(cur.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn implies(&self, cur: &mut Cursor<'_>) -> Result<Formula, Diagnostic> {
        let lhs = self.or(cur)?;
        if cur.eat(&Tok::FatArrow) || self.eat_word(cur, "implies") {
            let rhs = self.implies(cur)?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn eat_word(&self, cur: &mut Cursor<'_>, kw: &str) -> bool {
        if self.word(cur, kw) {
            cur.bump();
            true
        } else {
            false
        }
    }

    fn or(&self, cur: &mut Cursor<'_>) -> Result<Formula, Diagnostic> {
        let mut parts = vec![self.and(cur)?];
        while cur.eat(&Tok::BarBar) || cur.eat(&Tok::Bar) || self.eat_word(cur, "or") {
            parts.push(self.and(cur)?);
        }
        Ok(Formula::or_all(parts))
    }

    fn and(&self, cur: &mut Cursor<'_>) -> Result<Formula, Diagnostic> {
        let mut parts = vec![self.unary(cur)?];
        while cur.eat(&Tok::AmpAmp) || cur.eat(&Tok::Amp) || self.eat_word(cur, "and") {
            parts.push(self.unary(cur)?);
        }
        Ok(Formula::and_all(parts))
    }

    fn unary(&self, cur: &mut Cursor<'_>) -> Result<Formula, Diagnostic> {
        if cur.eat(&Tok::Bang) || self.eat_word(cur, "not") {
            return Ok(Formula::negate(self.unary(cur)?));
        }
        self.primary(cur)
    }

    fn primary(&self, cur: &mut Cursor<'_>) -> Result<Formula, Diagnostic> {
        if cur.eat(&Tok::LParen) {
            let f = self.implies(cur)?;
            cur.expect(&Tok::RParen)?;
            return Ok(f);
        }
        let name = match cur.peek() {
            Some(Tok::Ident(s)) if self.is_reserved(s) => {
                return Err(cur.unexpected("an operand"));
            }
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(cur.unexpected("an operand")),
        };
        cur.bump();
        match name.as_str() {
            "true" => return Ok(Formula::True),
            "false" => return Ok(Formula::False),
            _ => {}
        }
        let mut name = name;
        if self.dialect == Dialect::Cdc && cur.eat(&Tok::Hash) {
            let element = cur.ident()?;
            name = format!("{name}#{element}");
        }
        if cur.eat(&Tok::EqEq) || cur.eat(&Tok::Eq) {
            let option = match cur.peek() {
                Some(Tok::Ident(s)) | Some(Tok::Str(s)) | Some(Tok::Number(s)) => s.clone(),
                _ => return Err(cur.unexpected("an option name")),
            };
            cur.bump();
            return Ok(Formula::VarEq(name, option));
        }
        Ok(Formula::Var(name))
    }

    fn is_reserved(&self, s: &str) -> bool {
        self.dialect == Dialect::Ppr && ["implies", "and", "or", "not"].iter().any(|k| s.eq_ignore_ascii_case(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Formula {
        Formula::var(s)
    }

    #[test]
    fn ppr_precedence() {
        let f = parse_expr("A AND NOT B OR C implies D", Dialect::Ppr).unwrap();
        assert_eq!(
            f,
            Formula::implies(Formula::Or(vec![Formula::And(vec![v("A"), Formula::negate(v("B"))]), v("C"),]), v("D"),)
        );
    }

    #[test]
    fn ppr_keywords_are_case_insensitive() {
        let a = parse_expr("Lock1 implies Pipe2 or Pipe3", Dialect::Ppr).unwrap();
        let b = parse_expr("Lock1 IMPLIES Pipe2 OR Pipe3", Dialect::Ppr).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn implication_is_right_associative() {
        let f = parse_expr("a => b => c", Dialect::Dm).unwrap();
        assert_eq!(f, Formula::implies(v("a"), Formula::implies(v("b"), v("c"))));
    }

    #[test]
    fn dm_enum_tests_and_aliases() {
        let f = parse_expr("Pipe == Pipe2 & !x | y", Dialect::Dm).unwrap();
        assert_eq!(
            f,
            Formula::Or(vec![Formula::And(vec![Formula::var_eq("Pipe", "Pipe2"), Formula::negate(v("x"))]), v("y"),])
        );
        let single = parse_expr("Pipe = Pipe2", Dialect::Dm).unwrap();
        assert_eq!(single, Formula::var_eq("Pipe", "Pipe2"));
    }

    #[test]
    fn dm_treats_words_as_identifiers() {
        let f = parse_expr("and && or", Dialect::Dm).unwrap();
        assert_eq!(f, Formula::And(vec![v("and"), v("or")]));
    }

    #[test]
    fn cdc_qualified_references() {
        let f = parse_expr("P#Lock1 => D#InsertLock1", Dialect::Cdc).unwrap();
        assert_eq!(f, Formula::implies(v("P#Lock1"), v("D#InsertLock1")));
        assert!(parse_expr("P#Lock1", Dialect::Dm).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_expr("a &&\n  )", Dialect::Dm).unwrap_err();
        assert_eq!(err.pos, Some(Pos { line: 2, column: 3 }));
        let err = parse_expr("a b", Dialect::Dm).unwrap_err();
        assert_eq!(err.pos, Some(Pos { line: 1, column: 3 }));
        let err = parse_expr("a AND", Dialect::Ppr).unwrap_err();
        assert!(err.message.contains("end of input"), "{}", err.message);
    }

    #[test]
    fn origin_offsets_positions() {
        let err = parse_expr_at("a ||", Dialect::Dm, Pos { line: 4, column: 10 }).unwrap_err();
        assert_eq!(err.pos, Some(Pos { line: 4, column: 14 }));
    }
}
