use crate::diag::Diagnostic;
use crate::lex::{end_pos, tokenize, Cursor, Tok};
use crate::logic::{parse_expr_tokens, Dialect, Formula};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Cross-model rule `lhs => rhs` over qualified references `model#element`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdcRule {
    pub lhs: Formula,
    pub rhs: Formula,
}

impl CdcRule {
    pub fn new(lhs: Formula, rhs: Formula) -> Self {
        CdcRule { lhs, rhs }
    }

    pub fn formula(&self) -> Formula {
        Formula::implies(self.lhs.clone(), self.rhs.clone())
    }
}

impl std::fmt::Display for CdcRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.formula().display(Dialect::Cdc).fmt(f)
    }
}

/// Splits `model#element`.
pub fn split_ref(r: &str) -> Option<(&str, &str)> {
    r.split_once('#')
}

pub fn qualify(model: &str, element: &str) -> String {
    format!("{model}#{element}")
}

/// References that `known(model, element)` rejects or that lack a model
/// qualifier.
pub fn check_cdc_refs(rules: &[CdcRule], known: impl Fn(&str, &str) -> bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        let label = format!("CDC{}", i + 1);
        for v in r.formula().variables() {
            let ok = split_ref(&v).is_some_and(|(m, e)| known(m, e));
            if !ok {
                out.push(
                    Diagnostic::error("unresolved-reference", format!("{label} references unknown element {v}"))
                        .about(v),
                );
            }
        }
    }
    out
}

pub fn cdc_write(rules: &[CdcRule]) -> String {
    let mut s = String::new();
    for (i, r) in rules.iter().enumerate() {
        let _ = writeln!(s, "CDC{}) {r};", i + 1);
    }
    s
}

/// Reads rules; labels `X)` and terminating `;` are optional, and a rule
/// may span lines.
pub fn cdc_read(text: &str) -> Result<Vec<CdcRule>, Diagnostic> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_pos(text));
    let mut out = Vec::new();
    while !cur.at_end() {
        if matches!(cur.peek(), Some(Tok::Ident(_))) && cur.peek_at(1) == Some(&Tok::RParen) {
            cur.bump();
            cur.bump();
        }
        let pos = cur.pos();
        match parse_expr_tokens(&mut cur, Dialect::Cdc)? {
            Formula::Implies(l, r) => out.push(CdcRule::new(*l, *r)),
            _ => {
                return Err(Diagnostic::error("syntax", "a CDC must have the form `lhs => rhs`").at(pos));
            }
        }
        cur.eat(&Tok::Semi);
    }
    Ok(out)
}
