use super::dm::{DecisionModel, Range};
use super::fm::FmConfiguration;
use crate::diag::{Diagnostic, Pos};
use crate::lex::{is_ident, quote, tokenize_at, Cursor, Tok};
use crate::logic::Valuation;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Preset,
    User,
    Propagated,
}

impl Origin {
    pub fn keyword(self) -> &'static str {
        match self {
            Origin::Preset => "preset",
            Origin::User => "user",
            Origin::Propagated => "propagated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DValue {
    Bool(bool),
    Option(String),
}

impl fmt::Display for DValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DValue::Bool(b) => write!(f, "{b}"),
            DValue::Option(o) => f.write_str(o),
        }
    }
}

impl DValue {
    /// Whether the value fits the decision's range.
    pub fn fits(&self, range: &Range) -> bool {
        match (self, range) {
            (DValue::Bool(_), Range::Boolean) => true,
            (DValue::Option(o), Range::Enumeration(opts)) => opts.contains(o),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assign {
    pub seq: u64,
    pub origin: Origin,
    pub decision: String,
    pub value: DValue,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmConfiguration {
    pub model_id: String,
    /// Digest of the product configuration the presets came from.
    pub product_digest: String,
    pub assignments: Vec<Assign>,
}

impl DmConfiguration {
    pub fn get(&self, decision: &str) -> Option<&DValue> {
        self.assignments.iter().find(|a| a.decision == decision).map(|a| &a.value)
    }

    pub fn next_seq(&self) -> u64 {
        self.assignments.last().map_or(0, |a| a.seq + 1)
    }

    pub fn valuation(&self) -> DmValuation {
        DmValuation(self.assignments.iter().map(|a| (a.decision.clone(), a.value.clone())).collect())
    }

    /// Assignments up to (excluding) `seq`.
    pub fn prefix(&self, seq: u64) -> DmValuation {
        DmValuation(
            self.assignments.iter().filter(|a| a.seq < seq).map(|a| (a.decision.clone(), a.value.clone())).collect(),
        )
    }

    /// Checks seq order, uniqueness and ranges against `dm`.
    pub fn check(&self, dm: &DecisionModel) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (i, a) in self.assignments.iter().enumerate() {
            if i > 0 && self.assignments[i - 1].seq >= a.seq {
                out.push(Diagnostic::error("seq", format!("seq {} is not increasing", a.seq)).about(&a.decision));
            }
            if self.assignments[..i].iter().any(|b| b.decision == a.decision) {
                out.push(Diagnostic::error("duplicate", "decision assigned twice").about(&a.decision));
            }
            match dm.decisions.get(&a.decision) {
                None => out.push(Diagnostic::error("unknown-decision", "unknown decision").about(&a.decision)),
                Some(d) if !a.value.fits(&d.range) => out
                    .push(Diagnostic::error("range", format!("value {} is out of range", a.value)).about(&a.decision)),
                _ => {}
            }
        }
        out
    }
}

/// Decision values for formula evaluation. A bare enumeration decision
/// reads as true once any option is chosen.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DmValuation(pub HashMap<String, DValue>);

impl Valuation for DmValuation {
    fn lookup(&self, var: &str) -> Option<bool> {
        match self.0.get(var)? {
            DValue::Bool(b) => Some(*b),
            DValue::Option(_) => Some(true),
        }
    }

    fn lookup_eq(&self, var: &str, option: &str) -> Option<bool> {
        match self.0.get(var)? {
            DValue::Option(o) => Some(o == option),
            DValue::Bool(_) => None,
        }
    }
}

/// Hex SHA-256 of the sorted, newline-joined selection.
pub fn selection_digest(cfg: &FmConfiguration) -> String {
    let mut h = Sha256::new();
    for s in &cfg.selected {
        h.update(s.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn dconfig_write(cfg: &DmConfiguration) -> String {
    let mut s = format!("dconfig {}\n", cfg.model_id);
    if !cfg.product_digest.is_empty() {
        let _ = writeln!(s, "product-config {}", cfg.product_digest);
    }
    for a in &cfg.assignments {
        let v = match &a.value {
            DValue::Bool(b) => b.to_string(),
            DValue::Option(o) => quote(o),
        };
        let _ = writeln!(s, "{} {} {} = {v}", a.seq, a.origin.keyword(), a.decision);
    }
    s
}

pub fn dconfig_read(text: &str) -> Result<DmConfiguration, Diagnostic> {
    let mut cfg = DmConfiguration::default();
    let mut header = false;
    for (i, line) in text.lines().enumerate() {
        let n = i as u32 + 1;
        if header {
            if let Some(rest) = line.trim_start().strip_prefix("product-config") {
                let digest = rest.trim();
                if digest.is_empty() || !digest.chars().all(|c| c.is_ascii_hexdigit()) {
                    let col = (line.len() - line.trim_start().len()) as u32 + 1;
                    return Err(Diagnostic::error("syntax", "product-config needs a hex digest")
                        .at(Pos { line: n, column: col }));
                }
                cfg.product_digest = digest.to_string();
                continue;
            }
        }
        let toks = tokenize_at(line, Pos { line: n, column: 1 })?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(&toks, Pos { line: n, column: line.chars().count() as u32 + 1 });
        if !header {
            cur.expect_keyword("dconfig")?;
            cfg.model_id = cur.ident()?;
            header = true;
        } else {
            let seq = match cur.peek() {
                Some(Tok::Number(s)) => s.parse::<u64>().map_err(|_| cur.unexpected("a sequence number"))?,
                _ => return Err(cur.unexpected("a sequence number")),
            };
            cur.bump();
            let opos = cur.pos();
            let origin = match cur.ident()?.as_str() {
                "preset" => Origin::Preset,
                "user" => Origin::User,
                "propagated" => Origin::Propagated,
                o => return Err(Diagnostic::error("syntax", format!("unknown origin `{o}`")).at(opos)),
            };
            let decision = cur.ident()?;
            cur.expect(&Tok::Eq)?;
            let value = match cur.peek() {
                Some(Tok::Ident(w)) if w == "true" => DValue::Bool(true),
                Some(Tok::Ident(w)) if w == "false" => DValue::Bool(false),
                Some(Tok::Str(o)) if is_ident(o) => DValue::Option(o.clone()),
                _ => return Err(cur.unexpected("true, false or a quoted option")),
            };
            cur.bump();
            cfg.assignments.push(Assign { seq, origin, decision, value });
        }
        if !cur.at_end() {
            return Err(cur.unexpected("end of line"));
        }
    }
    Ok(cfg)
}

pub fn fmconfig_write(cfg: &FmConfiguration) -> String {
    let mut s = format!("config {}\n", cfg.model_id);
    for f in &cfg.selected {
        let _ = writeln!(s, "{f}");
    }
    s
}

pub fn fmconfig_read(text: &str) -> Result<FmConfiguration, Diagnostic> {
    let mut cfg = FmConfiguration::default();
    let mut header = false;
    for (i, line) in text.lines().enumerate() {
        let t = line.split("//").next().unwrap().trim();
        if t.is_empty() {
            continue;
        }
        let pos = Pos { line: i as u32 + 1, column: 1 };
        if !header {
            let id = t
                .strip_prefix("config ")
                .map(str::trim)
                .filter(|id| is_ident(id))
                .ok_or_else(|| Diagnostic::error("syntax", "expected `config <model>`").at(pos))?;
            cfg.model_id = id.to_string();
            header = true;
        } else if is_ident(t) {
            cfg.selected.insert(t.to_string());
        } else {
            return Err(Diagnostic::error("syntax", format!("invalid feature id `{t}`")).at(pos));
        }
    }
    Ok(cfg)
}
