use super::fbn::{endpoint, Connection, FbNetwork};
use super::DeltaError;
use crate::diag::Diagnostic;
use crate::lex::{end_pos, tokenize, Cursor, Tok};
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DeltaOp {
    RemoveElement { name: String },
    AddBlock { name: String, block_type: String },
    AddEventConnection { connection: Connection },
    RemoveEventConnection { connection: Connection },
}

impl fmt::Display for DeltaOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaOp::RemoveElement { name } => write!(f, "<Remove> NetworkElement name={name};"),
            DeltaOp::AddBlock { name, block_type } => write!(f, "<Add> FB name={name} type={block_type};"),
            DeltaOp::AddEventConnection { connection: c } => write!(f, "<Add> EventConnection {} {};", c.src, c.dst),
            DeltaOp::RemoveEventConnection { connection: c } => {
                write!(f, "<Remove> EventConnection {} {};", c.src, c.dst)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaModel {
    pub name: String,
    pub uses: String,
    pub ops: Vec<DeltaOp>,
}

fn keyed(cur: &mut Cursor, key: &str) -> Result<String, Diagnostic> {
    cur.expect_keyword(key)?;
    cur.expect(&Tok::Eq)?;
    cur.ident()
}

pub fn parse_delta(text: &str) -> Result<DeltaModel, DeltaError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_pos(text));
    cur.expect_keyword("delta")?;
    let name = cur.ident()?;
    cur.expect(&Tok::Semi)?;
    cur.expect_keyword("uses")?;
    let uses = cur.ident()?;
    cur.expect(&Tok::Semi)?;
    cur.expect(&Tok::LBrace)?;
    let mut ops = Vec::new();
    while !cur.eat(&Tok::RBrace) {
        cur.expect(&Tok::Lt)?;
        let pos = cur.pos();
        let verb = cur.ident()?;
        if verb != "Add" && verb != "Remove" {
            return Err(Diagnostic::error("syntax", format!("unknown operation <{verb}>")).at(pos).into());
        }
        cur.expect(&Tok::Gt)?;
        let pos = cur.pos();
        let kind = cur.ident()?;
        let op = match (verb.as_str(), kind.as_str()) {
            ("Remove", "NetworkElement") => DeltaOp::RemoveElement { name: keyed(&mut cur, "name")? },
            ("Add", "FB") => {
                let name = keyed(&mut cur, "name")?;
                let block_type = keyed(&mut cur, "type")?;
                DeltaOp::AddBlock { name, block_type }
            }
            (_, "EventConnection") => {
                let src = endpoint(&mut cur)?;
                let dst = endpoint(&mut cur)?;
                let connection = Connection { src, dst };
                if verb == "Add" {
                    DeltaOp::AddEventConnection { connection }
                } else {
                    DeltaOp::RemoveEventConnection { connection }
                }
            }
            _ => {
                return Err(Diagnostic::error("syntax", format!("<{verb}> does not take {kind}")).at(pos).into());
            }
        };
        cur.expect(&Tok::Semi)?;
        ops.push(op);
    }
    if !cur.at_end() {
        return Err(cur.unexpected("end of input").into());
    }
    Ok(DeltaModel { name, uses, ops })
}

pub fn write_delta(d: &DeltaModel) -> String {
    let mut s = format!("delta {};\nuses {};\n{{\n", d.name, d.uses);
    for op in &d.ops {
        let _ = writeln!(s, "  {op}");
    }
    s.push_str("}\n");
    s
}

/// Applies the operations in order. Removing a block drops its
/// connections, with one warning each.
pub fn apply_delta(net: &FbNetwork, delta: &DeltaModel) -> Result<(FbNetwork, Vec<Diagnostic>), DeltaError> {
    if delta.uses != net.app_name {
        return Err(DeltaError::UsesMismatch {
            delta: delta.name.clone(),
            uses: delta.uses.clone(),
            app: net.app_name.clone(),
        });
    }
    let fail = |reason: String| DeltaError::Apply { delta: delta.name.clone(), reason };
    let mut out = net.clone();
    let mut warnings = Vec::new();
    for op in &delta.ops {
        match op {
            DeltaOp::RemoveElement { name } => {
                if out.blocks.shift_remove(name).is_none() {
                    return Err(fail(format!("no element named {name}")));
                }
                out.event_connections.retain(|c| {
                    let attached = c.src.block == *name || c.dst.block == *name;
                    if attached {
                        warnings.push(
                            Diagnostic::warning("dropped-connection", format!("removing {name} drops {c}"))
                                .about(&delta.name),
                        );
                    }
                    !attached
                });
            }
            DeltaOp::AddBlock { name, block_type } => {
                if out.blocks.contains_key(name) {
                    return Err(fail(format!("block {name} already exists")));
                }
                out.blocks.insert(name.clone(), block_type.clone());
            }
            DeltaOp::AddEventConnection { connection: c } => {
                for e in [&c.src, &c.dst] {
                    if !out.blocks.contains_key(&e.block) {
                        return Err(fail(format!("connection {c} needs missing block {}", e.block)));
                    }
                }
                if !out.event_connections.insert(c.clone()) {
                    return Err(fail(format!("connection {c} already exists")));
                }
            }
            DeltaOp::RemoveEventConnection { connection: c } => {
                if !out.event_connections.shift_remove(c) {
                    return Err(fail(format!("no connection {c}")));
                }
            }
        }
    }
    Ok((out, warnings))
}
