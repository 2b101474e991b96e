use super::DeltaError;
use crate::diag::Diagnostic;
use crate::lex::{end_pos, tokenize, Cursor, Tok};
use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write};

/// `block.port`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub block: String,
    pub port: String,
}

impl Endpoint {
    pub fn new(block: impl Into<String>, port: impl Into<String>) -> Self {
        Endpoint { block: block.into(), port: port.into() }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.block, self.port)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Connection {
    pub src: Endpoint,
    pub dst: Endpoint,
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)
    }
}

/// Function blocks by name, with their type, and the event wiring.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FbNetwork {
    pub app_name: String,
    pub blocks: IndexMap<String, String>,
    pub event_connections: IndexSet<Connection>,
}

impl FbNetwork {
    pub fn new(app_name: &str) -> Self {
        FbNetwork { app_name: app_name.to_string(), ..Default::default() }
    }

    /// Whether some block is named `id` or has type `id`.
    pub fn has_element(&self, id: &str) -> bool {
        self.blocks.contains_key(id) || self.blocks.values().any(|t| t == id)
    }

    pub fn check(&self) -> Result<(), DeltaError> {
        for c in &self.event_connections {
            for e in [&c.src, &c.dst] {
                if !self.blocks.contains_key(&e.block) {
                    return Err(DeltaError::Dangling { connection: c.to_string(), block: e.block.clone() });
                }
            }
        }
        Ok(())
    }
}

pub(super) fn endpoint(cur: &mut Cursor) -> Result<Endpoint, Diagnostic> {
    let block = cur.ident()?;
    cur.expect(&Tok::Dot)?;
    let port = cur.ident()?;
    Ok(Endpoint { block, port })
}

/// Parses `application A { fb X : T; event X.CNF -> Y.REQ; }`.
pub fn parse_fbn(text: &str) -> Result<FbNetwork, DeltaError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_pos(text));
    cur.expect_keyword("application")?;
    let mut net = FbNetwork::new(&cur.ident()?);
    cur.expect(&Tok::LBrace)?;
    while !cur.eat(&Tok::RBrace) {
        let pos = cur.pos();
        if cur.eat_keyword("fb") {
            let name = cur.ident()?;
            cur.expect(&Tok::Colon)?;
            let ty = cur.ident()?;
            cur.expect(&Tok::Semi)?;
            if net.blocks.insert(name.clone(), ty).is_some() {
                return Err(DeltaError::DuplicateBlock(name));
            }
        } else if cur.eat_keyword("event") {
            let src = endpoint(&mut cur)?;
            cur.expect(&Tok::Arrow)?;
            let dst = endpoint(&mut cur)?;
            cur.expect(&Tok::Semi)?;
            let c = Connection { src, dst };
            if !net.event_connections.insert(c.clone()) {
                return Err(Diagnostic::error("duplicate", format!("connection {c} listed twice")).at(pos).into());
            }
        } else {
            return Err(cur.unexpected("`fb`, `event` or `}`").into());
        }
    }
    if !cur.at_end() {
        return Err(cur.unexpected("end of input").into());
    }
    net.check()?;
    Ok(net)
}

pub fn write_fbn(net: &FbNetwork) -> String {
    let mut s = format!("application {} {{\n", net.app_name);
    for (name, ty) in &net.blocks {
        let _ = writeln!(s, "  fb {name} : {ty};");
    }
    for c in &net.event_connections {
        let _ = writeln!(s, "  event {c};");
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_network() {
        let net = parse_fbn("application A { fb X : T; fb Y : U; event X.CNF -> Y.REQ; }").unwrap();
        assert_eq!(net.blocks.len(), 2);
        assert_eq!(net.event_connections.len(), 1);
        assert_eq!(parse_fbn(&write_fbn(&net)).unwrap(), net);
    }

    #[test]
    fn empty_and_broken() {
        assert!(parse_fbn("application A { }").unwrap().blocks.is_empty());
        assert!(matches!(
            parse_fbn("application A { fb X : T; event X.CNF -> Y.REQ; }"),
            Err(DeltaError::Dangling { .. })
        ));
        assert!(matches!(parse_fbn("application A { fb X : T; fb X : U; }"), Err(DeltaError::DuplicateBlock(_))));
        assert!(matches!(parse_fbn("application A { block X; }"), Err(DeltaError::Syntax(_))));
    }
}
