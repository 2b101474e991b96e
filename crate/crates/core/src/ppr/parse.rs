use super::{AttributeDef, ConstraintDef, Output, PprModel, Process, Unit, Value, ValueType};
use crate::diag::{Diagnostic, Pos};
use crate::lex::{end_pos, tokenize, Cursor, Tok};
use crate::logic::{parse_expr_at, Dialect};

/// A value with the position of its first token.
struct Spanned {
    value: SValue,
    pos: Pos,
}

enum SValue {
    Str(String),
    Bool(bool),
    Number(String),
    Array(Vec<Spanned>),
    Object(Vec<(String, Spanned)>),
}

impl Spanned {
    fn plain(self) -> Value {
        match self.value {
            SValue::Str(s) => Value::Str(s),
            SValue::Bool(b) => Value::Bool(b),
            SValue::Number(n) => Value::Number(n),
            SValue::Array(xs) => Value::Array(xs.into_iter().map(Spanned::plain).collect()),
            SValue::Object(kv) => Value::Object(kv.into_iter().map(|(k, v)| (k, v.plain())).collect()),
        }
    }
}

pub fn parse_ppr(text: &str) -> Result<PprModel, Vec<Diagnostic>> {
    parse_ppr_with_warnings(text).map(|(m, _)| m)
}

/// Parses a model and also returns the warnings raised on the way.
pub fn parse_ppr_with_warnings(text: &str) -> Result<(PprModel, Vec<Diagnostic>), Vec<Diagnostic>> {
    let toks = tokenize(text).map_err(|d| vec![d])?;
    let mut cur = Cursor::new(&toks, end_pos(text));
    let mut r = Reader { model: PprModel::default(), diags: Vec::new(), pending_attrs: Vec::new() };
    while !cur.at_end() {
        if let Err(d) = r.entry(&mut cur) {
            r.diags.push(d);
            break;
        }
    }
    for (owner, key, pos) in std::mem::take(&mut r.pending_attrs) {
        if !r.model.attribute_defs.contains_key(&key) {
            r.diags.push(
                Diagnostic::warning("unknown-key", format!("unknown property `{key}`, kept as attribute"))
                    .at(pos)
                    .about(owner),
            );
        }
    }
    if r.diags.iter().any(Diagnostic::is_error) {
        return Err(r.diags);
    }
    Ok((r.model, r.diags))
}

struct Reader {
    model: PprModel,
    diags: Vec<Diagnostic>,
    /// Unknown keys awaiting the full set of attribute definitions.
    pending_attrs: Vec<(String, String, Pos)>,
}

fn value(cur: &mut Cursor<'_>) -> Result<Spanned, Diagnostic> {
    let pos = cur.pos();
    let v = match cur.peek() {
        Some(Tok::Str(s)) => {
            let s = s.clone();
            cur.bump();
            SValue::Str(s)
        }
        Some(Tok::Number(n)) => {
            let n = n.clone();
            cur.bump();
            SValue::Number(n)
        }
        Some(Tok::Ident(w)) if w == "true" || w == "false" => {
            let b = w == "true";
            cur.bump();
            SValue::Bool(b)
        }
        Some(Tok::LBracket) => {
            cur.bump();
            let mut xs = Vec::new();
            while !cur.eat(&Tok::RBracket) {
                xs.push(value(cur)?);
                if !cur.eat(&Tok::Comma) {
                    cur.expect(&Tok::RBracket)?;
                    break;
                }
            }
            SValue::Array(xs)
        }
        Some(Tok::LBrace) => {
            cur.bump();
            SValue::Object(props(cur)?.into_iter().map(|(k, _, v)| (k, v)).collect())
        }
        _ => return Err(cur.unexpected("a value")),
    };
    Ok(Spanned { value: v, pos })
}

/// `key: value` pairs up to and including the closing brace.
fn props(cur: &mut Cursor<'_>) -> Result<Vec<(String, Pos, Spanned)>, Diagnostic> {
    let mut out: Vec<(String, Pos, Spanned)> = Vec::new();
    while !cur.eat(&Tok::RBrace) {
        let pos = cur.pos();
        let key = match cur.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Str(s)) => s.clone(),
            _ => return Err(cur.unexpected("a property key or `}`")),
        };
        cur.bump();
        cur.expect(&Tok::Colon)?;
        let v = value(cur)?;
        if out.iter().any(|(k, _, _)| *k == key) {
            return Err(Diagnostic::error("duplicate-key", format!("duplicate property `{key}`")).at(pos));
        }
        out.push((key, pos, v));
        if !cur.eat(&Tok::Comma) {
            cur.expect(&Tok::RBrace)?;
            break;
        }
    }
    Ok(out)
}

fn type_error(what: &str, key: &str, pos: Pos) -> Diagnostic {
    Diagnostic::error("type", format!("`{key}` must be {what}")).at(pos)
}

fn string(v: Spanned, key: &str) -> Result<String, Diagnostic> {
    match v.value {
        SValue::Str(s) => Ok(s),
        _ => Err(type_error("a string", key, v.pos)),
    }
}

fn boolean(v: Spanned, key: &str) -> Result<bool, Diagnostic> {
    match v.value {
        SValue::Bool(b) => Ok(b),
        _ => Err(type_error("true or false", key, v.pos)),
    }
}

fn list(v: Spanned, key: &str) -> Result<Vec<Spanned>, Diagnostic> {
    match v.value {
        SValue::Array(xs) => Ok(xs),
        _ => Err(type_error("a list", key, v.pos)),
    }
}

fn id_list(v: Spanned, key: &str) -> Result<Vec<String>, Diagnostic> {
    list(v, key)?.into_iter().map(|x| string(x, key)).collect()
}

/// Accepts `"X"` or `{field: "X"}`.
fn reference(v: Spanned, key: &str, field: &str) -> Result<String, Diagnostic> {
    let pos = v.pos;
    match v.value {
        SValue::Str(s) => Ok(s),
        SValue::Object(mut kv) if kv.len() == 1 && kv[0].0 == field => string(kv.pop().unwrap().1, key),
        _ => Err(type_error(&format!("a string or {{{field}: ...}}"), key, pos)),
    }
}

/// Accepts `"X"`, `{productId: "X"}` or `{LABEL: {productId: "X"}}`.
fn output(v: Spanned) -> Result<Output, Diagnostic> {
    let pos = v.pos;
    match v.value {
        SValue::Object(mut kv) if kv.len() == 1 && kv[0].0 != "productId" => {
            let (label, inner) = kv.pop().unwrap();
            Ok(Output { label, product: reference(inner, "outputs", "productId")? })
        }
        value => {
            Ok(Output { label: String::new(), product: reference(Spanned { value, pos }, "outputs", "productId")? })
        }
    }
}

impl Reader {
    fn entry(&mut self, cur: &mut Cursor<'_>) -> Result<(), Diagnostic> {
        let pos = cur.pos();
        let kw = cur.ident().map_err(|_| cur.unexpected("an entry keyword"))?;
        if !matches!(kw.as_str(), "Product" | "Process" | "Resource" | "Constraint" | "Attribute") {
            return Err(Diagnostic::error(
                "syntax",
                format!("unknown keyword `{kw}`; expected Product, Process, Resource, Constraint or Attribute"),
            )
            .at(pos));
        }
        let id_pos = cur.pos();
        let id = cur.string()?;
        if !crate::lex::is_ident(&id) {
            return Err(Diagnostic::error("invalid-id", format!("`{id}` is not a valid identifier")).at(id_pos));
        }
        cur.expect(&Tok::Colon)?;
        cur.expect(&Tok::LBrace)?;
        let props = props(cur)?;
        let taken = match kw.as_str() {
            "Product" => self.model.products.contains_key(&id),
            "Process" => self.model.processes.contains_key(&id),
            "Resource" => self.model.resources.contains_key(&id),
            "Constraint" => self.model.constraints.contains_key(&id),
            _ => self.model.attribute_defs.contains_key(&id),
        };
        if taken {
            self.diags.push(Diagnostic::error("duplicate-id", format!("duplicate {kw} `{id}`")).at(id_pos).about(&id));
            return Ok(());
        }
        match kw.as_str() {
            "Product" | "Resource" => {
                let mut unit = Unit::new(&id);
                for (key, kpos, v) in props {
                    self.unit_prop(&mut unit, key, kpos, v)?;
                }
                if kw == "Product" {
                    self.model.products.insert(id, unit);
                } else {
                    self.model.resources.insert(id, unit);
                }
            }
            "Process" => {
                let mut p = Process::new(&id);
                for (key, kpos, v) in props {
                    match key.as_str() {
                        "inputs" => {
                            for x in list(v, &key)? {
                                p.inputs.push(reference(x, &key, "productId")?);
                            }
                        }
                        "outputs" => {
                            for x in list(v, &key)? {
                                p.outputs.push(output(x)?);
                            }
                        }
                        "resources" => {
                            for x in list(v, &key)? {
                                p.resources.push(reference(x, &key, "resourceId")?);
                            }
                        }
                        _ => self.unit_prop(&mut p.unit, key, kpos, v)?,
                    }
                }
                self.model.processes.insert(id, p);
            }
            "Constraint" => {
                let mut def = None;
                for (key, kpos, v) in props {
                    if key == "definition" {
                        let vpos = v.pos;
                        let text = string(v, &key)?;
                        def = Some(constraint(&id, &text, vpos)?);
                    } else {
                        self.diags.push(
                            Diagnostic::warning("unknown-key", format!("unknown constraint property `{key}` ignored"))
                                .at(kpos)
                                .about(&id),
                        );
                    }
                }
                let def = def.ok_or_else(|| {
                    Diagnostic::error("missing-key", "constraint needs a `definition`").at(id_pos).about(&id)
                })?;
                self.model.constraints.insert(id, def);
            }
            _ => {
                let mut a = AttributeDef {
                    id: id.clone(),
                    description: String::new(),
                    default_value: String::new(),
                    value_type: ValueType::String,
                };
                for (key, kpos, v) in props {
                    match key.as_str() {
                        "description" => a.description = string(v, &key)?,
                        "defaultValue" => a.default_value = string(v, &key)?,
                        "type" => {
                            let vpos = v.pos;
                            let t = string(v, &key)?;
                            a.value_type = ValueType::from_keyword(&t).ok_or_else(|| {
                                Diagnostic::error(
                                    "type",
                                    format!("unknown attribute type `{t}`; expected String, Number or Boolean"),
                                )
                                .at(vpos)
                            })?;
                        }
                        _ => self.diags.push(
                            Diagnostic::warning("unknown-key", format!("unknown attribute property `{key}` ignored"))
                                .at(kpos)
                                .about(&id),
                        ),
                    }
                }
                self.model.attribute_defs.insert(id, a);
            }
        }
        Ok(())
    }

    fn unit_prop(&mut self, u: &mut Unit, key: String, kpos: Pos, v: Spanned) -> Result<(), Diagnostic> {
        match key.as_str() {
            "name" => u.name = string(v, &key)?,
            "isAbstract" => u.is_abstract = boolean(v, &key)?,
            "implements" => u.implements = id_list(v, &key)?,
            "requires" => u.requires = id_list(v, &key)?,
            "excludes" => u.excludes = id_list(v, &key)?,
            "children" => u.children = id_list(v, &key)?,
            _ => {
                self.pending_attrs.push((u.id.clone(), key.clone(), kpos));
                u.attributes.insert(key, v.plain());
            }
        }
        Ok(())
    }
}

fn constraint(id: &str, text: &str, pos: Pos) -> Result<ConstraintDef, Diagnostic> {
    // positions inside the string literal are offset by the opening quote;
    // escapes are rare enough that the offset is treated as exact
    let origin = Pos { line: pos.line, column: pos.column + 1 };
    let Some(arrow) = text.find("->") else {
        return Err(Diagnostic::error("syntax", "constraint definition must have the form `ids -> expression`")
            .at(pos)
            .about(id));
    };
    let mut scope = Vec::new();
    for part in text[..arrow].split(',') {
        let s = part.trim();
        if !crate::lex::is_ident(s) {
            return Err(Diagnostic::error("syntax", format!("invalid scope entry `{s}`")).at(origin).about(id));
        }
        scope.push(s.to_string());
    }
    let rest = &text[arrow + 2..];
    let expr_origin = Pos { line: origin.line, column: origin.column + text[..arrow + 2].chars().count() as u32 };
    let expr = parse_expr_at(rest, Dialect::Ppr, expr_origin).map_err(|d| d.about(id))?;
    Ok(ConstraintDef { id: id.to_string(), scope, expr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Formula;

    #[test]
    fn empty_source_is_empty_model() {
        assert!(parse_ppr("").unwrap().is_empty());
        assert!(parse_ppr("  // only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn process_shapes() {
        let m = parse_ppr(
            r#"
            Process "P": {
              inputs: [ {productId: "A"}, "B" ],
              outputs: [ {OP1: {productId: "C"}}, "D", {productId: "E"} ],
              resources: [ { resourceId: "R" }, "S" ],
            }
            "#,
        )
        .unwrap();
        let p = &m.processes["P"];
        assert_eq!(p.inputs, vec!["A", "B"]);
        assert_eq!(
            p.outputs,
            vec![
                Output { label: "OP1".into(), product: "C".into() },
                Output { label: "".into(), product: "D".into() },
                Output { label: "".into(), product: "E".into() },
            ]
        );
        assert_eq!(p.resources, vec!["R", "S"]);
        assert_eq!(p.name, "P");
    }

    #[test]
    fn unknown_keys_become_attributes() {
        let (m, warnings) = parse_ppr_with_warnings(
            r#"Product "A": { color: "red", weight: 3 }
               Process "P": { deltaFile: "!DLock1" }
               Attribute "deltaFile": { description: "d", defaultValue: "", type: "String" }"#,
        )
        .unwrap();
        assert_eq!(m.products["A"].attributes["color"], Value::Str("red".into()));
        assert_eq!(m.products["A"].attributes["weight"], Value::Number("3".into()));
        assert_eq!(m.processes["P"].attribute_str("deltaFile"), Some("!DLock1"));
        let keys: Vec<_> = warnings.iter().map(|w| w.message.clone()).collect();
        assert_eq!(keys.len(), 2, "{keys:?}");
        assert!(warnings.iter().all(|w| !w.is_error()));
    }

    #[test]
    fn constraint_definition() {
        let m = parse_ppr(r#"Constraint "C1": { definition: "Lock1,Pipe2,Pipe3 -> Lock1 implies Pipe2 OR Pipe3" }"#)
            .unwrap();
        let c = &m.constraints["C1"];
        assert_eq!(c.scope, vec!["Lock1", "Pipe2", "Pipe3"]);
        assert_eq!(
            c.expr,
            Formula::implies(Formula::var("Lock1"), Formula::Or(vec![Formula::var("Pipe2"), Formula::var("Pipe3")]))
        );
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_ppr("Product \"A\": { name: \"x\"\nProduct").unwrap_err();
        assert_eq!(err[0].pos, Some(Pos { line: 2, column: 1 }));
        let err = parse_ppr("Widget \"A\": {}").unwrap_err();
        assert!(err[0].message.contains("unknown keyword"));
        let err = parse_ppr("Product \"A\": {}\nProduct \"A\": {}").unwrap_err();
        assert_eq!(err[0].rule, "duplicate-id");
        assert_eq!(err[0].pos, Some(Pos { line: 2, column: 9 }));
        let err = parse_ppr(r#"Constraint "C": { definition: "a -> a AND" }"#).unwrap_err();
        assert_eq!(err[0].pos, Some(Pos { line: 1, column: 42 }));
    }

    #[test]
    fn wrong_value_types_are_errors() {
        let err = parse_ppr(r#"Product "A": { isAbstract: "yes" }"#).unwrap_err();
        assert_eq!(err[0].rule, "type");
        let err = parse_ppr(r#"Product "A": { implements: "B" }"#).unwrap_err();
        assert_eq!(err[0].rule, "type");
    }
}
