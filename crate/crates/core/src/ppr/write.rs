use super::{PprModel, Process, Unit};
use crate::lex::quote;
use std::fmt::Write;

/// Serializes a model in canonical form: attribute definitions, products,
/// processes, resources, constraints, each in declaration order.
pub fn write_ppr(m: &PprModel) -> String {
    let mut blocks: Vec<String> = Vec::new();
    for a in m.attribute_defs.values() {
        blocks.push(entry(
            "Attribute",
            &a.id,
            vec![
                ("description".into(), quote(&a.description)),
                ("defaultValue".into(), quote(&a.default_value)),
                ("type".into(), quote(a.value_type.keyword())),
            ],
        ));
    }
    for u in m.products.values() {
        blocks.push(entry("Product", &u.id, unit_props(u, None)));
    }
    for p in m.processes.values() {
        blocks.push(entry("Process", &p.id, unit_props(&p.unit, Some(p))));
    }
    for u in m.resources.values() {
        blocks.push(entry("Resource", &u.id, unit_props(u, None)));
    }
    for c in m.constraints.values() {
        blocks.push(entry("Constraint", &c.id, vec![("definition".into(), quote(&c.definition()))]));
    }
    if blocks.is_empty() {
        return "\n".to_string();
    }
    blocks.join("\n")
}

fn strings(ids: &[String]) -> String {
    let items: Vec<String> = ids.iter().map(|s| quote(s)).collect();
    format!("[{}]", items.join(", "))
}

fn unit_props(u: &Unit, p: Option<&Process>) -> Vec<(String, String)> {
    let mut props = vec![("name".to_string(), quote(&u.name))];
    if u.is_abstract {
        props.push(("isAbstract".into(), "true".into()));
    }
    for (key, ids) in
        [("implements", &u.implements), ("requires", &u.requires), ("excludes", &u.excludes), ("children", &u.children)]
    {
        if !ids.is_empty() {
            props.push((key.into(), strings(ids)));
        }
    }
    if let Some(p) = p {
        if !p.inputs.is_empty() {
            let items: Vec<String> = p.inputs.iter().map(|i| format!("{{productId: {}}}", quote(i))).collect();
            props.push(("inputs".into(), format!("[{}]", items.join(", "))));
        }
        if !p.outputs.is_empty() {
            let items: Vec<String> = p
                .outputs
                .iter()
                .map(|o| {
                    let inner = format!("{{productId: {}}}", quote(&o.product));
                    if o.label.is_empty() {
                        inner
                    } else {
                        format!("{{{}: {inner}}}", key(&o.label))
                    }
                })
                .collect();
            props.push(("outputs".into(), format!("[{}]", items.join(", "))));
        }
        if !p.resources.is_empty() {
            let items: Vec<String> = p.resources.iter().map(|r| format!("{{resourceId: {}}}", quote(r))).collect();
            props.push(("resources".into(), format!("[{}]", items.join(", "))));
        }
    }
    for (k, v) in &u.attributes {
        props.push((key(k), v.to_string()));
    }
    props
}

fn key(k: &str) -> String {
    if crate::lex::is_ident(k) {
        k.to_string()
    } else {
        quote(k)
    }
}

fn entry(kw: &str, id: &str, props: Vec<(String, String)>) -> String {
    let mut s = format!("{kw} {}: {{", quote(id));
    if props.is_empty() {
        s.push_str("}\n");
        return s;
    }
    s.push('\n');
    let n = props.len();
    for (i, (k, v)) in props.into_iter().enumerate() {
        let _ = write!(s, "  {k}: {v}");
        s.push_str(if i + 1 < n { ",\n" } else { "\n" });
    }
    s.push_str("}\n");
    s
}
