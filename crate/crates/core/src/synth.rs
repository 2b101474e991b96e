//! Seeded generator of random but well-formed PPR models, for property
//! tests and benchmarks.

use crate::ppr::{parse_ppr, PprModel};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::fmt::Write;

/// Size knobs for [`random_ppr_source`].
#[derive(Clone, Copy, Debug)]
pub struct SynthParams {
    pub max_free: usize,
    pub max_groups: usize,
    pub max_members: usize,
    pub max_optional: usize,
    pub max_steps: usize,
    pub max_resource_groups: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            max_free: 3,
            max_groups: 3,
            max_members: 3,
            max_optional: 2,
            max_steps: 4,
            max_resource_groups: 3,
        }
    }
}

fn list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("\"{s}\"")).collect();
    format!("[{}]", quoted.join(", "))
}

/// PPR source text for `seed`. Products come as free parts, groups of
/// variants (alternative when they exclude each other) and optional
/// add-ons; every part has an insert step, followed by assembly steps
/// that require earlier ones.
pub fn random_ppr_source(seed: u64, p: SynthParams) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut s = String::new();
    let mut components: Vec<String> = Vec::new();
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();

    for i in 0..rng.gen_range(0..=p.max_free) {
        let id = format!("P{i}");
        let _ = writeln!(s, "Product \"{id}\": {{ name: \"{id}\" }}");
        components.push(id);
    }
    for g in 0..rng.gen_range(0..=p.max_groups) {
        let gid = format!("G{g}");
        let _ = writeln!(s, "Product \"{gid}\": {{ name: \"{gid}\", isAbstract: true }}");
        let n = rng.gen_range(2..=p.max_members.max(2));
        let members: Vec<String> = (0..n).map(|j| format!("G{g}_{j}")).collect();
        let alternative = rng.gen_bool(0.5);
        for (j, m) in members.iter().enumerate() {
            let mut props = format!("name: \"{m}\", implements: [\"{gid}\"]");
            if alternative && j + 1 < n {
                let _ = write!(props, ", excludes: {}", list(&members[j + 1..]));
            }
            let _ = writeln!(s, "Product \"{m}\": {{ {props} }}");
        }
        components.extend(members.iter().cloned());
        groups.push((gid, members));
    }
    for o in 0..rng.gen_range(0..=p.max_optional) {
        let (oid, base, extra) = (format!("O{o}"), format!("O{o}_base"), format!("O{o}_opt"));
        let _ = writeln!(s, "Product \"{oid}\": {{ name: \"{oid}\", isAbstract: true, children: [\"{base}\"] }}");
        let _ = writeln!(s, "Product \"{base}\": {{ name: \"{base}\" }}");
        let _ = writeln!(s, "Product \"{extra}\": {{ name: \"{extra}\", implements: [\"{oid}\"] }}");
        components.push(base);
        components.push(extra);
    }
    // occasional product constraint between two group members
    let mut constraints = 0;
    if groups.len() >= 2 && rng.gen_bool(0.5) {
        let a = groups[0].1.choose(&mut rng).unwrap().clone();
        let b = groups[1].1.choose(&mut rng).unwrap().clone();
        let _ = writeln!(s, "Constraint \"C{constraints}\": {{ definition: \"{a},{b} -> {a} implies {b}\" }}");
        constraints += 1;
    }

    let mut resources: Vec<String> = Vec::new();
    for r in 0..rng.gen_range(0..=p.max_resource_groups) {
        let rid = format!("R{r}");
        let _ = writeln!(s, "Resource \"{rid}\": {{ name: \"{rid}\", isAbstract: true }}");
        resources.push(rid.clone());
        for k in 0..rng.gen_range(1..=3) {
            let m = format!("R{r}_{k}");
            let _ = writeln!(s, "Resource \"{m}\": {{ name: \"{m}\", implements: [\"{rid}\"] }}");
            resources.push(m);
        }
    }
    if rng.gen_bool(0.3) {
        let _ = writeln!(s, "Resource \"Spare\": {{ name: \"Spare\" }}");
        resources.push("Spare".into());
    }

    let always: Vec<String> = components
        .iter()
        .filter(|c| c.starts_with('P') || c.ends_with("_base"))
        .cloned()
        .chain(groups.iter().map(|(g, _)| g.clone()))
        .collect();
    let mut steps: Vec<String> = Vec::new();
    let uses = |rng: &mut StdRng| -> String {
        match resources.choose(rng) {
            Some(r) if rng.gen_bool(0.7) => format!(", resources: [\"{r}\"]"),
            _ => String::new(),
        }
    };
    for (gid, members) in &groups {
        let abs = format!("Insert{gid}");
        let _ = writeln!(s, "Process \"{abs}\": {{ name: \"{abs}\", isAbstract: true }}");
        for m in members {
            let id = format!("Insert{m}");
            let res = uses(&mut rng);
            let _ =
                writeln!(s, "Process \"{id}\": {{ name: \"{id}\", implements: [\"{abs}\"], inputs: [\"{m}\"]{res} }}");
        }
        steps.push(abs);
    }
    for c in &components {
        if groups.iter().any(|(_, ms)| ms.contains(c)) {
            continue;
        }
        let id = format!("Insert{c}");
        let res = uses(&mut rng);
        let _ = writeln!(s, "Process \"{id}\": {{ name: \"{id}\", inputs: [\"{c}\"]{res} }}");
        steps.push(id);
    }
    for k in 0..rng.gen_range(0..=p.max_steps) {
        let id = format!("Assemble{k}");
        // only parts and steps present in every configuration, so the
        // step can always follow
        let inputs: Vec<String> = always.iter().filter(|_| rng.gen_bool(0.35)).take(2).cloned().collect();
        let requires: Vec<String> =
            steps.iter().filter(|st| !st.ends_with("_opt") && rng.gen_bool(0.4)).take(3).cloned().collect();
        let out = format!("Out{k}");
        let _ = writeln!(s, "Product \"{out}\": {{ name: \"{out}\" }}");
        let res = uses(&mut rng);
        let _ = writeln!(
            s,
            "Process \"{id}\": {{ name: \"{id}\", inputs: {}, requires: {}, outputs: [{{OUT: {{productId: \"{out}\"}}}}]{res} }}",
            list(&inputs),
            list(&requires)
        );
        steps.push(id);
    }
    // occasional process-to-resource constraint, a cross-model CDC
    let concrete: Vec<&String> = resources.iter().filter(|r| r.contains('_') || *r == "Spare").collect();
    if let (Some(step), Some(r)) = (steps.iter().find(|s| s.starts_with("Assemble")), concrete.first()) {
        if rng.gen_bool(0.5) {
            let _ =
                writeln!(s, "Constraint \"C{constraints}\": {{ definition: \"{step},{r} -> {step} implies {r}\" }}");
        }
    }
    s
}

/// Parsed form of [`random_ppr_source`].
pub fn random_ppr(seed: u64, p: SynthParams) -> PprModel {
    let src = random_ppr_source(seed, p);
    parse_ppr(&src).unwrap_or_else(|e| panic!("generated model {seed} does not parse: {e:?}\n{src}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppr::validate_model;

    #[test]
    fn generated_models_validate() {
        for seed in 0..100 {
            let m = random_ppr(seed, SynthParams::default());
            let errors: Vec<_> = validate_model(&m).into_iter().filter(|d| d.is_error()).collect();
            assert!(errors.is_empty(), "seed {seed}: {errors:?}\n{}", random_ppr_source(seed, SynthParams::default()));
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(random_ppr_source(7, SynthParams::default()), random_ppr_source(7, SynthParams::default()));
    }
}
