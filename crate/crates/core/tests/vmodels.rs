use pprvari_core::logic::{Assignment, Formula};
use pprvari_core::vmodels::{
    cdc_read, cdc_write, count_configurations, dconfig_read, dconfig_write, dm_read, dm_write, fm_read, fm_write,
    validate_fm_config, Assign, CdcRule, DValue, Decision, DecisionModel, DmConfiguration, Feature, FeatureModel,
    FmConfiguration, GroupKind, Origin, Range, Variability,
};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn arb_formula(vars: Vec<String>) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        8 => prop::sample::select(vars).prop_map(Formula::var),
        1 => Just(Formula::True),
        1 => Just(Formula::False),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::negate),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

#[derive(Clone, Debug)]
struct RawFeature {
    parent: usize,
    is_abstract: bool,
    optional: bool,
    group: u8,
    renamed: bool,
    attribute: Option<String>,
}

fn raw_feature() -> impl Strategy<Value = RawFeature> {
    (
        any::<usize>(),
        any::<bool>(),
        any::<bool>(),
        0u8..4,
        prop::bool::weighted(0.2),
        prop::option::weighted(0.2, "[ -~]{0,8}"),
    )
        .prop_map(|(parent, is_abstract, optional, group, renamed, attribute)| RawFeature {
            parent,
            is_abstract,
            optional,
            group,
            renamed,
            attribute,
        })
}

fn build_fm(raw: &[RawFeature], constraints: Vec<Formula>) -> FeatureModel {
    let id = |i: usize| format!("f{i}");
    let mut fm = FeatureModel::with_root("m", "f0");
    fm.features.get_mut("f0").unwrap().is_abstract = raw[0].is_abstract;
    for (i, r) in raw.iter().enumerate().skip(1) {
        let parent = id(r.parent % i);
        let v = if r.optional { Variability::Optional } else { Variability::Mandatory };
        let mut f = Feature::new(id(i), Some(&parent), v);
        f.is_abstract = r.is_abstract;
        if r.renamed {
            f.name = format!("Feature {i}");
        }
        if let Some(a) = &r.attribute {
            f.attributes.insert("note".into(), a.clone());
        }
        fm.add(f);
    }
    for (i, r) in raw.iter().enumerate() {
        let has_kids = fm.children(&id(i)).next().is_some();
        let group = match r.group {
            _ if !has_kids => None,
            0 => Some(GroupKind::Or),
            1 => Some(GroupKind::Alternative),
            _ => None,
        };
        fm.features.get_mut(&id(i)).unwrap().group = group;
    }
    let grouped: Vec<String> = fm
        .features
        .values()
        .filter(|f| f.parent.as_ref().is_some_and(|p| fm.features[p].group.is_some()))
        .map(|f| f.id.clone())
        .collect();
    for g in grouped {
        fm.features.get_mut(&g).unwrap().variability = Variability::Optional;
    }
    fm.constraints = constraints;
    fm.canonicalize();
    fm
}

fn arb_fm(max: usize) -> impl Strategy<Value = FeatureModel> {
    prop::collection::vec(raw_feature(), 1..=max).prop_flat_map(|raw| {
        let vars: Vec<String> = (0..raw.len()).map(|i| format!("f{i}")).collect();
        prop::collection::vec(arb_formula(vars), 0..3).prop_map(move |cs| build_fm(&raw, cs))
    })
}

/// Direct reading of the feature-model semantics, independent of the
/// formula translation.
fn oracle_valid(fm: &FeatureModel, sel: &BTreeSet<String>) -> bool {
    if !sel.contains(&fm.root) {
        return false;
    }
    for f in fm.features.values() {
        if let Some(p) = &f.parent {
            let parent = &fm.features[p];
            if sel.contains(&f.id) && !sel.contains(p) {
                return false;
            }
            if parent.group.is_none()
                && f.variability == Variability::Mandatory
                && sel.contains(p)
                && !sel.contains(&f.id)
            {
                return false;
            }
        }
        if let (Some(g), true) = (f.group, sel.contains(&f.id)) {
            let n = fm.features.values().filter(|c| c.parent.as_ref() == Some(&f.id) && sel.contains(&c.id)).count();
            if (g == GroupKind::Or && n == 0) || (g == GroupKind::Alternative && n != 1) {
                return false;
            }
        }
    }
    let a: Assignment = fm.features.keys().map(|k| (k.clone(), sel.contains(k))).collect();
    fm.constraints.iter().all(|c| c.eval(&a) == Ok(true))
}

fn subsets(fm: &FeatureModel) -> impl Iterator<Item = BTreeSet<String>> + '_ {
    let ids: Vec<String> = fm.features.keys().cloned().collect();
    (0..1u32 << ids.len())
        .map(move |bits| ids.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, s)| s.clone()).collect())
}

fn arb_dm() -> impl Strategy<Value = DecisionModel> {
    let decision = (
        prop::option::weighted(0.4, prop::collection::btree_set("o[a-z0-9_]{0,5}", 1..4)),
        "[ -~]{0,16}",
        prop::option::weighted(0.2, "[ -~]{0,8}"),
    );
    prop::collection::vec(decision, 1..10).prop_flat_map(|raw| {
        let mut atoms: Vec<Formula> = Vec::new();
        for (i, (opts, _, _)) in raw.iter().enumerate() {
            atoms.push(Formula::var(format!("d{i}")));
            for o in opts.iter().flatten() {
                atoms.push(Formula::VarEq(format!("d{i}"), o.clone()));
            }
        }
        let n = raw.len();
        let leaf = prop::sample::select(atoms);
        let formula = leaf.prop_recursive(2, 8, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::negate),
                prop::collection::vec(inner.clone(), 2..3).prop_map(Formula::And),
                prop::collection::vec(inner.clone(), 2..3).prop_map(Formula::Or),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
            ]
        });
        let parts = prop::collection::vec(
            (prop_oneof![Just(Formula::True), formula.clone()], prop::collection::vec(formula, 0..3)),
            n,
        );
        parts.prop_map(move |parts| {
            let mut dm = DecisionModel::new("m_process");
            for (i, ((opts, question, attr), (visibility, rules))) in raw.iter().zip(parts).enumerate() {
                let mut d = Decision::boolean(format!("d{i}"), question.clone());
                if let Some(o) = opts {
                    d.range = Range::Enumeration(o.iter().cloned().collect());
                }
                d.visibility = visibility;
                d.rules = rules;
                if let Some(a) = attr {
                    d.attributes.insert("kind".into(), a.clone());
                }
                dm.add(d);
            }
            dm
        })
    })
}

fn arb_cdcs() -> impl Strategy<Value = Vec<CdcRule>> {
    let refs: Vec<String> = ["p#A", "p#B", "q#X1", "q#Y_2", "r#R"].iter().map(|s| s.to_string()).collect();
    prop::collection::vec((arb_formula(refs.clone()), arb_formula(refs)).prop_map(|(l, r)| CdcRule::new(l, r)), 0..6)
}

fn arb_dconfig() -> impl Strategy<Value = DmConfiguration> {
    let value = prop_oneof![any::<bool>().prop_map(DValue::Bool), "[A-Z][A-Za-z0-9_]{0,6}".prop_map(DValue::Option)];
    let origin = prop::sample::select(vec![Origin::Preset, Origin::User, Origin::Propagated]);
    (
        prop::option::of("[0-9a-f]{8,64}"),
        prop::collection::vec((1u64..5, origin, "[A-Z][A-Za-z0-9_]{0,6}", value), 0..12),
    )
        .prop_map(|(digest, raw)| {
            let mut seq = 0;
            let assignments = raw
                .into_iter()
                .map(|(step, origin, decision, value)| {
                    seq += step;
                    Assign { seq, origin, decision, value }
                })
                .collect();
            DmConfiguration { model_id: "m_process".into(), product_digest: digest.unwrap_or_default(), assignments }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fm_round_trips(fm in arb_fm(30)) {
        prop_assert!(fm.check().is_empty());
        let text = fm_write(&fm);
        let back = fm_read(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(&back, &fm, "{}", text);
        prop_assert_eq!(fm_write(&back), text);
    }

    #[test]
    fn dm_round_trips(dm in arb_dm()) {
        prop_assert!(dm.check().is_empty());
        let text = dm_write(&dm);
        let back = dm_read(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(back, dm, "{}", text);
    }

    #[test]
    fn cdc_round_trips(rules in arb_cdcs()) {
        let text = cdc_write(&rules);
        let back = cdc_read(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(back, rules, "{}", text);
    }

    #[test]
    fn dconfig_round_trips(cfg in arb_dconfig()) {
        let text = dconfig_write(&cfg);
        let back = dconfig_read(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(back, cfg, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn config_count_matches_enumeration(fm in arb_fm(12)) {
        let concrete: Vec<String> = fm.concrete_features().map(|f| f.id.clone()).collect();
        let projected: BTreeSet<Vec<String>> = subsets(&fm)
            .filter(|s| oracle_valid(&fm, s))
            .map(|s| concrete.iter().filter(|c| s.contains(*c)).cloned().collect())
            .collect();
        prop_assert_eq!(count_configurations(&fm, usize::MAX), (projected.len(), false));
    }

    #[test]
    fn validation_matches_oracle(fm in arb_fm(15), picks in prop::collection::vec(any::<bool>(), 15)) {
        let picked: BTreeSet<String> = fm.features.keys().zip(&picks).filter(|(_, p)| **p).map(|(k, _)| k.clone()).collect();
        let mut closed = picked.clone();
        for p in &picked {
            closed.extend(fm.ancestors(p).into_iter().map(str::to_string));
        }
        let got = validate_fm_config(&fm, &FmConfiguration::new("m", picked));
        prop_assert_eq!(got.is_ok(), oracle_valid(&fm, &closed), "{:?}", got);
    }
}
