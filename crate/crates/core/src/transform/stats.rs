use super::{components, TransformOutput};
use crate::ppr::PprModel;
use crate::vmodels::{count_configurations, DecisionModel, FeatureModel, GroupKind};
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write};

/// Cap on counted product configurations.
pub const CONFIG_LIMIT: usize = 100_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PprStats {
    pub n_products: usize,
    pub n_product_components: usize,
    pub n_processes: usize,
    pub n_resources: usize,
    pub n_constraints: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmStats {
    pub n_features: usize,
    pub n_xor: usize,
    pub n_or: usize,
    /// Parent-child edges.
    pub n_tree: usize,
    pub n_cross_tree: usize,
    pub tree_height: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_configs: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub configs_truncated: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmStats {
    pub n_decisions: usize,
    pub n_rules: usize,
    /// Visibility conditions other than literal true/false.
    pub n_visibility: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub ppr: PprStats,
    pub product_fm: FmStats,
    pub process_dm: DmStats,
    pub resource_fm: FmStats,
    pub n_cdc_rules: usize,
}

fn fm_stats(fm: &FeatureModel) -> FmStats {
    let groups = |k| fm.features.values().filter(|f| f.group == Some(k)).count();
    FmStats {
        n_features: fm.features.len(),
        n_xor: groups(GroupKind::Alternative),
        n_or: groups(GroupKind::Or),
        n_tree: fm.features.values().filter(|f| f.parent.is_some()).count(),
        n_cross_tree: fm.constraints.len(),
        tree_height: fm.features.keys().map(|f| fm.depth(f)).max().unwrap_or(0),
        n_configs: None,
        configs_truncated: false,
    }
}

fn dm_stats(dm: &DecisionModel) -> DmStats {
    DmStats {
        n_decisions: dm.decisions.len(),
        n_rules: dm.all_rules().count(),
        n_visibility: dm
            .decisions
            .values()
            .filter(|d| !d.visibility.is_literal_true() && !d.visibility.is_literal_false())
            .count(),
    }
}

pub fn model_statistics(ppr: &PprModel, out: &TransformOutput) -> StatsReport {
    model_statistics_with_limit(ppr, out, CONFIG_LIMIT)
}

/// Like [`model_statistics`], counting at most `limit` product
/// configurations.
pub fn model_statistics_with_limit(ppr: &PprModel, out: &TransformOutput, limit: usize) -> StatsReport {
    let mut product_fm = fm_stats(&out.product_fm);
    let (n, truncated) = count_configurations(&out.product_fm, limit);
    product_fm.n_configs = Some(n);
    product_fm.configs_truncated = truncated;
    StatsReport {
        ppr: PprStats {
            n_products: ppr.products.len(),
            n_product_components: components(ppr).len(),
            n_processes: ppr.processes.len(),
            n_resources: ppr.resources.len(),
            n_constraints: ppr.constraints.len(),
        },
        product_fm,
        process_dm: dm_stats(&out.process_dm),
        resource_fm: fm_stats(&out.resource_fm),
        n_cdc_rules: out.cdcs.len(),
    }
}

impl StatsReport {
    /// One `section.key value` line per figure.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.ppr;
        for (k, v) in [
            ("products", p.n_products),
            ("product_components", p.n_product_components),
            ("processes", p.n_processes),
            ("resources", p.n_resources),
            ("constraints", p.n_constraints),
        ] {
            let _ = writeln!(s, "ppr.{k} {v}");
        }
        for (name, fm) in [("product_fm", &self.product_fm), ("resource_fm", &self.resource_fm)] {
            for (k, v) in [
                ("features", fm.n_features),
                ("xor_groups", fm.n_xor),
                ("or_groups", fm.n_or),
                ("tree_edges", fm.n_tree),
                ("cross_tree", fm.n_cross_tree),
                ("height", fm.tree_height),
            ] {
                let _ = writeln!(s, "{name}.{k} {v}");
            }
            if let Some(n) = fm.n_configs {
                let plus = if fm.configs_truncated { "+" } else { "" };
                let _ = writeln!(s, "{name}.configs {n}{plus}");
            }
        }
        let d = &self.process_dm;
        let _ = writeln!(s, "process_dm.decisions {}", d.n_decisions);
        let _ = writeln!(s, "process_dm.rules {}", d.n_rules);
        let _ = writeln!(s, "process_dm.visibility {}", d.n_visibility);
        let _ = writeln!(s, "cdc.rules {}", self.n_cdc_rules);
        s
    }

    /// Column layout of the statistics table: PPR, product FM, process DM,
    /// resource FM, CDCs.
    pub fn to_table(&self, case: &str) -> String {
        let headers = [
            "Case", "Prod", "Comp", "Proc", "Res", "Cons", "F", "Xor", "Or", "Tree", "H", "Cfg", "Dec", "Rules", "Vis",
            "F", "Xor", "Or", "Tree", "H", "CDC",
        ];
        let p = &self.ppr;
        let f = &self.product_fm;
        let r = &self.resource_fm;
        let d = &self.process_dm;
        let cfg = match f.n_configs {
            Some(n) if f.configs_truncated => format!("{n}+"),
            Some(n) => n.to_string(),
            None => "-".into(),
        };
        let row: Vec<String> = [case.to_string()]
            .into_iter()
            .chain(
                [p.n_products, p.n_product_components, p.n_processes, p.n_resources, p.n_constraints]
                    .map(|v| v.to_string()),
            )
            .chain([f.n_features, f.n_xor, f.n_or, f.n_tree, f.tree_height].map(|v| v.to_string()))
            .chain([cfg])
            .chain([d.n_decisions, d.n_rules, d.n_visibility].map(|v| v.to_string()))
            .chain([r.n_features, r.n_xor, r.n_or, r.n_tree, r.tree_height, self.n_cdc_rules].map(|v| v.to_string()))
            .collect();
        let widths: Vec<usize> = headers.iter().zip(&row).map(|(h, v)| h.len().max(v.len())).collect();
        let line = |cells: &mut dyn Iterator<Item = &str>| {
            let mut out = String::new();
            for (i, c) in cells.enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                let _ = write!(out, "{c:>w$}", w = widths[i]);
            }
            out.push('\n');
            out
        };
        let mut s = String::from("       PPR-DSL artifact | Product FM | Process DM | Resource FM | CDCs\n");
        s += &line(&mut headers.iter().copied());
        s += &line(&mut row.iter().map(String::as_str));
        s
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
