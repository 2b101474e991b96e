//! Feature models, decision models, cross-disciplinary constraints, and
//! their configurations, with one text format each.

mod cdc;
mod config;
mod dm;
mod fm;

pub use cdc::{cdc_read, cdc_write, check_cdc_refs, qualify, split_ref, CdcRule};
pub use config::{
    dconfig_read, dconfig_write, fmconfig_read, fmconfig_write, selection_digest, Assign, DValue, DmConfiguration,
    DmValuation, Origin,
};
pub use dm::{dm_read, dm_write, Decision, DecisionModel, Range};
pub use fm::{
    complete_mandatory, count_configurations, fm_read, fm_to_formula, fm_violations, fm_write, total_assignment,
    validate_fm_config, with_ancestors, Feature, FeatureModel, FmConfiguration, GroupKind, Variability,
};
