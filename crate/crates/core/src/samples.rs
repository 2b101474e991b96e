//! The shift-fork case study shipped with the crate.

pub const SHIFTFORK_PPR: &str = include_str!("../samples/shiftfork/shiftfork.ppr");
pub const SHIFTFORK_EXCERPT_PPR: &str = include_str!("../samples/shiftfork/excerpt.ppr");
pub const SHIFTFORK_NAME: &str = "shiftfork";

/// Product selection of the walk-through: the Pipe2/Lock1 variant with
/// barrel 1_2 and every mandatory part.
pub const WALKTHROUGH_PRODUCTS: [&str; 16] = [
    "shiftfork_product",
    "Pipe",
    "Pipe2",
    "Lock",
    "Lock1",
    "Barrel",
    "Barrel1_1",
    "Barrel1_2",
    "Screw",
    "Jack1",
    "Ring1",
    "O_Ring",
    "Fork",
    "Fork3",
    "Fork4",
    "Fork5",
];

pub const SHIFTFORK_BASE_FBN: &str = include_str!("../samples/shiftfork/base.fbn");

macro_rules! deltas {
    ($($name:literal),* $(,)?) => {
        /// Delta files of the case study as `(name, text)` pairs.
        pub const SHIFTFORK_DELTAS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../samples/shiftfork/deltas/", $name, ".delta"))),)*
        ];
    };
}

deltas!(
    "DBarrel1_2",
    "DInstallLock1",
    "DInstallLock2",
    "DInstallLock3",
    "DLF3",
    "DLF4",
    "DLaserWeldingRobot01",
    "DLock1",
    "DLock2",
    "DLock3",
    "DPR04",
    "DPR05",
    "DPR12",
    "DPipe2",
    "DPipe3",
    "DPipe8",
    "DSC70",
    "DUltrasonicWeldingRobot16",
);

/// The parsed delta files.
pub fn shiftfork_deltas() -> crate::deltagen::DeltaSet {
    SHIFTFORK_DELTAS
        .iter()
        .map(|(name, text)| {
            let d = crate::deltagen::parse_delta(text).expect("bundled delta parses");
            debug_assert_eq!(d.name, *name);
            (d.name.clone(), d)
        })
        .collect()
}

/// The case-study workspace.
pub fn shiftfork_workspace() -> crate::engine::Workspace {
    let ppr = crate::ppr::parse_ppr(SHIFTFORK_PPR).expect("bundled model parses");
    crate::engine::Workspace::from_ppr(ppr, SHIFTFORK_NAME).expect("bundled model transforms")
}
