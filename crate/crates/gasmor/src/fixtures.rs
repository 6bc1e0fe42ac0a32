//! Bundled tree networks with 24 h demand-ramp scenarios. Command-line paths
//! of the form `builtin:<name>` resolve here.

/// A bundled network and its scenario, as file text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub network: &'static str,
    pub scenario: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "hypothetical",
        network: include_str!("../fixtures/hypothetical.net.csv"),
        scenario: include_str!("../fixtures/hypothetical.scn.csv"),
    },
    Fixture {
        name: "actual",
        network: include_str!("../fixtures/actual.net.csv"),
        scenario: include_str!("../fixtures/actual.scn.csv"),
    },
];

pub const BUILTIN_PREFIX: &str = "builtin:";

pub fn fixture(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}
