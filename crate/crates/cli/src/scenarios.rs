//! Scenarios shipped with the tool, runnable by name.

pub const BUNDLED: &[(&str, &str)] = &[
    ("free", include_str!("../scenarios/free.toml")),
    ("closed", include_str!("../scenarios/closed.toml")),
    ("moshinsky", include_str!("../scenarios/moshinsky.toml")),
    ("fig2a", include_str!("../scenarios/fig2a.toml")),
    ("fig2c", include_str!("../scenarios/fig2c.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}
