//! Bundled plans for the two worked examples.

pub const POINCARE: &str = include_str!("../fixtures/poincare.plan");
pub const HYPERBOLIC: &str = include_str!("../fixtures/hyperbolic.plan");

pub const FIXTURES: &[(&str, &str)] = &[("poincare", POINCARE), ("hyperbolic", HYPERBOLIC)];

/// Accepts the bare name or the file name (`poincare.plan`).
pub fn fixture(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".plan").unwrap_or(name);
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(n, _)| *n)
}
