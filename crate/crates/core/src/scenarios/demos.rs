//! Built-in demo scenarios.

use super::config::{parse_scenario, Scenario};
use crate::error::{Error, Result};

const DEMOS: &[(&str, &str)] = &[
    ("ghost-diffraction", include_str!("../../demos/ghost-diffraction.json")),
    ("ghost-imaging", include_str!("../../demos/ghost-imaging.json")),
    ("factorizable-null", include_str!("../../demos/factorizable-null.json")),
    ("isoplanatic-correlated", include_str!("../../demos/isoplanatic-correlated.json")),
    ("spdc-sweep", include_str!("../../demos/spdc-sweep.json")),
    ("refocus", include_str!("../../demos/refocus.json")),
    ("partial-coherence", include_str!("../../demos/partial-coherence.json")),
];

/// Names of the built-in demos, in catalog order.
pub fn demo_names() -> Vec<&'static str> {
    DEMOS.iter().map(|(n, _)| *n).collect()
}

/// JSON source text of a demo.
pub fn demo_text(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn demo(name: &str) -> Result<Scenario> {
    let text = demo_text(name).ok_or_else(|| {
        Error::validation("demo", format!("unknown demo `{name}`; available: {}", demo_names().join(", ")))
    })?;
    parse_scenario(text)
}

/// Every built-in scenario, parsed and validated.
pub fn demo_catalog() -> Vec<Scenario> {
    DEMOS
        .iter()
        .map(|(n, t)| parse_scenario(t).unwrap_or_else(|e| panic!("built-in demo `{n}` is invalid: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_match_documents() {
        let cat = demo_catalog();
        assert!(cat.len() >= 6);
        for (s, n) in cat.iter().zip(demo_names()) {
            assert_eq!(s.name, n);
        }
    }

    #[test]
    fn unknown_demo_is_validation_error() {
        assert!(demo("nope").unwrap_err().is_validation());
    }
}
