//! Starter models for `forge new`.

/// Library catalog with authors, loans, an FAQ agent and a home page using
/// every component kind.
pub const LIBRARY: &str = include_str!("../scaffolds/library.buml");

/// One class and a page to manage it.
pub const BLANK: &str = include_str!("../scaffolds/blank.buml");

pub const TEMPLATES: &[(&str, &str)] = &[("library", LIBRARY), ("blank", BLANK)];

pub fn template(name: &str) -> Option<&'static str> {
    TEMPLATES.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
}
