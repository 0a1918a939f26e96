//! Compiler and runtime core for smart web applications described in the
//! `.buml` modeling language.
//!
//! A model has three perspectives: the structural one (classes, enums,
//! associations), the agent one (state machines driven by intents) and the
//! GUI one (pages of data-bound components). This crate parses and prints
//! models ([`dsl`]), validates them ([`checker`]), generates the backend,
//! frontend, agent and deployment artifacts ([`backend`], [`frontend`],
//! [`agent_gen`], [`deploy`]) and implements the executable semantics of the
//! generated CRUD API ([`store`]) and agents ([`agent`]).
//!
//! ```
//! use forge_core::{checker, dsl, scaffold};
//!
//! let model = dsl::parse_model(scaffold::LIBRARY).unwrap();
//! assert!(checker::check_model(&model).is_empty());
//! assert_eq!(forge_core::backend::route_table(&model).len(), 21);
//! ```

pub mod agent;
pub mod agent_gen;
pub mod backend;
pub mod checker;
pub mod deploy;
pub mod dsl;
pub mod frontend;
pub mod model;
pub mod pipeline;
pub mod project;
pub mod scaffold;
pub mod store;

pub use dsl::{parse_model, print_model, render_diagnostic, Diagnostic, Severity};
pub use model::Model;
pub use project::{GenError, GeneratedProject, TemplateSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/language.md")]
    struct Language;
    #[doc = include_str!("../../../book/src/checking.md")]
    struct Checking;
    #[doc = include_str!("../../../book/src/backend.md")]
    struct Backend;
    #[doc = include_str!("../../../book/src/agents.md")]
    struct Agents;
    #[doc = include_str!("../../../book/src/frontend.md")]
    struct Frontend;
    #[doc = include_str!("../../../book/src/deployment.md")]
    struct Deployment;
}
