//! Agent model → runnable agent-service bundle.

use std::collections::BTreeSet;

use crate::agent::DEFAULT_THRESHOLD;
use crate::backend::TOOLKIT_VERSION;
use crate::dsl::print_model;
use crate::model::{Action, Model, TypeRef};
use crate::project::{GenError, GeneratedProject, TemplateSet};

pub const AGENT_DEFAULT_PORT: u16 = 8765;

/// The agents of `model` plus the classes their `call` actions reference and
/// the enums those classes use, so the result checks on its own.
pub fn agent_slice(model: &Model) -> Model {
    let called: BTreeSet<&str> = model
        .agents
        .iter()
        .flat_map(|a| &a.states)
        .flat_map(|s| &s.actions)
        .filter_map(|a| match &a.action {
            Action::CallMethod { entity, .. } => Some(entity.as_str()),
            _ => None,
        })
        .collect();
    let entities: Vec<_> = model.entities.iter().filter(|e| called.contains(e.name.as_str())).cloned().collect();
    let used_enums: BTreeSet<&str> = entities
        .iter()
        .flat_map(|e| {
            let attrs = e.attributes.iter().map(|a| &a.ty);
            let methods = e.methods.iter().flat_map(|m| m.params.iter().map(|p| &p.ty).chain(m.return_type.as_ref()));
            attrs.chain(methods)
        })
        .filter_map(|ty| match ty {
            TypeRef::Named(n) => Some(n.as_str()),
            TypeRef::Primitive(_) => None,
        })
        .collect();
    Model {
        name: model.name.clone(),
        enums: model.enums.iter().filter(|e| used_enums.contains(e.name.as_str())).cloned().collect(),
        entities,
        associations: Vec::new(),
        agents: model.agents.clone(),
        pages: Vec::new(),
    }
}

/// Emits `agent/agent.buml`, `agent/main.rs` and `agent/Cargo.toml`.
/// Fails with E501 when the model has no agent.
pub fn generate_agent_bundle(model: &Model, templates: &TemplateSet) -> Result<GeneratedProject, GenError> {
    if model.agents.is_empty() {
        return Err(GenError::NoAgent);
    }
    let package = format!("{}-agent", crate::model::normalize_identifier(&model.name));
    let port = AGENT_DEFAULT_PORT.to_string();
    let threshold = format!("{DEFAULT_THRESHOLD:?}");
    let vars = [
        ("package", package.as_str()),
        ("model_name", model.name.as_str()),
        ("toolkit_version", TOOLKIT_VERSION),
        ("default_port", port.as_str()),
        ("threshold", threshold.as_str()),
    ];
    let mut project = GeneratedProject::new();
    project.insert("agent/agent.buml", print_model(&agent_slice(model)))?;
    project.insert("agent/main.rs", templates.render("agent/main.rs.tmpl", &vars)?)?;
    project.insert("agent/Cargo.toml", templates.render("agent/Cargo.toml.tmpl", &vars)?)?;
    Ok(project)
}
