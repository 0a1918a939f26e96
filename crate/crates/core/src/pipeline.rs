//! The full generation pipeline: check, then run every generator and add the
//! deployment manifest.

use std::path::PathBuf;

use crate::agent_gen::generate_agent_bundle;
use crate::backend::generate_backend_bundle;
use crate::checker::{check_model, has_errors};
use crate::deploy::{emit_deploy_manifest, DeployCommands, MANIFEST_FILE};
use crate::dsl::Diagnostic;
use crate::frontend::generate_frontend_bundle;
use crate::model::Model;
use crate::project::{GenError, GeneratedProject, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Backend,
    Frontend,
    Agent,
}

impl std::str::FromStr for Part {
    type Err = String;

    fn from_str(s: &str) -> Result<Part, String> {
        match s {
            "backend" => Ok(Part::Backend),
            "frontend" => Ok(Part::Frontend),
            "agent" => Ok(Part::Agent),
            other => Err(format!("unknown part '{other}' (expected backend, frontend or agent)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub skip: Vec<Part>,
    pub assets_dir: Option<PathBuf>,
    pub templates: TemplateSet,
    pub commands: DeployCommands,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("model has {} error diagnostic(s)", .0.iter().filter(|d| d.is_error()).count())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Gen(#[from] GenError),
}

/// Result of a successful build: the project and any warnings.
#[derive(Debug)]
pub struct Build {
    pub project: GeneratedProject,
    pub warnings: Vec<Diagnostic>,
}

/// Checks `model` and generates every part not skipped. The agent part is
/// only generated for models that declare agents.
pub fn build_project(model: &Model, options: &BuildOptions) -> Result<Build, BuildError> {
    let diags = check_model(model);
    if has_errors(&diags) {
        return Err(BuildError::Invalid(diags));
    }
    let wants = |part| !options.skip.contains(&part);
    let mut project = GeneratedProject::new();
    if wants(Part::Backend) {
        project.merge(generate_backend_bundle(model, &options.templates)?);
    }
    if wants(Part::Frontend) {
        project.merge(generate_frontend_bundle(model, options.assets_dir.as_deref(), &options.templates)?);
    }
    if wants(Part::Agent) && !model.agents.is_empty() {
        project.merge(generate_agent_bundle(model, &options.templates)?);
    }
    project.insert(MANIFEST_FILE, emit_deploy_manifest(model, &options.commands)?)?;
    Ok(Build { project, warnings: diags })
}
