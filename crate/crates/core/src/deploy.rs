//! Deployment manifest (`render.yaml`) and the content encoding used when
//! uploading a project.

use base64::Engine;

use crate::model::{normalize_identifier, Model};
use crate::project::{render_template, GenError};

pub const MANIFEST_FILE: &str = "render.yaml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceType {
    Web,
    Static,
}

impl ServiceType {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceType::Web => "web",
            ServiceType::Static => "static",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceSpec {
    pub service_type: ServiceType,
    pub name: String,
    pub plan: String,
    pub build_command: String,
    /// Web services only.
    pub start_command: Option<String>,
    /// Static services only.
    pub static_publish_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeployManifest {
    pub services: Vec<ServiceSpec>,
}

/// Command templates per service. `{{model_snake}}` and `{{service}}` are
/// substituted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeployCommands {
    pub api_build: String,
    pub api_start: String,
    pub web_build: String,
    pub web_publish_path: String,
    pub agent_build: String,
    pub agent_start: String,
}

impl Default for DeployCommands {
    fn default() -> Self {
        DeployCommands {
            api_build: "cargo build --release --manifest-path backend/Cargo.toml".into(),
            api_start: "./backend/target/release/{{service}}".into(),
            web_build: "echo frontend is prebuilt".into(),
            web_publish_path: "frontend".into(),
            agent_build: "cargo build --release --manifest-path agent/Cargo.toml".into(),
            agent_start: "./agent/target/release/{{service}}".into(),
        }
    }
}

impl DeployManifest {
    /// API and static frontend always; the agent service only when the model
    /// has at least one agent. Every service uses the free plan.
    pub fn for_model(model: &Model, commands: &DeployCommands) -> Result<DeployManifest, GenError> {
        let snake = normalize_identifier(&model.name);
        let fill = |template: &str, service: &str| {
            render_template("deploy command", template, &[("model_snake", &snake), ("service", service)])
        };
        let api = format!("{snake}-api");
        let web = format!("{snake}-web");
        let agent = format!("{snake}-agent");
        let mut services = vec![
            ServiceSpec {
                service_type: ServiceType::Web,
                build_command: fill(&commands.api_build, &api)?,
                start_command: Some(fill(&commands.api_start, &api)?),
                static_publish_path: None,
                plan: "free".into(),
                name: api,
            },
            ServiceSpec {
                service_type: ServiceType::Static,
                build_command: fill(&commands.web_build, &web)?,
                start_command: None,
                static_publish_path: Some(fill(&commands.web_publish_path, &web)?),
                plan: "free".into(),
                name: web,
            },
        ];
        if !model.agents.is_empty() {
            services.push(ServiceSpec {
                service_type: ServiceType::Web,
                build_command: fill(&commands.agent_build, &agent)?,
                start_command: Some(fill(&commands.agent_start, &agent)?),
                static_publish_path: None,
                plan: "free".into(),
                name: agent,
            });
        }
        Ok(DeployManifest { services })
    }

    pub fn to_yaml(&self) -> String {
        let mut out = String::from("services:\n");
        for s in &self.services {
            out.push_str(&format!("  - type: {}\n", s.service_type.as_str()));
            out.push_str(&format!("    name: {}\n", yaml_scalar(&s.name)));
            out.push_str(&format!("    plan: {}\n", yaml_scalar(&s.plan)));
            out.push_str(&format!("    buildCommand: {}\n", yaml_scalar(&s.build_command)));
            if let Some(start) = &s.start_command {
                out.push_str(&format!("    startCommand: {}\n", yaml_scalar(start)));
            }
            if let Some(path) = &s.static_publish_path {
                out.push_str(&format!("    staticPublishPath: {}\n", yaml_scalar(path)));
            }
        }
        out
    }
}

/// Plain scalar when unambiguous, otherwise a double-quoted string.
fn yaml_scalar(text: &str) -> String {
    let plain = !text.is_empty()
        && !text.starts_with(['-', '.', ' '])
        && text.chars().all(|c| c.is_ascii_alphanumeric() || "-_./".contains(c))
        && !matches!(text, "true" | "false" | "null" | "yes" | "no" | "on" | "off" | "~");
    if plain {
        text.to_string()
    } else {
        serde_json::to_string(text).unwrap_or_default()
    }
}

pub fn emit_deploy_manifest(model: &Model, commands: &DeployCommands) -> Result<String, GenError> {
    DeployManifest::for_model(model, commands).map(|m| m.to_yaml())
}

/// Standard base64 with padding and no line breaks.
pub fn encode_content(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}
