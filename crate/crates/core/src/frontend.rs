//! GUI model → static frontend bundle. The bundle is declarative: pages and
//! components are written to `app-config.json`, which the browser runtime
//! (`webkit.js`) renders.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{ComponentDef, Model};
use crate::project::{canonical_json, GenError, GeneratedProject, TemplateSet};

pub const API_BASE_PLACEHOLDER: &str = "${API_BASE_URL}";
pub const AGENT_WS_PLACEHOLDER: &str = "${AGENT_WS_URL}";
pub const WEBKIT_PLACEHOLDER: &str = "/* webkit bundle not built */\n";

/// One page of `app-config.json`. Style pairs keep declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageConfig {
    pub name: String,
    pub style: Vec<(String, String)>,
    pub components: Vec<ComponentDef>,
}

/// The document consumed by the browser runtime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppConfig {
    pub app: String,
    pub api_base: String,
    pub agent_ws: String,
    pub pages: Vec<PageConfig>,
}

impl AppConfig {
    pub fn from_model(model: &Model) -> Result<AppConfig, GenError> {
        let mut pages = Vec::new();
        for page in &model.pages {
            for component in &page.components {
                let resolved = match component {
                    ComponentDef::ChatWidget { agent, .. } => model.agent(agent).is_some(),
                    other => other.entity().is_some_and(|e| model.entity(e).is_some()),
                };
                if !resolved {
                    return Err(GenError::Unresolved(format!("{}.{}", page.name, component.name())));
                }
            }
            pages.push(PageConfig {
                name: page.name.clone(),
                style: page.style.clone(),
                components: page.components.clone(),
            });
        }
        Ok(AppConfig {
            app: model.name.clone(),
            api_base: API_BASE_PLACEHOLDER.to_string(),
            agent_ws: AGENT_WS_PLACEHOLDER.to_string(),
            pages,
        })
    }

    pub fn to_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).unwrap_or(Value::Null))
    }

    pub fn parse(text: &str) -> serde_json::Result<AppConfig> {
        serde_json::from_str(text)
    }
}

/// `app-config.json` for `model`.
pub fn emit_app_config(model: &Model) -> Result<String, GenError> {
    AppConfig::from_model(model).map(|c| c.to_json())
}

/// Emits `frontend/index.html`, `frontend/app-config.json` and
/// `frontend/webkit.js`. The runtime is copied from `assets_dir/webkit.js`
/// when present; otherwise a one-line placeholder is written.
pub fn generate_frontend_bundle(
    model: &Model,
    assets_dir: Option<&Path>,
    templates: &TemplateSet,
) -> Result<GeneratedProject, GenError> {
    let webkit = match assets_dir {
        None => WEBKIT_PLACEHOLDER.as_bytes().to_vec(),
        Some(dir) => {
            let assets_err = |source| GenError::Assets { path: dir.to_path_buf(), source };
            std::fs::read_dir(dir).map_err(assets_err)?;
            let bundle = dir.join("webkit.js");
            if bundle.is_file() {
                std::fs::read(&bundle).map_err(|source| GenError::Assets { path: bundle, source })?
            } else {
                WEBKIT_PLACEHOLDER.as_bytes().to_vec()
            }
        }
    };
    let mut project = GeneratedProject::new();
    project.insert(
        "frontend/index.html",
        templates.render("frontend/index.html.tmpl", &[("model_name", &model.name)])?,
    )?;
    project.insert("frontend/app-config.json", emit_app_config(model)?)?;
    project.insert("frontend/webkit.js", webkit)?;
    Ok(project)
}
