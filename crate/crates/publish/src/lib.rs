//! Publishes a generated project to a VCS hosting provider through its REST
//! API: one repository-creation call, then one contents upload per file.
//!
//! The provider is GitHub-compatible: `POST {base}/user/repos` creates the
//! repository and `PUT {base}/repos/{owner}/{name}/contents/{path}` uploads a
//! file. Publishing is create-only; an existing repository is an error.

use forge_core::deploy::encode_content;
use forge_core::GeneratedProject;
use reqwest::StatusCode;
use serde::Deserialize;
use serde_json::json;

pub const TOKEN_ENV: &str = "FORGE_VCS_TOKEN";
pub const BASE_ENV: &str = "FORGE_VCS_BASE";
pub const DEFAULT_BASE: &str = "https://api.github.com";
pub const COMMIT_MESSAGE: &str = "forge publish";

#[derive(Debug, thiserror::Error)]
pub enum PublishError {
    #[error("invalid repository name '{0}' (allowed: lowercase letters, digits and '-')")]
    InvalidRepoName(String),
    #[error("E401: repository '{0}' already exists")]
    RepoExists(String),
    #[error("E402: authentication failed: {0}")]
    Auth(String),
    #[error("E403: upload of '{path}' failed: {reason}")]
    Upload { path: String, reason: String },
    #[error("provider answered {status} to repository creation: {body}")]
    Provider { status: u16, body: String },
    #[error("cannot reach provider: {0}")]
    Transport(#[from] reqwest::Error),
}

impl PublishError {
    /// The diagnostic code, for the three documented failure kinds.
    pub fn code(&self) -> Option<&'static str> {
        match self {
            PublishError::RepoExists(_) => Some("E401"),
            PublishError::Auth(_) => Some("E402"),
            PublishError::Upload { .. } => Some("E403"),
            _ => None,
        }
    }
}

/// Where and as whom to publish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcsConfig {
    pub base: String,
    pub token: Option<String>,
}

impl VcsConfig {
    pub fn new(base: impl Into<String>, token: Option<String>) -> Self {
        VcsConfig { base: base.into().trim_end_matches('/').to_string(), token }
    }

    /// Reads `FORGE_VCS_TOKEN` and `FORGE_VCS_BASE` (default
    /// `https://api.github.com`).
    pub fn from_env() -> Self {
        let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        let base = std::env::var(BASE_ENV).ok().filter(|b| !b.is_empty());
        VcsConfig::new(base.as_deref().unwrap_or(DEFAULT_BASE), token)
    }
}

/// The created repository.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct RepoRef {
    pub full_name: String,
    pub html_url: String,
}

pub fn is_valid_repo_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

/// Creates `repo_name` and uploads every file of `project` in path order.
///
/// Fails with E402 before any request when no token is configured. Uploads
/// stop at the first failure.
pub async fn publish(project: &GeneratedProject, repo_name: &str, vcs: &VcsConfig) -> Result<RepoRef, PublishError> {
    if !is_valid_repo_name(repo_name) {
        return Err(PublishError::InvalidRepoName(repo_name.to_string()));
    }
    let Some(token) = vcs.token.as_deref() else {
        return Err(PublishError::Auth(format!("{TOKEN_ENV} is not set")));
    };
    let client = reqwest::Client::builder().user_agent(concat!("forge/", env!("CARGO_PKG_VERSION"))).build()?;
    let auth = format!("token {token}");

    let resp = client
        .post(format!("{}/user/repos", vcs.base))
        .header(reqwest::header::AUTHORIZATION, &auth)
        .json(&json!({ "name": repo_name, "private": false }))
        .send()
        .await?;
    let status = resp.status();
    let repo: RepoRef = match status {
        StatusCode::CREATED => resp.json().await?,
        StatusCode::UNPROCESSABLE_ENTITY | StatusCode::CONFLICT => {
            return Err(PublishError::RepoExists(repo_name.to_string()))
        }
        StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => {
            return Err(PublishError::Auth(format!("provider answered {status}")))
        }
        _ => {
            let body = resp.text().await.unwrap_or_default();
            return Err(PublishError::Provider { status: status.as_u16(), body });
        }
    };
    if repo.full_name.matches('/').count() != 1 {
        return Err(PublishError::Provider { status: status.as_u16(), body: format!("bad full_name '{}'", repo.full_name) });
    }

    for (path, contents) in project.iter() {
        let upload_err = |reason: String| PublishError::Upload { path: path.to_string(), reason };
        let resp = client
            .put(format!("{}/repos/{}/contents/{path}", vcs.base, repo.full_name))
            .header(reqwest::header::AUTHORIZATION, &auth)
            .json(&json!({ "message": COMMIT_MESSAGE, "content": encode_content(contents) }))
            .send()
            .await
            .map_err(|e| upload_err(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(upload_err(format!("provider answered {}", resp.status())));
        }
    }
    Ok(repo)
}
