//! The output unit of every generator, plus the text template machinery the
//! generators share.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;

/// Errors raised while generating a project.
#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("template '{0}' not found")]
    MissingTemplate(String),
    #[error("template '{template}' uses unknown placeholder '{{{{{name}}}}}'")]
    UnknownPlaceholder { template: String, name: String },
    #[error("E501: no agent to generate")]
    NoAgent,
    #[error("component '{0}' references an unknown class or agent")]
    Unresolved(String),
    #[error("invalid project path '{0}'")]
    InvalidPath(String),
    #[error("cannot read assets from '{path}': {source}")]
    Assets {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Relative `/`-separated path → file contents, iterated in lexicographic
/// path order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneratedProject {
    files: BTreeMap<String, Vec<u8>>,
}

impl GeneratedProject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, contents: impl Into<Vec<u8>>) -> Result<(), GenError> {
        let path = path.into();
        let valid = !path.is_empty()
            && !path.starts_with('/')
            && !path.contains('\\')
            && path.split('/').all(|seg| !seg.is_empty() && seg != ".." && seg != ".");
        if !valid {
            return Err(GenError::InvalidPath(path));
        }
        self.files.insert(path, contents.into());
        Ok(())
    }

    /// Adds every file of `other`, replacing files at the same path.
    pub fn merge(&mut self, other: GeneratedProject) {
        self.files.extend(other.files);
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u8])> {
        self.files.iter().map(|(p, c)| (p.as_str(), c.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every file below `root`, creating directories as needed.
    pub fn write_to(&self, root: &Path) -> std::io::Result<()> {
        for (path, contents) in &self.files {
            let target = root.join(path);
            if let Some(parent) = target.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(target, contents)?;
        }
        Ok(())
    }

    /// Reads a directory tree back into a project (hidden entries skipped).
    pub fn read_from(root: &Path) -> std::io::Result<GeneratedProject> {
        fn walk(dir: &Path, prefix: &str, out: &mut GeneratedProject) -> std::io::Result<()> {
            let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
            entries.sort_by_key(|e| e.file_name());
            for entry in entries {
                let name = entry.file_name().to_string_lossy().into_owned();
                if name.starts_with('.') {
                    continue;
                }
                let rel = if prefix.is_empty() { name } else { format!("{prefix}/{name}") };
                if entry.file_type()?.is_dir() {
                    walk(&entry.path(), &rel, out)?;
                } else {
                    let bytes = std::fs::read(entry.path())?;
                    out.insert(rel, bytes)
                        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
                }
            }
            Ok(())
        }
        let mut project = GeneratedProject::new();
        walk(root, "", &mut project)?;
        Ok(project)
    }
}

/// Serializes JSON with object keys sorted, two-space indentation and a
/// trailing newline.
pub fn canonical_json(value: &Value) -> String {
    fn sorted(value: &Value) -> Value {
        match value {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                let mut out = serde_json::Map::new();
                for k in keys {
                    out.insert(k.clone(), sorted(&map[k]));
                }
                Value::Object(out)
            }
            Value::Array(items) => Value::Array(items.iter().map(sorted).collect()),
            other => other.clone(),
        }
    }
    let mut text = serde_json::to_string_pretty(&sorted(value)).unwrap_or_default();
    text.push('\n');
    text
}

const BUILTIN_TEMPLATES: &[(&str, &str)] = &[
    ("backend/Cargo.toml.tmpl", include_str!("../templates/backend/Cargo.toml.tmpl")),
    ("backend/main.rs.tmpl", include_str!("../templates/backend/main.rs.tmpl")),
    ("agent/Cargo.toml.tmpl", include_str!("../templates/agent/Cargo.toml.tmpl")),
    ("agent/main.rs.tmpl", include_str!("../templates/agent/main.rs.tmpl")),
    ("frontend/index.html.tmpl", include_str!("../templates/frontend/index.html.tmpl")),
];

/// Where generator templates come from.
#[derive(Debug, Clone, Default)]
pub enum TemplateSet {
    /// Templates compiled into the library.
    #[default]
    Builtin,
    /// Templates read from a directory, keyed by their relative path.
    Dir(PathBuf),
}

impl TemplateSet {
    pub fn get(&self, name: &str) -> Result<Cow<'static, str>, GenError> {
        match self {
            TemplateSet::Builtin => BUILTIN_TEMPLATES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, text)| Cow::Borrowed(*text))
                .ok_or_else(|| GenError::MissingTemplate(name.to_string())),
            TemplateSet::Dir(dir) => {
                let path = dir.join(name);
                std::fs::read_to_string(&path)
                    .map(Cow::Owned)
                    .map_err(|_| GenError::MissingTemplate(path.display().to_string()))
            }
        }
    }

    /// Loads `name` and substitutes every `{{key}}` from `vars`.
    pub fn render(&self, name: &str, vars: &[(&str, &str)]) -> Result<String, GenError> {
        let text = self.get(name)?;
        render_template(name, &text, vars)
    }
}

/// Replaces `{{key}}` placeholders. Placeholders missing from `vars` are an
/// error; there is no other template syntax.
pub fn render_template(name: &str, text: &str, vars: &[(&str, &str)]) -> Result<String, GenError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let Some(end) = after.find("}}") else {
            out.push_str(&rest[start..]);
            return Ok(out);
        };
        let key = after[..end].trim();
        let value = vars.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| {
            GenError::UnknownPlaceholder { template: name.to_string(), name: key.to_string() }
        })?;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}
