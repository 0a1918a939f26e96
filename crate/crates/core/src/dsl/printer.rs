use std::fmt::Write;

use super::lexer::is_keyword;
use crate::model::*;

/// Prints `model` in canonical form: two-space indentation, one construct
/// per line, a blank line between items, LF line endings. Items are grouped
/// by kind (classes, enums, associations, agents, pages) in declaration order.
pub fn print_model(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", model.name);

    for entity in &model.entities {
        out.push('\n');
        print_entity(&mut out, entity);
    }
    for e in &model.enums {
        out.push('\n');
        let _ = writeln!(out, "enum {} {{ {} }}", e.name, e.literals.join(", "));
    }
    for assoc in &model.associations {
        out.push('\n');
        let _ = writeln!(out, "association {} {{", assoc.name);
        for end in assoc.ends() {
            let _ = writeln!(out, "  {}: {} [{}]", end.role, end.target, end.multiplicity);
        }
        out.push_str("}\n");
    }
    for agent in &model.agents {
        out.push('\n');
        print_agent(&mut out, agent);
    }
    for page in &model.pages {
        out.push('\n');
        print_page(&mut out, page);
    }
    out
}

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn print_entity(out: &mut String, entity: &EntityDef) {
    let _ = writeln!(out, "class {} {{", entity.name);
    let metas = [("description", &entity.description), ("uri", &entity.uri), ("icon", &entity.icon)];
    for (key, value) in metas {
        if let Some(value) = value {
            let _ = writeln!(out, "  {key}: {}", quote(value));
        }
    }
    for attr in &entity.attributes {
        let required = if attr.required { " [required]" } else { "" };
        let _ = writeln!(out, "  attr {}: {}{required}", attr.name, attr.ty);
    }
    for method in &entity.methods {
        let params: Vec<String> = method.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
        let _ = write!(out, "  method {}({})", method.name, params.join(", "));
        if let Some(ret) = &method.return_type {
            let _ = write!(out, " -> {ret}");
        }
        out.push('\n');
    }
    out.push_str("}\n");
}

fn print_agent(out: &mut String, agent: &AgentModel) {
    let _ = writeln!(out, "agent {} {{", agent.name);
    for intent in &agent.intents {
        let sentences: Vec<String> = intent.sentences.iter().map(|s| quote(s)).collect();
        let _ = writeln!(out, "  intent {} {{ {} }}", intent.name, sentences.join("; "));
    }
    for state in &agent.states {
        let initial = if state.initial { " initial" } else { "" };
        let _ = writeln!(out, "  state {}{initial} {{", state.name);
        for action in &state.actions {
            let _ = match &action.action {
                Action::Say(text) => writeln!(out, "    say {}", quote(text)),
                Action::LlmReply(prompt) => writeln!(out, "    llm {}", quote(prompt)),
                Action::CallMethod { entity, method } => writeln!(out, "    call {entity}.{method}"),
            };
        }
        for t in &state.transitions {
            let _ = match &t.trigger {
                Trigger::OnIntent(intent) => writeln!(out, "    on {intent} -> {}", t.target),
                Trigger::Auto => writeln!(out, "    auto -> {}", t.target),
                Trigger::Fallback => writeln!(out, "    fallback -> {}", t.target),
            };
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
}

/// Style values print bare when they are plain snake_case words.
fn style_value(value: &str) -> String {
    let bare = value.starts_with(|c: char| c.is_ascii_lowercase() || c == '_')
        && value.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !is_keyword(value);
    if bare {
        value.to_string()
    } else {
        quote(value)
    }
}

fn print_page(out: &mut String, page: &PageDef) {
    let _ = writeln!(out, "page {} {{", page.name);
    if !page.style.is_empty() {
        out.push_str("  style {\n");
        for (key, value) in &page.style {
            let _ = writeln!(out, "    {key}: {}", style_value(value));
        }
        out.push_str("  }\n");
    }
    for component in &page.components {
        let _ = match component {
            ComponentDef::DataTable { name, entity, columns, .. } => {
                writeln!(out, "  table {name} binds {entity} {{ columns: {} }}", columns.join(", "))
            }
            ComponentDef::Form { name, entity, .. } => writeln!(out, "  form {name} creates {entity}"),
            ComponentDef::ActionButton { name, entity, method, .. } => {
                writeln!(out, "  button {name} invokes {entity}.{method}")
            }
            ComponentDef::Chart { name, entity, chart, x, y, .. } => writeln!(
                out,
                "  chart {name} binds {entity} {{ kind: {}, x: {x}, y: {y} }}",
                chart.keyword()
            ),
            ComponentDef::ChatWidget { name, agent, .. } => writeln!(out, "  chat {name} agent {agent}"),
        };
    }
    out.push_str("}\n");
}
