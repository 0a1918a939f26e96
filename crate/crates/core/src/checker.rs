//! Semantic validation across the structural, agent and GUI perspectives.
//!
//! | code | rule |
//! |------|------|
//! | E001 | duplicate top-level or member name (including the reserved `id`) |
//! | E002 | attribute, parameter or return type names no primitive or enum |
//! | E003 | association end targets an unknown entity |
//! | E004 | both association ends use the same role name |
//! | E101 | agent has zero or several initial states |
//! | E102 | transition targets an unknown state |
//! | E103 | `on` trigger names an unknown intent |
//! | E104 | duplicate intent name |
//! | E105 | state has several `auto` or several `fallback` transitions |
//! | E106 | `call` action references an unknown entity or method |
//! | E201 | component binds an unknown entity |
//! | E202 | table column or chart axis is not an attribute of the bound entity |
//! | E203 | button invokes an unknown method |
//! | E204 | chat widget references an unknown agent |
//! | E205 | chart y axis is not an `int` or `float` attribute |
//! | W101 | state unreachable from the initial state |

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::backend::{association_storage, AssociationStorage};
use crate::dsl::{codes, Diagnostic};
use crate::model::*;

/// Returns every rule violation in `model`, sorted by span and then code.
/// An empty result means the model is valid.
pub fn check_model(model: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    check_structure(model, &mut diags);
    for agent in &model.agents {
        check_agent(model, agent, &mut diags);
    }
    check_pages(model, &mut diags);
    diags.sort_by(|a, b| a.span.cmp(&b.span).then(a.code.cmp(b.code)));
    diags
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// States reachable from the initial state by following any transition.
/// Empty when the agent has no initial state.
pub fn reachable_states(agent: &AgentModel) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let Some(initial) = agent.initial_state() else {
        return seen;
    };
    let mut queue = VecDeque::from([initial]);
    seen.insert(initial.name.clone());
    while let Some(state) = queue.pop_front() {
        for t in &state.transitions {
            if let Some(next) = agent.state(&t.target) {
                if seen.insert(next.name.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}

/// Reports the second and later occurrences of each name.
fn duplicates<'a>(
    items: impl IntoIterator<Item = (&'a str, Loc)>,
    what: &str,
    diags: &mut Vec<Diagnostic>,
) {
    let mut seen = HashSet::new();
    for (name, loc) in items {
        if !seen.insert(name) {
            diags.push(Diagnostic::error(codes::E001, format!("duplicate {what} '{name}'"), loc.span()));
        }
    }
}

fn resolves(model: &Model, ty: &TypeRef) -> bool {
    match ty {
        TypeRef::Primitive(_) => true,
        TypeRef::Named(name) => model.enum_def(name).is_some(),
    }
}

fn check_type(model: &Model, ty: &TypeRef, loc: Loc, diags: &mut Vec<Diagnostic>) {
    if !resolves(model, ty) {
        diags.push(Diagnostic::error(codes::E002, format!("unknown type '{ty}'"), loc.span()));
    }
}

fn check_structure(model: &Model, diags: &mut Vec<Diagnostic>) {
    // All top-level items share one namespace: classes and enums are both
    // type names, and associations name junction tables.
    let mut top_level: Vec<(&str, Loc)> = Vec::new();
    top_level.extend(model.entities.iter().map(|e| (e.name.as_str(), e.loc)));
    top_level.extend(model.enums.iter().map(|e| (e.name.as_str(), e.loc)));
    top_level.extend(model.associations.iter().map(|a| (a.name.as_str(), a.loc)));
    top_level.extend(model.agents.iter().map(|a| (a.name.as_str(), a.loc)));
    top_level.extend(model.pages.iter().map(|p| (p.name.as_str(), p.loc)));
    top_level.sort_by_key(|(_, loc)| loc.span());
    duplicates(top_level, "top-level name", diags);

    for e in &model.enums {
        duplicates(e.literals.iter().map(|l| (l.as_str(), e.loc)), "enum literal", diags);
    }

    for entity in &model.entities {
        // Roles of associations act as members of the entity on the opposite end.
        let roles = model.associations.iter().flat_map(|a| {
            // Identical roles on both ends are reported once, as E004.
            let ends = if a.end_a.role == a.end_b.role { 1 } else { 2 };
            [(&a.end_a, &a.end_b), (&a.end_b, &a.end_a)]
                .into_iter()
                .take(ends)
                .filter(|(_, opposite)| opposite.target == entity.name)
                .map(|(end, _)| (end.role.as_str(), end.loc))
        });
        let members = entity
            .attributes
            .iter()
            .map(|a| (a.name.as_str(), a.loc))
            .chain(entity.methods.iter().map(|m| (m.name.as_str(), m.loc)));
        let members: Vec<_> = members.chain(roles).collect();
        for (name, loc) in &members {
            if *name == RESERVED_ID {
                diags.push(Diagnostic::error(
                    codes::E001,
                    format!("'{RESERVED_ID}' is reserved for the key of class '{}'", entity.name),
                    loc.span(),
                ));
            }
        }
        duplicates(members, &format!("member of class '{}'", entity.name), diags);

        // A foreign key column stored on this class must not shadow an attribute.
        for assoc in &model.associations {
            if let AssociationStorage::ForeignKey { table_entity, column, .. } = association_storage(assoc) {
                if table_entity == entity.name && entity.attribute(&column).is_some() {
                    let end = if assoc.end_a.target == entity.name { &assoc.end_b } else { &assoc.end_a };
                    diags.push(Diagnostic::error(
                        codes::E001,
                        format!("association '{}' needs column '{column}' on class '{}', which is already an attribute", assoc.name, entity.name),
                        end.loc.span(),
                    ));
                }
            }
        }

        for attr in &entity.attributes {
            check_type(model, &attr.ty, attr.ty_loc, diags);
        }
        for method in &entity.methods {
            duplicates(method.params.iter().map(|p| (p.name.as_str(), p.loc)), "parameter", diags);
            for p in &method.params {
                check_type(model, &p.ty, p.ty_loc, diags);
            }
            if let Some(ret) = &method.return_type {
                check_type(model, ret, method.return_loc, diags);
            }
        }
    }

    for assoc in &model.associations {
        for end in assoc.ends() {
            if model.entity(&end.target).is_none() {
                diags.push(Diagnostic::error(
                    codes::E003,
                    format!("association '{}' targets unknown class '{}'", assoc.name, end.target),
                    end.loc.span(),
                ));
            }
        }
        if assoc.end_a.role == assoc.end_b.role {
            diags.push(Diagnostic::error(
                codes::E004,
                format!("association '{}' uses role '{}' on both ends", assoc.name, assoc.end_a.role),
                assoc.end_b.loc.span(),
            ));
        }
    }
}

fn check_agent(model: &Model, agent: &AgentModel, diags: &mut Vec<Diagnostic>) {
    duplicates(agent.states.iter().map(|s| (s.name.as_str(), s.loc)), "state", diags);

    let mut intents = HashSet::new();
    for intent in &agent.intents {
        if !intents.insert(intent.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::E104,
                format!("duplicate intent '{}'", intent.name),
                intent.loc.span(),
            ));
        }
    }

    let initial_count = agent.states.iter().filter(|s| s.initial).count();
    if initial_count != 1 {
        diags.push(Diagnostic::error(
            codes::E101,
            format!("agent '{}' has {initial_count} initial states, expected exactly 1", agent.name),
            agent.loc.span(),
        ));
    }

    for state in &agent.states {
        for action in &state.actions {
            if let Action::CallMethod { entity, method } = &action.action {
                let resolved = model.entity(entity).and_then(|e| e.method(method));
                if resolved.is_none() {
                    diags.push(Diagnostic::error(
                        codes::E106,
                        format!("call to unknown method '{entity}.{method}'"),
                        action.loc.span(),
                    ));
                }
            }
        }

        for (trigger, label) in [(Trigger::Auto, "auto"), (Trigger::Fallback, "fallback")] {
            let extra = state.transitions.iter().filter(|t| t.trigger == trigger).nth(1);
            if let Some(t) = extra {
                diags.push(Diagnostic::error(
                    codes::E105,
                    format!("state '{}' has more than one {label} transition", state.name),
                    t.loc.span(),
                ));
            }
        }

        for t in &state.transitions {
            if let Trigger::OnIntent(intent) = &t.trigger {
                if agent.intent(intent).is_none() {
                    diags.push(Diagnostic::error(
                        codes::E103,
                        format!("unknown intent '{intent}'"),
                        t.loc.span(),
                    ));
                }
            }
            if agent.state(&t.target).is_none() {
                diags.push(Diagnostic::error(
                    codes::E102,
                    format!("transition targets unknown state '{}'", t.target),
                    t.target_loc.span(),
                ));
            }
        }
    }

    if initial_count == 1 {
        let reachable = reachable_states(agent);
        for state in &agent.states {
            if !reachable.contains(&state.name) {
                diags.push(Diagnostic::warning(
                    codes::W101,
                    format!("state '{}' is unreachable from the initial state", state.name),
                    state.loc.span(),
                ));
            }
        }
    }
}

fn check_pages(model: &Model, diags: &mut Vec<Diagnostic>) {
    for page in &model.pages {
        duplicates(page.components.iter().map(|c| (c.name(), c.loc())), "component", diags);

        for component in &page.components {
            let span = component.loc().span();
            if let ComponentDef::ChatWidget { agent, .. } = component {
                if model.agent(agent).is_none() {
                    diags.push(Diagnostic::error(codes::E204, format!("unknown agent '{agent}'"), span));
                }
                continue;
            }
            let Some(entity_name) = component.entity() else { continue };
            let Some(entity) = model.entity(entity_name) else {
                diags.push(Diagnostic::error(codes::E201, format!("unknown class '{entity_name}'"), span));
                continue;
            };
            let mut check_attr = |attr: &str| {
                let found = entity.attribute(attr);
                if found.is_none() {
                    diags.push(Diagnostic::error(
                        codes::E202,
                        format!("'{attr}' is not an attribute of class '{entity_name}'"),
                        span,
                    ));
                }
                found
            };
            match component {
                ComponentDef::DataTable { columns, .. } => {
                    for column in columns {
                        check_attr(column);
                    }
                }
                ComponentDef::Chart { x, y, .. } => {
                    check_attr(x);
                    if let Some(attr) = check_attr(y) {
                        let numeric = attr.ty.as_primitive().is_some_and(Primitive::is_numeric);
                        if !numeric {
                            diags.push(Diagnostic::error(
                                codes::E205,
                                format!("chart y axis '{y}' has type {}, expected int or float", attr.ty),
                                span,
                            ));
                        }
                    }
                }
                ComponentDef::ActionButton { method, .. } => {
                    if entity.method(method).is_none() {
                        diags.push(Diagnostic::error(
                            codes::E203,
                            format!("unknown method '{entity_name}.{method}'"),
                            span,
                        ));
                    }
                }
                ComponentDef::Form { .. } | ComponentDef::ChatWidget { .. } => {}
            }
        }
    }
}
