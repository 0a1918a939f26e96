//! Fixture loading and a random generator of well-formed models.

use std::path::{Path, PathBuf};

use forge_core::model::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures_dir() -> PathBuf {
    // resolves from either the core crate or a sibling crate that includes this module
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// `(file name, source)` for every `.buml` file in `fixtures/<sub>`, sorted.
pub fn fixtures(sub: &str) -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(fixtures_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "buml"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

const NOUNS: &[&str] = &["book", "order", "item", "user", "note", "task", "city", "song", "team", "card"];
const WORDS: &[&str] = &[
    "open", "close", "hours", "price", "help", "order", "when", "where", "is", "my", "the", "a", "hello", "bye",
];
const TEXT_CHARS: &[&str] = &["a", "Z", " ", "\"", "\\", "\n", "é", "#", "{", "}", ":", ";", "9", "-", "/", "ü"];

fn pascal(word: &str) -> String {
    let mut c = word.chars();
    c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
}

fn text(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(0..12);
    (0..len).map(|_| *TEXT_CHARS.choose(rng).unwrap()).collect()
}

fn sentence(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(1..5);
    (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn multiplicity(rng: &mut impl Rng) -> Multiplicity {
    let lower = rng.gen_range(0..3);
    let upper = if rng.gen_bool(0.5) { UpperBound::Unbounded } else { UpperBound::Bounded(rng.gen_range(lower.max(1)..lower + 3)) };
    Multiplicity { lower, upper }
}

fn ty(rng: &mut impl Rng, enums: &[EnumDef]) -> TypeRef {
    if !enums.is_empty() && rng.gen_bool(0.25) {
        TypeRef::Named(enums.choose(rng).unwrap().name.clone())
    } else {
        TypeRef::Primitive(*Primitive::ALL.choose(rng).unwrap())
    }
}

fn loc() -> Loc {
    Loc::default()
}

/// A random model that passes the checker without any diagnostic.
///
/// Names carry a numeric suffix so they are unique and never keywords; every
/// cross-reference points at something that exists, and every agent state is
/// reachable from the first (initial) one.
pub fn random_model(rng: &mut impl Rng) -> Model {
    let mut model = Model { name: format!("M{}", rng.gen_range(0..1000)), ..Default::default() };

    for i in 0..rng.gen_range(0..3) {
        let literals = (0..rng.gen_range(1..4)).map(|j| format!("{}_{j}", WORDS.choose(rng).unwrap())).collect();
        model.enums.push(EnumDef { name: format!("Kind{i}"), literals, loc: loc() });
    }

    for i in 0..rng.gen_range(1..5) {
        let mut entity = EntityDef {
            name: format!("{}{i}", pascal(NOUNS.choose(rng).unwrap())),
            description: rng.gen_bool(0.3).then(|| text(rng)),
            uri: rng.gen_bool(0.2).then(|| format!("https://example.test/{i}")),
            icon: rng.gen_bool(0.2).then(|| text(rng)),
            attributes: Vec::new(),
            methods: Vec::new(),
            loc: loc(),
        };
        for j in 0..rng.gen_range(0..5) {
            entity.attributes.push(AttributeDef {
                name: format!("a{j}_{}", NOUNS.choose(rng).unwrap()),
                ty: ty(rng, &model.enums),
                required: rng.gen_bool(0.4),
                loc: loc(),
                ty_loc: loc(),
            });
        }
        for j in 0..rng.gen_range(0..3) {
            let params = (0..rng.gen_range(0..3))
                .map(|k| ParamDef { name: format!("p{k}"), ty: ty(rng, &model.enums), loc: loc(), ty_loc: loc() })
                .collect();
            entity.methods.push(MethodDef {
                name: format!("m{j}_{}", WORDS.choose(rng).unwrap()),
                params,
                return_type: rng.gen_bool(0.6).then(|| ty(rng, &model.enums)),
                loc: loc(),
                return_loc: loc(),
            });
        }
        model.entities.push(entity);
    }

    for i in 0..rng.gen_range(0..4) {
        let mut end = |k: usize| AssociationEnd {
            role: format!("r{i}_{k}"),
            target: model.entities.choose(rng).unwrap().name.clone(),
            multiplicity: multiplicity(rng),
            loc: loc(),
        };
        let (end_a, end_b) = (end(0), end(1));
        model.associations.push(AssociationDef { name: format!("Link{i}"), end_a, end_b, loc: loc() });
    }

    let methods: Vec<(String, String)> = model
        .entities
        .iter()
        .flat_map(|e| e.methods.iter().map(move |m| (e.name.clone(), m.name.clone())))
        .collect();

    for i in 0..rng.gen_range(0..3) {
        let intents: Vec<IntentDef> = (0..rng.gen_range(0..4))
            .map(|k| IntentDef::new(format!("i{k}"), (0..rng.gen_range(1..4)).map(|_| sentence(rng)).collect::<Vec<_>>()))
            .collect();
        let count = rng.gen_range(1..5);
        let mut states: Vec<StateDef> = (0..count)
            .map(|k| StateDef {
                name: format!("S{k}"),
                initial: k == 0,
                actions: Vec::new(),
                transitions: Vec::new(),
                loc: loc(),
            })
            .collect();
        for state in states.iter_mut() {
            for _ in 0..rng.gen_range(0..3) {
                let action = match rng.gen_range(0..3) {
                    0 => Action::Say(text(rng)),
                    1 => Action::LlmReply(text(rng)),
                    _ => match methods.choose(rng) {
                        Some((entity, method)) => Action::CallMethod { entity: entity.clone(), method: method.clone() },
                        None => Action::Say(text(rng)),
                    },
                };
                state.actions.push(ActionSpec { action, loc: loc() });
            }
        }
        // Chain every state to the next so all are reachable, then add a few
        // random extra transitions without a second auto or fallback.
        for k in 0..count {
            let mut triggers = Vec::new();
            if k + 1 < count {
                triggers.push((pick_trigger(rng, &intents), format!("S{}", k + 1)));
            }
            for _ in 0..rng.gen_range(0..3) {
                triggers.push((pick_trigger(rng, &intents), format!("S{}", rng.gen_range(0..count))));
            }
            let mut seen_auto = false;
            let mut seen_fallback = false;
            for (trigger, target) in triggers {
                match trigger {
                    Trigger::Auto if seen_auto => continue,
                    Trigger::Fallback if seen_fallback => continue,
                    Trigger::Auto => seen_auto = true,
                    Trigger::Fallback => seen_fallback = true,
                    Trigger::OnIntent(_) => {}
                }
                states[k].transitions.push(TransitionSpec { trigger, target, loc: loc(), target_loc: loc() });
            }
        }
        model.agents.push(AgentModel { name: format!("Bot{i}"), intents, states, loc: loc() });
    }

    for i in 0..rng.gen_range(0..3) {
        let style = (0..rng.gen_range(0..3))
            .map(|k| {
                let value = if rng.gen_bool(0.5) { WORDS.choose(rng).unwrap().to_string() } else { text(rng) };
                (format!("s{k}_{}", NOUNS.choose(rng).unwrap()), value)
            })
            .collect();
        let mut components = Vec::new();
        for k in 0..rng.gen_range(0..5) {
            let name = format!("C{k}");
            let entity = model.entities.choose(rng).unwrap();
            let column_count = rng.gen_range(1..=entity.attributes.len().max(1));
            let component = match rng.gen_range(0..5) {
                0 if !entity.attributes.is_empty() => ComponentDef::DataTable {
                    name,
                    entity: entity.name.clone(),
                    columns: entity
                        .attributes
                        .choose_multiple(rng, column_count)
                        .map(|a| a.name.clone())
                        .collect(),
                    loc: loc(),
                },
                1 if entity.methods.first().is_some() => ComponentDef::ActionButton {
                    name,
                    entity: entity.name.clone(),
                    method: entity.methods.choose(rng).unwrap().name.clone(),
                    loc: loc(),
                },
                2 => {
                    let numeric: Vec<_> = entity
                        .attributes
                        .iter()
                        .filter(|a| a.ty.as_primitive().is_some_and(Primitive::is_numeric))
                        .collect();
                    match numeric.choose(rng) {
                        Some(y) => ComponentDef::Chart {
                            name,
                            entity: entity.name.clone(),
                            chart: *[ChartKind::Bar, ChartKind::Line, ChartKind::Pie].choose(rng).unwrap(),
                            x: entity.attributes.choose(rng).unwrap().name.clone(),
                            y: y.name.clone(),
                            loc: loc(),
                        },
                        None => ComponentDef::Form { name, entity: entity.name.clone(), loc: loc() },
                    }
                }
                3 if !model.agents.is_empty() => ComponentDef::ChatWidget {
                    name,
                    agent: model.agents.choose(rng).unwrap().name.clone(),
                    loc: loc(),
                },
                _ => ComponentDef::Form { name, entity: entity.name.clone(), loc: loc() },
            };
            components.push(component);
        }
        model.pages.push(PageDef { name: format!("Page{i}"), style, components, loc: loc() });
    }
    model
}

fn pick_trigger(rng: &mut impl Rng, intents: &[IntentDef]) -> Trigger {
    match rng.gen_range(0..3) {
        0 if !intents.is_empty() => Trigger::OnIntent(intents.choose(rng).unwrap().name.clone()),
        1 => Trigger::Fallback,
        _ => Trigger::Auto,
    }
}
