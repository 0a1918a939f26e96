//! Random request scripts for a served model: mostly well-formed traffic,
//! with a share of wrong types, missing fields, unknown ids and junk routes.

use forge_core::model::{EntityDef, Model, Primitive, TypeRef};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Map, Value};

use super::oracle::snake;

#[derive(Debug, Clone)]
pub struct Step {
    pub method: &'static str,
    pub path: String,
    pub body: Vec<u8>,
}

fn valid_value(model: &Model, ty: &TypeRef, rng: &mut impl Rng) -> Value {
    match ty {
        TypeRef::Primitive(Primitive::Str) => json!(["", "Dune", "ünï \"quoted\"", "a\\b\nc"].choose(rng).unwrap()),
        TypeRef::Primitive(Primitive::Int) => json!(rng.gen_range(-5i64..500)),
        TypeRef::Primitive(Primitive::Float) => json!([0.5, 2.0, -1.25, 3.0].choose(rng).unwrap()),
        TypeRef::Primitive(Primitive::Bool) => json!(rng.gen_bool(0.5)),
        TypeRef::Primitive(Primitive::Date) => json!(["2024-02-29", "1999-12-31", "2025-01-01"].choose(rng).unwrap()),
        TypeRef::Primitive(Primitive::DateTime) => {
            json!(["2024-05-01T10:00:00Z", "2024-05-01T10:00:00.5+02:00", "2000-01-01T00:00:00-05:30"].choose(rng).unwrap())
        }
        TypeRef::Named(e) => {
            let literals = &model.enums.iter().find(|x| &x.name == e).unwrap().literals;
            json!(literals.choose(rng).unwrap())
        }
    }
}

fn invalid_value(ty: &TypeRef, rng: &mut impl Rng) -> Value {
    let pool: Vec<Value> = match ty {
        TypeRef::Primitive(Primitive::Str) => vec![json!(1), json!(true), json!(["x"])],
        TypeRef::Primitive(Primitive::Int) => vec![json!(1.5), json!("3"), json!(false)],
        TypeRef::Primitive(Primitive::Float) => vec![json!("1.0"), json!(true), json!({})],
        TypeRef::Primitive(Primitive::Bool) => vec![json!(0), json!("true")],
        TypeRef::Primitive(Primitive::Date) => vec![json!("2023-02-29"), json!("2024-1-01"), json!(20240101), json!("2024-05-01T10:00:00Z")],
        TypeRef::Primitive(Primitive::DateTime) => {
            vec![json!("2024-05-01 10:00:00Z"), json!("2024-05-01T10:00:00"), json!("2024-05-01"), json!("2024-05-01T25:00:00Z")]
        }
        TypeRef::Named(_) => vec![json!("no_such_literal"), json!(1), json!("")],
    };
    pool.choose(rng).unwrap().clone()
}

fn record_body(model: &Model, entity: &EntityDef, create: bool, rng: &mut impl Rng) -> Value {
    let mut obj = Map::new();
    for attr in &entity.attributes {
        let include = if create && attr.required { rng.gen_bool(0.97) } else { rng.gen_bool(0.6) };
        if !include {
            continue;
        }
        let roll = rng.gen_range(0..100);
        let value = if roll < 93 {
            valid_value(model, &attr.ty, rng)
        } else if roll < 97 {
            invalid_value(&attr.ty, rng)
        } else {
            Value::Null
        };
        obj.insert(attr.name.clone(), value);
    }
    if rng.gen_bool(0.04) {
        obj.insert(["id", "zzz", "Extra"].choose(rng).unwrap().to_string(), json!(1));
    }
    Value::Object(obj)
}

/// An id that exists most of the time, given how many records were ever
/// created for this entity (deleted ids stay in range on purpose).
fn some_id(created: u64, rng: &mut impl Rng) -> u64 {
    if created > 0 && rng.gen_bool(0.9) { rng.gen_range(1..=created) } else { created + 1 }
}

pub fn random_script(model: &Model, steps: usize, rng: &mut impl Rng) -> Vec<Step> {
    let mut created = vec![0u64; model.entities.len()];
    let mut out = Vec::with_capacity(steps);
    let to_bytes = |v: &Value| serde_json::to_vec(v).unwrap();
    while out.len() < steps {
        let roll = rng.gen_range(0..100);
        let ei = rng.gen_range(0..model.entities.len());
        let entity = &model.entities[ei];
        let e = snake(&entity.name);
        let step = if roll < 28 {
            let body = record_body(model, entity, true, rng);
            // ids are handed out even if validation fails; the range only needs to be plausible
            created[ei] += 1;
            Step { method: "POST", path: format!("/api/{e}"), body: to_bytes(&body) }
        } else if roll < 38 {
            let body = record_body(model, entity, false, rng);
            Step { method: "PUT", path: format!("/api/{e}/{}", some_id(created[ei], rng)), body: to_bytes(&body) }
        } else if roll < 45 {
            Step { method: "GET", path: format!("/api/{e}/{}", some_id(created[ei], rng)), body: vec![] }
        } else if roll < 50 {
            Step { method: "GET", path: format!("/api/{e}"), body: vec![] }
        } else if roll < 55 {
            Step { method: "DELETE", path: format!("/api/{e}/{}", some_id(created[ei], rng)), body: vec![] }
        } else if roll < 88 && !model.associations.is_empty() {
            let assoc = model.associations.choose(rng).unwrap();
            let index = |name: &str| model.entities.iter().position(|x| x.name == name).unwrap();
            let (ia, ib) = (index(&assoc.end_a.target), index(&assoc.end_b.target));
            let mut body = Map::new();
            body.insert(format!("{}_id", assoc.end_a.role), json!(some_id(created[ia], rng)));
            body.insert(format!("{}_id", assoc.end_b.role), json!(some_id(created[ib], rng)));
            if rng.gen_bool(0.05) {
                let key = body.keys().next().unwrap().clone();
                body.insert(key, json!("1"));
            }
            let a = snake(&assoc.name);
            if roll < 70 {
                Step { method: "POST", path: format!("/api/assoc/{a}/link"), body: to_bytes(&Value::Object(body)) }
            } else if roll < 76 {
                Step { method: "DELETE", path: format!("/api/assoc/{a}/unlink"), body: to_bytes(&Value::Object(body)) }
            } else {
                let (owner, listed) =
                    if rng.gen_bool(0.5) { (&assoc.end_a, &assoc.end_b) } else { (&assoc.end_b, &assoc.end_a) };
                let id = some_id(created[index(&owner.target)], rng);
                Step { method: "GET", path: format!("/api/{}/{id}/{}", snake(&owner.target), listed.role), body: vec![] }
            }
        } else if roll < 95 && !entity.methods.is_empty() {
            let m = entity.methods.choose(rng).unwrap();
            Step { method: "POST", path: format!("/api/{e}/{}/call/{}", some_id(created[ei], rng), m.name), body: b"{}".to_vec() }
        } else {
            match rng.gen_range(0..5) {
                0 => Step { method: "POST", path: format!("/api/{e}"), body: b"{not json".to_vec() },
                1 => Step { method: "PUT", path: format!("/api/{e}/{}", some_id(created[ei], rng)), body: b"[1,2]".to_vec() },
                2 => Step { method: "GET", path: format!("/api/{e}/x1"), body: vec![] },
                3 => Step { method: "PATCH", path: format!("/api/{e}/1"), body: vec![] },
                _ => Step { method: "GET", path: "/api/nowhere".into(), body: vec![] },
            }
        };
        out.push(step);
    }
    out
}
