//! A deliberately naive model of the CRUD API: every record lives in one flat
//! map keyed by (entity, id), links are a plain list, and every rule is
//! re-derived from the model with linear scans.

use std::collections::BTreeMap;

use forge_core::model::{AssociationDef, EntityDef, Model, Primitive, TypeRef, UpperBound};
use serde_json::{json, Map, Value};

pub struct Oracle<'m> {
    model: &'m Model,
    records: BTreeMap<(String, u64), Map<String, Value>>,
    last_id: BTreeMap<String, u64>,
    /// (association name, end_a id, end_b id)
    links: Vec<(String, u64, u64)>,
}

fn error(status: u16, code: &str) -> (u16, Value) {
    (status, json!({ "error": code }))
}

fn field_errors(errors: Vec<(String, &str)>) -> (u16, Value) {
    let list: Vec<Value> = errors.into_iter().map(|(f, c)| json!({"field": f, "code": c})).collect();
    (422, json!({ "errors": list }))
}

fn leap(year: u32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

fn digits(s: &str) -> Option<u32> {
    (!s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())).then(|| s.parse().unwrap())
}

fn valid_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split('-').collect();
    if s.len() != 10 || parts.len() != 3 || parts[0].len() != 4 || parts[1].len() != 2 || parts[2].len() != 2 {
        return false;
    }
    let (Some(y), Some(m), Some(d)) = (digits(parts[0]), digits(parts[1]), digits(parts[2])) else { return false };
    let days = match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if leap(y) => 29,
        2 => 28,
        _ => return false,
    };
    (1..=days).contains(&d)
}

fn valid_time(s: &str) -> bool {
    let (clock, offset) = if let Some(c) = s.strip_suffix('Z') {
        (c, None)
    } else if s.len() > 6 && (s.as_bytes()[s.len() - 6] == b'+' || s.as_bytes()[s.len() - 6] == b'-') {
        (&s[..s.len() - 6], Some(&s[s.len() - 5..]))
    } else {
        return false;
    };
    if let Some(off) = offset {
        let ok = off.len() == 5 && off.as_bytes()[2] == b':' && digits(&off[..2]).is_some_and(|h| h < 24) && digits(&off[3..]).is_some_and(|m| m < 60);
        if !ok {
            return false;
        }
    }
    let (hms, frac) = match clock.split_once('.') {
        Some((hms, frac)) => (hms, Some(frac)),
        None => (clock, None),
    };
    if frac.is_some_and(|f| digits(f).is_none()) {
        return false;
    }
    let parts: Vec<&str> = hms.split(':').collect();
    parts.len() == 3
        && parts.iter().all(|p| p.len() == 2)
        && digits(parts[0]).is_some_and(|h| h < 24)
        && digits(parts[1]).is_some_and(|m| m < 60)
        && digits(parts[2]).is_some_and(|s| s < 60)
}

fn valid_datetime(s: &str) -> bool {
    s.len() > 11 && s.as_bytes()[10] == b'T' && valid_date(&s[..10]) && valid_time(&s[11..])
}

impl<'m> Oracle<'m> {
    pub fn new(model: &'m Model) -> Self {
        Oracle { model, records: BTreeMap::new(), last_id: BTreeMap::new(), links: Vec::new() }
    }

    fn type_ok(&self, ty: &TypeRef, v: &Value) -> bool {
        match ty {
            TypeRef::Primitive(Primitive::Str) => v.is_string(),
            TypeRef::Primitive(Primitive::Int) => v.is_i64() || v.is_u64(),
            TypeRef::Primitive(Primitive::Float) => v.is_number(),
            TypeRef::Primitive(Primitive::Bool) => v.is_boolean(),
            TypeRef::Primitive(Primitive::Date) => v.as_str().is_some_and(valid_date),
            TypeRef::Primitive(Primitive::DateTime) => v.as_str().is_some_and(valid_datetime),
            TypeRef::Named(e) => {
                let literals = &self.model.enums.iter().find(|x| &x.name == e).unwrap().literals;
                v.as_str().is_some_and(|s| literals.iter().any(|l| l == s))
            }
        }
    }

    fn validate(&self, entity: &EntityDef, body: &Value, create: bool) -> Result<Map<String, Value>, (u16, Value)> {
        let Some(obj) = body.as_object() else { return Err(field_errors(vec![("$body".into(), "V002")])) };
        let mut errors = Vec::new();
        let mut accepted = Map::new();
        for attr in &entity.attributes {
            match obj.get(&attr.name) {
                None if create && attr.required => errors.push((attr.name.clone(), "V001")),
                None => {}
                Some(Value::Null) if attr.required => errors.push((attr.name.clone(), if create { "V001" } else { "V002" })),
                Some(Value::Null) => {
                    accepted.insert(attr.name.clone(), Value::Null);
                }
                Some(v) if self.type_ok(&attr.ty, v) => {
                    accepted.insert(attr.name.clone(), v.clone());
                }
                Some(_) => errors.push((attr.name.clone(), "V002")),
            }
        }
        let mut unknown: Vec<String> =
            obj.keys().filter(|k| !entity.attributes.iter().any(|a| &a.name == *k)).cloned().collect();
        unknown.sort();
        errors.extend(unknown.into_iter().map(|k| (k, "V003")));
        if errors.is_empty() { Ok(accepted) } else { Err(field_errors(errors)) }
    }

    fn render(&self, entity: &EntityDef, id: u64) -> Value {
        let stored = &self.records[&(entity.name.clone(), id)];
        let mut out = Map::new();
        out.insert("id".into(), json!(id));
        for attr in &entity.attributes {
            out.insert(attr.name.clone(), stored.get(&attr.name).cloned().unwrap_or(Value::Null));
        }
        Value::Object(out)
    }

    fn list(&self, entity: &EntityDef, ids: Vec<u64>) -> (u16, Value) {
        let mut ids = ids;
        ids.sort();
        let items: Vec<Value> = ids.iter().map(|id| self.render(entity, *id)).collect();
        (200, json!({"total": items.len(), "items": items}))
    }

    fn exists(&self, entity: &str, id: u64) -> bool {
        self.records.contains_key(&(entity.to_string(), id))
    }

    pub fn has_record(&self, entity: &str, id: u64) -> bool {
        self.exists(entity, id)
    }

    pub fn has_link(&self, association: &str, a: u64, b: u64) -> bool {
        self.links.iter().any(|(n, x, y)| n == association && *x == a && *y == b)
    }

    fn link_ids(&self, assoc: &AssociationDef, body: &Value) -> Result<(u64, u64), (u16, Value)> {
        let Some(obj) = body.as_object() else { return Err(field_errors(vec![("$body".into(), "V002")])) };
        let ka = format!("{}_id", assoc.end_a.role);
        let kb = format!("{}_id", assoc.end_b.role);
        let mut errors = Vec::new();
        let mut ids = [0, 0];
        for (i, k) in [&ka, &kb].into_iter().enumerate() {
            match obj.get(k) {
                None => errors.push((k.clone(), "V001")),
                Some(v) => match v.as_u64() {
                    Some(n) => ids[i] = n,
                    None => errors.push((k.clone(), "V002")),
                },
            }
        }
        let mut unknown: Vec<String> = obj.keys().filter(|k| **k != ka && **k != kb).cloned().collect();
        unknown.sort();
        errors.extend(unknown.into_iter().map(|k| (k, "V003")));
        if errors.is_empty() { Ok((ids[0], ids[1])) } else { Err(field_errors(errors)) }
    }

    /// Whether linking (a, b) would give either record more partners than
    /// the opposite end allows.
    pub fn exceeds_upper_bound(&self, assoc: &AssociationDef, a: u64, b: u64) -> bool {
        let count_a = self.links.iter().filter(|(n, x, _)| n == &assoc.name && *x == a).count() as u64 + 1;
        let count_b = self.links.iter().filter(|(n, _, y)| n == &assoc.name && *y == b).count() as u64 + 1;
        let over = |upper: UpperBound, n: u64| matches!(upper, UpperBound::Bounded(u) if n > u64::from(u));
        over(assoc.end_b.multiplicity.upper, count_a) || over(assoc.end_a.multiplicity.upper, count_b)
    }

    /// Answers one request carrying the raw `body` bytes.
    pub fn request(&mut self, method: &str, path: &str, body: &[u8]) -> (u16, Value) {
        if method == "GET" && path == "/healthz" {
            return (200, json!({"status": "ok"}));
        }
        let segs: Vec<&str> = path.trim_start_matches('/').split('/').collect();
        if segs.first() != Some(&"api") {
            return error(404, "NO_ROUTE");
        }
        // Only mutating routes look at the body; blank means "no body".
        let blank = body.iter().all(u8::is_ascii_whitespace);
        let parsed: Option<Value> = if blank { Some(Value::Null) } else { serde_json::from_slice(body).ok() };
        let malformed = parsed.is_none();
        let body_or_null = &parsed.clone().unwrap_or(Value::Null);
        let model = self.model;
        let bad_body = || field_errors(vec![("$body".into(), "V002")]);

        // association routes
        if segs.len() == 4 && segs[1] == "assoc" {
            let Some(assoc) = model.associations.iter().find(|a| snake(&a.name) == segs[2]) else {
                return error(404, "NO_ROUTE");
            };
            let ids = |o: &Self| o.link_ids(assoc, body_or_null);
            return match (method, segs[3]) {
                ("POST", "link") | ("DELETE", "unlink") if malformed => bad_body(),
                ("POST", "link") => match ids(self) {
                    Err(e) => e,
                    Ok((a, b)) => {
                        if !self.exists(&assoc.end_a.target, a) || !self.exists(&assoc.end_b.target, b) {
                            error(404, "NOT_FOUND")
                        } else if self.links.contains(&(assoc.name.clone(), a, b)) {
                            error(409, "DUPLICATE")
                        } else if self.exceeds_upper_bound(assoc, a, b) {
                            error(409, "MULTIPLICITY")
                        } else {
                            self.links.push((assoc.name.clone(), a, b));
                            let mut out = Map::new();
                            out.insert(format!("{}_id", assoc.end_a.role), json!(a));
                            out.insert(format!("{}_id", assoc.end_b.role), json!(b));
                            (201, Value::Object(out))
                        }
                    }
                },
                ("DELETE", "unlink") => match ids(self) {
                    Err(e) => e,
                    Ok((a, b)) => match self.links.iter().position(|l| *l == (assoc.name.clone(), a, b)) {
                        Some(i) => {
                            self.links.remove(i);
                            (204, Value::Null)
                        }
                        None => error(404, "NOT_FOUND"),
                    },
                },
                _ => error(404, "NO_ROUTE"),
            };
        }

        let Some(entity) = segs.get(1).and_then(|e| model.entities.iter().find(|x| snake(&x.name) == *e)) else {
            return error(404, "NO_ROUTE");
        };
        let id: Option<u64> = match segs.get(2) {
            None => None,
            Some(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => match s.parse() {
                Ok(n) => Some(n),
                Err(_) => return error(404, "NO_ROUTE"),
            },
            Some(_) => return error(404, "NO_ROUTE"),
        };
        let rest: Vec<&str> = segs.get(3..).unwrap_or(&[]).to_vec();
        if malformed && matches!((method, id, &rest[..]), ("POST", None, []) | ("PUT", Some(_), []) | ("DELETE", Some(_), [])) {
            return bad_body();
        }
        match (method, id, &rest[..]) {
            ("GET", None, []) => {
                let ids = self.records.keys().filter(|(e, _)| *e == entity.name).map(|(_, id)| *id).collect();
                self.list(entity, ids)
            }
            ("POST", None, []) => match self.validate(entity, body_or_null, true) {
                Err(e) => e,
                Ok(values) => {
                    let id = self.last_id.get(&entity.name).copied().unwrap_or(0) + 1;
                    self.last_id.insert(entity.name.clone(), id);
                    self.records.insert((entity.name.clone(), id), values);
                    (201, self.render(entity, id))
                }
            },
            ("GET", Some(id), []) if self.exists(&entity.name, id) => (200, self.render(entity, id)),
            ("GET", Some(_), []) => error(404, "NOT_FOUND"),
            ("PUT", Some(id), []) if self.exists(&entity.name, id) => match self.validate(entity, body_or_null, false) {
                Err(e) => e,
                Ok(values) => {
                    self.records.get_mut(&(entity.name.clone(), id)).unwrap().extend(values);
                    (200, self.render(entity, id))
                }
            },
            ("PUT", Some(_), []) => error(404, "NOT_FOUND"),
            ("DELETE", Some(id), []) if self.exists(&entity.name, id) => {
                self.records.remove(&(entity.name.clone(), id));
                let name = entity.name.clone();
                self.links.retain(|(assoc, a, b)| {
                    let def = model.associations.iter().find(|x| &x.name == assoc).unwrap();
                    !(def.end_a.target == name && *a == id) && !(def.end_b.target == name && *b == id)
                });
                (204, Value::Null)
            }
            ("DELETE", Some(_), []) => error(404, "NOT_FOUND"),
            ("POST", Some(id), ["call", m]) => match entity.methods.iter().find(|x| x.name == *m) {
                None => error(404, "NO_ROUTE"),
                Some(_) if !self.exists(&entity.name, id) => error(404, "NOT_FOUND"),
                Some(def) => (200, json!({"result": default_json(model, def.return_type.as_ref())})),
            },
            ("GET", Some(id), [role]) => {
                // role listed from this entity's side of an association
                let found = model.associations.iter().find_map(|a| {
                    if a.end_a.target == entity.name && a.end_b.role == *role {
                        Some((a, true))
                    } else if a.end_b.target == entity.name && a.end_a.role == *role {
                        Some((a, false))
                    } else {
                        None
                    }
                });
                let Some((assoc, owner_is_a)) = found else { return error(404, "NO_ROUTE") };
                if !self.exists(&entity.name, id) {
                    return error(404, "NOT_FOUND");
                }
                let listed_name = if owner_is_a { &assoc.end_b.target } else { &assoc.end_a.target };
                let listed = model.entities.iter().find(|e| &e.name == listed_name).unwrap();
                let ids = self
                    .links
                    .iter()
                    .filter(|(n, _, _)| *n == assoc.name)
                    .filter_map(|(_, a, b)| match owner_is_a {
                        true if *a == id => Some(*b),
                        false if *b == id => Some(*a),
                        _ => None,
                    })
                    .collect();
                self.list(listed, ids)
            }
            _ => error(404, "NO_ROUTE"),
        }
    }
}

fn default_json(model: &Model, ty: Option<&TypeRef>) -> Value {
    match ty {
        None => Value::Null,
        Some(TypeRef::Primitive(Primitive::Str)) => json!(""),
        Some(TypeRef::Primitive(Primitive::Int)) => json!(0),
        Some(TypeRef::Primitive(Primitive::Float)) => json!(0.0),
        Some(TypeRef::Primitive(Primitive::Bool)) => json!(false),
        Some(TypeRef::Primitive(Primitive::Date)) => json!("1970-01-01"),
        Some(TypeRef::Primitive(Primitive::DateTime)) => json!("1970-01-01T00:00:00Z"),
        Some(TypeRef::Named(e)) => json!(model.enums.iter().find(|x| &x.name == e).unwrap().literals[0]),
    }
}

pub fn snake(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() && i > 0 {
            out.push('_');
        }
        out.push(c.to_ascii_lowercase());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calendar() {
        assert!(valid_date("2024-02-29"));
        assert!(!valid_date("2023-02-29"));
        assert!(!valid_date("2024-13-01"));
        assert!(valid_datetime("2024-05-01T10:00:00Z"));
        assert!(valid_datetime("2024-05-01T10:00:00.25+02:00"));
        assert!(!valid_datetime("2024-05-01 10:00:00Z"));
        assert!(!valid_datetime("2024-05-01T24:00:00Z"));
    }
}
