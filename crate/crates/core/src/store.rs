//! Executable semantics of the generated CRUD API: payload validation, the
//! in-memory record store and the request handlers behind every route.
//!
//! Handlers return an [`ApiResponse`] (status code + JSON body); nothing here
//! touches the network, so the HTTP layer in `forge-server` stays thin and
//! the semantics can be exercised directly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::backend::{resolve_route, route_table, RouteEntry, RouteKind, RouteTarget};
use crate::model::*;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    /// `Value::Null` for bodiless responses (204).
    pub body: Value,
}

impl ApiResponse {
    pub fn new(status: u16, body: Value) -> Self {
        ApiResponse { status, body }
    }

    fn error(status: u16, code: &str) -> Self {
        ApiResponse { status, body: json!({ "error": code }) }
    }

    fn no_content() -> Self {
        ApiResponse { status: 204, body: Value::Null }
    }

    fn invalid(errors: Vec<FieldError>) -> Self {
        ApiResponse { status: 422, body: json!({ "errors": errors }) }
    }
}

pub const NOT_FOUND: &str = "NOT_FOUND";
pub const MULTIPLICITY: &str = "MULTIPLICITY";
pub const DUPLICATE: &str = "DUPLICATE";
pub const NO_ROUTE: &str = "NO_ROUTE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    Create,
    Update,
}

/// V001 missing required field, V002 type mismatch, V003 unknown field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub code: String,
}

impl FieldError {
    fn new(field: &str, code: &str) -> Self {
        FieldError { field: field.to_string(), code: code.to_string() }
    }
}

/// Field name used when the request body itself is not a JSON object.
pub const BODY_FIELD: &str = "$body";

fn is_date(text: &str) -> bool {
    text.len() == 10 && chrono::NaiveDate::parse_from_str(text, "%Y-%m-%d").is_ok()
}

fn is_datetime(text: &str) -> bool {
    text.as_bytes().get(10) == Some(&b'T')
        && is_date(&text[..10])
        && chrono::DateTime::parse_from_rfc3339(text).is_ok()
}

fn well_typed(value: &Value, ty: &TypeRef, enums: &[EnumDef]) -> bool {
    match ty {
        TypeRef::Primitive(Primitive::Str) => value.is_string(),
        TypeRef::Primitive(Primitive::Int) => value.is_i64() || value.is_u64(),
        TypeRef::Primitive(Primitive::Float) => value.is_number(),
        TypeRef::Primitive(Primitive::Bool) => value.is_boolean(),
        TypeRef::Primitive(Primitive::Date) => value.as_str().is_some_and(is_date),
        TypeRef::Primitive(Primitive::DateTime) => value.as_str().is_some_and(is_datetime),
        TypeRef::Named(name) => {
            let literal = value.as_str();
            enums
                .iter()
                .find(|e| &e.name == name)
                .is_some_and(|e| literal.is_some_and(|l| e.literals.iter().any(|x| x == l)))
        }
    }
}

/// Checks `payload` against the attributes of `entity`.
///
/// In create mode every required attribute must be present and non-null; in
/// update mode absent fields mean "unchanged". Errors list attribute problems
/// in declaration order, then unknown fields (including `id`) by name.
pub fn validate_payload(
    entity: &EntityDef,
    enums: &[EnumDef],
    payload: &Map<String, Value>,
    mode: ValidationMode,
) -> Result<Map<String, Value>, Vec<FieldError>> {
    let mut errors = Vec::new();
    let mut values = Map::new();
    for attr in &entity.attributes {
        match payload.get(&attr.name) {
            None => {
                if mode == ValidationMode::Create && attr.required {
                    errors.push(FieldError::new(&attr.name, "V001"));
                }
            }
            Some(Value::Null) => {
                if !attr.required {
                    values.insert(attr.name.clone(), Value::Null);
                } else if mode == ValidationMode::Create {
                    errors.push(FieldError::new(&attr.name, "V001"));
                } else {
                    errors.push(FieldError::new(&attr.name, "V002"));
                }
            }
            Some(value) => {
                if well_typed(value, &attr.ty, enums) {
                    values.insert(attr.name.clone(), value.clone());
                } else {
                    errors.push(FieldError::new(&attr.name, "V002"));
                }
            }
        }
    }
    let mut unknown: Vec<&String> = payload.keys().filter(|k| entity.attribute(k).is_none()).collect();
    unknown.sort();
    errors.extend(unknown.into_iter().map(|k| FieldError::new(k, "V003")));
    if errors.is_empty() {
        Ok(values)
    } else {
        Err(errors)
    }
}

/// Records, id counters and association links for one served model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Store {
    records: BTreeMap<String, BTreeMap<u64, Map<String, Value>>>,
    next_ids: BTreeMap<String, u64>,
    links: BTreeMap<String, BTreeSet<(u64, u64)>>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, entity: &str, id: u64) -> Option<&Map<String, Value>> {
        self.records.get(entity)?.get(&id)
    }

    pub fn contains(&self, entity: &str, id: u64) -> bool {
        self.record(entity, id).is_some()
    }

    /// Links of `association` as (end_a id, end_b id) pairs.
    pub fn links(&self, association: &str) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.links.get(association).into_iter().flatten().copied()
    }

    fn allocate_id(&mut self, entity: &str) -> u64 {
        let next = self.next_ids.entry(entity.to_string()).or_insert(1);
        let id = *next;
        *next += 1;
        id
    }

    pub fn to_snapshot(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }

    pub fn from_snapshot(text: &str) -> serde_json::Result<Store> {
        serde_json::from_str(text)
    }
}

fn record_json(entity: &EntityDef, id: u64, values: &Map<String, Value>) -> Value {
    let mut obj = Map::new();
    obj.insert("id".into(), json!(id));
    for attr in &entity.attributes {
        obj.insert(attr.name.clone(), values.get(&attr.name).cloned().unwrap_or(Value::Null));
    }
    Value::Object(obj)
}

fn list_json(items: Vec<Value>) -> Value {
    let total = items.len();
    json!({ "items": items, "total": total })
}

/// Route kinds that never mutate the store.
pub fn is_read_only(kind: RouteKind) -> bool {
    matches!(kind, RouteKind::List | RouteKind::Read | RouteKind::Related | RouteKind::Call)
}

fn object_payload(payload: Option<&Value>) -> Result<&Map<String, Value>, ApiResponse> {
    match payload {
        Some(Value::Object(map)) => Ok(map),
        _ => Err(ApiResponse::invalid(vec![FieldError::new(BODY_FIELD, "V002")])),
    }
}

/// Answers a read-only route (list, read, related, call).
pub fn crud_query(model: &Model, store: &Store, route: &RouteEntry, id: Option<u64>) -> ApiResponse {
    match (&route.kind, &route.target) {
        (RouteKind::List, RouteTarget::Entity(name)) => {
            let Some(entity) = model.entity(name) else { return ApiResponse::error(404, NO_ROUTE) };
            let items = store
                .records
                .get(name)
                .into_iter()
                .flatten()
                .map(|(id, values)| record_json(entity, *id, values))
                .collect();
            ApiResponse::new(200, list_json(items))
        }
        (RouteKind::Read, RouteTarget::Entity(name)) => {
            let Some(entity) = model.entity(name) else { return ApiResponse::error(404, NO_ROUTE) };
            match id.and_then(|id| store.record(name, id).map(|v| (id, v))) {
                Some((id, values)) => ApiResponse::new(200, record_json(entity, id, values)),
                None => ApiResponse::error(404, NOT_FOUND),
            }
        }
        (RouteKind::Call, RouteTarget::Method { entity, method }) => {
            let Some(def) = model.entity(entity).and_then(|e| e.method(method)) else {
                return ApiResponse::error(404, NO_ROUTE);
            };
            if !id.is_some_and(|id| store.contains(entity, id)) {
                return ApiResponse::error(404, NOT_FOUND);
            }
            let result = match &def.return_type {
                Some(ty) => default_value_of(ty, &model.enums).map(|l| l.to_json()).unwrap_or(Value::Null),
                None => Value::Null,
            };
            ApiResponse::new(200, json!({ "result": result }))
        }
        (RouteKind::Related, RouteTarget::Related { association, entity, role }) => {
            let Some(assoc) = model.association(association) else { return ApiResponse::error(404, NO_ROUTE) };
            let Some(owner_id) = id.filter(|id| store.contains(entity, *id)) else {
                return ApiResponse::error(404, NOT_FOUND);
            };
            let (listed_end, listed_is_b) = if &assoc.end_b.role == role {
                (&assoc.end_b, true)
            } else {
                (&assoc.end_a, false)
            };
            let Some(listed_entity) = model.entity(&listed_end.target) else {
                return ApiResponse::error(404, NO_ROUTE);
            };
            let ids: BTreeSet<u64> = store
                .links(association)
                .filter_map(|(a, b)| match listed_is_b {
                    true if a == owner_id => Some(b),
                    false if b == owner_id => Some(a),
                    _ => None,
                })
                .collect();
            let items = ids
                .into_iter()
                .filter_map(|id| store.record(&listed_end.target, id).map(|v| record_json(listed_entity, id, v)))
                .collect();
            ApiResponse::new(200, list_json(items))
        }
        _ => ApiResponse::error(404, NO_ROUTE),
    }
}

/// Executes any route of the served model against `store`.
pub fn crud_execute(
    model: &Model,
    store: &mut Store,
    route: &RouteEntry,
    id: Option<u64>,
    payload: Option<&Value>,
) -> ApiResponse {
    if is_read_only(route.kind) {
        return crud_query(model, store, route, id);
    }
    match (&route.kind, &route.target) {
        (RouteKind::Create, RouteTarget::Entity(name)) => {
            let Some(entity) = model.entity(name) else { return ApiResponse::error(404, NO_ROUTE) };
            let payload = match object_payload(payload) {
                Ok(p) => p,
                Err(resp) => return resp,
            };
            match validate_payload(entity, &model.enums, payload, ValidationMode::Create) {
                Ok(mut values) => {
                    for attr in &entity.attributes {
                        values.entry(attr.name.clone()).or_insert(Value::Null);
                    }
                    let id = store.allocate_id(name);
                    let body = record_json(entity, id, &values);
                    store.records.entry(name.clone()).or_default().insert(id, values);
                    ApiResponse::new(201, body)
                }
                Err(errors) => ApiResponse::invalid(errors),
            }
        }
        (RouteKind::Update, RouteTarget::Entity(name)) => {
            let Some(entity) = model.entity(name) else { return ApiResponse::error(404, NO_ROUTE) };
            let Some(id) = id.filter(|id| store.contains(name, *id)) else {
                return ApiResponse::error(404, NOT_FOUND);
            };
            let payload = match object_payload(payload) {
                Ok(p) => p,
                Err(resp) => return resp,
            };
            match validate_payload(entity, &model.enums, payload, ValidationMode::Update) {
                Ok(changes) => {
                    let values = store.records.entry(name.clone()).or_default().entry(id).or_default();
                    values.extend(changes);
                    ApiResponse::new(200, record_json(entity, id, values))
                }
                Err(errors) => ApiResponse::invalid(errors),
            }
        }
        (RouteKind::Delete, RouteTarget::Entity(name)) => {
            let removed = id.and_then(|id| store.records.get_mut(name)?.remove(&id).map(|_| id));
            let Some(id) = removed else { return ApiResponse::error(404, NOT_FOUND) };
            for assoc in &model.associations {
                let (on_a, on_b) = (&assoc.end_a.target == name, &assoc.end_b.target == name);
                if let Some(pairs) = store.links.get_mut(&assoc.name) {
                    pairs.retain(|(a, b)| !(on_a && *a == id) && !(on_b && *b == id));
                }
            }
            ApiResponse::no_content()
        }
        (RouteKind::Link, RouteTarget::Association(name)) | (RouteKind::Unlink, RouteTarget::Association(name)) => {
            let Some(assoc) = model.association(name) else { return ApiResponse::error(404, NO_ROUTE) };
            let op = if route.kind == RouteKind::Link { LinkOp::Link } else { LinkOp::Unlink };
            link_execute(store, assoc, op, payload)
        }
        _ => ApiResponse::error(404, NO_ROUTE),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkOp {
    Link,
    Unlink,
}

fn link_ids(assoc: &AssociationDef, payload: Option<&Value>) -> Result<(u64, u64), ApiResponse> {
    let payload = object_payload(payload)?;
    let keys = [format!("{}_id", assoc.end_a.role), format!("{}_id", assoc.end_b.role)];
    let mut errors = Vec::new();
    let mut ids = [0u64; 2];
    for (slot, key) in ids.iter_mut().zip(&keys) {
        match payload.get(key) {
            None => errors.push(FieldError::new(key, "V001")),
            Some(v) => match v.as_u64() {
                Some(n) => *slot = n,
                None => errors.push(FieldError::new(key, "V002")),
            },
        }
    }
    let mut unknown: Vec<&String> = payload.keys().filter(|k| !keys.contains(k)).collect();
    unknown.sort();
    errors.extend(unknown.into_iter().map(|k| FieldError::new(k, "V003")));
    if errors.is_empty() {
        Ok((ids[0], ids[1]))
    } else {
        Err(ApiResponse::invalid(errors))
    }
}

/// Adds or removes a link. Payload: `{"<role_a>_id": i, "<role_b>_id": j}`.
///
/// Linking answers 404 when either record is missing, 409 `DUPLICATE` for an
/// existing pair and 409 `MULTIPLICITY` when either record would exceed the
/// upper bound of the opposite end. Lower bounds are not enforced.
pub fn link_execute(store: &mut Store, assoc: &AssociationDef, op: LinkOp, payload: Option<&Value>) -> ApiResponse {
    let (a, b) = match link_ids(assoc, payload) {
        Ok(ids) => ids,
        Err(resp) => return resp,
    };
    match op {
        LinkOp::Link => {
            if !store.contains(&assoc.end_a.target, a) || !store.contains(&assoc.end_b.target, b) {
                return ApiResponse::error(404, NOT_FOUND);
            }
            let pairs = store.links.entry(assoc.name.clone()).or_default();
            if pairs.contains(&(a, b)) {
                return ApiResponse::error(409, DUPLICATE);
            }
            // Partners of `a` are bounded by end_b, partners of `b` by end_a.
            let partners_of_a = pairs.iter().filter(|(x, _)| *x == a).count() as u64 + 1;
            let partners_of_b = pairs.iter().filter(|(_, y)| *y == b).count() as u64 + 1;
            let within = |m: Multiplicity, n: u64| match m.upper {
                UpperBound::Unbounded => true,
                UpperBound::Bounded(u) => n <= u64::from(u),
            };
            if !within(assoc.end_b.multiplicity, partners_of_a) || !within(assoc.end_a.multiplicity, partners_of_b) {
                return ApiResponse::error(409, MULTIPLICITY);
            }
            pairs.insert((a, b));
            let body = json!({
                format!("{}_id", assoc.end_a.role): a,
                format!("{}_id", assoc.end_b.role): b,
            });
            ApiResponse::new(201, body)
        }
        LinkOp::Unlink => {
            let removed = store.links.get_mut(&assoc.name).is_some_and(|pairs| pairs.remove(&(a, b)));
            if removed {
                ApiResponse::no_content()
            } else {
                ApiResponse::error(404, NOT_FOUND)
            }
        }
    }
}

/// A model plus its route table: resolves raw requests and executes them.
#[derive(Debug, Clone)]
pub struct CrudApi {
    model: Model,
    routes: Vec<RouteEntry>,
}

/// Outcome of resolving a request line.
pub enum Resolved<'a> {
    Health,
    Route(&'a RouteEntry, Option<u64>),
    NoRoute,
}

impl CrudApi {
    pub fn new(model: Model) -> Self {
        let routes = route_table(&model);
        CrudApi { model, routes }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn routes(&self) -> &[RouteEntry] {
        &self.routes
    }

    pub fn resolve(&self, method: &str, path: &str) -> Resolved<'_> {
        if method == "GET" && path == "/healthz" {
            return Resolved::Health;
        }
        match resolve_route(&self.routes, method, path) {
            Some((route, id)) => Resolved::Route(route, id),
            None => Resolved::NoRoute,
        }
    }

    /// Parses a raw body. Empty bodies are `None`; malformed JSON is answered
    /// with a 422 naming the body.
    pub fn parse_body(body: &[u8]) -> Result<Option<Value>, ApiResponse> {
        if body.iter().all(u8::is_ascii_whitespace) {
            return Ok(None);
        }
        serde_json::from_slice(body)
            .map(Some)
            .map_err(|_| ApiResponse::invalid(vec![FieldError::new(BODY_FIELD, "V002")]))
    }

    /// Handles one request end to end against a mutable store.
    pub fn handle(&self, store: &mut Store, method: &str, path: &str, body: &[u8]) -> ApiResponse {
        match self.resolve(method, path) {
            Resolved::Health => health(),
            Resolved::NoRoute => no_route(),
            Resolved::Route(route, id) => {
                if is_read_only(route.kind) {
                    return crud_query(&self.model, store, route, id);
                }
                match Self::parse_body(body) {
                    Ok(payload) => crud_execute(&self.model, store, route, id, payload.as_ref()),
                    Err(resp) => resp,
                }
            }
        }
    }
}

pub fn health() -> ApiResponse {
    ApiResponse::new(200, json!({ "status": "ok" }))
}

pub fn no_route() -> ApiResponse {
    ApiResponse::error(404, NO_ROUTE)
}
