//! Structural model → backend artifacts: the CRUD route table, an OpenAPI
//! 3.0.3 description, relational DDL and the deployable backend bundle.

use std::fmt;

use serde_json::{json, Map, Value};

use crate::dsl::print_model;
use crate::model::*;
use crate::project::{canonical_json, GenError, GeneratedProject, TemplateSet};

pub const OPENAPI_VERSION: &str = "3.0.3";
pub const API_VERSION: &str = "0.1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HttpMethod {
    Get,
    Post,
    Put,
    Delete,
}

impl HttpMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            HttpMethod::Get => "GET",
            HttpMethod::Post => "POST",
            HttpMethod::Put => "PUT",
            HttpMethod::Delete => "DELETE",
        }
    }

    pub fn parse(method: &str) -> Option<HttpMethod> {
        match method {
            "GET" => Some(HttpMethod::Get),
            "POST" => Some(HttpMethod::Post),
            "PUT" => Some(HttpMethod::Put),
            "DELETE" => Some(HttpMethod::Delete),
            _ => None,
        }
    }
}

impl fmt::Display for HttpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RouteKind {
    List,
    Create,
    Read,
    Update,
    Delete,
    Call,
    Link,
    Unlink,
    Related,
}

/// What a route operates on, by model name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RouteTarget {
    Entity(String),
    Method { entity: String, method: String },
    Association(String),
    /// Records linked through `association` to the `entity` record in the
    /// path, listed under `role`.
    Related { association: String, entity: String, role: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteEntry {
    pub method: HttpMethod,
    pub path: String,
    pub operation_id: String,
    pub kind: RouteKind,
    pub target: RouteTarget,
}

impl RouteEntry {
    /// Matches a concrete request path. Returns the `{id}` value when the
    /// template has one.
    pub fn match_path(&self, method: HttpMethod, path: &str) -> Option<Option<u64>> {
        if method != self.method {
            return None;
        }
        let mut id = None;
        let mut template = self.path.split('/');
        let mut actual = path.split('/');
        loop {
            match (template.next(), actual.next()) {
                (None, None) => return Some(id),
                (Some("{id}"), Some(seg)) => {
                    if seg.is_empty() || !seg.bytes().all(|b| b.is_ascii_digit()) {
                        return None;
                    }
                    id = Some(seg.parse().ok()?);
                }
                (Some(t), Some(a)) if t == a => {}
                _ => return None,
            }
        }
    }
}

/// Finds the route answering `method path`.
pub fn resolve_route<'r>(routes: &'r [RouteEntry], method: &str, path: &str) -> Option<(&'r RouteEntry, Option<u64>)> {
    let method = HttpMethod::parse(method)?;
    routes.iter().find_map(|r| r.match_path(method, path).map(|id| (r, id)))
}

/// Every CRUD, method-call and association route of the model. Entities come
/// first in declaration order, then associations.
pub fn route_table(model: &Model) -> Vec<RouteEntry> {
    let mut routes = Vec::new();
    for entity in &model.entities {
        let e = normalize_identifier(&entity.name);
        let target = || RouteTarget::Entity(entity.name.clone());
        let collection = format!("/api/{e}");
        let item = format!("/api/{e}/{{id}}");
        let crud = [
            (HttpMethod::Get, &collection, "list", RouteKind::List),
            (HttpMethod::Post, &collection, "create", RouteKind::Create),
            (HttpMethod::Get, &item, "read", RouteKind::Read),
            (HttpMethod::Put, &item, "update", RouteKind::Update),
            (HttpMethod::Delete, &item, "delete", RouteKind::Delete),
        ];
        for (method, path, verb, kind) in crud {
            routes.push(RouteEntry {
                method,
                path: path.clone(),
                operation_id: format!("{verb}_{e}"),
                kind,
                target: target(),
            });
        }
        for m in &entity.methods {
            routes.push(RouteEntry {
                method: HttpMethod::Post,
                path: format!("/api/{e}/{{id}}/call/{}", m.name),
                operation_id: format!("call_{e}_{}", m.name),
                kind: RouteKind::Call,
                target: RouteTarget::Method { entity: entity.name.clone(), method: m.name.clone() },
            });
        }
    }
    for assoc in &model.associations {
        let a = normalize_identifier(&assoc.name);
        routes.push(RouteEntry {
            method: HttpMethod::Post,
            path: format!("/api/assoc/{a}/link"),
            operation_id: format!("link_{a}"),
            kind: RouteKind::Link,
            target: RouteTarget::Association(assoc.name.clone()),
        });
        routes.push(RouteEntry {
            method: HttpMethod::Delete,
            path: format!("/api/assoc/{a}/unlink"),
            operation_id: format!("unlink_{a}"),
            kind: RouteKind::Unlink,
            target: RouteTarget::Association(assoc.name.clone()),
        });
        // Each role is reachable from the record on the opposite end.
        for (owner, listed) in [(&assoc.end_a, &assoc.end_b), (&assoc.end_b, &assoc.end_a)] {
            let e = normalize_identifier(&owner.target);
            routes.push(RouteEntry {
                method: HttpMethod::Get,
                path: format!("/api/{e}/{{id}}/{}", listed.role),
                operation_id: format!("related_{a}_{e}_{}", listed.role),
                kind: RouteKind::Related,
                target: RouteTarget::Related {
                    association: assoc.name.clone(),
                    entity: owner.target.clone(),
                    role: listed.role.clone(),
                },
            });
        }
    }
    routes
}

fn type_schema(model: &Model, ty: &TypeRef) -> Value {
    match ty {
        TypeRef::Primitive(Primitive::Str) => json!({"type": "string"}),
        TypeRef::Primitive(Primitive::Int) => json!({"type": "integer"}),
        TypeRef::Primitive(Primitive::Float) => json!({"type": "number"}),
        TypeRef::Primitive(Primitive::Bool) => json!({"type": "boolean"}),
        TypeRef::Primitive(Primitive::Date) => json!({"type": "string", "format": "date"}),
        TypeRef::Primitive(Primitive::DateTime) => json!({"type": "string", "format": "date-time"}),
        TypeRef::Named(name) => {
            let literals = model.enum_def(name).map(|e| e.literals.clone()).unwrap_or_default();
            json!({"type": "string", "enum": literals})
        }
    }
}

fn entity_schema(model: &Model, entity: &EntityDef) -> Value {
    let mut properties = Map::new();
    properties.insert("id".into(), json!({"type": "integer", "readOnly": true}));
    for attr in &entity.attributes {
        let mut schema = type_schema(model, &attr.ty);
        if !attr.required {
            schema["nullable"] = Value::Bool(true);
        }
        properties.insert(attr.name.clone(), schema);
    }
    let mut schema = json!({"type": "object", "properties": properties});
    let required: Vec<&str> = entity.attributes.iter().filter(|a| a.required).map(|a| a.name.as_str()).collect();
    if let Some(description) = &entity.description {
        schema["description"] = json!(description);
    }
    if !required.is_empty() {
        schema["required"] = json!(required);
    }
    schema
}

/// Update bodies: the entity's attributes, all optional (absent means
/// unchanged), without `id`.
fn patch_schema(model: &Model, entity: &str) -> Value {
    let mut schema = model.entity(entity).map(|e| entity_schema(model, e)).unwrap_or_else(|| json!({"type": "object"}));
    if let Some(obj) = schema.as_object_mut() {
        obj.remove("required");
        obj.remove("description");
        if let Some(props) = obj.get_mut("properties").and_then(Value::as_object_mut) {
            props.remove("id");
        }
    }
    schema
}

fn schema_ref(entity: &str) -> Value {
    json!({"$ref": format!("#/components/schemas/{entity}")})
}

fn json_content(schema: Value) -> Value {
    json!({"application/json": {"schema": schema}})
}

fn response(description: &str, schema: Option<Value>) -> Value {
    match schema {
        Some(schema) => json!({"description": description, "content": json_content(schema)}),
        None => json!({"description": description}),
    }
}

fn error_response(description: &str) -> Value {
    response(
        description,
        Some(json!({"type": "object", "properties": {"error": {"type": "string"}}, "required": ["error"]})),
    )
}

fn validation_response() -> Value {
    let field_error = json!({
        "type": "object",
        "properties": {"field": {"type": "string"}, "code": {"type": "string", "enum": ["V001", "V002", "V003"]}},
        "required": ["field", "code"],
    });
    response(
        "Validation failed",
        Some(json!({"type": "object", "properties": {"errors": {"type": "array", "items": field_error}}, "required": ["errors"]})),
    )
}

fn list_schema(entity: &str) -> Value {
    json!({
        "type": "object",
        "properties": {"items": {"type": "array", "items": schema_ref(entity)}, "total": {"type": "integer"}},
        "required": ["items", "total"],
    })
}

fn link_schema(assoc: &AssociationDef) -> Value {
    let a = format!("{}_id", assoc.end_a.role);
    let b = format!("{}_id", assoc.end_b.role);
    json!({
        "type": "object",
        "properties": {a.clone(): {"type": "integer"}, b.clone(): {"type": "integer"}},
        "required": [a, b],
    })
}

fn id_parameter() -> Value {
    json!([{"name": "id", "in": "path", "required": true, "schema": {"type": "integer"}}])
}

fn operation(model: &Model, route: &RouteEntry) -> Value {
    let mut op = json!({"operationId": route.operation_id});
    let tag = match &route.target {
        RouteTarget::Entity(e) | RouteTarget::Method { entity: e, .. } | RouteTarget::Related { entity: e, .. } => e,
        RouteTarget::Association(a) => a,
    };
    op["tags"] = json!([tag]);
    if route.path.contains("{id}") {
        op["parameters"] = id_parameter();
    }
    let responses = match (&route.kind, &route.target) {
        (RouteKind::List, RouteTarget::Entity(e)) => json!({"200": response("All records, sorted by id", Some(list_schema(e)))}),
        (RouteKind::Create, RouteTarget::Entity(e)) => {
            op["requestBody"] = json!({"required": true, "content": json_content(schema_ref(e))});
            json!({"201": response("Created", Some(schema_ref(e))), "422": validation_response()})
        }
        (RouteKind::Read, RouteTarget::Entity(e)) => {
            json!({"200": response("The record", Some(schema_ref(e))), "404": error_response("No such record")})
        }
        (RouteKind::Update, RouteTarget::Entity(e)) => {
            op["requestBody"] = json!({"required": true, "content": json_content(patch_schema(model, e))});
            json!({
                "200": response("Updated", Some(schema_ref(e))),
                "404": error_response("No such record"),
                "422": validation_response(),
            })
        }
        (RouteKind::Delete, _) => json!({"204": response("Deleted", None), "404": error_response("No such record")}),
        (RouteKind::Call, RouteTarget::Method { entity, method }) => {
            let def = model.entity(entity).and_then(|e| e.method(method));
            let mut args = Map::new();
            for p in def.map(|d| d.params.as_slice()).unwrap_or_default() {
                args.insert(p.name.clone(), type_schema(model, &p.ty));
            }
            op["requestBody"] = json!({
                "required": false,
                "content": json_content(json!({"type": "object", "properties": args})),
            });
            let result = match def.and_then(|d| d.return_type.as_ref()) {
                Some(ty) => type_schema(model, ty),
                None => json!({"nullable": true}),
            };
            json!({
                "200": response("Method result", Some(json!({"type": "object", "properties": {"result": result}, "required": ["result"]}))),
                "404": error_response("No such record"),
            })
        }
        (RouteKind::Link, RouteTarget::Association(name)) | (RouteKind::Unlink, RouteTarget::Association(name)) => {
            let schema = model.association(name).map(link_schema).unwrap_or_else(|| json!({"type": "object"}));
            op["requestBody"] = json!({"required": true, "content": json_content(schema.clone())});
            if route.kind == RouteKind::Link {
                json!({
                    "201": response("Linked", Some(schema)),
                    "404": error_response("A linked record does not exist"),
                    "409": error_response("Duplicate link or multiplicity exceeded"),
                    "422": validation_response(),
                })
            } else {
                json!({
                    "204": response("Unlinked", None),
                    "404": error_response("No such link"),
                    "422": validation_response(),
                })
            }
        }
        (RouteKind::Related, RouteTarget::Related { association, role, .. }) => {
            let listed = model
                .association(association)
                .and_then(|a| a.ends().into_iter().find(|end| &end.role == role))
                .map(|end| end.target.clone())
                .unwrap_or_default();
            json!({
                "200": response("Linked records, sorted by id", Some(list_schema(&listed))),
                "404": error_response("No such record"),
            })
        }
        _ => json!({}),
    };
    op["responses"] = responses;
    op
}

/// Builds the OpenAPI document: one path item per distinct route path and
/// one object schema per entity.
pub fn emit_openapi(model: &Model) -> Value {
    let mut paths = Map::new();
    for route in route_table(model) {
        let item = paths.entry(route.path.clone()).or_insert_with(|| json!({}));
        item[route.method.as_str().to_ascii_lowercase()] = operation(model, &route);
    }
    let mut schemas = Map::new();
    for entity in &model.entities {
        schemas.insert(entity.name.clone(), entity_schema(model, entity));
    }
    json!({
        "openapi": OPENAPI_VERSION,
        "info": {"title": model.name, "version": API_VERSION},
        "paths": paths,
        "components": {"schemas": schemas},
    })
}

/// The OpenAPI document in its deterministic serialized form.
pub fn openapi_json(model: &Model) -> String {
    canonical_json(&emit_openapi(model))
}

fn sql_type(ty: &TypeRef) -> &'static str {
    match ty.as_primitive() {
        Some(Primitive::Int) | Some(Primitive::Bool) => "INTEGER",
        Some(Primitive::Float) => "REAL",
        _ => "TEXT",
    }
}

/// Where an association is stored in the relational schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssociationStorage<'m> {
    /// `column` on the table of `table_entity`, referencing `referenced`.
    ForeignKey { table_entity: &'m str, column: String, referenced: &'m str, not_null: bool },
    /// A junction table named after the association.
    Junction { table: String },
}

/// A bounded-by-one end becomes a foreign key on the opposite table (the
/// first such end when both are); otherwise a junction table.
pub fn association_storage(assoc: &AssociationDef) -> AssociationStorage<'_> {
    let single = [(&assoc.end_a, &assoc.end_b), (&assoc.end_b, &assoc.end_a)]
        .into_iter()
        .find(|(end, _)| end.multiplicity.is_single());
    match single {
        Some((end, opposite)) => AssociationStorage::ForeignKey {
            table_entity: &opposite.target,
            column: format!("{}_id", end.role),
            referenced: &end.target,
            not_null: end.multiplicity.lower >= 1,
        },
        None => AssociationStorage::Junction { table: normalize_identifier(&assoc.name) },
    }
}

/// Emits one `CREATE TABLE` statement per line: entities in declaration
/// order, then junction tables.
pub fn emit_sql_ddl(model: &Model) -> String {
    let mut out = String::new();
    for entity in &model.entities {
        let mut columns = vec!["id INTEGER PRIMARY KEY".to_string()];
        for attr in &entity.attributes {
            let mut col = format!("{} {}", attr.name, sql_type(&attr.ty));
            if attr.required {
                col.push_str(" NOT NULL");
            }
            if let TypeRef::Named(name) = &attr.ty {
                if let Some(e) = model.enum_def(name) {
                    let literals: Vec<String> = e.literals.iter().map(|l| format!("'{l}'")).collect();
                    col.push_str(&format!(" CHECK ({} IN ({}))", attr.name, literals.join(", ")));
                }
            }
            columns.push(col);
        }
        for assoc in &model.associations {
            if let AssociationStorage::ForeignKey { table_entity, column, referenced, not_null } =
                association_storage(assoc)
            {
                if table_entity == entity.name {
                    let null = if not_null { " NOT NULL" } else { "" };
                    columns.push(format!(
                        "{column} INTEGER{null} REFERENCES {}(id)",
                        normalize_identifier(referenced)
                    ));
                }
            }
        }
        out.push_str(&format!(
            "CREATE TABLE {} ({});\n",
            normalize_identifier(&entity.name),
            columns.join(", ")
        ));
    }
    for assoc in &model.associations {
        if let AssociationStorage::Junction { table } = association_storage(assoc) {
            let a = format!("{}_id", assoc.end_a.role);
            let b = format!("{}_id", assoc.end_b.role);
            out.push_str(&format!(
                "CREATE TABLE {table} ({a} INTEGER NOT NULL REFERENCES {}(id), {b} INTEGER NOT NULL REFERENCES {}(id), PRIMARY KEY ({a}, {b}));\n",
                normalize_identifier(&assoc.end_a.target),
                normalize_identifier(&assoc.end_b.target),
            ));
        }
    }
    out
}

/// Version of the toolkit the generated bundles depend on.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const BACKEND_DEFAULT_PORT: u16 = 8000;

/// Emits `backend/`: the canonical model, `openapi.json`, `schema.sql`, the
/// entry point and its build manifest.
pub fn generate_backend_bundle(model: &Model, templates: &TemplateSet) -> Result<GeneratedProject, GenError> {
    let package = format!("{}-api", normalize_identifier(&model.name));
    let port = BACKEND_DEFAULT_PORT.to_string();
    let vars = [
        ("package", package.as_str()),
        ("model_name", model.name.as_str()),
        ("toolkit_version", TOOLKIT_VERSION),
        ("default_port", port.as_str()),
    ];
    let mut project = GeneratedProject::new();
    project.insert("backend/model.buml", print_model(model))?;
    project.insert("backend/openapi.json", openapi_json(model))?;
    project.insert("backend/schema.sql", emit_sql_ddl(model))?;
    project.insert("backend/main.rs", templates.render("backend/main.rs.tmpl", &vars)?)?;
    project.insert("backend/Cargo.toml", templates.render("backend/Cargo.toml.tmpl", &vars)?)?;
    Ok(project)
}
