//! In-memory metamodel for the three perspectives of an application model:
//! structural (entities, enums, associations), agent (state machines) and
//! GUI (pages of components).
//!
//! Every definition carries a [`Loc`] pointing back at its source text.
//! `Loc` compares equal to every other `Loc`, so two models are equal when
//! their content is equal, regardless of where (or whether) they were parsed.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Name reserved for the implicit integer surrogate key of every entity.
pub const RESERVED_ID: &str = "id";

/// A 1-based line/column position plus a length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        SourceSpan { line, column, length }
    }
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan { line: 1, column: 1, length: 0 }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Source location attached to a model element. Ignored by equality.
#[derive(Debug, Clone, Copy, Default)]
pub struct Loc(pub SourceSpan);

impl Loc {
    pub fn span(&self) -> SourceSpan {
        self.0
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl Eq for Loc {}

impl From<SourceSpan> for Loc {
    fn from(span: SourceSpan) -> Self {
        Loc(span)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    Str,
    Int,
    Float,
    Bool,
    Date,
    DateTime,
}

impl Primitive {
    pub const ALL: [Primitive; 6] = [
        Primitive::Str,
        Primitive::Int,
        Primitive::Float,
        Primitive::Bool,
        Primitive::Date,
        Primitive::DateTime,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Primitive::Str => "str",
            Primitive::Int => "int",
            Primitive::Float => "float",
            Primitive::Bool => "bool",
            Primitive::Date => "date",
            Primitive::DateTime => "datetime",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Primitive> {
        Primitive::ALL.into_iter().find(|p| p.keyword() == word)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Primitive::Int | Primitive::Float)
    }
}

/// A type reference: a primitive, or a name that should resolve to an enum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Primitive(Primitive),
    Named(String),
}

impl TypeRef {
    pub fn as_primitive(&self) -> Option<Primitive> {
        match self {
            TypeRef::Primitive(p) => Some(*p),
            TypeRef::Named(_) => None,
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Primitive(p) => f.write_str(p.keyword()),
            TypeRef::Named(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub name: String,
    pub entities: Vec<EntityDef>,
    pub enums: Vec<EnumDef>,
    pub associations: Vec<AssociationDef>,
    pub agents: Vec<AgentModel>,
    pub pages: Vec<PageDef>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model { name: name.into(), ..Default::default() }
    }

    pub fn entity(&self, name: &str) -> Option<&EntityDef> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn enum_def(&self, name: &str) -> Option<&EnumDef> {
        self.enums.iter().find(|e| e.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&AssociationDef> {
        self.associations.iter().find(|a| a.name == name)
    }

    pub fn agent(&self, name: &str) -> Option<&AgentModel> {
        self.agents.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntityDef {
    pub name: String,
    pub description: Option<String>,
    pub uri: Option<String>,
    pub icon: Option<String>,
    pub attributes: Vec<AttributeDef>,
    pub methods: Vec<MethodDef>,
    pub loc: Loc,
}

impl EntityDef {
    pub fn new(name: impl Into<String>) -> Self {
        EntityDef { name: name.into(), ..Default::default() }
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDef> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDef {
    pub name: String,
    pub ty: TypeRef,
    pub required: bool,
    pub loc: Loc,
    pub ty_loc: Loc,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, ty: TypeRef, required: bool) -> Self {
        AttributeDef { name: name.into(), ty, required, loc: Loc::default(), ty_loc: Loc::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDef {
    pub name: String,
    pub ty: TypeRef,
    pub loc: Loc,
    pub ty_loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub name: String,
    pub params: Vec<ParamDef>,
    pub return_type: Option<TypeRef>,
    pub loc: Loc,
    pub return_loc: Loc,
}

impl MethodDef {
    pub fn new(name: impl Into<String>, return_type: Option<TypeRef>) -> Self {
        MethodDef {
            name: name.into(),
            params: Vec::new(),
            return_type,
            loc: Loc::default(),
            return_loc: Loc::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumDef {
    pub name: String,
    pub literals: Vec<String>,
    pub loc: Loc,
}

/// Inclusive upper bound of a multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpperBound {
    Bounded(u32),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    pub lower: u32,
    pub upper: UpperBound,
}

impl Multiplicity {
    pub const ONE: Multiplicity = Multiplicity { lower: 1, upper: UpperBound::Bounded(1) };
    pub const OPTIONAL: Multiplicity = Multiplicity { lower: 0, upper: UpperBound::Bounded(1) };
    pub const MANY: Multiplicity = Multiplicity { lower: 0, upper: UpperBound::Unbounded };

    pub fn new(lower: u32, upper: UpperBound) -> Self {
        Multiplicity { lower, upper }
    }

    /// Valid bounds: a bounded upper is at least 1 and at least `lower`.
    pub fn is_valid(&self) -> bool {
        match self.upper {
            UpperBound::Bounded(u) => u >= 1 && self.lower <= u,
            UpperBound::Unbounded => true,
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        multiplicity_contains(*self, n)
    }

    pub fn is_single(&self) -> bool {
        self.upper == UpperBound::Bounded(1)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            UpperBound::Bounded(u) => write!(f, "{}..{}", self.lower, u),
            UpperBound::Unbounded => write!(f, "{}..*", self.lower),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationEnd {
    pub role: String,
    pub target: String,
    pub multiplicity: Multiplicity,
    pub loc: Loc,
}

impl AssociationEnd {
    pub fn new(role: impl Into<String>, target: impl Into<String>, multiplicity: Multiplicity) -> Self {
        AssociationEnd { role: role.into(), target: target.into(), multiplicity, loc: Loc::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationDef {
    pub name: String,
    pub end_a: AssociationEnd,
    pub end_b: AssociationEnd,
    pub loc: Loc,
}

impl AssociationDef {
    pub fn ends(&self) -> [&AssociationEnd; 2] {
        [&self.end_a, &self.end_b]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgentModel {
    pub name: String,
    pub intents: Vec<IntentDef>,
    pub states: Vec<StateDef>,
    pub loc: Loc,
}

impl AgentModel {
    pub fn state(&self, name: &str) -> Option<&StateDef> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn intent(&self, name: &str) -> Option<&IntentDef> {
        self.intents.iter().find(|i| i.name == name)
    }

    /// The first state flagged `initial`.
    pub fn initial_state(&self) -> Option<&StateDef> {
        self.states.iter().find(|s| s.initial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentDef {
    pub name: String,
    pub sentences: Vec<String>,
    pub loc: Loc,
}

impl IntentDef {
    pub fn new<S: Into<String>>(name: impl Into<String>, sentences: impl IntoIterator<Item = S>) -> Self {
        IntentDef {
            name: name.into(),
            sentences: sentences.into_iter().map(Into::into).collect(),
            loc: Loc::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateDef {
    pub name: String,
    pub initial: bool,
    pub actions: Vec<ActionSpec>,
    pub transitions: Vec<TransitionSpec>,
    pub loc: Loc,
}

impl StateDef {
    pub fn auto_target(&self) -> Option<&str> {
        self.transitions
            .iter()
            .find(|t| t.trigger == Trigger::Auto)
            .map(|t| t.target.as_str())
    }

    pub fn fallback_target(&self) -> Option<&str> {
        self.transitions
            .iter()
            .find(|t| t.trigger == Trigger::Fallback)
            .map(|t| t.target.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Say(String),
    CallMethod { entity: String, method: String },
    LlmReply(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    pub action: Action,
    pub loc: Loc,
}

impl From<Action> for ActionSpec {
    fn from(action: Action) -> Self {
        ActionSpec { action, loc: Loc::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Trigger {
    OnIntent(String),
    Auto,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub trigger: Trigger,
    pub target: String,
    pub loc: Loc,
    pub target_loc: Loc,
}

impl TransitionSpec {
    pub fn new(trigger: Trigger, target: impl Into<String>) -> Self {
        TransitionSpec { trigger, target: target.into(), loc: Loc::default(), target_loc: Loc::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PageDef {
    pub name: String,
    pub style: Vec<(String, String)>,
    pub components: Vec<ComponentDef>,
    pub loc: Loc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Bar,
    Line,
    Pie,
}

impl ChartKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ChartKind::Bar => "bar",
            ChartKind::Line => "line",
            ChartKind::Pie => "pie",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ChartKind> {
        match word {
            "bar" => Some(ChartKind::Bar),
            "line" => Some(ChartKind::Line),
            "pie" => Some(ChartKind::Pie),
            _ => None,
        }
    }
}

/// A GUI component. Serializes as `{"kind": ..., "name": ..., ...}`, which is
/// the form consumed by the browser runtime through `app-config.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ComponentDef {
    #[serde(rename = "table")]
    DataTable {
        name: String,
        entity: String,
        columns: Vec<String>,
        #[serde(skip)]
        loc: Loc,
    },
    Form {
        name: String,
        entity: String,
        #[serde(skip)]
        loc: Loc,
    },
    #[serde(rename = "button")]
    ActionButton {
        name: String,
        entity: String,
        method: String,
        #[serde(skip)]
        loc: Loc,
    },
    Chart {
        name: String,
        entity: String,
        #[serde(rename = "chart_type")]
        chart: ChartKind,
        x: String,
        y: String,
        #[serde(skip)]
        loc: Loc,
    },
    #[serde(rename = "chat")]
    ChatWidget {
        name: String,
        agent: String,
        #[serde(skip)]
        loc: Loc,
    },
}

impl ComponentDef {
    pub fn name(&self) -> &str {
        match self {
            ComponentDef::DataTable { name, .. }
            | ComponentDef::Form { name, .. }
            | ComponentDef::ActionButton { name, .. }
            | ComponentDef::Chart { name, .. }
            | ComponentDef::ChatWidget { name, .. } => name,
        }
    }

    pub fn loc(&self) -> Loc {
        match self {
            ComponentDef::DataTable { loc, .. }
            | ComponentDef::Form { loc, .. }
            | ComponentDef::ActionButton { loc, .. }
            | ComponentDef::Chart { loc, .. }
            | ComponentDef::ChatWidget { loc, .. } => *loc,
        }
    }

    /// Entity the component is bound to, if any.
    pub fn entity(&self) -> Option<&str> {
        match self {
            ComponentDef::DataTable { entity, .. }
            | ComponentDef::Form { entity, .. }
            | ComponentDef::ActionButton { entity, .. }
            | ComponentDef::Chart { entity, .. } => Some(entity),
            ComponentDef::ChatWidget { .. } => None,
        }
    }
}

/// Converts a PascalCase (or already snake_case) identifier to snake_case by
/// inserting `_` before every interior uppercase letter and lowercasing.
///
/// ```
/// use forge_core::model::normalize_identifier;
/// assert_eq!(normalize_identifier("BookCopy"), "book_copy");
/// assert_eq!(normalize_identifier("FAQAgent"), "f_a_q_agent");
/// ```
pub fn normalize_identifier(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 4);
    for (i, ch) in name.chars().enumerate() {
        if ch.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(ch.to_ascii_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

pub fn multiplicity_contains(m: Multiplicity, n: u64) -> bool {
    let above_lower = n >= u64::from(m.lower);
    match m.upper {
        UpperBound::Unbounded => above_lower,
        UpperBound::Bounded(u) => above_lower && n <= u64::from(u),
    }
}

/// A literal value produced for method stubs.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Literal {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Literal::Str(s) => serde_json::Value::String(s.clone()),
            Literal::Int(i) => serde_json::Value::from(*i),
            Literal::Float(f) => serde_json::Value::from(*f),
            Literal::Bool(b) => serde_json::Value::Bool(*b),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("type '{0}' names no primitive or enum")]
pub struct UnresolvedType(pub String);

pub fn default_value_of(ty: &TypeRef, enums: &[EnumDef]) -> Result<Literal, UnresolvedType> {
    Ok(match ty {
        TypeRef::Primitive(Primitive::Str) => Literal::Str(String::new()),
        TypeRef::Primitive(Primitive::Int) => Literal::Int(0),
        TypeRef::Primitive(Primitive::Float) => Literal::Float(0.0),
        TypeRef::Primitive(Primitive::Bool) => Literal::Bool(false),
        TypeRef::Primitive(Primitive::Date) => Literal::Str("1970-01-01".into()),
        TypeRef::Primitive(Primitive::DateTime) => Literal::Str("1970-01-01T00:00:00Z".into()),
        TypeRef::Named(name) => {
            let first = enums
                .iter()
                .find(|e| &e.name == name)
                .and_then(|e| e.literals.first())
                .ok_or_else(|| UnresolvedType(name.clone()))?;
            Literal::Str(first.clone())
        }
    })
}
