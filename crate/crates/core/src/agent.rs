//! Agent interpreter: token-overlap intent matching and state-machine
//! sessions that run `say`, `call` and `llm` actions.
//!
//! Matching is local to the current state: only intents named by the
//! state's `on` transitions are candidates. A message that matches none of
//! them takes the `fallback` transition when the state has one.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{Action, AgentModel, IntentDef, StateDef, Trigger};

pub const DEFAULT_THRESHOLD: f64 = 0.6;

/// Longest chain of `auto` transitions followed after entering a state.
pub const MAX_AUTO_HOPS: usize = 16;

pub const NOT_UNDERSTOOD: &str = "Sorry, I didn't understand.";

/// Lowercases, replaces every non-alphanumeric character by a space, splits
/// on whitespace and removes duplicates.
pub fn normalize_tokens(text: &str) -> BTreeSet<String> {
    let cleaned: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase();
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// `overlap / size`: the fraction of a training sentence's tokens that also
/// appear in the message. Kept as a ratio so ties compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub overlap: usize,
    pub size: usize,
}

impl Score {
    pub const ZERO: Score = Score { overlap: 0, size: 1 };

    pub fn value(self) -> f64 {
        self.overlap as f64 / self.size as f64
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.overlap * other.size).cmp(&(other.overlap * self.size))
    }
}

pub fn sentence_score(message: &BTreeSet<String>, sentence: &str) -> Score {
    let tokens = normalize_tokens(sentence);
    if tokens.is_empty() {
        return Score::ZERO;
    }
    let overlap = tokens.iter().filter(|t| message.contains(*t)).count();
    Score { overlap, size: tokens.len() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentMatch {
    pub intent: String,
    pub score: f64,
}

/// Best-scoring intent with score ≥ `threshold`; ties go to the intent
/// declared first. A message without tokens matches nothing.
pub fn match_intent<'a>(
    text: &str,
    intents: impl IntoIterator<Item = &'a IntentDef>,
    threshold: f64,
) -> Option<IntentMatch> {
    let message = normalize_tokens(text);
    if message.is_empty() {
        return None;
    }
    let mut best: Option<(&IntentDef, Score)> = None;
    for intent in intents {
        let score = intent
            .sentences
            .iter()
            .map(|s| sentence_score(&message, s))
            .max()
            .unwrap_or(Score::ZERO);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((intent, score));
        }
    }
    best.filter(|(_, s)| s.value() >= threshold)
        .map(|(intent, score)| IntentMatch { intent: intent.name.clone(), score: score.value() })
}

/// Produces replies for `llm` actions.
pub trait LlmResponder: Send + Sync {
    fn respond(&self, prompt: &str, user_text: &str) -> String;
}

/// Deterministic responder: echoes `[[llm:<prompt>|<user_text>]]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubResponder;

impl LlmResponder for StubResponder {
    fn respond(&self, prompt: &str, user_text: &str) -> String {
        format!("[[llm:{prompt}|{user_text}]]")
    }
}

pub type ActionHandler = Arc<dyn Fn(&AgentSession, &str) -> String + Send + Sync>;

/// Host functions bound to `call Entity.method` actions, keyed
/// `"Entity.method"`.
#[derive(Clone, Default)]
pub struct ActionRegistry {
    handlers: HashMap<String, ActionHandler>,
}

impl ActionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<F>(&mut self, key: impl Into<String>, handler: F)
    where
        F: Fn(&AgentSession, &str) -> String + Send + Sync + 'static,
    {
        self.handlers.insert(key.into(), Arc::new(handler));
    }

    pub fn get(&self, key: &str) -> Option<&ActionHandler> {
        self.handlers.get(key)
    }
}

impl fmt::Debug for ActionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<&String> = self.handlers.keys().collect();
        keys.sort();
        f.debug_struct("ActionRegistry").field("handlers", &keys).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSession {
    pub session_id: String,
    pub current_state: String,
    pub transcript: Vec<(Direction, String)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AgentError {
    #[error("agent '{0}' has no initial state")]
    NoInitialState(String),
    #[error("session is in unknown state '{0}'")]
    UnknownState(String),
}

/// The E302 reply appended when a chain of `auto` transitions is cut off.
pub fn auto_loop_message(state: &str) -> String {
    format!("E302: more than {MAX_AUTO_HOPS} automatic transitions, stopped in state '{state}'")
}

/// An agent model bound to its responder, action registry and threshold.
#[derive(Clone)]
pub struct AgentRuntime {
    agent: Arc<AgentModel>,
    responder: Arc<dyn LlmResponder>,
    registry: ActionRegistry,
    threshold: f64,
}

impl fmt::Debug for AgentRuntime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AgentRuntime")
            .field("agent", &self.agent.name)
            .field("registry", &self.registry)
            .field("threshold", &self.threshold)
            .finish()
    }
}

impl AgentRuntime {
    pub fn new(agent: AgentModel, responder: Arc<dyn LlmResponder>, registry: ActionRegistry) -> Self {
        AgentRuntime { agent: Arc::new(agent), responder, registry, threshold: DEFAULT_THRESHOLD }
    }

    /// Runtime with the stub responder and no bound actions.
    pub fn with_stub(agent: AgentModel) -> Self {
        Self::new(agent, Arc::new(StubResponder), ActionRegistry::new())
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn agent(&self) -> &AgentModel {
        &self.agent
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn state(&self, name: &str) -> Result<&StateDef, AgentError> {
        self.agent.state(name).ok_or_else(|| AgentError::UnknownState(name.to_string()))
    }

    /// Enters `target`: runs its actions, then follows `auto` transitions
    /// (at most [`MAX_AUTO_HOPS`] of them).
    fn enter(&self, session: &mut AgentSession, target: &str, user_text: &str, replies: &mut Vec<String>) -> Result<(), AgentError> {
        let mut state = self.state(target)?;
        let mut hops = 0;
        loop {
            session.current_state = state.name.clone();
            for action in &state.actions {
                let reply = match &action.action {
                    Action::Say(text) => text.clone(),
                    Action::LlmReply(prompt) => self.responder.respond(prompt, user_text),
                    Action::CallMethod { entity, method } => {
                        let key = format!("{entity}.{method}");
                        match self.registry.get(&key) {
                            Some(handler) => handler(session, user_text),
                            None => format!("[[unbound:{key}]]"),
                        }
                    }
                };
                replies.push(reply);
            }
            let Some(next) = state.auto_target() else { break };
            if hops == MAX_AUTO_HOPS {
                replies.push(auto_loop_message(&state.name));
                break;
            }
            hops += 1;
            state = self.state(next)?;
        }
        Ok(())
    }

    /// Opens a session in the initial state and returns the entry replies.
    pub fn start_session(&self) -> Result<(AgentSession, Vec<String>), AgentError> {
        let initial = self
            .agent
            .initial_state()
            .ok_or_else(|| AgentError::NoInitialState(self.agent.name.clone()))?;
        let mut session = AgentSession {
            session_id: uuid::Uuid::new_v4().to_string(),
            current_state: initial.name.clone(),
            transcript: Vec::new(),
        };
        let mut replies = Vec::new();
        self.enter(&mut session, &initial.name.clone(), "", &mut replies)?;
        session.transcript.extend(replies.iter().map(|r| (Direction::Out, r.clone())));
        Ok((session, replies))
    }

    /// Processes one user message and returns the replies it produced.
    pub fn handle_message(&self, session: &mut AgentSession, text: &str) -> Result<Vec<String>, AgentError> {
        session.transcript.push((Direction::In, text.to_string()));
        let state = self.state(&session.current_state)?;
        let candidates: Vec<&IntentDef> = self
            .agent
            .intents
            .iter()
            .filter(|intent| {
                state
                    .transitions
                    .iter()
                    .any(|t| matches!(&t.trigger, Trigger::OnIntent(name) if *name == intent.name))
            })
            .collect();

        let target = match match_intent(text, candidates, self.threshold) {
            Some(m) => state
                .transitions
                .iter()
                .find(|t| matches!(&t.trigger, Trigger::OnIntent(name) if *name == m.intent))
                .map(|t| t.target.clone()),
            None => state.fallback_target().map(str::to_string),
        };

        let mut replies = Vec::new();
        match target {
            Some(target) => self.enter(session, &target, text, &mut replies)?,
            None => replies.push(NOT_UNDERSTOOD.to_string()),
        }
        session.transcript.extend(replies.iter().map(|r| (Direction::Out, r.clone())));
        Ok(replies)
    }
}

/// Opens a session on `agent`; see [`AgentRuntime::start_session`].
pub fn start_session(
    agent: &AgentModel,
    responder: Arc<dyn LlmResponder>,
    registry: ActionRegistry,
) -> Result<(AgentSession, Vec<String>), AgentError> {
    AgentRuntime::new(agent.clone(), responder, registry).start_session()
}
