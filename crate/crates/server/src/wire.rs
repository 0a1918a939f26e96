//! JSON frames exchanged on the agent WebSocket.

use serde::{Deserialize, Serialize};

/// Error code for frames the server cannot interpret.
pub const BAD_FRAME: &str = "E303";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    UserMessage { session_id: String, text: String },
    SessionStarted { session_id: String, state: String, replies: Vec<String> },
    AgentReply { session_id: String, state: String, replies: Vec<String> },
    Error { code: String, message: String },
}

impl WireMessage {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        WireMessage::Error { code: code.to_string(), message: message.into() }
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("wire messages always serialize")
    }

    pub fn parse(text: &str) -> Result<WireMessage, serde_json::Error> {
        serde_json::from_str(text)
    }
}
