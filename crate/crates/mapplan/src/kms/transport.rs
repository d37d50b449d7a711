use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::Message;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("request failed: {0}")]
    Network(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("response is not a chat completion: {0}")]
    BadResponse(String),
    #[error("no replay fixture for digest {digest} in {dir}")]
    MissingFixture { digest: String, dir: PathBuf },
    #[error("scripted transport has no reply left")]
    Exhausted,
    #[error("fixture I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// A chat-completion endpoint: messages in, completion text out. Calls
/// block until the answer arrives.
pub trait Transport {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError>;
}

/// Hex SHA-256 of the compact JSON encoding of the message list.
pub fn digest(messages: &[Message]) -> String {
    let json = serde_json::to_vec(messages).expect("messages serialize");
    hex::encode(Sha256::digest(json))
}

/// Answers from `<dir>/<digest>.txt`.
#[derive(Clone, Debug)]
pub struct ReplayTransport {
    dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayTransport { dir: dir.into() }
    }

    pub fn path_for(dir: &Path, messages: &[Message]) -> PathBuf {
        dir.join(format!("{}.txt", digest(messages)))
    }
}

impl Transport for ReplayTransport {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError> {
        let path = Self::path_for(&self.dir, messages);
        match std::fs::read_to_string(&path) {
            Ok(s) => Ok(s),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(TransportError::MissingFixture { digest: digest(messages), dir: self.dir.clone() })
            }
            Err(e) => Err(e.into()),
        }
    }
}

/// Forwards to another transport and stores every answer as a replay
/// fixture.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Self {
        RecordingTransport { inner, dir: dir.into() }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError> {
        let answer = self.inner.complete(messages)?;
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(ReplayTransport::path_for(&self.dir, messages), &answer)?;
        Ok(answer)
    }
}

/// Canned answers returned in order, whatever the request.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    replies: Mutex<VecDeque<String>>,
    calls: Mutex<usize>,
}

impl ScriptedTransport {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        ScriptedTransport {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            calls: Mutex::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        *self.calls.lock().unwrap()
    }
}

impl Transport for ScriptedTransport {
    fn complete(&self, _: &[Message]) -> Result<String, TransportError> {
        *self.calls.lock().unwrap() += 1;
        self.replies.lock().unwrap().pop_front().ok_or(TransportError::Exhausted)
    }
}

/// OpenAI-compatible `chat/completions` endpoint over HTTP(S).
#[derive(Clone, Debug)]
pub struct HttpTransport {
    /// Full URL of the completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl HttpTransport {
    /// Reads the key from `api_key_var` if that variable is set.
    pub fn new(endpoint: &str, model: &str, api_key_var: &str, timeout: Duration) -> Self {
        HttpTransport {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key: std::env::var(api_key_var).ok(),
            timeout,
        }
    }
}

impl Transport for HttpTransport {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError> {
        let body = serde_json::json!({ "model": self.model, "messages": messages, "temperature": 0 });
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        let mut req = agent.post(&self.endpoint).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = match req.send_string(&body.to_string()) {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                return Err(TransportError::Status { status, body: r.into_string().unwrap_or_default() })
            }
            Err(e) => return Err(TransportError::Network(e.to_string())),
        };
        let text = resp.into_string()?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| TransportError::BadResponse(e.to_string()))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TransportError::BadResponse("missing choices[0].message.content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kms::Role;

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = [Message::new(Role::User, "hi")];
        let b = [Message::new(Role::User, "hi!")];
        assert_eq!(digest(&a), digest(&a.clone()));
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let msgs = [Message::new(Role::User, "q")];
        let rec = RecordingTransport::new(ScriptedTransport::new(["answer"]), dir.path());
        assert_eq!(rec.complete(&msgs).unwrap(), "answer");
        let replay = ReplayTransport::new(dir.path());
        assert_eq!(replay.complete(&msgs).unwrap(), "answer");
        let other = [Message::new(Role::User, "other")];
        assert!(matches!(replay.complete(&other), Err(TransportError::MissingFixture { .. })));
    }
}
