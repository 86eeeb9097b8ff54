use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatBackend, ChatMessage, LlmError, SharedBackend};

/// One line of a transcript file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub request_hash: String,
    pub request: Vec<ChatMessage>,
    pub response: String,
}

/// Hex SHA-256 of the JSON-encoded message list.
pub fn request_hash(messages: &[ChatMessage]) -> String {
    let bytes = serde_json::to_vec(messages).expect("messages always serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Serves responses from a JSON Lines transcript.
///
/// Responses are keyed by request hash. When the same request was recorded
/// several times, successive identical requests receive the recorded
/// responses in order; asking once more than recorded is a miss.
pub struct ReplayBackend {
    path: PathBuf,
    queues: Mutex<HashMap<String, (Vec<String>, usize)>>,
}

impl ReplayBackend {
    pub fn open(path: &Path) -> Result<Self, LlmError> {
        let text = fs::read_to_string(path).map_err(|source| LlmError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(line).map_err(|e| {
                LlmError::Protocol(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
            entries.push(entry);
        }
        Ok(Self::from_entries(path.to_path_buf(), entries))
    }

    pub fn from_entries(path: PathBuf, entries: Vec<TranscriptEntry>) -> Self {
        let mut queues: HashMap<String, (Vec<String>, usize)> = HashMap::new();
        for e in entries {
            queues.entry(e.request_hash).or_default().0.push(e.response);
        }
        ReplayBackend {
            path,
            queues: Mutex::new(queues),
        }
    }
}

impl ChatBackend for ReplayBackend {
    fn respond(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let hash = request_hash(messages);
        let mut queues = self.queues.lock().expect("replay lock poisoned");
        match queues.get_mut(&hash) {
            Some((responses, cursor)) if *cursor < responses.len() => {
                *cursor += 1;
                Ok(responses[*cursor - 1].clone())
            }
            _ => {
                log::error!("replay miss in {} for {hash}", self.path.display());
                Err(LlmError::ReplayMiss { hash })
            }
        }
    }

    fn label(&self) -> String {
        format!(
            "replay:{}",
            self.path.file_name().unwrap_or_default().to_string_lossy()
        )
    }
}

/// Wraps another backend and records every exchange, for producing replay
/// fixtures.
pub struct RecordingBackend {
    inner: SharedBackend,
    log: Mutex<Vec<TranscriptEntry>>,
}

impl RecordingBackend {
    pub fn new(inner: SharedBackend) -> Self {
        RecordingBackend {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.log.lock().expect("recording lock poisoned").clone()
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), LlmError> {
        let io = |source| LlmError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = fs::File::create(path).map_err(io)?;
        for e in self.entries() {
            let line = serde_json::to_string(&e).expect("entries serialize");
            writeln!(file, "{line}").map_err(io)?;
        }
        Ok(())
    }
}

impl ChatBackend for RecordingBackend {
    fn respond(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let response = self.inner.respond(messages)?;
        self.log
            .lock()
            .expect("recording lock poisoned")
            .push(TranscriptEntry {
                request_hash: request_hash(messages),
                request: messages.to_vec(),
                response: response.clone(),
            });
        Ok(response)
    }

    fn label(&self) -> String {
        format!("recording:{}", self.inner.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{complete, ScriptedBackend};
    use std::sync::Arc;

    fn prompt(s: &str) -> Vec<ChatMessage> {
        vec![ChatMessage::system("translate"), ChatMessage::user(s)]
    }

    #[test]
    fn replays_recorded_pair() {
        let p = prompt("whenever a, b");
        let replay = ReplayBackend::from_entries(
            "t.jsonl".into(),
            vec![TranscriptEntry {
                request_hash: request_hash(&p),
                request: p.clone(),
                response: "G (a -> b)".into(),
            }],
        );
        assert_eq!(complete(&replay, &p).unwrap().content, "G (a -> b)");
    }

    #[test]
    fn miss_fails_loudly() {
        let replay = ReplayBackend::from_entries("t.jsonl".into(), vec![]);
        assert!(matches!(
            replay.respond(&prompt("x")),
            Err(LlmError::ReplayMiss { .. })
        ));
    }

    #[test]
    fn repeated_requests_follow_recording_order() {
        let p = prompt("same");
        let entry = |r: &str| TranscriptEntry {
            request_hash: request_hash(&p),
            request: p.clone(),
            response: r.into(),
        };
        let replay = ReplayBackend::from_entries("t.jsonl".into(), vec![entry("one"), entry("two")]);
        assert_eq!(replay.respond(&p).unwrap(), "one");
        assert_eq!(replay.respond(&p).unwrap(), "two");
        assert!(replay.respond(&p).is_err());
    }

    #[test]
    fn record_then_replay_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let counter = Arc::new(std::sync::atomic::AtomicUsize::new(0));
        let c2 = counter.clone();
        let rec = RecordingBackend::new(ScriptedBackend::shared("count", move |_| {
            c2.fetch_add(1, std::sync::atomic::Ordering::SeqCst).to_string()
        }));
        let requests = [prompt("a"), prompt("b"), prompt("a")];
        let live: Vec<_> = requests.iter().map(|r| rec.respond(r).unwrap()).collect();
        rec.write_jsonl(&path).unwrap();

        for _ in 0..2 {
            let replay = ReplayBackend::open(&path).unwrap();
            let replayed: Vec<_> = requests.iter().map(|r| replay.respond(r).unwrap()).collect();
            assert_eq!(replayed, live);
        }
    }

    #[test]
    fn hash_depends_on_role_and_content() {
        let a = request_hash(&[ChatMessage::user("x")]);
        assert_ne!(a, request_hash(&[ChatMessage::system("x")]));
        assert_ne!(a, request_hash(&[ChatMessage::user("y")]));
        assert_eq!(a, request_hash(&[ChatMessage::user("x")]));
        assert_eq!(a.len(), 64);
    }
}
