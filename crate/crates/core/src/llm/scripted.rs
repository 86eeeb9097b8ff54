use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ChatBackend, ChatMessage, LlmError, Role, SharedBackend};

type Script = dyn Fn(&[ChatMessage]) -> String + Send + Sync;

/// A backend whose replies are computed by a closure.
pub struct ScriptedBackend {
    name: String,
    script: Box<Script>,
}

impl ScriptedBackend {
    pub fn new(
        name: impl Into<String>,
        script: impl Fn(&[ChatMessage]) -> String + Send + Sync + 'static,
    ) -> Self {
        ScriptedBackend {
            name: name.into(),
            script: Box::new(script),
        }
    }

    pub fn shared(
        name: impl Into<String>,
        script: impl Fn(&[ChatMessage]) -> String + Send + Sync + 'static,
    ) -> SharedBackend {
        Arc::new(Self::new(name, script))
    }
}

impl ChatBackend for ScriptedBackend {
    fn respond(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        Ok((self.script)(messages))
    }

    fn label(&self) -> String {
        format!("scripted:{}", self.name)
    }
}

/// Named scripts that `BackendSpec { kind: scripted }` can refer to.
#[derive(Clone)]
pub struct ScriptRegistry {
    scripts: BTreeMap<String, SharedBackend>,
}

impl Default for ScriptRegistry {
    /// Registers `approve` (always `APPROVED`) and `echo` (repeats the last
    /// user message).
    fn default() -> Self {
        let mut reg = ScriptRegistry {
            scripts: BTreeMap::new(),
        };
        reg.register("approve", ScriptedBackend::shared("approve", |_| "APPROVED".into()));
        reg.register(
            "echo",
            ScriptedBackend::shared("echo", |msgs| {
                msgs.iter()
                    .rev()
                    .find(|m| m.role == Role::User)
                    .map(|m| m.content.clone())
                    .unwrap_or_default()
            }),
        );
        reg
    }
}

impl ScriptRegistry {
    pub fn empty() -> Self {
        ScriptRegistry {
            scripts: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: impl Into<String>, backend: SharedBackend) {
        self.scripts.insert(name.into(), backend);
    }

    pub fn get(&self, name: &str) -> Option<SharedBackend> {
        self.scripts.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.scripts.keys().map(String::as_str)
    }
}
