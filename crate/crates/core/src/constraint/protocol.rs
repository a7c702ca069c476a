//! Newline-delimited JSON front end for sessions.
//!
//! ```text
//! {"op":"open","target":"a b"}            -> {"session":1}
//! {"op":"mask","session":1}               -> {"allowed":[0,3]}
//! {"op":"advance","session":1,"token":0}  -> {"ok":true,"done":false}
//! {"op":"close","session":1}              -> {"ok":true}
//! ```
//!
//! `open` also takes an optional `prefix` that must be reproduced verbatim
//! before the target, and `info` reports the vocabulary digest. Failures
//! answer `{"error":code}` and leave the connection usable.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::Deserialize;
use serde_json::{json, Value};

use super::session::{ConstraintEngine, Session};
use super::vocab::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Request {
    Open {
        target: String,
        #[serde(default)]
        prefix: String,
    },
    Mask {
        session: u64,
    },
    Advance {
        session: u64,
        token: TokenId,
    },
    Close {
        session: u64,
    },
    Info,
}

/// Session table shared by every connection of one server.
#[derive(Debug)]
pub struct SessionService {
    engine: ConstraintEngine,
    digest: String,
    next_id: AtomicU64,
    sessions: Mutex<HashMap<u64, Arc<Mutex<Session>>>>,
}

fn error(code: &str) -> Value {
    json!({ "error": code })
}

impl SessionService {
    pub fn new(engine: ConstraintEngine) -> Self {
        let digest = engine.vocab().digest();
        Self { engine, digest, next_id: AtomicU64::new(1), sessions: Mutex::new(HashMap::new()) }
    }

    pub fn open_sessions(&self) -> usize {
        self.sessions.lock().expect("session table poisoned").len()
    }

    fn session(&self, id: u64) -> Option<Arc<Mutex<Session>>> {
        self.sessions.lock().expect("session table poisoned").get(&id).cloned()
    }

    pub fn handle(&self, req: Request) -> Value {
        match req {
            Request::Open { target, prefix } => match self.engine.open_with_prefix(&prefix, &target) {
                Ok(s) => {
                    let id = self.next_id.fetch_add(1, Ordering::Relaxed);
                    self.sessions.lock().expect("session table poisoned").insert(id, Arc::new(Mutex::new(s)));
                    json!({ "session": id })
                }
                Err(e) => error(e.code()),
            },
            Request::Mask { session } => {
                let Some(s) = self.session(session) else { return error("UnknownSession") };
                let s = s.lock().expect("session poisoned");
                match s.allowed_tokens() {
                    Ok(allowed) => json!({ "allowed": allowed }),
                    Err(e) => error(e.code()),
                }
            }
            Request::Advance { session, token } => {
                let Some(s) = self.session(session) else { return error("UnknownSession") };
                let mut s = s.lock().expect("session poisoned");
                match s.advance(token) {
                    Ok(done) => json!({ "ok": true, "done": done }),
                    Err(e) => error(e.code()),
                }
            }
            Request::Close { session } => {
                match self.sessions.lock().expect("session table poisoned").remove(&session) {
                    Some(_) => json!({ "ok": true }),
                    None => error("UnknownSession"),
                }
            }
            Request::Info => {
                let special = self.engine.vocab().special();
                json!({
                    "vocab_digest": self.digest,
                    "vocab_size": self.engine.vocab().len(),
                    "eos_id": special.eos_id,
                    "start_marker_ids": special.start_marker_ids,
                    "end_marker_ids": special.end_marker_ids,
                    "markers": self.engine.markers(),
                })
            }
        }
    }

    /// Answer one request line. Never fails: bad input yields `BadRequest`.
    pub fn handle_line(&self, line: &str) -> String {
        let resp = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(_) => error("BadRequest"),
        };
        resp.to_string()
    }
}

/// Serve requests from `input` until end of stream. Blank lines are skipped.
pub fn serve(service: &SessionService, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", service.handle_line(&line))?;
        output.flush()?;
    }
    Ok(())
}
