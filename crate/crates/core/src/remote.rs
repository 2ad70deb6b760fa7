//! JSON-lines client for out-of-process backends.
//!
//! A backend is any program that reads one JSON request per line on stdin
//! and answers with one JSON response per line on stdout. Requests are
//! serialized through a mutex, so a single backend process never sees
//! interleaved traffic.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("failed to start backend `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("backend i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("backend closed its output")]
    Closed,
    #[error("malformed backend response: {0}")]
    Protocol(#[from] serde_json::Error),
    #[error("backend reported: {0}")]
    Backend(String),
}

struct Pipes {
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct JsonLineClient {
    command: String,
    child: Child,
    pipes: Mutex<Pipes>,
}

impl std::fmt::Debug for JsonLineClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JsonLineClient")
            .field("command", &self.command)
            .finish()
    }
}

impl JsonLineClient {
    /// Starts `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self, RemoteError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| RemoteError::Spawn {
                command: command.to_string(),
                source,
            })?;
        let stdin = child.stdin.take().ok_or(RemoteError::Closed)?;
        let stdout = BufReader::new(child.stdout.take().ok_or(RemoteError::Closed)?);
        Ok(Self {
            command: command.to_string(),
            child,
            pipes: Mutex::new(Pipes { stdin, stdout }),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Sends one request and reads one response. A response object with an
    /// `"error"` string field is surfaced as [`RemoteError::Backend`].
    pub fn call<Req: Serialize, Resp: DeserializeOwned>(&self, req: &Req) -> Result<Resp, RemoteError> {
        let mut line = serde_json::to_string(req)?;
        line.push('\n');
        let mut pipes = self.pipes.lock().unwrap_or_else(|e| e.into_inner());
        pipes.stdin.write_all(line.as_bytes())?;
        pipes.stdin.flush()?;
        let mut response = String::new();
        if pipes.stdout.read_line(&mut response)? == 0 {
            return Err(RemoteError::Closed);
        }
        let value: serde_json::Value = serde_json::from_str(&response)?;
        if let Some(msg) = value.get("error").and_then(|e| e.as_str()) {
            return Err(RemoteError::Backend(msg.to_string()));
        }
        Ok(serde_json::from_value(value)?)
    }
}

impl Drop for JsonLineClient {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
