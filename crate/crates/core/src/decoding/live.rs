//! Client side of the line-delimited JSON protocol spoken by an external
//! model adapter over its standard streams.
//!
//! The adapter writes a `hello` frame first, then answers each request with
//! exactly one frame. Request failures come back as `error` frames and only
//! fail that request; a malformed or unexpected line breaks the connection
//! for good.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{DistributionProvider, LogProbVector, TextCodec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelRole {
    Instruct,
    Base,
}

/// Frames sent to the adapter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Logits { model: ModelRole, context: Vec<u32> },
    Tokenize { text: String },
    Detokenize { ids: Vec<u32> },
    Bye,
}

/// Frames received from the adapter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    Hello {
        vocab_size: usize,
        #[serde(default)]
        stop_tokens: Vec<u32>,
    },
    Logits { values: Vec<f64> },
    Tokens { ids: Vec<u32> },
    Text { text: String },
    Error { message: String },
    Bye,
}

struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    broken: Option<String>,
}

impl Connection {
    fn send(&mut self, req: &Request) -> Result<()> {
        let mut line = serde_json::to_vec(req)?;
        line.push(b'\n');
        self.writer.write_all(&line)?;
        self.writer.flush()?;
        Ok(())
    }

    fn receive(&mut self) -> Result<Reply> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(Error::Protocol("adapter closed its output".into()));
        }
        serde_json::from_str(line.trim_end())
            .map_err(|e| Error::Protocol(format!("malformed frame {:?}: {e}", truncate(&line))))
    }
}

fn truncate(s: &str) -> &str {
    let end = s.char_indices().nth(120).map_or(s.len(), |(i, _)| i);
    s[..end].trim_end()
}

pub struct AdapterClient {
    conn: Mutex<Connection>,
    child: Mutex<Option<Child>>,
    vocab_size: usize,
    stop_tokens: Vec<u32>,
}

impl AdapterClient {
    /// Performs the handshake over existing streams.
    pub fn connect(reader: impl BufRead + Send + 'static, writer: impl Write + Send + 'static) -> Result<Self> {
        let mut conn = Connection {
            reader: Box::new(reader),
            writer: Box::new(writer),
            broken: None,
        };
        match conn.receive()? {
            Reply::Hello { vocab_size, stop_tokens } => {
                if vocab_size == 0 {
                    return Err(Error::Protocol("adapter reported an empty vocabulary".into()));
                }
                if let Some(&t) = stop_tokens.iter().find(|&&t| t as usize >= vocab_size) {
                    return Err(Error::UnknownToken { id: t, vocab_size });
                }
                Ok(Self {
                    conn: Mutex::new(conn),
                    child: Mutex::new(None),
                    vocab_size,
                    stop_tokens,
                })
            }
            other => Err(Error::Protocol(format!("expected hello, got {other:?}"))),
        }
    }

    /// Starts `program` with `args` and performs the handshake on its
    /// standard streams. Its stderr is inherited.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        match Self::connect(BufReader::new(stdout), stdin) {
            Ok(client) => {
                *client.child.lock().unwrap() = Some(child);
                Ok(client)
            }
            Err(e) => {
                let _ = child.kill();
                let _ = child.wait();
                Err(e)
            }
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn stop_tokens(&self) -> &[u32] {
        &self.stop_tokens
    }

    fn call(&self, req: &Request) -> Result<Reply> {
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(reason) = &conn.broken {
            return Err(Error::Protocol(format!("connection unusable: {reason}")));
        }
        let result = conn.send(req).and_then(|_| conn.receive());
        match result {
            Ok(Reply::Error { message }) => Err(Error::Protocol(format!("adapter error: {message}"))),
            Ok(reply) => Ok(reply),
            Err(e) => {
                conn.broken = Some(e.to_string());
                Err(e)
            }
        }
    }

    fn unexpected(&self, want: &str, got: Reply) -> Error {
        let msg = format!("expected {want} frame, got {got:?}");
        self.conn.lock().unwrap_or_else(|p| p.into_inner()).broken = Some(msg.clone());
        Error::Protocol(msg)
    }

    pub fn logits(&self, model: ModelRole, context: &[u32]) -> Result<LogProbVector> {
        match self.call(&Request::Logits {
            model,
            context: context.to_vec(),
        })? {
            Reply::Logits { values } => LogProbVector::from_logits(values),
            other => Err(self.unexpected("logits", other)),
        }
    }

    pub fn tokenize(&self, text: &str) -> Result<Vec<u32>> {
        match self.call(&Request::Tokenize { text: text.into() })? {
            Reply::Tokens { ids } => Ok(ids),
            other => Err(self.unexpected("tokens", other)),
        }
    }

    pub fn detokenize(&self, ids: &[u32]) -> Result<String> {
        match self.call(&Request::Detokenize { ids: ids.to_vec() })? {
            Reply::Text { text } => Ok(text),
            other => Err(self.unexpected("text", other)),
        }
    }

    /// Sends `bye`, waits for the acknowledgement and reaps the child if
    /// there is one. Further requests fail.
    pub fn close(&self) -> Result<()> {
        let reply = {
            let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
            if conn.broken.is_some() {
                None
            } else {
                let r = conn.send(&Request::Bye).and_then(|_| conn.receive());
                conn.broken = Some("closed".into());
                Some(r)
            }
        };
        if let Some(mut child) = self.child.lock().unwrap_or_else(|p| p.into_inner()).take() {
            if !matches!(reply, Some(Ok(Reply::Bye))) {
                let _ = child.kill();
            }
            child.wait()?;
        }
        match reply {
            Some(Ok(Reply::Bye)) | None => Ok(()),
            Some(Ok(other)) => Err(Error::Protocol(format!("expected bye, got {other:?}"))),
            Some(Err(e)) => Err(e),
        }
    }

    /// A provider handle bound to one of the adapter's two models.
    pub fn model(self: &Arc<Self>, role: ModelRole) -> AdapterModel {
        AdapterModel {
            client: Arc::clone(self),
            role,
        }
    }
}

impl Drop for AdapterClient {
    fn drop(&mut self) {
        let _ = self.close();
    }
}

#[derive(Clone)]
pub struct AdapterModel {
    client: Arc<AdapterClient>,
    role: ModelRole,
}

impl AdapterModel {
    pub fn role(&self) -> ModelRole {
        self.role
    }

    pub fn client(&self) -> &Arc<AdapterClient> {
        &self.client
    }
}

impl DistributionProvider for AdapterModel {
    fn vocab_size(&self) -> usize {
        self.client.vocab_size()
    }

    fn next_logprobs(&self, context: &[u32]) -> Result<LogProbVector> {
        self.client.logits(self.role, context)
    }
}

impl TextCodec for AdapterModel {
    fn encode(&self, text: &str) -> Result<Vec<u32>> {
        self.client.tokenize(text)
    }

    fn decode(&self, ids: &[u32]) -> Result<String> {
        self.client.detokenize(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{pipe, BufReader};
    use std::thread;

    /// Runs `serve` on a thread with the server ends of two pipes and
    /// returns a connected client.
    fn fake<F>(serve: F) -> Result<AdapterClient>
    where
        F: FnOnce(&mut dyn BufRead, &mut dyn Write) + Send + 'static,
    {
        let (client_r, server_w) = pipe().unwrap();
        let (server_r, client_w) = pipe().unwrap();
        thread::spawn(move || {
            let mut r = BufReader::new(server_r);
            let mut w = server_w;
            serve(&mut r, &mut w);
        });
        AdapterClient::connect(BufReader::new(client_r), client_w)
    }

    fn send(w: &mut dyn Write, reply: &Reply) {
        writeln!(w, "{}", serde_json::to_string(reply).unwrap()).unwrap();
    }

    fn read(r: &mut dyn BufRead) -> Option<Request> {
        let mut line = String::new();
        if r.read_line(&mut line).unwrap() == 0 {
            return None;
        }
        Some(serde_json::from_str(&line).unwrap())
    }

    /// Answers like a three-token model: instruct prefers the token after
    /// the last context id, base is uniform.
    fn well_behaved(r: &mut dyn BufRead, w: &mut dyn Write) {
        send(w, &Reply::Hello { vocab_size: 3, stop_tokens: vec![2] });
        while let Some(req) = read(r) {
            let reply = match req {
                Request::Logits { model: ModelRole::Instruct, context } => {
                    let mut v = vec![0.0; 3];
                    v[(context.last().copied().unwrap_or(0) as usize + 1) % 3] = 5.0;
                    Reply::Logits { values: v }
                }
                Request::Logits { model: ModelRole::Base, .. } => Reply::Logits { values: vec![0.0; 3] },
                Request::Tokenize { text } => Reply::Tokens {
                    ids: text.split(' ').map(|w| w.len() as u32 % 3).collect(),
                },
                Request::Detokenize { ids } => Reply::Text { text: format!("{ids:?}") },
                Request::Bye => {
                    send(w, &Reply::Bye);
                    return;
                }
            };
            send(w, &reply);
        }
    }

    #[test]
    fn request_frames_have_documented_shape() {
        let s = serde_json::to_string(&Request::Logits { model: ModelRole::Base, context: vec![1, 2] }).unwrap();
        assert_eq!(s, r#"{"type":"logits","model":"base","context":[1,2]}"#);
        assert_eq!(serde_json::to_string(&Request::Bye).unwrap(), r#"{"type":"bye"}"#);
        let hello: Reply = serde_json::from_str(r#"{"type":"hello","vocab_size":5,"stop_tokens":[4]}"#).unwrap();
        assert_eq!(hello, Reply::Hello { vocab_size: 5, stop_tokens: vec![4] });
    }

    #[test]
    fn handshake_and_requests() {
        let client = Arc::new(fake(well_behaved).unwrap());
        assert_eq!(client.vocab_size(), 3);
        assert_eq!(client.stop_tokens(), &[2]);
        let inst = client.model(ModelRole::Instruct);
        let lp = inst.next_logprobs(&[0]).unwrap();
        assert_eq!(lp.values(), &[0.0, 5.0, 0.0]);
        assert_eq!(inst.encode("ab c").unwrap(), vec![2, 1]);
        assert_eq!(inst.decode(&[1, 0]).unwrap(), "[1, 0]");
        client.close().unwrap();
        assert!(client.tokenize("x").is_err());
    }

    #[test]
    fn drives_generation() {
        let client = Arc::new(fake(well_behaved).unwrap());
        let inst = client.model(ModelRole::Instruct);
        let base = client.model(ModelRole::Base);
        let cfg = super::super::DecodeConfig {
            gamma: 1.0,
            max_tokens: 20,
            ..Default::default()
        };
        let g = super::super::generate_sequence(&inst, Some(&base), &[0], client.stop_tokens(), &cfg).unwrap();
        // Nucleus 0.95 keeps only the favoured successor, so the chain is
        // 0 -> 1 -> 2 (stop).
        assert_eq!(g.tokens, vec![1]);
        assert_eq!(g.stop_reason, super::super::StopReason::StopToken);
    }

    #[test]
    fn error_frame_fails_only_that_request() {
        let client = fake(|r, w| {
            send(w, &Reply::Hello { vocab_size: 2, stop_tokens: vec![] });
            read(r);
            send(w, &Reply::Error { message: "CUDA out of memory".into() });
            read(r);
            send(w, &Reply::Logits { values: vec![0.0, 1.0] });
        })
        .unwrap();
        let e = client.logits(ModelRole::Instruct, &[]).unwrap_err();
        assert!(e.to_string().contains("CUDA out of memory"));
        assert!(client.logits(ModelRole::Instruct, &[]).is_ok());
    }

    #[test]
    fn malformed_line_breaks_connection() {
        let client = fake(|r, w| {
            send(w, &Reply::Hello { vocab_size: 2, stop_tokens: vec![] });
            read(r);
            writeln!(w, "{{\"type\": \"logits\", \"values\": [0.0, NaN]}}").unwrap();
            while read(r).is_some() {
                send(w, &Reply::Logits { values: vec![0.0, 0.0] });
            }
        })
        .unwrap();
        assert!(matches!(client.logits(ModelRole::Base, &[]), Err(Error::Protocol(_))));
        assert!(client.logits(ModelRole::Base, &[]).is_err());
    }

    #[test]
    fn missing_hello_rejected() {
        let r = fake(|_, w| send(w, &Reply::Logits { values: vec![0.0] }));
        assert!(matches!(r, Err(Error::Protocol(_))));
        let r = fake(|_, w| send(w, &Reply::Hello { vocab_size: 2, stop_tokens: vec![5] }));
        assert!(matches!(r, Err(Error::UnknownToken { .. })));
    }

    #[test]
    fn wrong_reply_kind_breaks_connection() {
        let client = fake(|r, w| {
            send(w, &Reply::Hello { vocab_size: 2, stop_tokens: vec![] });
            while read(r).is_some() {
                send(w, &Reply::Text { text: "?".into() });
            }
        })
        .unwrap();
        assert!(client.logits(ModelRole::Instruct, &[]).is_err());
        assert!(client.detokenize(&[0]).unwrap_err().to_string().contains("unusable"));
    }
}
