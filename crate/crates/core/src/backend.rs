//! Blocking JSON-over-HTTP client shared by the translation and revision backends.

use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("malformed backend response: {0}")]
    Malformed(String),
    #[error("backend timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
}

/// Where and how to reach a remote backend.
///
/// The API key itself is never stored here: only the name of the
/// environment variable it is read from at request time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpEndpoint {
    pub url: String,
    pub api_key_header: Option<String>,
    pub api_key_env: Option<String>,
    pub timeout_secs: f64,
    pub retries: u32,
    pub backoff_ms: u64,
}

impl Default for HttpEndpoint {
    fn default() -> Self {
        HttpEndpoint {
            url: String::new(),
            api_key_header: None,
            api_key_env: None,
            timeout_secs: 30.0,
            retries: 2,
            backoff_ms: 500,
        }
    }
}

impl HttpEndpoint {
    pub fn new(url: impl Into<String>) -> Self {
        HttpEndpoint {
            url: url.into(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.url.is_empty() {
            return Err("http backend needs a url".into());
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(format!("timeout must be positive, got {}", self.timeout_secs));
        }
        Ok(())
    }

    fn agent(&self) -> ureq::Agent {
        ureq::AgentBuilder::new()
            .timeout(Duration::from_secs_f64(self.timeout_secs))
            .build()
    }

    /// POSTs `body` and returns the parsed JSON response, retrying transport
    /// failures and non-200 statuses `retries` times with a fixed pause.
    pub fn post_json(&self, body: &serde_json::Value) -> Result<serde_json::Value, BackendError> {
        let agent = self.agent();
        let attempts = self.retries + 1;
        let mut last = BackendError::Unavailable("no attempt made".into());
        for attempt in 0..attempts {
            if attempt > 0 && self.backoff_ms > 0 {
                std::thread::sleep(Duration::from_millis(self.backoff_ms));
            }
            match self.post_once(&agent, body) {
                Ok(v) => return Ok(v),
                Err(e @ BackendError::Malformed(_)) => return Err(e),
                Err(BackendError::Timeout { .. }) => last = BackendError::Timeout { attempts },
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    fn post_once(&self, agent: &ureq::Agent, body: &serde_json::Value) -> Result<serde_json::Value, BackendError> {
        let mut req = agent.post(&self.url).set("Content-Type", "application/json");
        if let (Some(header), Some(var)) = (&self.api_key_header, &self.api_key_env) {
            if let Ok(key) = std::env::var(var) {
                req = req.set(header, &key);
            }
        }
        let resp = match req.send_string(&body.to_string()) {
            Ok(resp) => resp,
            Err(ureq::Error::Status(code, _)) => return Err(BackendError::Unavailable(format!("status {code}"))),
            Err(ureq::Error::Transport(t)) => {
                return Err(if is_timeout(&t) {
                    BackendError::Timeout { attempts: 1 }
                } else {
                    BackendError::Unavailable(t.to_string())
                })
            }
        };
        if resp.status() != 200 {
            return Err(BackendError::Unavailable(format!("status {}", resp.status())));
        }
        let text = resp
            .into_string()
            .map_err(|e| BackendError::Malformed(format!("unreadable body: {e}")))?;
        serde_json::from_str(&text).map_err(|e| BackendError::Malformed(e.to_string()))
    }
}

fn is_timeout(t: &ureq::Transport) -> bool {
    let mut source: Option<&(dyn std::error::Error + 'static)> = std::error::Error::source(t);
    while let Some(e) = source {
        if let Some(io) = e.downcast_ref::<std::io::Error>() {
            if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
                return true;
            }
        }
        source = e.source();
    }
    t.to_string().contains("timed out")
}

/// Pulls a string field out of a JSON object response.
pub(crate) fn string_field(value: &serde_json::Value, field: &str) -> Result<String, BackendError> {
    value
        .get(field)
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| BackendError::Malformed(format!("response lacks string field `{field}`")))
}

#[cfg(test)]
pub(crate) mod testserver {
    //! Minimal one-shot HTTP responder for backend tests.

    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;
    use std::thread;

    pub struct Canned {
        pub status: u16,
        pub body: String,
    }

    /// Serves `responses` in order, one per connection. Returns the base
    /// URL and a channel yielding each request body received.
    pub fn serve(responses: Vec<Canned>) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for canned in responses {
                let Ok((stream, _)) = listener.accept() else { return };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap_or(0);
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut body = vec![0u8; len];
                reader.read_exact(&mut body).ok();
                tx.send(String::from_utf8_lossy(&body).into_owned()).ok();
                let mut stream = stream;
                let reply = format!(
                    "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    canned.status,
                    canned.body.len(),
                    canned.body
                );
                stream.write_all(reply.as_bytes()).ok();
            }
        });
        (format!("http://{addr}"), rx)
    }

    /// A URL nothing listens on.
    pub fn dead_url() -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        format!("http://{addr}")
    }
}

#[cfg(test)]
mod tests {
    use super::testserver::*;
    use super::*;

    fn endpoint(url: String) -> HttpEndpoint {
        HttpEndpoint {
            url,
            timeout_secs: 2.0,
            retries: 1,
            backoff_ms: 0,
            ..Default::default()
        }
    }

    #[test]
    fn retries_then_succeeds() {
        let (url, rx) = serve(vec![
            Canned {
                status: 503,
                body: "{}".into(),
            },
            Canned {
                status: 200,
                body: r#"{"ok":true}"#.into(),
            },
        ]);
        let v = endpoint(url).post_json(&serde_json::json!({"x": 1})).unwrap();
        assert_eq!(v["ok"], true);
        assert_eq!(rx.recv().unwrap(), r#"{"x":1}"#);
    }

    #[test]
    fn dead_endpoint_is_unavailable() {
        let err = endpoint(dead_url()).post_json(&serde_json::json!({})).unwrap_err();
        assert!(matches!(err, BackendError::Unavailable(_)), "{err}");
    }

    #[test]
    fn non_json_is_malformed() {
        let (url, _rx) = serve(vec![Canned {
            status: 200,
            body: "<html>".into(),
        }]);
        let err = endpoint(url).post_json(&serde_json::json!({})).unwrap_err();
        assert!(matches!(err, BackendError::Malformed(_)));
    }

    #[test]
    fn silent_server_times_out() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let mut ep = endpoint(url);
        ep.timeout_secs = 0.2;
        let err = ep.post_json(&serde_json::json!({})).unwrap_err();
        assert_eq!(err, BackendError::Timeout { attempts: 2 });
        drop(listener);
    }

    #[test]
    fn validation() {
        assert!(HttpEndpoint::default().validate().is_err());
        let mut ep = HttpEndpoint::new("http://x");
        assert!(ep.validate().is_ok());
        ep.timeout_secs = 0.0;
        assert!(ep.validate().is_err());
    }
}
