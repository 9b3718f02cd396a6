//! Local chat-completions stand-in for tests.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

/// How the server answers request number `n` (zero-based) with a given body.
pub type Responder = dyn Fn(usize, &Value) -> (u16, String) + Send + Sync;

pub struct MockServer {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
    pub auth_headers: Arc<Mutex<Vec<Option<String>>>>,
    stop: Arc<AtomicBool>,
    addr: std::net::SocketAddr,
    handle: Option<thread::JoinHandle<()>>,
}

impl MockServer {
    pub fn start(responder: Arc<Responder>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let requests = Arc::new(AtomicUsize::new(0));
        let auth_headers = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let (req, auth, st) = (requests.clone(), auth_headers.clone(), stop.clone());
        let handle = thread::spawn(move || {
            for conn in listener.incoming() {
                if st.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(conn) = conn else { continue };
                let (responder, req, auth) = (responder.clone(), req.clone(), auth.clone());
                thread::spawn(move || handle_conn(conn, &*responder, &req, &auth));
            }
        });
        MockServer { url: format!("http://{addr}/v1"), requests, auth_headers, stop, addr, handle: Some(handle) }
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn handle_conn(mut conn: TcpStream, responder: &Responder, counter: &AtomicUsize, auth: &Mutex<Vec<Option<String>>>) {
    let mut reader = BufReader::new(conn.try_clone().unwrap());
    let mut content_length = 0usize;
    let mut chunked = false;
    let mut authorization = None;
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    loop {
        line.clear();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim());
            match k.as_str() {
                "content-length" => content_length = v.parse().unwrap_or(0),
                "transfer-encoding" => chunked = v.eq_ignore_ascii_case("chunked"),
                "authorization" => authorization = Some(v.to_string()),
                _ => {}
            }
        }
    }
    let mut body = Vec::new();
    if chunked {
        loop {
            line.clear();
            reader.read_line(&mut line).unwrap();
            let size = usize::from_str_radix(line.trim(), 16).unwrap_or(0);
            let mut chunk = vec![0; size + 2];
            reader.read_exact(&mut chunk).unwrap();
            if size == 0 {
                break;
            }
            body.extend_from_slice(&chunk[..size]);
        }
    } else {
        body.resize(content_length, 0);
        reader.read_exact(&mut body).unwrap();
    }
    let n = counter.fetch_add(1, Ordering::SeqCst);
    auth.lock().unwrap().push(authorization);
    let value: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let (status, text) = responder(n, &value);
    let reason = match status {
        200 => "OK",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        _ => "Status",
    };
    let resp = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
    let _ = conn.write_all(resp.as_bytes());
    let _ = conn.flush();
}

/// Wraps `content` in a minimal chat-completions response.
pub fn completion(content: &str) -> String {
    json!({
        "id": "cmpl-test",
        "object": "chat.completion",
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
        "usage": {"prompt_tokens": 100, "completion_tokens": 10, "total_tokens": 110}
    })
    .to_string()
}

/// Text of the last user message in a request body.
pub fn last_user_message(body: &Value) -> String {
    body["messages"]
        .as_array()
        .and_then(|m| m.iter().rev().find(|m| m["role"] == "user"))
        .and_then(|m| m["content"].as_str())
        .unwrap_or_default()
        .to_string()
}

/// A cooperative answer matching whatever schema the prompt asks for.
pub fn canned_answer(prompt: &str) -> String {
    let json = if prompt.contains("\"sanctions\"") {
        r#"{"sanctions": {}}"#
    } else if prompt.contains("\"effort\"") {
        r#"{"effort": 10}"#
    } else if prompt.contains("\"extract\"") {
        r#"{"extract": 2}"#
    } else if prompt.contains("\"contribute\"") {
        r#"{"contribute": 1}"#
    } else if prompt.contains("\"withdraw\"") {
        r#"{"withdraw": 6}"#
    } else if prompt.contains("\"keep\"") {
        r#"{"keep": 0, "group": 10, "global": 0}"#
    } else {
        return "Let's all cooperate this round.".to_string();
    };
    format!("Here is my decision:\n{json}")
}
