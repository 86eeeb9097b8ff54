//! The HTTP chat and embedding clients against a local stub server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use cogform::critic::{CriticTree, CriticTreeConfig, Termination};
use cogform::llm::{complete, BackendSpec, ChatBackend, ChatMessage, CriticEnsemble, HttpBackend, LlmError, SharedBackend};
use cogform::pipeline::fixture;
use cogform::rules::{EmbeddingProvider, FallbackEmbedder, HashedTrigramEmbedder, HttpEmbedder};
use cogform::scenario::{scenario_kb, Archetype};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Request {
    path: String,
    auth: Option<String>,
    body: Value,
}

type Handler = dyn Fn(&Request) -> (u16, String) + Send + Sync;

/// Serves every connection on a background thread and records requests.
struct Stub {
    url: String,
    requests: Arc<Mutex<Vec<Request>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<Request> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let path = line.split_whitespace().nth(1)?.to_string();
    let mut length = 0;
    let mut auth = None;
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).ok()?;
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        let (name, value) = h.split_once(':')?;
        match name.to_ascii_lowercase().as_str() {
            "content-length" => length = value.trim().parse().ok()?,
            "authorization" => auth = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    Some(Request {
        path,
        auth,
        body: serde_json::from_slice(&body).unwrap_or(Value::Null),
    })
}

fn serve(handler: Arc<Handler>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = requests.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let Some(req) = read_request(&mut stream) else { continue };
            let (status, body) = handler(&req);
            log.lock().unwrap().push(req);
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    Stub { url, requests }
}

fn chat_reply(content: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

fn backend(url: &str) -> HttpBackend {
    HttpBackend::new(&BackendSpec::http(url, "stub-model"))
        .unwrap()
        .with_backoff(Duration::from_millis(1))
}

fn messages() -> Vec<ChatMessage> {
    vec![ChatMessage::system("sys"), ChatMessage::user("hello")]
}

#[test]
fn chat_request_shape_and_reply() {
    let stub = serve(Arc::new(|_| (200, chat_reply("LTL: G (a -> b)"))));
    let reply = complete(&backend(&stub.url), &messages()).unwrap();
    assert_eq!(reply.content, "LTL: G (a -> b)");
    let reqs = stub.requests.lock().unwrap();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].path, "/v1/chat/completions");
    assert_eq!(reqs[0].body["model"], "stub-model");
    assert_eq!(reqs[0].body["temperature"], 0.0);
    assert_eq!(reqs[0].body["messages"][1]["role"], "user");
    assert_eq!(reqs[0].body["messages"][1]["content"], "hello");
}

#[test]
fn server_errors_are_retried() {
    let calls = Arc::new(Mutex::new(0));
    let c = calls.clone();
    let stub = serve(Arc::new(move |_| {
        let mut n = c.lock().unwrap();
        *n += 1;
        if *n < 3 {
            (503, "{}".into())
        } else {
            (200, chat_reply("ok"))
        }
    }));
    assert_eq!(backend(&stub.url).respond(&messages()).unwrap(), "ok");
    assert_eq!(stub.requests.lock().unwrap().len(), 3);
}

#[test]
fn retries_are_bounded() {
    let stub = serve(Arc::new(|_| (429, "{}".into())));
    let err = backend(&stub.url).respond(&messages()).unwrap_err();
    assert!(matches!(err, LlmError::Transport(_)), "{err}");
    assert_eq!(stub.requests.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_and_bad_bodies_fail_once() {
    let stub = serve(Arc::new(|_| (400, "{\"error\":\"bad\"}".into())));
    assert!(matches!(
        backend(&stub.url).respond(&messages()),
        Err(LlmError::Protocol(_))
    ));
    assert_eq!(stub.requests.lock().unwrap().len(), 1);

    let stub = serve(Arc::new(|_| (200, "{\"choices\": []}".into())));
    assert!(matches!(
        backend(&stub.url).respond(&messages()),
        Err(LlmError::Protocol(_))
    ));
    assert_eq!(stub.requests.lock().unwrap().len(), 1);
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut spec = BackendSpec::http(format!("http://127.0.0.1:{port}"), "m");
    spec.retries = 0;
    let err = HttpBackend::new(&spec).unwrap().respond(&messages()).unwrap_err();
    assert!(matches!(err, LlmError::Transport(_)), "{err}");
}

/// Serves the fixture revisor on one path and the strict critic on another.
fn fixture_server() -> Stub {
    let vocab = scenario_kb(Archetype::HighwayCutIn).vocabulary();
    let revisor = fixture::revisor();
    let critic = fixture::strict_critic(vocab);
    serve(Arc::new(move |req| {
        let msgs: Vec<ChatMessage> = serde_json::from_value(req.body["messages"].clone()).unwrap();
        let who: &SharedBackend = if req.path.starts_with("/critic") { &critic } else { &revisor };
        (200, chat_reply(&who.respond(&msgs).unwrap()))
    }))
}

#[test]
fn critic_tree_over_http() {
    let stub = fixture_server();
    let revisor: SharedBackend = Arc::new(backend(&format!("{}/revisor/v1", stub.url)));
    let critic: SharedBackend = Arc::new(backend(&format!("{}/critic/v1", stub.url)));
    let vocab = scenario_kb(Archetype::HighwayCutIn).vocabulary();
    let tree = CriticTree::new(
        revisor,
        CriticEnsemble::homogeneous(critic, 0),
        CriticTreeConfig::new(1, 2).with_vocabulary(vocab),
    );
    let (formula, trace) = tree
        .run("Whenever a car cuts in ahead of me, I brake.", "F (car_cutting_in -> brake)")
        .unwrap();
    assert_eq!(formula, "G (cut_in_ahead -> brake)");
    assert_eq!(trace.termination, Termination::Approved);
    let reqs = stub.requests.lock().unwrap();
    assert_eq!(reqs.len(), trace.revisor_calls + trace.critic_calls);
    assert!(reqs.iter().all(|r| r.path.ends_with("/v1/chat/completions")));
}

#[test]
fn embeddings_endpoint() {
    let stub = serve(Arc::new(|req| {
        let input = req.body["input"].as_str().unwrap_or("").to_string();
        let v = HashedTrigramEmbedder { dim: 8 }.vector(&input);
        let scaled: Vec<f64> = v.iter().map(|x| x * 3.0).collect();
        (200, json!({"data": [{"embedding": scaled, "index": 0}]}).to_string())
    }));
    let e = HttpEmbedder::new(&stub.url, "embed-model", 8, Duration::from_secs(5)).unwrap();
    let v = e.embed("brake_if_cut_in").unwrap();
    assert_eq!(v.len(), 8);
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-12);
    let reqs = stub.requests.lock().unwrap();
    assert_eq!(reqs[0].path, "/v1/embeddings");
    assert_eq!(reqs[0].body["model"], "embed-model");
    assert!(reqs[0].auth.is_none() || std::env::var(cogform::llm::API_KEY_ENV).is_ok());
}

#[test]
fn embedding_failures_fall_back_to_trigrams() {
    let wrong_dim = serve(Arc::new(|_| (200, json!({"data": [{"embedding": [1.0, 0.0]}]}).to_string())));
    let down = serve(Arc::new(|_| (500, "{}".into())));
    for stub in [wrong_dim, down] {
        let e = FallbackEmbedder {
            primary: HttpEmbedder::new(&stub.url, "m", 16, Duration::from_secs(5)).unwrap(),
            fallback: HashedTrigramEmbedder { dim: 16 },
        };
        assert!(e.primary.embed("keep_lane").is_err());
        assert_eq!(
            e.embed("keep_lane").unwrap(),
            HashedTrigramEmbedder { dim: 16 }.vector("keep_lane")
        );
    }
}
