use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use storl::env::TaskId;
use storl::planner::{build_prompt, fetch_plan, EndpointConfig, PlannerMode};
use storl::Error;

/// Serves `responses` (one per connection) and returns the base URL.
fn serve(responses: Vec<String>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for resp in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            stream.write_all(resp.as_bytes()).unwrap();
        }
    });
    format!("http://{addr}")
}

fn reply(status: &str, body: &str) -> String {
    format!(
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
}

fn live(base_url: String, retries: u32) -> EndpointConfig {
    EndpointConfig {
        mode: PlannerMode::Live,
        base_url,
        model: "test-model".into(),
        api_key_env: "STORL_TEST_UNSET_KEY".into(),
        retries,
        timeout_secs: 5,
        ..EndpointConfig::default()
    }
}

#[test]
fn live_completion_is_parsed() {
    let content = "SubTask 1: 'all', containing states: (0,0)";
    let body = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string();
    let url = serve(vec![reply("200 OK", &body)]);
    let req = build_prompt(TaskId::UMaze, None).unwrap();
    let resp = fetch_plan(&req, &live(url, 0)).unwrap();
    assert_eq!(resp.raw, content);
    assert_eq!(resp.parse(&req).unwrap().k(), 1);
}

#[test]
fn empty_body_is_empty_completion() {
    let url = serve(vec![reply("200 OK", "")]);
    let req = build_prompt(TaskId::UMaze, None).unwrap();
    assert!(matches!(fetch_plan(&req, &live(url, 0)), Err(Error::EmptyCompletion)));
}

#[test]
fn unauthorized_is_not_retried() {
    let url = serve(vec![reply("401 Unauthorized", "{}")]);
    let req = build_prompt(TaskId::UMaze, None).unwrap();
    assert!(matches!(fetch_plan(&req, &live(url, 3)), Err(Error::Authentication(_))));
}

#[test]
fn server_errors_are_retried() {
    let ok = serde_json::json!({"choices": [{"message": {"content": "SubTask 1: 'a', containing states: (1,1)"}}]}).to_string();
    let url = serve(vec![reply("503 Service Unavailable", "busy"), reply("200 OK", &ok)]);
    let req = build_prompt(TaskId::UMaze, None).unwrap();
    assert!(fetch_plan(&req, &live(url, 1)).is_ok());
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    let req = build_prompt(TaskId::UMaze, None).unwrap();
    match fetch_plan(&req, &live("http://127.0.0.1:1".into(), 1)) {
        Err(Error::Transport { attempts, .. }) => assert_eq!(attempts, 2),
        other => panic!("unexpected {other:?}"),
    }
}
