use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::fixtures;
use crate::planner::parse::parse_response;
use crate::planner::prompt::PromptRequest;
use crate::planner::schedule::{Provenance, SubgoalSchedule};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerMode {
    Live,
    #[default]
    Fixture,
}

/// Chat-completion endpoint settings. The credential itself is read from the
/// environment variable named by `api_key_env`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub mode: PlannerMode,
    pub base_url: String,
    pub api_key_env: String,
    pub model: String,
    pub retries: u32,
    pub timeout_secs: u64,
    pub temperature: f64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            mode: PlannerMode::Fixture,
            base_url: String::new(),
            api_key_env: "STORL_LLM_API_KEY".into(),
            model: String::new(),
            retries: 3,
            timeout_secs: 60,
            temperature: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerResponse {
    pub raw: String,
    pub provenance: Provenance,
}

impl PlannerResponse {
    /// Extracts the (unvalidated) schedule from the raw text.
    pub fn parse(&self, request: &PromptRequest) -> Result<SubgoalSchedule> {
        Ok(parse_response(request.task, &self.raw)?.with_provenance(self.provenance.clone()))
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatContent,
}

#[derive(Deserialize)]
struct ChatContent {
    #[serde(default)]
    content: Option<String>,
}

enum Attempt {
    Done(String),
    Retry(String),
}

/// Obtains a planner response: the bundled text in fixture mode, or a single
/// user-turn completion from the configured endpoint in live mode.
pub fn fetch_plan(request: &PromptRequest, config: &EndpointConfig) -> Result<PlannerResponse> {
    match config.mode {
        PlannerMode::Fixture => Ok(PlannerResponse {
            raw: fixtures::response(request.task).to_string(),
            provenance: Provenance::Fixture,
        }),
        PlannerMode::Live => fetch_live(request, config),
    }
}

fn fetch_live(request: &PromptRequest, config: &EndpointConfig) -> Result<PlannerResponse> {
    if config.base_url.is_empty() {
        return Err(Error::Config("planner base_url is empty".into()));
    }
    if config.model.is_empty() {
        return Err(Error::Config("planner model is empty".into()));
    }
    let key = std::env::var(&config.api_key_env).unwrap_or_default();
    let url = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
    let prompt = request.text();
    let body = serde_json::to_string(&ChatRequest {
        model: &config.model,
        messages: vec![ChatMessage {
            role: "user",
            content: &prompt,
        }],
        temperature: config.temperature,
    })
    .map_err(|e| Error::format(e.to_string()))?;

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
        .http_status_as_error(false)
        .build()
        .into();

    let attempts = config.retries + 1;
    let mut last_cause = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(200 * u64::from(attempt)));
        }
        match send_once(&agent, &url, &key, &body)? {
            Attempt::Done(text) => {
                let content = extract_content(&text)?;
                let timestamp = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                return Ok(PlannerResponse {
                    raw: content,
                    provenance: Provenance::Llm {
                        model: config.model.clone(),
                        timestamp,
                    },
                });
            }
            Attempt::Retry(cause) => last_cause = cause,
        }
    }
    Err(Error::Transport {
        attempts,
        cause: last_cause,
    })
}

fn send_once(agent: &ureq::Agent, url: &str, key: &str, body: &str) -> Result<Attempt> {
    let mut req = agent.post(url).header("Content-Type", "application/json");
    if !key.is_empty() {
        req = req.header("Authorization", &format!("Bearer {key}"));
    }
    let mut resp = match req.send(body) {
        Ok(r) => r,
        Err(e) => return Ok(Attempt::Retry(e.to_string())),
    };
    let status = resp.status().as_u16();
    let text = match resp.body_mut().read_to_string() {
        Ok(t) => t,
        Err(e) => return Ok(Attempt::Retry(e.to_string())),
    };
    match status {
        200..=299 => Ok(Attempt::Done(text)),
        401 | 403 => Err(Error::Authentication(format!("HTTP {status}"))),
        408 | 429 | 500..=599 => Ok(Attempt::Retry(format!("HTTP {status}"))),
        _ => Err(Error::Transport {
            attempts: 1,
            cause: format!("HTTP {status}: {}", text.chars().take(200).collect::<String>()),
        }),
    }
}

fn extract_content(body: &str) -> Result<String> {
    if body.trim().is_empty() {
        return Err(Error::EmptyCompletion);
    }
    let parsed: ChatResponse = serde_json::from_str(body)
        .map_err(|e| Error::format(format!("completion body: {e}")))?;
    let content = parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .unwrap_or_default();
    if content.trim().is_empty() {
        return Err(Error::EmptyCompletion);
    }
    Ok(content)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::TaskId;
    use crate::planner::build_prompt;

    #[test]
    fn fixture_mode_is_deterministic() {
        let req = build_prompt(TaskId::CliffWalking, None).unwrap();
        let cfg = EndpointConfig::default();
        let a = fetch_plan(&req, &cfg).unwrap();
        let b = fetch_plan(&req, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.raw, fixtures::CLIFF_WALKING);
        assert_eq!(a.parse(&req).unwrap().k(), 4);
    }

    #[test]
    fn content_extraction() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"SubTask 1: 'a', containing states: (0,0)"}}]}"#;
        assert!(extract_content(body).unwrap().starts_with("SubTask 1"));
        assert!(matches!(extract_content(""), Err(Error::EmptyCompletion)));
        let empty = r#"{"choices":[{"message":{"content":""}}]}"#;
        assert!(matches!(extract_content(empty), Err(Error::EmptyCompletion)));
    }
}
