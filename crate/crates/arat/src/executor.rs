//! HTTP realization: turn (operation, assignments) into a request plan and
//! send it.
//!
//! Everything that can go wrong on the wire is data, not an error: transport
//! failures come back as [`ResponseRecord`]s with no status and an error
//! tag, and are classified `Other`. Redirects are not followed, so 3xx
//! responses surface as-is. One request is in flight at a time.

use std::io::Read;
use std::time::{Duration, Instant};

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::agent::StatusClass;
use crate::spec_model::{HttpMethod, OperationSpec, ParamLocation};
use crate::values::ResolutionNote;

/// Everything percent-encoded except RFC 3986 unreserved characters.
const STRICT_ENCODE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

/// Default cap on how much response body is kept for processing.
pub const DEFAULT_BODY_CAP: usize = 1 << 20;

/// One parameter with its resolved value, ready to be placed in a request.
#[derive(Debug, Clone, Serialize)]
pub struct ParamAssignment {
    pub name: String,
    pub location: ParamLocation,
    pub value: Value,
    pub note: ResolutionNote,
}

/// A fully concrete HTTP request.
#[derive(Debug, Clone, Serialize)]
pub struct RequestPlan {
    pub method: HttpMethod,
    pub absolute_url: String,
    pub headers: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<Vec<u8>>,
    pub operation_id: String,
    pub param_assignments: Vec<ParamAssignment>,
}

/// What came back for one request.
#[derive(Debug, Clone)]
pub struct ResponseRecord {
    /// `None` when no response arrived at all (refused, timed out).
    pub status: Option<u16>,
    pub status_class: StatusClass,
    /// Body bytes, truncated at the executor's cap.
    pub body: Vec<u8>,
    pub latency_ms: u64,
    /// Transport-error tag when `status` is `None`.
    pub error: Option<String>,
}

impl ResponseRecord {
    pub fn body_text(&self) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(&self.body)
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("path placeholder `{{{0}}}` has no assignment")]
    MissingPathParam(String),
}

/// Render a value the way it appears inside a URL or header: bare strings,
/// JSON text for anything structured.
pub fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Build the concrete request for one operation.
///
/// Path values are percent-encoded and substituted into the template, query
/// parameters are appended, header parameters become headers, and
/// body-property assignments are serialized as a single JSON object whose
/// key order follows the operation's parameter order. Form assignments (and
/// only those, when no JSON body exists) become a urlencoded body.
pub fn build_request(
    op: &OperationSpec,
    assignments: Vec<ParamAssignment>,
    base_url: &str,
) -> Result<RequestPlan, BuildError> {
    let mut path = op.path_template.to_string();
    for placeholder in placeholders(&op.path_template) {
        let assignment = assignments
            .iter()
            .find(|a| a.location == ParamLocation::Path && a.name == placeholder)
            .ok_or_else(|| BuildError::MissingPathParam(placeholder.clone()))?;
        let encoded =
            utf8_percent_encode(&scalar_text(&assignment.value), STRICT_ENCODE).to_string();
        path = path.replace(&format!("{{{placeholder}}}"), &encoded);
    }

    // Group the remaining assignments in the operation's declared order.
    let mut query_parts = Vec::new();
    let mut headers = Vec::new();
    let mut body_props = serde_json::Map::new();
    let mut form_parts = Vec::new();
    for param in &op.parameters {
        for assignment in assignments
            .iter()
            .filter(|a| a.name == param.name && a.location == param.location)
        {
            match assignment.location {
                ParamLocation::Path => {}
                ParamLocation::Query => query_parts.push(format!(
                    "{}={}",
                    utf8_percent_encode(&assignment.name, STRICT_ENCODE),
                    utf8_percent_encode(&scalar_text(&assignment.value), STRICT_ENCODE),
                )),
                ParamLocation::Header => headers.push((
                    assignment.name.clone(),
                    sanitize_header_value(&scalar_text(&assignment.value)),
                )),
                ParamLocation::BodyProperty => {
                    body_props.entry(assignment.name.clone()).or_insert(assignment.value.clone());
                }
                ParamLocation::Form => form_parts.push(format!(
                    "{}={}",
                    utf8_percent_encode(&assignment.name, STRICT_ENCODE),
                    utf8_percent_encode(&scalar_text(&assignment.value), STRICT_ENCODE),
                )),
            }
        }
    }

    let body = if !body_props.is_empty() {
        headers.push(("Content-Type".to_string(), "application/json".to_string()));
        Some(serde_json::to_vec(&Value::Object(body_props)).expect("JSON map serializes"))
    } else if !form_parts.is_empty() {
        headers.push((
            "Content-Type".to_string(),
            "application/x-www-form-urlencoded".to_string(),
        ));
        Some(form_parts.join("&").into_bytes())
    } else {
        None
    };

    let mut absolute_url = format!("{}{}", base_url.trim_end_matches('/'), path);
    if !query_parts.is_empty() {
        absolute_url.push('?');
        absolute_url.push_str(&query_parts.join("&"));
    }

    Ok(RequestPlan {
        method: op.http_method,
        absolute_url,
        headers,
        body,
        operation_id: op.operation_id.clone(),
        param_assignments: assignments,
    })
}

fn placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                out.push(after[..end].to_string());
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    out
}

fn sanitize_header_value(value: &str) -> String {
    value
        .chars()
        .map(|c| if c == '\r' || c == '\n' { ' ' } else { c })
        .collect()
}

/// Blocking HTTP client for the testing loop.
pub struct HttpExecutor {
    agent: ureq::Agent,
    body_cap: usize,
}

impl Default for HttpExecutor {
    fn default() -> Self {
        HttpExecutor::new()
    }
}

impl HttpExecutor {
    pub fn new() -> Self {
        HttpExecutor::with_body_cap(DEFAULT_BODY_CAP)
    }

    pub fn with_body_cap(body_cap: usize) -> Self {
        let agent = ureq::AgentBuilder::new().redirects(0).build();
        HttpExecutor { agent, body_cap }
    }

    /// Send the plan and wait for the outcome. Never returns an error:
    /// refused connections and timeouts become records with an error tag.
    pub fn execute(&self, plan: &RequestPlan, timeout_ms: u64) -> ResponseRecord {
        let started = Instant::now();
        let mut request = self
            .agent
            .request(plan.method.as_str(), &plan.absolute_url)
            .timeout(Duration::from_millis(timeout_ms));
        for (name, value) in &plan.headers {
            request = request.set(name, value);
        }
        let result = match &plan.body {
            Some(body) => request.send_bytes(body),
            None => request.call(),
        };
        let latency_ms = started.elapsed().as_millis() as u64;
        match result {
            Ok(response) => self.record(response, latency_ms),
            Err(ureq::Error::Status(_, response)) => self.record(response, latency_ms),
            Err(ureq::Error::Transport(transport)) => ResponseRecord {
                status: None,
                status_class: StatusClass::Other,
                body: Vec::new(),
                latency_ms,
                error: Some(transport.kind().to_string()),
            },
        }
    }

    fn record(&self, response: ureq::Response, latency_ms: u64) -> ResponseRecord {
        let status = response.status();
        let mut body = Vec::new();
        // Read errors mid-body leave a truncated body; the status stands.
        let _ = response
            .into_reader()
            .take(self.body_cap as u64)
            .read_to_end(&mut body);
        ResponseRecord {
            status: Some(status),
            status_class: StatusClass::from_status(Some(status)),
            body,
            latency_ms,
            error: None,
        }
    }
}
