//! Deterministic in-process mock REST services.
//!
//! Four fixtures back the test suite and the examples:
//!
//! - [`features_service`] — a product/configuration/feature resource tree
//!   with client-chosen names and a strict dependency chain (configurations
//!   404 without their product, features without both). Product creation
//!   answers with a plain-text body, the case where only request data can
//!   feed the key-value memory.
//! - [`unguessable_features_service`] — the same domain, but every resource
//!   gets a server-generated 128-bit id. Dependent operations can only
//!   succeed by feeding server-issued ids back, which is exactly what the
//!   response memory is for. A handful of harmless catalog/status
//!   operations pad the surface the way real services do.
//! - [`fault_service`] — one route that always fails with three rotating
//!   scripted 500 bodies (two stack-trace styles and one plain JSON error),
//!   each localized with rotating timestamps and request ids.
//! - [`plain_text_service`] — responds in text/plain only.
//!
//! Every fixture emits its own OpenAPI document, so the engine consumes it
//! through the normal parse path. Fixture randomness (resource ids) comes
//! from a dedicated seeded generator: runs against a fixture replay exactly,
//! while the ids stay unguessable to the engine's own random stream.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use indexmap::{IndexMap, IndexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

/// A routed request, decoded for behavior functions.
pub struct RouteRequest {
    pub method: String,
    pub path_params: IndexMap<String, String>,
    pub query: IndexMap<String, String>,
    pub body: Vec<u8>,
}

impl RouteRequest {
    pub fn body_json(&self) -> Option<Value> {
        serde_json::from_slice(&self.body).ok()
    }

    /// A body field rendered as text, if present.
    pub fn body_field(&self, name: &str) -> Option<String> {
        let value = self.body_json()?.get(name)?.clone();
        Some(match value {
            Value::String(s) => s,
            other => other.to_string(),
        })
    }
}

/// What a behavior answers with.
pub struct RouteResponse {
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
}

impl RouteResponse {
    pub fn json(status: u16, value: &Value) -> Self {
        RouteResponse {
            status,
            content_type: "application/json".to_string(),
            body: serde_json::to_vec(value).expect("JSON value serializes"),
        }
    }

    pub fn text(status: u16, body: &str) -> Self {
        RouteResponse {
            status,
            content_type: "text/plain".to_string(),
            body: body.as_bytes().to_vec(),
        }
    }
}

type Behavior = Box<dyn Fn(&RouteRequest, &mut FixtureState) -> RouteResponse + Send + Sync>;

enum Segment {
    Literal(String),
    Param(String),
}

struct Route {
    method: &'static str,
    segments: Vec<Segment>,
    behavior: Behavior,
}

impl Route {
    fn new(
        method: &'static str,
        template: &str,
        behavior: impl Fn(&RouteRequest, &mut FixtureState) -> RouteResponse + Send + Sync + 'static,
    ) -> Self {
        let segments = template
            .split('/')
            .filter(|s| !s.is_empty())
            .map(|s| match s.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
                Some(name) => Segment::Param(name.to_string()),
                None => Segment::Literal(s.to_string()),
            })
            .collect();
        Route { method, segments, behavior: Box::new(behavior) }
    }

    fn matches(&self, method: &str, path: &[String]) -> Option<IndexMap<String, String>> {
        if method != self.method || path.len() != self.segments.len() {
            return None;
        }
        let mut params = IndexMap::new();
        for (segment, actual) in self.segments.iter().zip(path) {
            match segment {
                Segment::Literal(expected) if expected == actual => {}
                Segment::Literal(_) => return None,
                Segment::Param(name) => {
                    params.insert(name.clone(), actual.clone());
                }
            }
        }
        Some(params)
    }
}

/// Shared mutable state behind a fixture's routes.
pub struct FixtureState {
    /// product -> configuration -> feature names (features-service analog)
    pub products: IndexMap<String, IndexMap<String, IndexSet<String>>>,
    /// server-issued ids (unguessable analog)
    pub product_ids: IndexSet<String>,
    pub config_ids: IndexSet<String>,
    /// total requests handled, drives rotating scripts and default names
    pub hits: u64,
    id_rng: ChaCha8Rng,
}

impl FixtureState {
    fn new(seed: u64) -> Self {
        FixtureState {
            products: IndexMap::new(),
            product_ids: IndexSet::new(),
            config_ids: IndexSet::new(),
            hits: 0,
            id_rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A fresh 128-bit resource id as 32 hex characters.
    pub fn next_id(&mut self) -> String {
        format!("{:032x}", self.id_rng.gen::<u128>())
    }
}

/// One mock service: routes, state, and the OpenAPI document describing it.
pub struct Fixture {
    pub name: &'static str,
    routes: Vec<Route>,
    state: Mutex<FixtureState>,
    openapi: Value,
}

impl Fixture {
    /// The OpenAPI document the engine should be pointed at.
    pub fn openapi_document(&self) -> Value {
        self.openapi.clone()
    }

    fn dispatch(&self, method: &str, raw_url: &str, body: Vec<u8>) -> RouteResponse {
        let (raw_path, raw_query) = match raw_url.split_once('?') {
            Some((p, q)) => (p, Some(q)),
            None => (raw_url, None),
        };
        let path: Vec<String> = raw_path
            .split('/')
            .filter(|s| !s.is_empty())
            .map(|s| {
                percent_encoding::percent_decode_str(s).decode_utf8_lossy().into_owned()
            })
            .collect();
        let query: IndexMap<String, String> = raw_query
            .map(|q| {
                url::form_urlencoded::parse(q.as_bytes())
                    .map(|(k, v)| (k.into_owned(), v.into_owned()))
                    .collect()
            })
            .unwrap_or_default();

        let mut state = self.state.lock().expect("fixture state poisoned");
        state.hits += 1;
        for route in &self.routes {
            if let Some(path_params) = route.matches(method, &path) {
                let request = RouteRequest { method: method.to_string(), path_params, query, body };
                return (route.behavior)(&request, &mut state);
            }
        }
        RouteResponse::json(404, &json!({"message": "no such route"}))
    }
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("no local port available: {0}")]
    PortUnavailable(String),
}

/// A running fixture. Shuts down when dropped.
pub struct FixtureHandle {
    base_url: String,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl FixtureHandle {
    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn shutdown(self) {}
}

impl Drop for FixtureHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

/// Serve a fixture on an ephemeral local port until the handle drops.
pub fn start_fixture(fixture: Fixture) -> Result<FixtureHandle, FixtureError> {
    let server = tiny_http::Server::http("127.0.0.1:0")
        .map_err(|e| FixtureError::PortUnavailable(e.to_string()))?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| FixtureError::PortUnavailable("no ip address".to_string()))?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = Arc::clone(&stop);

    let thread = std::thread::spawn(move || {
        while !stop_flag.load(Ordering::SeqCst) {
            match server.recv_timeout(Duration::from_millis(25)) {
                Ok(Some(mut request)) => {
                    let method = request.method().to_string().to_uppercase();
                    let url = request.url().to_string();
                    let mut body = Vec::new();
                    let _ = request.as_reader().read_to_end(&mut body);
                    let out = fixture.dispatch(&method, &url, body);
                    let header = tiny_http::Header::from_bytes(
                        &b"Content-Type"[..],
                        out.content_type.as_bytes(),
                    )
                    .expect("static header name");
                    let response = tiny_http::Response::from_data(out.body)
                        .with_status_code(out.status)
                        .with_header(header);
                    let _ = request.respond(response);
                }
                Ok(None) => {}
                Err(_) => break,
            }
        }
    });

    Ok(FixtureHandle { base_url: format!("http://{addr}"), stop, thread: Some(thread) })
}

fn v2_path_param(name: &str) -> Value {
    json!({"name": name, "in": "path", "required": true, "type": "string"})
}

/// The deterministic product/configuration/feature service.
pub fn features_service() -> Fixture {
    let not_found = |what: &str| RouteResponse::json(404, &json!({ "message": what }));

    let routes = vec![
        Route::new("POST", "/products/{productName}", |req, state| {
            let product = req.path_params["productName"].clone();
            state.products.entry(product).or_default();
            RouteResponse::text(200, "Successfully created")
        }),
        Route::new("GET", "/products", |_req, state| {
            let names: Vec<&String> = state.products.keys().collect();
            RouteResponse::json(200, &json!(names))
        }),
        Route::new("GET", "/products/{productName}", move |req, state| {
            match state.products.get(&req.path_params["productName"]) {
                Some(configs) => RouteResponse::json(
                    200,
                    &json!({
                        "productName": req.path_params["productName"],
                        "configurations": configs.len(),
                    }),
                ),
                None => not_found("unknown product"),
            }
        }),
        Route::new("DELETE", "/products/{productName}", move |req, state| {
            match state.products.shift_remove(&req.path_params["productName"]) {
                Some(_) => RouteResponse::json(
                    200,
                    &json!({"deleted": req.path_params["productName"]}),
                ),
                None => not_found("unknown product"),
            }
        }),
        Route::new(
            "POST",
            "/products/{productName}/configurations/{configurationName}",
            move |req, state| {
                let Some(configs) = state.products.get_mut(&req.path_params["productName"])
                else {
                    return not_found("unknown product");
                };
                configs.entry(req.path_params["configurationName"].clone()).or_default();
                RouteResponse::json(
                    200,
                    &json!({
                        "productName": req.path_params["productName"],
                        "configurationName": req.path_params["configurationName"],
                    }),
                )
            },
        ),
        Route::new("GET", "/products/{productName}/configurations", move |req, state| {
            match state.products.get(&req.path_params["productName"]) {
                Some(configs) => {
                    let names: Vec<&String> = configs.keys().collect();
                    RouteResponse::json(200, &json!(names))
                }
                None => not_found("unknown product"),
            }
        }),
        Route::new(
            "POST",
            "/products/{productName}/configurations/{configurationName}/features/{featureName}",
            move |req, state| {
                let Some(configs) = state.products.get_mut(&req.path_params["productName"])
                else {
                    return not_found("unknown product");
                };
                let Some(features) = configs.get_mut(&req.path_params["configurationName"])
                else {
                    return not_found("unknown configuration");
                };
                features.insert(req.path_params["featureName"].clone());
                RouteResponse::json(
                    200,
                    &json!({
                        "productName": req.path_params["productName"],
                        "configurationName": req.path_params["configurationName"],
                        "featureName": req.path_params["featureName"],
                    }),
                )
            },
        ),
        Route::new(
            "GET",
            "/products/{productName}/configurations/{configurationName}/features",
            move |req, state| {
                let Some(configs) = state.products.get(&req.path_params["productName"])
                else {
                    return not_found("unknown product");
                };
                match configs.get(&req.path_params["configurationName"]) {
                    Some(features) => {
                        let names: Vec<&String> = features.iter().collect();
                        RouteResponse::json(200, &json!(names))
                    }
                    None => not_found("unknown configuration"),
                }
            },
        ),
    ];

    let openapi = json!({
        "swagger": "2.0",
        "info": {"title": "Features Service (testbed)", "version": "1.0"},
        "paths": {
            "/products/{productName}": {
                "post": {
                    "operationId": "createProduct",
                    "produces": ["text/plain"],
                    "parameters": [v2_path_param("productName")],
                    "responses": {"200": {"description": "created"}}
                },
                "get": {
                    "operationId": "getProduct",
                    "parameters": [v2_path_param("productName")],
                    "responses": {"200": {"description": "ok", "schema": {
                        "type": "object",
                        "properties": {
                            "productName": {"type": "string"},
                            "configurations": {"type": "integer"}
                        }
                    }}, "404": {"description": "unknown product"}}
                },
                "delete": {
                    "operationId": "deleteProduct",
                    "parameters": [v2_path_param("productName")],
                    "responses": {"200": {"description": "deleted"},
                                   "404": {"description": "unknown product"}}
                }
            },
            "/products": {
                "get": {
                    "operationId": "getProducts",
                    "responses": {"200": {"description": "ok", "schema": {
                        "type": "array", "items": {"type": "string"}
                    }}}
                }
            },
            "/products/{productName}/configurations/{configurationName}": {
                "post": {
                    "operationId": "addConfiguration",
                    "parameters": [v2_path_param("productName"), v2_path_param("configurationName")],
                    "responses": {"200": {"description": "ok", "schema": {
                        "type": "object",
                        "properties": {
                            "productName": {"type": "string"},
                            "configurationName": {"type": "string"}
                        }
                    }}, "404": {"description": "unknown product"}}
                }
            },
            "/products/{productName}/configurations": {
                "get": {
                    "operationId": "getConfigurations",
                    "parameters": [v2_path_param("productName")],
                    "responses": {"200": {"description": "ok", "schema": {
                        "type": "array", "items": {"type": "string"}
                    }}, "404": {"description": "unknown product"}}
                }
            },
            "/products/{productName}/configurations/{configurationName}/features/{featureName}": {
                "post": {
                    "operationId": "addFeatureToConfiguration",
                    "parameters": [
                        v2_path_param("productName"),
                        v2_path_param("configurationName"),
                        v2_path_param("featureName")
                    ],
                    "responses": {"200": {"description": "ok"},
                                   "404": {"description": "unknown product or configuration"}}
                }
            },
            "/products/{productName}/configurations/{configurationName}/features": {
                "get": {
                    "operationId": "getConfigurationActivedFeatures",
                    "parameters": [v2_path_param("productName"), v2_path_param("configurationName")],
                    "responses": {"200": {"description": "ok", "schema": {
                        "type": "array", "items": {"type": "string"}
                    }}, "404": {"description": "unknown product or configuration"}}
                }
            }
        }
    });

    Fixture {
        name: "features",
        routes,
        state: Mutex::new(FixtureState::new(0)),
        openapi,
    }
}

/// The unguessable-id variant: products and configurations are created
/// freely, but their server-issued 128-bit ids are the only way to reach
/// the dependent feature operation.
pub fn unguessable_features_service(seed: u64) -> Fixture {
    let routes = vec![
        Route::new("POST", "/products", |req, state| {
            let name = req
                .body_field("name")
                .unwrap_or_else(|| format!("product-{}", state.hits));
            let id = state.next_id();
            state.product_ids.insert(id.clone());
            RouteResponse::json(201, &json!({"productId": id, "name": name}))
        }),
        Route::new("POST", "/configurations", |req, state| {
            let label = req
                .body_field("label")
                .unwrap_or_else(|| format!("config-{}", state.hits));
            let id = state.next_id();
            state.config_ids.insert(id.clone());
            RouteResponse::json(201, &json!({"configId": id, "label": label}))
        }),
        Route::new(
            "POST",
            "/products/{productId}/configurations/{configId}/features",
            |req, state| {
                let product = &req.path_params["productId"];
                let config = &req.path_params["configId"];
                if !state.product_ids.contains(product) {
                    return RouteResponse::json(404, &json!({"message": "no such product"}));
                }
                if !state.config_ids.contains(config) {
                    return RouteResponse::json(404, &json!({"message": "no such configuration"}));
                }
                let id = state.next_id();
                RouteResponse::json(
                    201,
                    &json!({"featureId": id, "productId": product, "configId": config}),
                )
            },
        ),
        Route::new("GET", "/catalog", |_req, _state| {
            RouteResponse::json(200, &json!({"items": []}))
        }),
        Route::new("GET", "/status", |_req, _state| {
            RouteResponse::json(200, &json!({"state": "ok"}))
        }),
        Route::new("GET", "/metrics", |_req, state| {
            RouteResponse::json(200, &json!({"served": state.hits}))
        }),
        Route::new("GET", "/search", |_req, _state| {
            RouteResponse::json(200, &json!({"results": []}))
        }),
        Route::new("GET", "/time", |_req, state| {
            RouteResponse::json(200, &json!({"tick": state.hits}))
        }),
        Route::new("GET", "/version", |_req, _state| {
            RouteResponse::json(200, &json!({"version": "1.0"}))
        }),
        Route::new("GET", "/banner", |_req, _state| {
            RouteResponse::text(200, "welcome")
        }),
    ];

    let query_param = |name: &str, ty: &str| {
        json!({"name": name, "in": "query", "required": false, "schema": {"type": ty}})
    };
    let json_response = |props: Value| {
        json!({"description": "ok", "content": {"application/json": {"schema": {
            "type": "object", "properties": props
        }}}})
    };

    let openapi = json!({
        "openapi": "3.0.0",
        "info": {"title": "Vault Features Service (testbed)", "version": "1.0"},
        "paths": {
            "/products": {
                "post": {
                    "operationId": "createProduct",
                    "requestBody": {"content": {"application/json": {"schema": {
                        "type": "object",
                        "properties": {"name": {"type": "string"}}
                    }}}},
                    "responses": {"201": json_response(json!({
                        "productId": {"type": "string"},
                        "name": {"type": "string"}
                    }))}
                }
            },
            "/configurations": {
                "post": {
                    "operationId": "createConfiguration",
                    "requestBody": {"content": {"application/json": {"schema": {
                        "type": "object",
                        "properties": {"label": {"type": "string"}}
                    }}}},
                    "responses": {"201": json_response(json!({
                        "configId": {"type": "string"},
                        "label": {"type": "string"}
                    }))}
                }
            },
            "/products/{productId}/configurations/{configId}/features": {
                "post": {
                    "operationId": "addFeature",
                    "parameters": [
                        {"name": "productId", "in": "path", "required": true,
                         "schema": {"type": "string"}},
                        {"name": "configId", "in": "path", "required": true,
                         "schema": {"type": "string"}}
                    ],
                    "responses": {
                        "201": json_response(json!({
                            "featureId": {"type": "string"},
                            "productId": {"type": "string"},
                            "configId": {"type": "string"}
                        })),
                        "404": {"description": "missing product or configuration"}
                    }
                }
            },
            "/catalog": {"get": {"operationId": "getCatalog",
                "parameters": [query_param("limit", "integer")],
                "responses": {"200": {"description": "ok"}}}},
            "/status": {"get": {"operationId": "getStatus",
                "parameters": [query_param("verbose", "boolean")],
                "responses": {"200": {"description": "ok"}}}},
            "/metrics": {"get": {"operationId": "getMetrics",
                "parameters": [query_param("window", "integer")],
                "responses": {"200": {"description": "ok"}}}},
            "/search": {"get": {"operationId": "search",
                "parameters": [query_param("q", "string")],
                "responses": {"200": {"description": "ok"}}}},
            "/time": {"get": {"operationId": "getTime",
                "parameters": [query_param("offset", "integer")],
                "responses": {"200": {"description": "ok"}}}},
            "/version": {"get": {"operationId": "getVersion",
                "responses": {"200": {"description": "ok"}}}},
            "/banner": {"get": {"operationId": "getBanner",
                "parameters": [query_param("page", "integer")],
                "responses": {"200": {"description": "ok"}}}}
        }
    });

    Fixture {
        name: "unguessable-features",
        routes,
        state: Mutex::new(FixtureState::new(seed)),
        openapi,
    }
}

/// One route, three rotating scripted 500 bodies.
pub fn fault_service() -> Fixture {
    let routes = vec![Route::new("GET", "/crash", |_req, state| {
        let hits = state.hits;
        let ts = format!(
            "2024-01-01T{:02}:{:02}:{:02}Z",
            (hits / 3600) % 24,
            (hits / 60) % 60,
            hits % 60
        );
        let request_id = format!("00000000-0000-4000-8000-{:012x}", hits);
        match hits % 3 {
            0 => RouteResponse::text(
                500,
                &format!(
                    "{ts} ERROR [req-{request_id}] unhandled\n\
                     java.lang.IllegalStateException: configuration graph contains a cycle\n\
                     \tat com.acme.config.GraphWalker.walk(GraphWalker.java:118)\n\
                     \tat com.acme.http.Dispatcher.route(Dispatcher.java:17)"
                ),
            ),
            1 => RouteResponse::text(
                500,
                &format!(
                    "{ts} worker crashed\n\
                     Traceback (most recent call last):\n  \
                     File \"app/handlers.py\", line 77, in render\n  \
                     File \"app/db.py\", line 12, in fetch\n\
                     KeyError: 'price'"
                ),
            ),
            _ => RouteResponse::json(
                500,
                &json!({"error": "datastore unavailable", "ts": ts, "request": request_id}),
            ),
        }
    })];

    let openapi = json!({
        "swagger": "2.0",
        "info": {"title": "Fault Service (testbed)", "version": "1.0"},
        "paths": {
            "/crash": {
                "get": {
                    "operationId": "crash",
                    "responses": {"500": {"description": "always fails"}}
                }
            }
        }
    });

    Fixture {
        name: "faults",
        routes,
        state: Mutex::new(FixtureState::new(0)),
        openapi,
    }
}

/// Text-only responder.
pub fn plain_text_service() -> Fixture {
    let routes = vec![
        Route::new("POST", "/echo", |_req, _state| {
            RouteResponse::text(200, "Successfully created")
        }),
        Route::new("GET", "/motd", |_req, _state| {
            RouteResponse::text(200, "all systems nominal")
        }),
    ];

    let openapi = json!({
        "swagger": "2.0",
        "info": {"title": "Plain Text Service (testbed)", "version": "1.0"},
        "paths": {
            "/echo": {
                "post": {
                    "operationId": "echo",
                    "consumes": ["application/json"],
                    "parameters": [{"name": "payload", "in": "body", "schema": {
                        "type": "object",
                        "properties": {"message": {"type": "string"}}
                    }}],
                    "responses": {"200": {"description": "created"}}
                }
            },
            "/motd": {
                "get": {
                    "operationId": "getMotd",
                    "responses": {"200": {"description": "ok"}}
                }
            }
        }
    });

    Fixture {
        name: "plain-text",
        routes,
        state: Mutex::new(FixtureState::new(0)),
        openapi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executor::{HttpExecutor, RequestPlan};
    use crate::spec_model::{parse_spec, FormatHint, HttpMethod};

    fn get(executor: &HttpExecutor, url: &str) -> crate::executor::ResponseRecord {
        plan_and_send(executor, HttpMethod::Get, url, None)
    }

    fn post(executor: &HttpExecutor, url: &str) -> crate::executor::ResponseRecord {
        plan_and_send(executor, HttpMethod::Post, url, None)
    }

    fn plan_and_send(
        executor: &HttpExecutor,
        method: HttpMethod,
        url: &str,
        body: Option<Vec<u8>>,
    ) -> crate::executor::ResponseRecord {
        let plan = RequestPlan {
            method,
            absolute_url: url.to_string(),
            headers: vec![],
            body,
            operation_id: "test".to_string(),
            param_assignments: vec![],
        };
        executor.execute(&plan, 5_000)
    }

    #[test]
    fn create_then_read_product() {
        let handle = start_fixture(features_service()).unwrap();
        let executor = HttpExecutor::new();
        let base = handle.base_url();

        let created = post(&executor, &format!("{base}/products/widget"));
        assert_eq!(created.status, Some(200));
        assert_eq!(created.body_text(), "Successfully created");

        let read = get(&executor, &format!("{base}/products/widget"));
        assert_eq!(read.status, Some(200));
    }

    #[test]
    fn configuration_for_missing_product_is_404() {
        let handle = start_fixture(features_service()).unwrap();
        let executor = HttpExecutor::new();
        let response = post(
            &executor,
            &format!("{}/products/ghost/configurations/main", handle.base_url()),
        );
        assert_eq!(response.status, Some(404));
    }

    #[test]
    fn feature_needs_product_and_configuration() {
        let handle = start_fixture(features_service()).unwrap();
        let executor = HttpExecutor::new();
        let base = handle.base_url();

        post(&executor, &format!("{base}/products/p"));
        let missing_config =
            post(&executor, &format!("{base}/products/p/configurations/c/features/f"));
        assert_eq!(missing_config.status, Some(404));

        post(&executor, &format!("{base}/products/p/configurations/c"));
        let ok = post(&executor, &format!("{base}/products/p/configurations/c/features/f"));
        assert_eq!(ok.status, Some(200));
    }

    #[test]
    fn fixture_documents_parse_through_the_normal_path() {
        for fixture in [
            features_service(),
            unguessable_features_service(1),
            fault_service(),
            plain_text_service(),
        ] {
            let doc = serde_json::to_vec(&fixture.openapi_document()).unwrap();
            let spec = parse_spec(&doc, FormatHint::Json).unwrap();
            assert!(!spec.operations.is_empty(), "{} has operations", fixture.name);
        }
    }

    #[test]
    fn identical_request_sequences_replay_identically() {
        let script = |base: &str, executor: &HttpExecutor| -> Vec<Option<u16>> {
            [
                (HttpMethod::Post, format!("{base}/products/a")),
                (HttpMethod::Post, format!("{base}/products/a/configurations/c")),
                (HttpMethod::Get, format!("{base}/products/a/configurations")),
                (HttpMethod::Delete, format!("{base}/products/a")),
                (HttpMethod::Get, format!("{base}/products/a")),
            ]
            .into_iter()
            .map(|(m, url)| plan_and_send(executor, m, &url, None).status)
            .collect()
        };
        let executor = HttpExecutor::new();
        let first = {
            let handle = start_fixture(features_service()).unwrap();
            script(handle.base_url(), &executor)
        };
        let second = {
            let handle = start_fixture(features_service()).unwrap();
            script(handle.base_url(), &executor)
        };
        assert_eq!(first, second);
    }

    #[test]
    fn fault_scripts_dedup_to_three() {
        let handle = start_fixture(fault_service()).unwrap();
        let executor = HttpExecutor::new();
        let mut registry = crate::faults::FaultRegistry::new();
        for seq in 0..10 {
            let record = get(&executor, &format!("{}/crash", handle.base_url()));
            assert_eq!(record.status, Some(500));
            let plan = RequestPlan {
                method: HttpMethod::Get,
                absolute_url: format!("{}/crash", handle.base_url()),
                headers: vec![],
                body: None,
                operation_id: "crash".to_string(),
                param_assignments: vec![],
            };
            registry.register(crate::faults::fingerprint(&record, seq), &plan);
        }
        assert_eq!(registry.len(), 3);
    }

    #[test]
    fn unguessable_ids_gate_the_dependent_operation() {
        let handle = start_fixture(unguessable_features_service(7)).unwrap();
        let executor = HttpExecutor::new();
        let base = handle.base_url();

        let created = post(&executor, &format!("{base}/products"));
        assert_eq!(created.status, Some(201));
        let body: Value = serde_json::from_slice(&created.body).unwrap();
        let product_id = body["productId"].as_str().unwrap().to_string();
        assert_eq!(product_id.len(), 32);

        let config = post(&executor, &format!("{base}/configurations"));
        let config_id: String =
            serde_json::from_slice::<Value>(&config.body).unwrap()["configId"]
                .as_str()
                .unwrap()
                .to_string();

        // A made-up id 404s; the real pair succeeds.
        let bad = post(
            &executor,
            &format!("{base}/products/deadbeef/configurations/{config_id}/features"),
        );
        assert_eq!(bad.status, Some(404));
        let good = post(
            &executor,
            &format!("{base}/products/{product_id}/configurations/{config_id}/features"),
        );
        assert_eq!(good.status, Some(201));
    }
}
