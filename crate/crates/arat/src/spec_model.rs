//! OpenAPI document ingestion.
//!
//! Both OpenAPI 2.0 (swagger) and 3.x documents, in JSON or YAML, are
//! normalized into one executable model: an [`ApiSpec`] holding an ordered
//! list of [`OperationSpec`]s, each with its parameters, constraints, mined
//! example values, and the property names declared by its response schemas.
//!
//! Normalization choices worth knowing about:
//!
//! - request-body object schemas are flattened one level into individual
//!   `body-property` parameters so each property can be weighted on its own;
//! - a missing `operationId` is synthesized from the method and path;
//! - `$ref` is resolved only within the same document;
//! - bodies are always treated as `application/json` (forms aside).

use indexmap::IndexSet;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

/// HTTP methods the engine exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HttpMethod {
    Get,
    Post,
    Put,
    Delete,
    Patch,
    Head,
}

impl HttpMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            HttpMethod::Get => "GET",
            HttpMethod::Post => "POST",
            HttpMethod::Put => "PUT",
            HttpMethod::Delete => "DELETE",
            HttpMethod::Patch => "PATCH",
            HttpMethod::Head => "HEAD",
        }
    }

    fn from_key(key: &str) -> Option<Self> {
        match key {
            "get" => Some(HttpMethod::Get),
            "post" => Some(HttpMethod::Post),
            "put" => Some(HttpMethod::Put),
            "delete" => Some(HttpMethod::Delete),
            "patch" => Some(HttpMethod::Patch),
            "head" => Some(HttpMethod::Head),
            _ => None,
        }
    }
}

impl std::fmt::Display for HttpMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a parameter travels in the request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamLocation {
    Path,
    Query,
    Header,
    BodyProperty,
    Form,
}

/// The primitive type declared for a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveType {
    String,
    Number,
    Integer,
    Boolean,
    Array,
    Object,
}

/// Value constraints carried over from the schema.
///
/// `minimum`/`maximum` and `min_length`/`max_length` are dropped as a pair
/// when the document declares them inverted, so a constructed value always
/// satisfies `minimum <= maximum` and `min_length <= max_length`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValueConstraints {
    pub enum_values: Option<Vec<Value>>,
    pub pattern: Option<String>,
    pub minimum: Option<f64>,
    pub maximum: Option<f64>,
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
}

/// One parameter of one operation.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterSpec {
    pub name: String,
    pub location: ParamLocation,
    pub required: bool,
    pub primitive_type: PrimitiveType,
    pub format: Option<String>,
    pub constraints: ValueConstraints,
    /// Example values mined from the document: enum members, the `example`
    /// keyword, and words/quoted phrases from the description, deduplicated
    /// preserving first-seen order.
    pub example_candidates: Vec<Value>,
}

/// One (path, method) pair of the API.
#[derive(Debug, Clone, Serialize)]
pub struct OperationSpec {
    pub operation_id: String,
    pub http_method: HttpMethod,
    /// Path with `{name}` placeholders, e.g. `/products/{productName}`.
    pub path_template: String,
    pub parameters: Vec<ParameterSpec>,
    /// Property names declared anywhere in this operation's response schemas.
    pub response_keys: IndexSet<String>,
}

/// The parsed, immutable operation model of one OpenAPI document.
#[derive(Debug, Clone, Serialize)]
pub struct ApiSpec {
    pub base_path: String,
    pub operations: Vec<OperationSpec>,
    pub raw_title: String,
}

impl ApiSpec {
    pub fn operation(&self, operation_id: &str) -> Option<&OperationSpec> {
        self.operations.iter().find(|op| op.operation_id == operation_id)
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("no recognizable OpenAPI root (need `swagger: 2.0` or `openapi: 3.x`)")]
    UnsupportedVersion,
    #[error("specification declares zero operations")]
    EmptySpec,
}

/// Input format selector for [`parse_spec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatHint {
    Json,
    Yaml,
    Auto,
}

/// Parse an OpenAPI 2.0 or 3.x document into an [`ApiSpec`].
pub fn parse_spec(document: &[u8], hint: FormatHint) -> Result<ApiSpec, SpecError> {
    let root = decode(document, hint)?;

    let version = if root.get("swagger").and_then(Value::as_str).map(|s| s.trim()) == Some("2.0") {
        Version::V2
    } else if root
        .get("openapi")
        .and_then(Value::as_str)
        .map(|s| s.trim_start().starts_with('3'))
        .unwrap_or(false)
    {
        Version::V3
    } else {
        return Err(SpecError::UnsupportedVersion);
    };

    let raw_title = root
        .pointer("/info/title")
        .and_then(Value::as_str)
        .unwrap_or("")
        .to_string();
    let base_path = extract_base_path(&root, version);

    let mut operations = Vec::new();
    let mut used_ids = IndexSet::new();
    if let Some(paths) = root.get("paths").and_then(Value::as_object) {
        for (path, item) in paths {
            let item = resolve(&root, item);
            let Some(item_obj) = item.as_object() else { continue };
            let shared_params: Vec<&Value> = item_obj
                .get("parameters")
                .and_then(Value::as_array)
                .map(|a| a.iter().collect())
                .unwrap_or_default();
            for (key, node) in item_obj {
                let Some(method) = HttpMethod::from_key(key) else { continue };
                operations.push(parse_operation(
                    &root,
                    method,
                    path,
                    node,
                    &shared_params,
                    version,
                    &mut used_ids,
                ));
            }
        }
    }

    if operations.is_empty() {
        return Err(SpecError::EmptySpec);
    }
    Ok(ApiSpec { base_path, operations, raw_title })
}

/// Mine example values from one raw parameter (or property-schema) subtree.
///
/// Returns, in order: every `enum` member, the `example` value, then every
/// whitespace-separated word of the `description` (surrounding quote marks
/// stripped) followed by every double- or single-quoted phrase. Fields are
/// also looked up one level down in `schema`, which is where OpenAPI 3
/// parameters keep them. Missing fields simply contribute nothing.
pub fn extract_spec_examples(param_node: &Value) -> Vec<Value> {
    let mut out = Vec::new();
    let field = |name: &str| -> Option<&Value> {
        param_node
            .get(name)
            .or_else(|| param_node.get("schema").and_then(|s| s.get(name)))
    };

    if let Some(members) = field("enum").and_then(Value::as_array) {
        out.extend(members.iter().filter(|v| is_scalar(v)).cloned());
    }
    if let Some(example) = field("example").or_else(|| field("x-example")) {
        if is_scalar(example) {
            out.push(example.clone());
        }
    }
    if let Some(description) = field("description").and_then(Value::as_str) {
        out.extend(description_tokens(description).into_iter().map(Value::String));
    }
    out
}

/// Words and quoted phrases of a description, in mining order.
fn description_tokens(text: &str) -> Vec<String> {
    let mut tokens: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c| c == '"' || c == '\'').to_string())
        .filter(|w| !w.is_empty())
        .collect();
    for quote in ['"', '\''] {
        let mut rest = text;
        while let Some(start) = rest.find(quote) {
            let after = &rest[start + 1..];
            match after.find(quote) {
                Some(end) => {
                    if end > 0 {
                        tokens.push(after[..end].to_string());
                    }
                    rest = &after[end + 1..];
                }
                None => break,
            }
        }
    }
    tokens
}

fn is_scalar(v: &Value) -> bool {
    matches!(v, Value::String(_) | Value::Number(_) | Value::Bool(_))
}

#[derive(Clone, Copy, PartialEq)]
enum Version {
    V2,
    V3,
}

fn decode(document: &[u8], hint: FormatHint) -> Result<Value, SpecError> {
    let from_json = |d: &[u8]| {
        serde_json::from_slice::<Value>(d).map_err(|e| SpecError::MalformedDocument(e.to_string()))
    };
    let from_yaml = |d: &[u8]| {
        serde_yaml::from_slice::<serde_yaml::Value>(d)
            .map_err(|e| SpecError::MalformedDocument(e.to_string()))
            .and_then(|y| {
                serde_json::to_value(y).map_err(|e| SpecError::MalformedDocument(e.to_string()))
            })
    };
    match hint {
        FormatHint::Json => from_json(document),
        FormatHint::Yaml => from_yaml(document),
        FormatHint::Auto => from_json(document).or_else(|json_err| {
            // YAML is a superset of JSON, so YAML gets the second try; keep
            // the JSON error when the bytes clearly meant to be JSON.
            from_yaml(document).map_err(|yaml_err| {
                let text = std::str::from_utf8(document).unwrap_or("");
                if text.trim_start().starts_with(['{', '[']) {
                    json_err
                } else {
                    yaml_err
                }
            })
        }),
    }
}

fn extract_base_path(root: &Value, version: Version) -> String {
    let raw = match version {
        Version::V2 => root.get("basePath").and_then(Value::as_str).unwrap_or("").to_string(),
        Version::V3 => {
            let server = root.pointer("/servers/0/url").and_then(Value::as_str).unwrap_or("");
            if server.starts_with('/') {
                server.to_string()
            } else {
                url::Url::parse(server).map(|u| u.path().to_string()).unwrap_or_default()
            }
        }
    };
    let trimmed = raw.trim_end_matches('/');
    if trimmed == "/" || trimmed.is_empty() {
        String::new()
    } else {
        trimmed.to_string()
    }
}

/// Follow a same-document `$ref`, at most a few hops deep.
fn resolve<'a>(root: &'a Value, node: &'a Value) -> &'a Value {
    let mut current = node;
    for _ in 0..8 {
        match current.get("$ref").and_then(Value::as_str) {
            Some(target) => match lookup_pointer(root, target) {
                Some(next) => current = next,
                None => return current,
            },
            None => return current,
        }
    }
    current
}

fn lookup_pointer<'a>(root: &'a Value, reference: &str) -> Option<&'a Value> {
    let pointer = reference.strip_prefix('#')?;
    root.pointer(pointer)
}

fn parse_operation(
    root: &Value,
    method: HttpMethod,
    path: &str,
    node: &Value,
    shared_params: &[&Value],
    version: Version,
    used_ids: &mut IndexSet<String>,
) -> OperationSpec {
    let mut parameters = Vec::new();

    let own_params: Vec<&Value> = node
        .get("parameters")
        .and_then(Value::as_array)
        .map(|a| a.iter().collect())
        .unwrap_or_default();
    // Path-item parameters apply to every operation under the path unless
    // the operation redeclares them by (name, location).
    let own_keys: IndexSet<(String, String)> = own_params
        .iter()
        .map(|p| resolve(root, p))
        .filter_map(|p| {
            Some((
                p.get("name")?.as_str()?.to_string(),
                p.get("in")?.as_str()?.to_string(),
            ))
        })
        .collect();
    for raw in own_params.iter().chain(shared_params.iter().filter(|p| {
        let p = resolve(root, p);
        match (p.get("name").and_then(Value::as_str), p.get("in").and_then(Value::as_str)) {
            (Some(n), Some(i)) => !own_keys.contains(&(n.to_string(), i.to_string())),
            _ => true,
        }
    })) {
        let raw = resolve(root, raw);
        parse_parameter(root, raw, version, &mut parameters);
    }

    if version == Version::V3 {
        if let Some(body) = node.get("requestBody") {
            let body = resolve(root, body);
            parse_request_body(root, body, &mut parameters);
        }
    }

    // Placeholders with no declared parameter still have to be fillable.
    for placeholder in path_placeholders(path) {
        let present = parameters
            .iter()
            .any(|p| p.location == ParamLocation::Path && p.name == placeholder);
        if !present {
            parameters.push(ParameterSpec {
                name: placeholder,
                location: ParamLocation::Path,
                required: true,
                primitive_type: PrimitiveType::String,
                format: None,
                constraints: ValueConstraints::default(),
                example_candidates: Vec::new(),
            });
        }
    }

    let response_keys = collect_response_keys(root, node, version);

    let operation_id = match node.get("operationId").and_then(Value::as_str) {
        Some(id) if !id.is_empty() => unique_id(id.to_string(), used_ids),
        _ => unique_id(synthesize_id(method, path), used_ids),
    };

    OperationSpec {
        operation_id,
        http_method: method,
        path_template: path.to_string(),
        parameters,
        response_keys,
    }
}

fn unique_id(candidate: String, used: &mut IndexSet<String>) -> String {
    if used.insert(candidate.clone()) {
        return candidate;
    }
    let mut n = 2;
    loop {
        let next = format!("{candidate}_{n}");
        if used.insert(next.clone()) {
            return next;
        }
        n += 1;
    }
}

fn synthesize_id(method: HttpMethod, path: &str) -> String {
    let segments: Vec<&str> = path
        .split('/')
        .filter(|s| !s.is_empty() && !s.starts_with('{'))
        .collect();
    let mut id = method.as_str().to_lowercase();
    for segment in segments {
        id.push('_');
        id.push_str(segment);
    }
    id
}

fn path_placeholders(path: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = path;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                let name = &after[..end];
                if !name.is_empty() {
                    out.push(name.to_string());
                }
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    out
}

fn parse_parameter(root: &Value, raw: &Value, version: Version, out: &mut Vec<ParameterSpec>) {
    let Some(name) = raw.get("name").and_then(Value::as_str) else { return };
    let location = match raw.get("in").and_then(Value::as_str) {
        Some("path") => ParamLocation::Path,
        Some("query") => ParamLocation::Query,
        Some("header") => ParamLocation::Header,
        Some("formData") => ParamLocation::Form,
        Some("body") if version == Version::V2 => {
            if let Some(schema) = raw.get("schema") {
                let schema = resolve(root, schema);
                flatten_body_schema(root, schema, out);
            }
            return;
        }
        // Cookie parameters and anything unrecognized are out of scope.
        _ => return,
    };

    // OpenAPI 3 keeps type information in `schema`; OpenAPI 2 keeps it on
    // the parameter itself. Read from wherever the fields actually are.
    let type_node = if raw.get("schema").is_some() && version == Version::V3 {
        resolve(root, raw.get("schema").unwrap())
    } else {
        raw
    };

    let required = location == ParamLocation::Path
        || raw.get("required").and_then(Value::as_bool).unwrap_or(false);

    out.push(ParameterSpec {
        name: name.to_string(),
        location,
        required,
        primitive_type: primitive_type_of(type_node),
        format: type_node.get("format").and_then(Value::as_str).map(String::from),
        constraints: constraints_of(type_node),
        example_candidates: dedup_first_seen(extract_spec_examples(raw)),
    });
}

fn parse_request_body(root: &Value, body: &Value, out: &mut Vec<ParameterSpec>) {
    let Some(content) = body.get("content").and_then(Value::as_object) else { return };
    let is_form = |k: &str| k.starts_with("application/x-www-form-urlencoded");
    let entry = content
        .iter()
        .find(|(k, _)| k.starts_with("application/json") || k.as_str() == "*/*")
        .or_else(|| content.iter().next());
    let Some((media_type, media)) = entry else { return };
    let Some(schema) = media.get("schema") else { return };
    let schema = resolve(root, schema);
    if is_form(media_type) {
        flatten_object_schema(root, schema, ParamLocation::Form, out);
    } else {
        flatten_body_schema(root, schema, out);
    }
}

/// Flatten the top level of a request-body object schema into individual
/// body-property parameters. A non-object body becomes a single parameter
/// named `body`.
fn flatten_body_schema(root: &Value, schema: &Value, out: &mut Vec<ParameterSpec>) {
    if schema.get("properties").is_some() || primitive_type_of(schema) == PrimitiveType::Object {
        flatten_object_schema(root, schema, ParamLocation::BodyProperty, out);
    } else {
        out.push(ParameterSpec {
            name: "body".to_string(),
            location: ParamLocation::BodyProperty,
            required: true,
            primitive_type: primitive_type_of(schema),
            format: schema.get("format").and_then(Value::as_str).map(String::from),
            constraints: constraints_of(schema),
            example_candidates: dedup_first_seen(extract_spec_examples(schema)),
        });
    }
}

fn flatten_object_schema(
    root: &Value,
    schema: &Value,
    location: ParamLocation,
    out: &mut Vec<ParameterSpec>,
) {
    let required_names: Vec<&str> = schema
        .get("required")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let Some(props) = schema.get("properties").and_then(Value::as_object) else { return };
    for (prop_name, prop_schema) in props {
        let prop_schema = resolve(root, prop_schema);
        out.push(ParameterSpec {
            name: prop_name.clone(),
            location,
            required: required_names.contains(&prop_name.as_str()),
            primitive_type: primitive_type_of(prop_schema),
            format: prop_schema.get("format").and_then(Value::as_str).map(String::from),
            constraints: constraints_of(prop_schema),
            example_candidates: dedup_first_seen(extract_spec_examples(prop_schema)),
        });
    }
}

fn primitive_type_of(node: &Value) -> PrimitiveType {
    match node.get("type").and_then(Value::as_str) {
        Some("string") | Some("file") => PrimitiveType::String,
        Some("number") => PrimitiveType::Number,
        Some("integer") => PrimitiveType::Integer,
        Some("boolean") => PrimitiveType::Boolean,
        Some("array") => PrimitiveType::Array,
        Some("object") => PrimitiveType::Object,
        _ => {
            if node.get("properties").is_some() {
                PrimitiveType::Object
            } else if node.get("items").is_some() {
                PrimitiveType::Array
            } else {
                PrimitiveType::String
            }
        }
    }
}

fn constraints_of(node: &Value) -> ValueConstraints {
    let mut c = ValueConstraints {
        enum_values: node.get("enum").and_then(Value::as_array).cloned(),
        pattern: node.get("pattern").and_then(Value::as_str).map(String::from),
        minimum: node.get("minimum").and_then(Value::as_f64),
        maximum: node.get("maximum").and_then(Value::as_f64),
        min_length: node.get("minLength").and_then(Value::as_u64),
        max_length: node.get("maxLength").and_then(Value::as_u64),
    };
    if let (Some(lo), Some(hi)) = (c.minimum, c.maximum) {
        if lo > hi {
            c.minimum = None;
            c.maximum = None;
        }
    }
    if let (Some(lo), Some(hi)) = (c.min_length, c.max_length) {
        if lo > hi {
            c.min_length = None;
            c.max_length = None;
        }
    }
    c
}

fn dedup_first_seen(values: Vec<Value>) -> Vec<Value> {
    let mut out: Vec<Value> = Vec::with_capacity(values.len());
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Collect every property name declared by the operation's response schemas.
fn collect_response_keys(root: &Value, node: &Value, version: Version) -> IndexSet<String> {
    let mut keys = IndexSet::new();
    let Some(responses) = node.get("responses").and_then(Value::as_object) else {
        return keys;
    };
    for (_, response) in responses {
        let response = resolve(root, response);
        match version {
            Version::V2 => {
                if let Some(schema) = response.get("schema") {
                    walk_schema_keys(root, resolve(root, schema), &mut keys, 0);
                }
            }
            Version::V3 => {
                if let Some(content) = response.get("content").and_then(Value::as_object) {
                    for (_, media) in content {
                        if let Some(schema) = media.get("schema") {
                            walk_schema_keys(root, resolve(root, schema), &mut keys, 0);
                        }
                    }
                }
            }
        }
    }
    keys
}

fn walk_schema_keys(root: &Value, schema: &Value, keys: &mut IndexSet<String>, depth: usize) {
    if depth > 12 {
        return;
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        for (name, sub) in props {
            keys.insert(name.clone());
            walk_schema_keys(root, resolve(root, sub), keys, depth + 1);
        }
    }
    if let Some(items) = schema.get("items") {
        walk_schema_keys(root, resolve(root, items), keys, depth + 1);
    }
    for combinator in ["allOf", "oneOf", "anyOf"] {
        if let Some(parts) = schema.get(combinator).and_then(Value::as_array) {
            for part in parts {
                walk_schema_keys(root, resolve(root, part), keys, depth + 1);
            }
        }
    }
}

#[cfg(test)]
pub(crate) use tests::FEATURES_EXCERPT_YAML;

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    /// The two-operation excerpt of the Features Service document.
    pub(crate) const FEATURES_EXCERPT_YAML: &str = r#"
swagger: "2.0"
info:
  title: Features Service
  version: "1.0"
paths:
  /products/{productName}/configurations/{configurationName}/features/{featureName}:
    post:
      operationId: addFeatureToConfiguration
      produces:
        - application/json
      parameters:
        - name: productName
          in: path
          required: true
          type: string
        - name: configurationName
          in: path
          required: true
          type: string
        - name: featureName
          in: path
          required: true
          type: string
      responses:
        default:
          description: successful operation
  /products/{productName}/configurations/{configurationName}/features:
    get:
      operationId: getConfigurationActivedFeatures
      produces:
        - application/json
      parameters:
        - name: productName
          in: path
          required: true
          type: string
        - name: configurationName
          in: path
          required: true
          type: string
      responses:
        '200':
          description: successful operation
          schema:
            type: array
            items:
              type: string
"#;

    #[test]
    fn parses_features_excerpt() {
        let spec = parse_spec(FEATURES_EXCERPT_YAML.as_bytes(), FormatHint::Yaml).unwrap();
        assert_eq!(spec.raw_title, "Features Service");
        assert_eq!(spec.operations.len(), 2);

        let post = &spec.operations[0];
        assert_eq!(post.operation_id, "addFeatureToConfiguration");
        assert_eq!(post.http_method, HttpMethod::Post);
        assert_eq!(post.parameters.len(), 3);
        assert!(post
            .parameters
            .iter()
            .all(|p| p.location == ParamLocation::Path && p.required));
        assert!(post.response_keys.is_empty());

        let get = &spec.operations[1];
        assert_eq!(get.operation_id, "getConfigurationActivedFeatures");
        assert_eq!(get.http_method, HttpMethod::Get);
        assert_eq!(get.parameters.len(), 2);
        // Array-of-strings schema declares no property names.
        assert!(get.response_keys.is_empty());
    }

    #[test]
    fn zero_paths_is_empty_spec() {
        let doc = json!({"swagger": "2.0", "info": {"title": "x"}, "paths": {}});
        let err = parse_spec(doc.to_string().as_bytes(), FormatHint::Json).unwrap_err();
        assert!(matches!(err, SpecError::EmptySpec));
    }

    #[test]
    fn unknown_root_is_unsupported_version() {
        let doc = json!({"something": "else"});
        let err = parse_spec(doc.to_string().as_bytes(), FormatHint::Json).unwrap_err();
        assert!(matches!(err, SpecError::UnsupportedVersion));
    }

    #[test]
    fn syntax_error_is_malformed() {
        let err = parse_spec(b"{not json", FormatHint::Json).unwrap_err();
        assert!(matches!(err, SpecError::MalformedDocument(_)));
    }

    #[test]
    fn response_object_properties_become_response_keys() {
        let doc = json!({
            "openapi": "3.0.0",
            "info": {"title": "items"},
            "paths": {
                "/items": {
                    "get": {
                        "operationId": "listItems",
                        "responses": {
                            "200": {
                                "description": "ok",
                                "content": {
                                    "application/json": {
                                        "schema": {
                                            "type": "object",
                                            "properties": {
                                                "id": {"type": "integer"},
                                                "name": {"type": "string"}
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        });
        let spec = parse_spec(doc.to_string().as_bytes(), FormatHint::Json).unwrap();
        let keys: Vec<&str> = spec.operations[0].response_keys.iter().map(|s| s.as_str()).collect();
        assert_eq!(keys, vec!["id", "name"]);
    }

    #[test]
    fn body_schema_flattens_one_level() {
        let doc = json!({
            "openapi": "3.0.0",
            "info": {"title": "t"},
            "paths": {
                "/widgets": {
                    "post": {
                        "operationId": "makeWidget",
                        "requestBody": {
                            "content": {
                                "application/json": {
                                    "schema": {
                                        "type": "object",
                                        "required": ["name"],
                                        "properties": {
                                            "name": {"type": "string"},
                                            "size": {"type": "integer", "minimum": 1, "maximum": 5}
                                        }
                                    }
                                }
                            }
                        },
                        "responses": {"201": {"description": "made"}}
                    }
                }
            }
        });
        let spec = parse_spec(doc.to_string().as_bytes(), FormatHint::Json).unwrap();
        let params = &spec.operations[0].parameters;
        assert_eq!(params.len(), 2);
        assert_eq!(params[0].name, "name");
        assert_eq!(params[0].location, ParamLocation::BodyProperty);
        assert!(params[0].required);
        assert_eq!(params[1].name, "size");
        assert!(!params[1].required);
        assert_eq!(params[1].constraints.minimum, Some(1.0));
        assert_eq!(params[1].constraints.maximum, Some(5.0));
    }

    #[test]
    fn missing_operation_id_is_synthesized_and_unique() {
        let doc = json!({
            "swagger": "2.0",
            "info": {"title": "t"},
            "paths": {
                "/a/{id}": {
                    "get": {"responses": {"200": {"description": "ok"}}},
                    "delete": {"responses": {"200": {"description": "ok"}}}
                },
                "/a": {
                    "get": {"responses": {"200": {"description": "ok"}}}
                }
            }
        });
        let spec = parse_spec(doc.to_string().as_bytes(), FormatHint::Json).unwrap();
        let ids: Vec<&str> = spec.operations.iter().map(|o| o.operation_id.as_str()).collect();
        assert_eq!(ids, vec!["get_a", "delete_a", "get_a_2"]);
        // The undeclared {id} placeholder got a synthesized path parameter.
        let get_a = &spec.operations[0];
        assert_eq!(get_a.parameters.len(), 1);
        assert_eq!(get_a.parameters[0].name, "id");
        assert_eq!(get_a.parameters[0].location, ParamLocation::Path);
        assert!(get_a.parameters[0].required);
    }

    #[test]
    fn example_mining_collects_enum_example_description() {
        let node = json!({
            "name": "city",
            "in": "query",
            "type": "string",
            "enum": ["A", "B"],
            "example": "C"
        });
        assert_eq!(extract_spec_examples(&node), vec![json!("A"), json!("B"), json!("C")]);
    }

    #[test]
    fn example_mining_tokenizes_description() {
        let node = json!({"description": "use \"New York\" or Boston"});
        let got = extract_spec_examples(&node);
        let strings: Vec<&str> = got.iter().filter_map(Value::as_str).collect();
        for expected in ["use", "or", "Boston", "New York"] {
            assert!(strings.contains(&expected), "missing {expected:?} in {strings:?}");
        }
    }

    #[test]
    fn example_mining_empty_when_nothing_declared() {
        assert!(extract_spec_examples(&json!({"name": "x", "in": "query"})).is_empty());
    }

    #[test]
    fn parse_is_deterministic() {
        let a = parse_spec(FEATURES_EXCERPT_YAML.as_bytes(), FormatHint::Auto).unwrap();
        let b = parse_spec(FEATURES_EXCERPT_YAML.as_bytes(), FormatHint::Auto).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn inverted_numeric_bounds_are_dropped() {
        let node = json!({"type": "integer", "minimum": 9, "maximum": 2});
        let c = constraints_of(&node);
        assert_eq!(c.minimum, None);
        assert_eq!(c.maximum, None);
    }
}
