//! Adaptive black-box REST API testing engine.
//!
//! `arat` explores a live REST service from nothing but its OpenAPI document.
//! A tabular Q-learning agent decides, request by request, which operation to
//! exercise, which of its parameters to fill in, and which of five value
//! sources to draw concrete values from. Successful responses lower the
//! priority of what was just exercised, error responses raise it, so the loop
//! keeps drifting toward the parts of the API it has not yet cracked.
//!
//! Along the way the engine harvests key-value pairs from request and
//! response traffic. Those pairs are what let it satisfy producer-consumer
//! dependencies (create a resource, then feed its server-generated id into
//! dependent operations) even when the specification never spells the
//! dependency out.
//!
//! The crate is organized around the stages of one loop iteration:
//!
//! - [`spec_model`] — parse an OpenAPI 2.0/3.x document into an executable
//!   operation model and mine example values out of it
//! - [`agent`] — the Q-learning state: learning parameters, the per-operation
//!   parameter Q-table, per-operation value-source Q-values, and the update rule
//! - [`prioritizer`] — ε-greedy selection of operation, parameter subset, and
//!   value-mapping source
//! - [`values`] — materialize concrete values (spec examples, constrained
//!   random, traffic memory via Gestalt matching, type defaults)
//! - [`memory`] — the dynamically constructed request/response key-value
//!   stores with response sampling
//! - [`executor`] — build and send real HTTP requests
//! - [`faults`] — deduplicate 500 responses into unique faults
//! - [`runner`] — the main loop, configuration, ablation switches, and the
//!   JSON report
//! - [`testbed`] — deterministic in-process mock services used by the test
//!   suite and the examples
//!
//! ```
//! use arat::testbed::{self, start_fixture};
//! use arat::runner::{run, RunConfig};
//!
//! let handle = start_fixture(testbed::features_service()).unwrap();
//! let spec = testbed::features_service().openapi_document();
//! let dir = tempfile::tempdir().unwrap();
//! let spec_path = dir.path().join("features.json");
//! std::fs::write(&spec_path, serde_json::to_vec(&spec).unwrap()).unwrap();
//!
//! let mut config = RunConfig::new(&spec_path, handle.base_url());
//! config.seed = 7;
//! config.max_requests = Some(50);
//! let report = run(&config).unwrap();
//! assert_eq!(report.totals.requests, 50);
//! ```

pub mod agent;
pub mod executor;
pub mod faults;
pub mod memory;
pub mod prioritizer;
pub mod runner;
pub mod spec_model;
pub mod testbed;
pub mod values;

pub use agent::{AgentState, Outcome, StatusClass, UpdateRule};
pub use executor::{RequestPlan, ResponseRecord};
pub use memory::KeyValueMemory;
pub use prioritizer::SourceId;
pub use runner::{RunConfig, TestReport};
pub use spec_model::{ApiSpec, OperationSpec, ParameterSpec};
