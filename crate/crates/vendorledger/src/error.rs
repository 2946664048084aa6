//! Crate-wide error type.
//!
//! Domain errors are deliberately flat: every operation in the workflow can
//! surface through the CLI, and a single enum keeps exit-code mapping and
//! diagnostics uniform.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // ledger
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("non-monotonic timestamp: {got} < previous {prev}")]
    NonMonotonicTimestamp { got: i64, prev: i64 },
    #[error("no pending entries to seal")]
    NoPendingEntries,
    #[error("entry {0} is not sealed into a block yet")]
    EntryNotSealed(u64),
    #[error("unknown entry index {0}")]
    UnknownEntry(u64),

    // registry
    #[error("vendor {0} is already registered")]
    DuplicateRegistration(String),
    #[error("unsupported signature scheme: {0}")]
    UnsupportedScheme(String),
    #[error("challenge must be non-empty")]
    EmptyChallenge,
    #[error("unknown control: {0:?}")]
    UnknownControl(String),

    // contracts
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("contract {0} is already deployed")]
    DuplicateContract(String),
    #[error("attestations span multiple vendors")]
    MixedVendors,
    #[error("verdict was not produced by contract {0}")]
    ContractVerdictMismatch(String),

    // assessment
    #[error("authentication failed for vendor {0}")]
    AuthenticationFailed(String),
    #[error("vendor {0} is not registered")]
    VendorNotRegistered(String),
    #[error("operation out of order: {op} not allowed in state {state}")]
    OutOfOrder { op: String, state: String },
    #[error("document {doc_type} with hash {content_hash} already anchored")]
    DuplicateDocument {
        doc_type: String,
        content_hash: String,
    },
    #[error("evidence hash {0} is not anchored in this assessment")]
    UnanchoredEvidence(String),

    // monitor
    #[error("vendor {0} is not in the monitoring phase")]
    VendorNotMonitoring(String),
    #[error("unknown or already remediated vulnerability: {0}")]
    UnknownVulnerability(String),
    #[error("incident {0} already has a recorded response")]
    AlreadyResponded(String),
    #[error("incident {0} already open")]
    DuplicateIncident(String),
    #[error("response time precedes detection ({responded_at} < {detected_at})")]
    TimeTravel { responded_at: i64, detected_at: i64 },
    #[error("no baseline risk scan recorded for vendor {0}")]
    NoBaselineScan(String),
    #[error("asset {0} appears in both authorized and unauthorized sets")]
    InventoryOverlap(String),

    // bayes
    #[error("cycle detected through node {0}")]
    CycleDetected(String),
    #[error("node {node} references unknown parent {parent}")]
    UnknownParent { node: String, parent: String },
    #[error("malformed CPT for node {node}: {reason}")]
    MalformedCpt { node: String, reason: String },
    #[error("duplicate node name: {0}")]
    DuplicateNode(String),
    #[error("assignment is missing node {0}")]
    IncompleteAssignment(String),
    #[error("query node {0} is part of the evidence")]
    QueryIsEvidence(String),
    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,
    #[error("node {0} has no state named {1:?}")]
    MissingCompromisedState(String, String),
    #[error("unknown node: {0}")]
    UnknownNode(String),
    #[error("node {node} has no state {state:?}")]
    UnknownState { node: String, state: String },

    // plumbing
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
