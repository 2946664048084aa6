//! Per-vendor assessment workflow.
//!
//! The pipeline is strictly linear: Initiated → DocumentsSubmitted →
//! ComplianceChecked → RiskAssessed → AccessVerified → Monitoring → Closed.
//! Any out-of-order call fails with `OutOfOrder` and leaves the ledger
//! untouched. Every step past initiation is ledger-recorded, so an
//! assessment's recoverable state is a pure function of the ledger.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::canonical::sha256_hex;
use crate::contracts::{self, Attestation, SmartContract, Verdict};
use crate::error::{Error, Result};
use crate::ledger::{EntryFilter, EntryType, Ledger, LedgerEntry};
use crate::registry::{self, VendorIdentity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssessmentState {
    Initiated,
    DocumentsSubmitted,
    ComplianceChecked,
    RiskAssessed,
    AccessVerified,
    Monitoring,
    Closed,
}

impl std::fmt::Display for AssessmentState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanKind {
    VulnerabilityScan,
    PenetrationTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Low,
    Medium,
    High,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VulnStatus {
    Open,
    Remediated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vulnerability {
    pub vuln_id: String,
    pub severity: Severity,
    pub status: VulnStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskScanRecord {
    pub vendor_id: String,
    pub scan_kind: ScanKind,
    pub findings: Vec<Vulnerability>,
    pub scanned_at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessVerification {
    pub vendor_id: String,
    pub mfa_enabled: bool,
    pub rbac_enabled: bool,
    pub policies: Vec<String>,
    pub verified_at: i64,
}

impl AccessVerification {
    pub fn passes(&self) -> bool {
        self.mfa_enabled && self.rbac_enabled
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentAnchor {
    pub doc_type: String,
    pub content_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub assessment_id: String,
    pub vendor_id: String,
    pub state: AssessmentState,
    pub document_anchors: Vec<DocumentAnchor>,
    pub verdict: Option<Verdict>,
    pub risk_findings: Option<RiskScanRecord>,
    pub access_result: Option<AccessVerification>,
    pub started_at: i64,
    pub updated_at: i64,
}

impl Assessment {
    fn expect_state(&self, op: &str, allowed: &[AssessmentState]) -> Result<()> {
        if allowed.contains(&self.state) {
            Ok(())
        } else {
            Err(Error::OutOfOrder {
                op: op.to_string(),
                state: self.state.to_string(),
            })
        }
    }

    pub fn open_vulnerability_count(&self) -> usize {
        self.risk_findings
            .as_ref()
            .map(|r| {
                r.findings
                    .iter()
                    .filter(|v| v.status == VulnStatus::Open)
                    .count()
            })
            .unwrap_or(0)
    }
}

/// Authenticate the vendor and open a fresh assessment.
pub fn start_assessment(
    ledger: &Ledger,
    identity: &VendorIdentity,
    assessment_id: &str,
    challenge: &[u8],
    signature: &[u8],
    timestamp: i64,
) -> Result<Assessment> {
    if registry::find_identity(ledger, &identity.vendor_id).is_none() {
        return Err(Error::VendorNotRegistered(identity.vendor_id.clone()));
    }
    if !registry::authenticate(identity, challenge, signature)? {
        return Err(Error::AuthenticationFailed(identity.vendor_id.clone()));
    }
    Ok(Assessment {
        assessment_id: assessment_id.to_string(),
        vendor_id: identity.vendor_id.clone(),
        state: AssessmentState::Initiated,
        document_anchors: Vec::new(),
        verdict: None,
        risk_findings: None,
        access_result: None,
        started_at: timestamp,
        updated_at: timestamp,
    })
}

/// Hash a submitted document and anchor it on the ledger.
pub fn submit_document(
    ledger: &mut Ledger,
    assessment: &mut Assessment,
    doc_type: &str,
    content: &[u8],
    timestamp: i64,
) -> Result<LedgerEntry> {
    assessment.expect_state(
        "submit_document",
        &[
            AssessmentState::Initiated,
            AssessmentState::DocumentsSubmitted,
        ],
    )?;
    let content_hash = sha256_hex(content);
    if assessment
        .document_anchors
        .iter()
        .any(|a| a.doc_type == doc_type && a.content_hash == content_hash)
    {
        return Err(Error::DuplicateDocument {
            doc_type: doc_type.to_string(),
            content_hash,
        });
    }
    let entry = ledger
        .append_entry(
            EntryType::DocumentAnchor,
            json!({
                "assessment_id": assessment.assessment_id,
                "vendor_id": assessment.vendor_id,
                "doc_type": doc_type,
                "content_hash": content_hash,
            }),
            timestamp,
            None,
        )?
        .clone();
    assessment.document_anchors.push(DocumentAnchor {
        doc_type: doc_type.to_string(),
        content_hash,
    });
    assessment.state = AssessmentState::DocumentsSubmitted;
    assessment.updated_at = timestamp;
    Ok(entry)
}

/// Run the smart-contract compliance check against anchored evidence.
pub fn run_compliance_check(
    ledger: &mut Ledger,
    assessment: &mut Assessment,
    contract: &SmartContract,
    attestations: &[Attestation],
    timestamp: i64,
) -> Result<Verdict> {
    assessment.expect_state(
        "run_compliance_check",
        &[AssessmentState::DocumentsSubmitted],
    )?;
    for att in attestations {
        if let Some(hash) = &att.evidence_hash {
            if !assessment
                .document_anchors
                .iter()
                .any(|a| &a.content_hash == hash)
            {
                return Err(Error::UnanchoredEvidence(hash.clone()));
            }
        }
    }
    let verdict = contracts::evaluate(contract, &assessment.vendor_id, attestations, timestamp)?;
    contracts::execute_actions(
        ledger,
        contract,
        &verdict,
        timestamp,
        Some(&assessment.assessment_id),
    )?;
    assessment.verdict = Some(verdict.clone());
    assessment.state = AssessmentState::ComplianceChecked;
    assessment.updated_at = timestamp;
    Ok(verdict)
}

/// Record the one risk scan of this assessment pass.
pub fn record_risk_scan(
    ledger: &mut Ledger,
    assessment: &mut Assessment,
    record: &RiskScanRecord,
) -> Result<LedgerEntry> {
    assessment.expect_state("record_risk_scan", &[AssessmentState::ComplianceChecked])?;
    let mut seen = std::collections::BTreeSet::new();
    for v in &record.findings {
        if !seen.insert(&v.vuln_id) {
            return Err(Error::MalformedPayload(format!(
                "duplicate vuln_id {} in scan record",
                v.vuln_id
            )));
        }
    }
    let mut payload = serde_json::to_value(record)?;
    payload
        .as_object_mut()
        .expect("record serializes to an object")
        .insert("assessment_id".into(), json!(assessment.assessment_id));
    let entry = ledger
        .append_entry(EntryType::RiskScanRecord, payload, record.scanned_at, None)?
        .clone();
    assessment.risk_findings = Some(record.clone());
    assessment.state = AssessmentState::RiskAssessed;
    assessment.updated_at = record.scanned_at;
    Ok(entry)
}

/// Anchor the access-control verification. Passing (MFA and RBAC both on)
/// advances the state; failing leaves it at RiskAssessed and records a
/// non-compliant note so the vendor can re-attest.
pub fn verify_access_controls(
    ledger: &mut Ledger,
    assessment: &mut Assessment,
    verification: &AccessVerification,
) -> Result<LedgerEntry> {
    assessment.expect_state("verify_access_controls", &[AssessmentState::RiskAssessed])?;
    let passed = verification.passes();
    let mut payload = serde_json::to_value(verification)?;
    {
        let obj = payload.as_object_mut().expect("object");
        obj.insert("assessment_id".into(), json!(assessment.assessment_id));
        obj.insert("record".into(), json!("access_attestation"));
        obj.insert("passed".into(), json!(passed));
    }
    let entry = ledger
        .append_entry(
            EntryType::AccessPolicyAttestation,
            payload,
            verification.verified_at,
            None,
        )?
        .clone();
    assessment.access_result = Some(verification.clone());
    if passed {
        assessment.state = AssessmentState::AccessVerified;
    } else {
        ledger.append_entry(
            EntryType::AccessPolicyAttestation,
            json!({
                "record": "non_compliant_note",
                "assessment_id": assessment.assessment_id,
                "vendor_id": assessment.vendor_id,
                "reason": "access controls incomplete: MFA and RBAC are both required",
            }),
            verification.verified_at,
            None,
        )?;
    }
    assessment.updated_at = verification.verified_at;
    Ok(entry)
}

/// Hand the assessment over to continuous monitoring.
pub fn enter_monitoring(assessment: &mut Assessment) -> Result<()> {
    assessment.expect_state("enter_monitoring", &[AssessmentState::AccessVerified])?;
    assessment.state = AssessmentState::Monitoring;
    Ok(())
}

/// Rebuild an assessment's recoverable state from ledger entries alone.
///
/// Initiation itself leaves no trace, so `started_at` is taken from the
/// first recorded entry and a fully fresh assessment is not recoverable.
pub fn reconstruct(ledger: &Ledger, assessment_id: &str) -> Option<Assessment> {
    let entries: Vec<&LedgerEntry> = ledger
        .query(&EntryFilter::default())
        .into_iter()
        .filter(|e| {
            e.payload
                .get("assessment_id")
                .and_then(serde_json::Value::as_str)
                .map(|a| a == assessment_id)
                .unwrap_or(false)
        })
        .collect();
    let first = entries.first()?;
    let vendor_id = first
        .payload
        .get("vendor_id")
        .and_then(serde_json::Value::as_str)?
        .to_string();
    let mut assessment = Assessment {
        assessment_id: assessment_id.to_string(),
        vendor_id,
        state: AssessmentState::Initiated,
        document_anchors: Vec::new(),
        verdict: None,
        risk_findings: None,
        access_result: None,
        started_at: first.timestamp,
        updated_at: first.timestamp,
    };
    for entry in entries {
        match entry.entry_type {
            EntryType::DocumentAnchor => {
                let anchor = DocumentAnchor {
                    doc_type: entry.payload["doc_type"].as_str()?.to_string(),
                    content_hash: entry.payload["content_hash"].as_str()?.to_string(),
                };
                assessment.document_anchors.push(anchor);
                assessment.state = AssessmentState::DocumentsSubmitted;
            }
            EntryType::ComplianceVerdict => {
                if entry.payload.get("record").is_none() {
                    assessment.verdict = serde_json::from_value(entry.payload.clone()).ok();
                    assessment.state = AssessmentState::ComplianceChecked;
                }
            }
            EntryType::RiskScanRecord => {
                assessment.risk_findings = serde_json::from_value(entry.payload.clone()).ok();
                assessment.state = AssessmentState::RiskAssessed;
            }
            EntryType::AccessPolicyAttestation
                if entry
                    .payload
                    .get("record")
                    .and_then(serde_json::Value::as_str)
                    == Some("access_attestation") =>
            {
                let verification: Option<AccessVerification> =
                    serde_json::from_value(entry.payload.clone()).ok();
                if let Some(v) = verification {
                    if v.passes() {
                        assessment.state = AssessmentState::AccessVerified;
                    }
                    assessment.access_result = Some(v);
                }
            }
            _ => {}
        }
        assessment.updated_at = entry.timestamp;
    }
    Some(assessment)
}
