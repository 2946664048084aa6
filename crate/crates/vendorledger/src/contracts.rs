//! Deterministic smart-contract engine.
//!
//! A contract is a declarative compliance rule: a set of required controls
//! plus action lists for pass and fail. Evaluation is a pure function of
//! (contract, attestations, timestamp); execution records the verdict and
//! every triggered action on the ledger, atomically.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::canonical::hash_canonical;
use crate::error::{Error, Result};
use crate::ledger::{EntryFilter, EntryType, Ledger, LedgerEntry};
use crate::registry::ControlCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttestationStatus {
    Pass,
    Fail,
    NotProvided,
}

/// A vendor's claim that a named control is satisfied, with hashed evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub vendor_id: String,
    pub control_id: String,
    pub status: AttestationStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence_hash: Option<String>,
    pub attested_at: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    IssueCertificate,
    NotifyStakeholders,
    TriggerReassessment,
    EscalateToReview,
}

impl std::str::FromStr for Action {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "IssueCertificate" => Ok(Action::IssueCertificate),
            "NotifyStakeholders" => Ok(Action::NotifyStakeholders),
            "TriggerReassessment" => Ok(Action::TriggerReassessment),
            "EscalateToReview" => Ok(Action::EscalateToReview),
            other => Err(Error::InvalidAction(other.to_string())),
        }
    }
}

/// On-disk contract spec, as written by operators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractSpec {
    pub contract_id: String,
    pub standard_label: String,
    pub required_controls: Vec<String>,
    pub actions_on_pass: Vec<String>,
    pub actions_on_fail: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmartContract {
    pub contract_id: String,
    pub standard_label: String,
    pub required_controls: BTreeSet<String>,
    pub actions_on_pass: Vec<Action>,
    pub actions_on_fail: Vec<Action>,
    pub deployed_at: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Compliant,
    NonCompliant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscrepancyReason {
    Missing,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub control_id: String,
    pub reason: DiscrepancyReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub vendor_id: String,
    pub contract_id: String,
    pub outcome: Outcome,
    pub discrepancies: Vec<Discrepancy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_hash: Option<String>,
    pub evaluated_at: i64,
}

/// Validate a spec against the catalog and record its deployment.
pub fn deploy_contract(
    ledger: &mut Ledger,
    catalog: &ControlCatalog,
    spec: &ContractSpec,
    timestamp: i64,
) -> Result<SmartContract> {
    for control in &spec.required_controls {
        catalog.lookup(control)?;
    }
    let actions_on_pass: Vec<Action> = spec
        .actions_on_pass
        .iter()
        .map(|a| a.parse())
        .collect::<Result<_>>()?;
    let actions_on_fail: Vec<Action> = spec
        .actions_on_fail
        .iter()
        .map(|a| a.parse())
        .collect::<Result<_>>()?;
    if find_contract(ledger, &spec.contract_id).is_some() {
        return Err(Error::DuplicateContract(spec.contract_id.clone()));
    }
    let contract = SmartContract {
        contract_id: spec.contract_id.clone(),
        standard_label: spec.standard_label.clone(),
        required_controls: spec.required_controls.iter().cloned().collect(),
        actions_on_pass,
        actions_on_fail,
        deployed_at: timestamp,
    };
    let payload = serde_json::to_value(&contract)?;
    ledger.append_entry(EntryType::ContractDeployment, payload, timestamp, None)?;
    Ok(contract)
}

/// Reconstruct a deployed contract from its ledger entry.
pub fn find_contract(ledger: &Ledger, contract_id: &str) -> Option<SmartContract> {
    ledger
        .query(&EntryFilter {
            entry_type: Some(EntryType::ContractDeployment),
            ..Default::default()
        })
        .into_iter()
        .filter_map(|e| serde_json::from_value::<SmartContract>(e.payload.clone()).ok())
        .find(|c| c.contract_id == contract_id)
}

#[derive(Serialize)]
struct CertificatePreimage<'a> {
    vendor_id: &'a str,
    contract_id: &'a str,
    required_controls: &'a BTreeSet<String>,
    evaluated_at: i64,
}

/// Pure compliance evaluation: Compliant iff every required control has a
/// passing attestation. Discrepancies are listed in control-id order.
pub fn evaluate(
    contract: &SmartContract,
    vendor_id: &str,
    attestations: &[Attestation],
    timestamp: i64,
) -> Result<Verdict> {
    if attestations.iter().any(|a| a.vendor_id != vendor_id) {
        return Err(Error::MixedVendors);
    }
    let mut by_control: HashMap<&str, &Attestation> = HashMap::new();
    for a in attestations {
        by_control.insert(a.control_id.as_str(), a);
    }
    let mut discrepancies = Vec::new();
    for control in &contract.required_controls {
        match by_control.get(control.as_str()) {
            Some(a) if a.status == AttestationStatus::Pass && a.evidence_hash.is_some() => {}
            Some(a) if a.status == AttestationStatus::Fail => discrepancies.push(Discrepancy {
                control_id: control.clone(),
                reason: DiscrepancyReason::Failed,
            }),
            // absent, NotProvided, or Pass without evidence all count as missing
            _ => discrepancies.push(Discrepancy {
                control_id: control.clone(),
                reason: DiscrepancyReason::Missing,
            }),
        }
    }
    let outcome = if discrepancies.is_empty() {
        Outcome::Compliant
    } else {
        Outcome::NonCompliant
    };
    let certificate_hash = match outcome {
        Outcome::Compliant => Some(hash_canonical(&CertificatePreimage {
            vendor_id,
            contract_id: &contract.contract_id,
            required_controls: &contract.required_controls,
            evaluated_at: timestamp,
        })?),
        Outcome::NonCompliant => None,
    };
    Ok(Verdict {
        vendor_id: vendor_id.to_string(),
        contract_id: contract.contract_id.clone(),
        outcome,
        discrepancies,
        certificate_hash,
        evaluated_at: timestamp,
    })
}

/// Record a verdict and its triggered actions, all or none.
///
/// `assessment_id` ties the entries to a workflow instance when execution
/// happens inside an assessment.
pub fn execute_actions(
    ledger: &mut Ledger,
    contract: &SmartContract,
    verdict: &Verdict,
    timestamp: i64,
    assessment_id: Option<&str>,
) -> Result<Vec<LedgerEntry>> {
    if verdict.contract_id != contract.contract_id {
        return Err(Error::ContractVerdictMismatch(contract.contract_id.clone()));
    }
    let actions = match verdict.outcome {
        Outcome::Compliant => &contract.actions_on_pass,
        Outcome::NonCompliant => &contract.actions_on_fail,
    };
    let checkpoint = ledger.entries().len();
    let result = (|| -> Result<Vec<LedgerEntry>> {
        let mut appended = Vec::new();
        let mut verdict_payload = serde_json::to_value(verdict)?;
        if let Some(aid) = assessment_id {
            verdict_payload
                .as_object_mut()
                .expect("verdict serializes to an object")
                .insert("assessment_id".into(), json!(aid));
        }
        appended.push(
            ledger
                .append_entry(
                    EntryType::ComplianceVerdict,
                    verdict_payload,
                    timestamp,
                    None,
                )?
                .clone(),
        );
        for (seq, action) in actions.iter().enumerate() {
            let mut payload = json!({
                "record": "contract_action",
                "vendor_id": verdict.vendor_id,
                "contract_id": contract.contract_id,
                "action": action,
                "sequence": seq,
            });
            if let Some(aid) = assessment_id {
                payload
                    .as_object_mut()
                    .unwrap()
                    .insert("assessment_id".into(), json!(aid));
            }
            appended.push(
                ledger
                    .append_entry(EntryType::ComplianceVerdict, payload, timestamp, None)?
                    .clone(),
            );
        }
        Ok(appended)
    })();
    if result.is_err() {
        ledger.truncate_entries(checkpoint);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::builtin_catalog;

    fn spec(id: &str, controls: &[&str]) -> ContractSpec {
        ContractSpec {
            contract_id: id.to_string(),
            standard_label: "NIST 800-53".to_string(),
            required_controls: controls.iter().map(|s| s.to_string()).collect(),
            actions_on_pass: vec!["IssueCertificate".into()],
            actions_on_fail: vec!["NotifyStakeholders".into(), "EscalateToReview".into()],
        }
    }

    fn attestation(control: &str, status: AttestationStatus) -> Attestation {
        Attestation {
            vendor_id: "v1".into(),
            control_id: control.into(),
            status,
            evidence_hash: match status {
                AttestationStatus::Pass => Some("ab".repeat(32)),
                _ => None,
            },
            attested_at: 500,
        }
    }

    #[test]
    fn deploy_appends_one_entry() {
        let mut ledger = Ledger::genesis(0);
        let contract = deploy_contract(
            &mut ledger,
            builtin_catalog(),
            &spec("c1", &["ssrf", "sqli"]),
            10,
        )
        .unwrap();
        assert_eq!(ledger.entries().len(), 1);
        assert_eq!(contract.required_controls.len(), 2);
        assert_eq!(find_contract(&ledger, "c1"), Some(contract));
    }

    #[test]
    fn deploy_rejects_unknown_control_and_action() {
        let mut ledger = Ledger::genesis(0);
        assert!(matches!(
            deploy_contract(
                &mut ledger,
                builtin_catalog(),
                &spec("c1", &["nonexistent"]),
                10
            ),
            Err(Error::UnknownControl(_))
        ));
        let mut bad = spec("c2", &["ssrf"]);
        bad.actions_on_pass = vec!["FormatDisk".into()];
        assert!(matches!(
            deploy_contract(&mut ledger, builtin_catalog(), &bad, 10),
            Err(Error::InvalidAction(_))
        ));
        assert_eq!(ledger.entries().len(), 0);
    }

    #[test]
    fn redeploy_same_id_rejected() {
        let mut ledger = Ledger::genesis(0);
        deploy_contract(&mut ledger, builtin_catalog(), &spec("c1", &["ssrf"]), 10).unwrap();
        assert!(matches!(
            deploy_contract(&mut ledger, builtin_catalog(), &spec("c1", &["sqli"]), 11),
            Err(Error::DuplicateContract(_))
        ));
    }

    fn fixture_contract() -> SmartContract {
        let mut ledger = Ledger::genesis(0);
        deploy_contract(
            &mut ledger,
            builtin_catalog(),
            &spec("c1", &["ssrf", "sqli"]),
            10,
        )
        .unwrap()
    }

    #[test]
    fn all_pass_is_compliant_with_certificate() {
        let contract = fixture_contract();
        let atts = vec![
            attestation("ssrf", AttestationStatus::Pass),
            attestation("sqli", AttestationStatus::Pass),
        ];
        let verdict = evaluate(&contract, "v1", &atts, 600).unwrap();
        assert_eq!(verdict.outcome, Outcome::Compliant);
        assert!(verdict.discrepancies.is_empty());
        assert!(verdict.certificate_hash.is_some());
    }

    #[test]
    fn missing_control_listed_as_missing() {
        let contract = fixture_contract();
        let atts = vec![attestation("ssrf", AttestationStatus::Pass)];
        let verdict = evaluate(&contract, "v1", &atts, 600).unwrap();
        assert_eq!(verdict.outcome, Outcome::NonCompliant);
        assert_eq!(
            verdict.discrepancies,
            vec![Discrepancy {
                control_id: "sqli".into(),
                reason: DiscrepancyReason::Missing
            }]
        );
        assert!(verdict.certificate_hash.is_none());
    }

    #[test]
    fn fail_listed_as_failed() {
        let contract = fixture_contract();
        let atts = vec![
            attestation("ssrf", AttestationStatus::Pass),
            attestation("sqli", AttestationStatus::Fail),
        ];
        let verdict = evaluate(&contract, "v1", &atts, 600).unwrap();
        assert_eq!(verdict.outcome, Outcome::NonCompliant);
        assert_eq!(verdict.discrepancies[0].reason, DiscrepancyReason::Failed);
    }

    #[test]
    fn not_provided_counts_as_missing() {
        let contract = fixture_contract();
        let atts = vec![
            attestation("ssrf", AttestationStatus::Pass),
            attestation("sqli", AttestationStatus::NotProvided),
        ];
        let verdict = evaluate(&contract, "v1", &atts, 600).unwrap();
        assert_eq!(verdict.discrepancies[0].reason, DiscrepancyReason::Missing);
    }

    #[test]
    fn empty_required_set_is_vacuously_compliant() {
        let mut ledger = Ledger::genesis(0);
        let contract =
            deploy_contract(&mut ledger, builtin_catalog(), &spec("empty", &[]), 10).unwrap();
        let verdict = evaluate(&contract, "v1", &[], 600).unwrap();
        assert_eq!(verdict.outcome, Outcome::Compliant);
        assert!(verdict.certificate_hash.is_some());
    }

    #[test]
    fn mixed_vendors_rejected() {
        let contract = fixture_contract();
        let mut other = attestation("sqli", AttestationStatus::Pass);
        other.vendor_id = "v2".into();
        let atts = vec![attestation("ssrf", AttestationStatus::Pass), other];
        assert!(matches!(
            evaluate(&contract, "v1", &atts, 600),
            Err(Error::MixedVendors)
        ));
    }

    #[test]
    fn evaluate_is_deterministic() {
        let contract = fixture_contract();
        let atts = vec![
            attestation("ssrf", AttestationStatus::Pass),
            attestation("sqli", AttestationStatus::Pass),
        ];
        let first = evaluate(&contract, "v1", &atts, 600).unwrap();
        for _ in 0..10 {
            assert_eq!(evaluate(&contract, "v1", &atts, 600).unwrap(), first);
        }
    }

    #[test]
    fn execute_appends_verdict_plus_actions() {
        let mut ledger = Ledger::genesis(0);
        let contract =
            deploy_contract(&mut ledger, builtin_catalog(), &spec("c1", &["ssrf"]), 10).unwrap();

        let compliant = evaluate(
            &contract,
            "v1",
            &[attestation("ssrf", AttestationStatus::Pass)],
            600,
        )
        .unwrap();
        let entries = execute_actions(&mut ledger, &contract, &compliant, 600, None).unwrap();
        assert_eq!(entries.len(), 2); // verdict + IssueCertificate

        let noncompliant = evaluate(&contract, "v1", &[], 700).unwrap();
        let entries = execute_actions(&mut ledger, &contract, &noncompliant, 700, None).unwrap();
        assert_eq!(entries.len(), 3); // verdict + Notify + Escalate

        // the verdict is on the audit trail for this vendor
        let trail = ledger.query(&EntryFilter {
            entry_type: Some(EntryType::ComplianceVerdict),
            vendor_id: Some("v1".into()),
            time_range: None,
        });
        assert_eq!(trail.len(), 5);
    }

    #[test]
    fn execute_rejects_foreign_verdict() {
        let mut ledger = Ledger::genesis(0);
        let contract =
            deploy_contract(&mut ledger, builtin_catalog(), &spec("c1", &["ssrf"]), 10).unwrap();
        let mut verdict = evaluate(&contract, "v1", &[], 600).unwrap();
        verdict.contract_id = "someone-else".into();
        assert!(matches!(
            execute_actions(&mut ledger, &contract, &verdict, 600, None),
            Err(Error::ContractVerdictMismatch(_))
        ));
        assert_eq!(ledger.entries().len(), 1); // only the deployment
    }

    #[test]
    fn execute_is_atomic_on_failure() {
        let mut ledger = Ledger::genesis(0);
        let contract =
            deploy_contract(&mut ledger, builtin_catalog(), &spec("c1", &["ssrf"]), 10).unwrap();
        let verdict = evaluate(&contract, "v1", &[], 600).unwrap();
        // timestamp before the deployment entry: the very first append fails
        let before = ledger.entries().len();
        assert!(execute_actions(&mut ledger, &contract, &verdict, 5, None).is_err());
        assert_eq!(ledger.entries().len(), before);
    }

    #[test]
    fn replay_yields_identical_entries() {
        let run = || {
            let mut ledger = Ledger::genesis(0);
            let contract =
                deploy_contract(&mut ledger, builtin_catalog(), &spec("c1", &["ssrf"]), 10)
                    .unwrap();
            let verdict = evaluate(
                &contract,
                "v1",
                &[attestation("ssrf", AttestationStatus::Pass)],
                600,
            )
            .unwrap();
            execute_actions(&mut ledger, &contract, &verdict, 600, None).unwrap();
            ledger.to_lines().unwrap()
        };
        assert_eq!(run(), run());
    }
}
