//! Walk one vendor through the full assessment workflow: registration,
//! document anchoring, compliance check, risk scan, access verification,
//! and entry into monitoring.

use vendorledger::assessment::{
    self, AccessVerification, RiskScanRecord, ScanKind, Severity, VulnStatus, Vulnerability,
};
use vendorledger::canonical::sha256_hex;
use vendorledger::contracts::{self, Attestation, AttestationStatus, ContractSpec};
use vendorledger::ledger::Ledger;
use vendorledger::registry::{builtin_catalog, register_vendor, VendorKey};

fn main() {
    let mut ledger = Ledger::genesis(0);
    let key = VendorKey::from_seed("workflow-example");
    let identity = register_vendor(&mut ledger, &key.public_key(), "iHealth Demo", 100).unwrap();
    let contract = contracts::deploy_contract(
        &mut ledger,
        builtin_catalog(),
        &ContractSpec {
            contract_id: "WORKFLOW-1".into(),
            standard_label: "HIPAA baseline".into(),
            required_controls: vec!["unauthorized_access".into()],
            actions_on_pass: vec!["IssueCertificate".into()],
            actions_on_fail: vec!["TriggerReassessment".into()],
        },
        110,
    )
    .unwrap();

    // starting an assessment re-authenticates the vendor
    let challenge = b"ASSESS-1";
    let signature = key.sign(challenge);
    let mut assessment =
        assessment::start_assessment(&ledger, &identity, "ASSESS-1", challenge, &signature, 200)
            .unwrap();

    let evidence = b"access policy bundle";
    assessment::submit_document(&mut ledger, &mut assessment, "policy_doc", evidence, 210).unwrap();

    let attestations = vec![Attestation {
        vendor_id: identity.vendor_id.clone(),
        control_id: "unauthorized_access".into(),
        status: AttestationStatus::Pass,
        evidence_hash: Some(sha256_hex(evidence)),
        attested_at: 215,
    }];
    let verdict = assessment::run_compliance_check(
        &mut ledger,
        &mut assessment,
        &contract,
        &attestations,
        220,
    )
    .unwrap();
    println!("verdict: {:?}", verdict.outcome);

    let scan = RiskScanRecord {
        vendor_id: identity.vendor_id.clone(),
        scan_kind: ScanKind::PenetrationTest,
        findings: vec![Vulnerability {
            vuln_id: "VULN-001".into(),
            severity: Severity::Medium,
            status: VulnStatus::Open,
        }],
        scanned_at: 230,
    };
    assessment::record_risk_scan(&mut ledger, &mut assessment, &scan).unwrap();

    let access = AccessVerification {
        vendor_id: identity.vendor_id.clone(),
        mfa_enabled: true,
        rbac_enabled: true,
        policies: vec!["least-privilege".into()],
        verified_at: 240,
    };
    assessment::verify_access_controls(&mut ledger, &mut assessment, &access).unwrap();
    assessment::enter_monitoring(&mut assessment).unwrap();
    println!("state: {}", assessment.state);

    // the whole trail is recoverable from the ledger alone
    let recovered = assessment::reconstruct(&ledger, "ASSESS-1").unwrap();
    println!(
        "recovered {} anchored document(s)",
        recovered.document_anchors.len()
    );
    for entry in ledger.entries() {
        println!(
            "entry {:>2}  t={:<4} {}",
            entry.index, entry.timestamp, entry.entry_type
        );
    }
}
