//! Deploy a compliance contract and evaluate vendor attestations.

use vendorledger::contracts::{self, Attestation, AttestationStatus, ContractSpec};
use vendorledger::ledger::Ledger;
use vendorledger::registry::{builtin_catalog, register_vendor, VendorKey};

fn main() {
    let mut ledger = Ledger::genesis(0);
    let key = VendorKey::from_seed("contracts-example");
    let identity =
        register_vendor(&mut ledger, &key.public_key(), "Acme Diagnostics", 100).unwrap();

    let contract = contracts::deploy_contract(
        &mut ledger,
        builtin_catalog(),
        &ContractSpec {
            contract_id: "BASELINE-1".into(),
            standard_label: "NIST 800-53 subset".into(),
            required_controls: vec!["ssrf".into(), "sqli".into(), "supply_chain".into()],
            actions_on_pass: vec!["IssueCertificate".into(), "NotifyStakeholders".into()],
            actions_on_fail: vec!["EscalateToReview".into()],
        },
        110,
    )
    .unwrap();

    // one control fails, so the verdict lists a discrepancy; passing
    // attestations must carry evidence or they count as missing
    let attest = |control: &str, status| Attestation {
        vendor_id: identity.vendor_id.clone(),
        control_id: control.into(),
        status,
        evidence_hash: Some(vendorledger::canonical::sha256_hex(control.as_bytes())),
        attested_at: 115,
    };
    let attestations = vec![
        attest("ssrf", AttestationStatus::Pass),
        attest("sqli", AttestationStatus::Fail),
        attest("supply_chain", AttestationStatus::Pass),
    ];
    let verdict = contracts::evaluate(&contract, &identity.vendor_id, &attestations, 120).unwrap();
    println!("outcome: {:?}", verdict.outcome);
    for d in &verdict.discrepancies {
        println!("discrepancy: {} ({:?})", d.control_id, d.reason);
    }
    contracts::execute_actions(&mut ledger, &contract, &verdict, 120, None).unwrap();
    println!("ledger entries after actions: {}", ledger.entries().len());
}
