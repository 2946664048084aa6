//! Run the shipped case-study scenario and print its before/after metrics.

use vendorledger::scenario::{run_scenario, Scenario};

fn main() {
    let text = include_str!("../fixtures/ihealth.scenario.json");
    let scenario: Scenario = serde_json::from_str(text).unwrap();
    let outcome = run_scenario(&scenario).unwrap();

    let m = &outcome.report.metrics;
    println!("vendor: {}", outcome.report.vendor_id);
    println!(
        "vulnerabilities: {} -> {} ({:.1}% reduction)",
        m.vulns_before,
        m.vulns_after,
        m.vuln_reduction_fraction * 100.0
    );
    if let (Some(before), Some(after), Some(improvement)) = (
        m.mean_response_before,
        m.mean_response_after,
        m.response_improvement_fraction,
    ) {
        println!(
            "mean incident response: {:.0} h -> {:.0} h ({:.0}% improvement)",
            before / 3600.0,
            after / 3600.0,
            improvement * 100.0
        );
    }
    println!(
        "ledger: {} entries in {} blocks, verify ok = {}",
        outcome.ledger.entries().len(),
        outcome.ledger.blocks().len(),
        outcome.ledger.verify_chain().ok
    );
}
