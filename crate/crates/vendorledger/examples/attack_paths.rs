//! Build a small threat-propagation network, query posteriors, and extract
//! attack paths from observed evidence.

use vendorledger::bayes::{
    build_network, extract_attack_paths, parse_spec, posterior, EvidenceSet,
};

fn main() {
    let spec = parse_spec(
        r#"{
            "nodes": [
                {"name": "Phishing", "cpt": {"": {"true": 0.2, "false": 0.8}}},
                {"name": "Workstation", "parents": ["Phishing"], "cpt": {
                    "true":  {"true": 0.85, "false": 0.15},
                    "false": {"true": 0.05, "false": 0.95}
                }},
                {"name": "FileServer", "parents": ["Workstation"], "cpt": {
                    "true":  {"true": 0.7, "false": 0.3},
                    "false": {"true": 0.02, "false": 0.98}
                }},
                {"name": "Database", "parents": ["FileServer"], "cpt": {
                    "true":  {"true": 0.6, "false": 0.4},
                    "false": {"true": 0.01, "false": 0.99}
                }}
            ]
        }"#,
    )
    .unwrap();
    let network = build_network(&spec).unwrap();

    let mut evidence = EvidenceSet::new();
    evidence.insert("Phishing".into(), "true".into());

    for node in ["Workstation", "FileServer", "Database"] {
        let dist = posterior(&network, node, &evidence).unwrap();
        println!(
            "P({node} compromised | phishing observed) = {:.4}",
            dist["true"]
        );
    }

    let paths = extract_attack_paths(&network, &evidence, 0.5, "true").unwrap();
    println!("attack paths above threshold 0.5:");
    for path in &paths {
        println!(
            "  {}  score {}",
            path.nodes.join(" -> "),
            path.score_string()
        );
    }
}
