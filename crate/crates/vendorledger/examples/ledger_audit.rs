//! Append entries, seal blocks, and demonstrate tamper detection on the
//! persisted file.

use serde_json::json;
use vendorledger::ledger::{EntryType, Ledger};

fn main() {
    let mut ledger = Ledger::genesis(0);
    for i in 0..4 {
        ledger
            .append_entry(
                EntryType::MonitoringAlert,
                json!({
                    "vendor_id": "0000000000000000000000000000000000000000",
                    "subject": format!("event-{i}"),
                }),
                100 + i,
                None,
            )
            .unwrap();
    }
    ledger.seal_block(110).unwrap();
    println!("blocks: {}", ledger.blocks().len());
    println!("verify: ok = {}", ledger.verify_chain().ok);

    let dir = std::env::temp_dir().join("vendorledger-audit-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ledger.jsonl");
    ledger.save(&path).unwrap();

    // flip one byte and watch verification fail
    let mut bytes = std::fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x01;
    std::fs::write(&path, &bytes).unwrap();
    let report = Ledger::verify_file(&path);
    println!("after tampering: ok = {}", report.ok);
    if let Some(v) = report.first_violation {
        println!("first violation: {:?} at {}", v.kind, v.location);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
