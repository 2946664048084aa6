//! Produce and check Merkle inclusion proofs for sealed entries.

use serde_json::json;
use vendorledger::ledger::{EntryType, Ledger};

fn main() {
    let mut ledger = Ledger::genesis(0);
    for i in 0..7 {
        ledger
            .append_entry(
                EntryType::DocumentAnchor,
                json!({"doc_type": "report", "content_hash": format!("{i:064}")}),
                100 + i,
                None,
            )
            .unwrap();
    }
    let root = ledger.seal_block(200).unwrap().merkle_root.clone();

    for index in 0..7 {
        let proof = ledger.prove_inclusion(index).unwrap();
        println!(
            "entry {index}: {}-step path, verifies = {}",
            proof.path.len(),
            proof.verify(&root)
        );
    }

    let mut bad = ledger.prove_inclusion(3).unwrap();
    if let Some((sibling, _)) = bad.path.first_mut() {
        *sibling = format!("{:064}", 0xdead);
    }
    println!("corrupted sibling verifies = {}", bad.verify(&root));
}
