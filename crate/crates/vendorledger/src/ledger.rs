//! Append-only, hash-chained, Merkle-rooted audit ledger.
//!
//! Every protocol action lands here as a [`LedgerEntry`]; entries chain by
//! `prev_hash`, sealed blocks chain by `prev_block_hash` and commit to their
//! entries through a Merkle root. Any single-bit mutation of the persisted
//! file is detectable by [`Ledger::verify_chain`].
//!
//! Timestamps are caller-supplied Unix seconds; the library never reads the
//! wall clock, so replaying the same operation sequence yields byte-identical
//! files.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::canonical::{canonical_string, hash_canonical, sha256_hex, ZERO_HASH};
use crate::error::{Error, Result};

/// Kind of record a ledger entry carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntryType {
    VendorRegistration,
    DocumentAnchor,
    ComplianceVerdict,
    RiskScanRecord,
    AccessPolicyAttestation,
    MonitoringAlert,
    IncidentAction,
    AssetInventoryChange,
    ContractDeployment,
}

impl fmt::Display for EntryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for EntryType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::Invalid(format!("unknown entry type: {s}")))
    }
}

/// Detached signature over an entry's hash bytes, scheme recorded alongside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntrySignature {
    pub scheme: String,
    pub public_key: String,
    pub signature: String,
}

/// Anything that can sign entry hashes. The "null signer" mode is simply
/// passing `None` to [`Ledger::append_entry`].
pub trait EntrySigner {
    fn sign_entry(&self, entry_hash_bytes: &[u8]) -> EntrySignature;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub index: u64,
    pub timestamp: i64,
    pub entry_type: EntryType,
    pub payload: Value,
    pub prev_hash: String,
    pub entry_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<EntrySignature>,
}

/// Hashing preimage: everything except the hash itself and the signature.
#[derive(Serialize)]
struct EntryPreimage<'a> {
    index: u64,
    timestamp: i64,
    entry_type: EntryType,
    payload: &'a Value,
    prev_hash: &'a str,
}

pub fn entry_hash(
    index: u64,
    timestamp: i64,
    entry_type: EntryType,
    payload: &Value,
    prev_hash: &str,
) -> Result<String> {
    hash_canonical(&EntryPreimage {
        index,
        timestamp,
        entry_type,
        payload,
        prev_hash,
    })
}

/// Contiguous, half-open range of entry indices committed by a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRange {
    pub start: u64,
    pub end: u64,
}

impl EntryRange {
    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
    pub fn contains(&self, index: u64) -> bool {
        index >= self.start && index < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub prev_block_hash: String,
    pub merkle_root: String,
    pub sealed_at: i64,
    pub entry_indices: EntryRange,
    pub block_hash: String,
}

#[derive(Serialize)]
struct BlockPreimage<'a> {
    height: u64,
    prev_block_hash: &'a str,
    merkle_root: &'a str,
    sealed_at: i64,
    entry_indices: EntryRange,
}

fn block_hash(
    height: u64,
    prev_block_hash: &str,
    merkle_root: &str,
    sealed_at: i64,
    entry_indices: EntryRange,
) -> Result<String> {
    hash_canonical(&BlockPreimage {
        height,
        prev_block_hash,
        merkle_root,
        sealed_at,
        entry_indices,
    })
}

/// Which side of the running hash a proof sibling sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionProof {
    pub entry_hash: String,
    pub path: Vec<(String, Side)>,
    pub block_height: u64,
}

impl InclusionProof {
    /// Fold the sibling path from the leaf and compare with a Merkle root.
    pub fn verify(&self, merkle_root: &str) -> bool {
        let Ok(leaf) = hex::decode(&self.entry_hash) else {
            return false;
        };
        let mut acc = leaf_hash(&leaf);
        for (sibling_hex, side) in &self.path {
            let Ok(sibling) = hex::decode(sibling_hex) else {
                return false;
            };
            acc = match side {
                Side::Left => internal_hash(&sibling, &acc),
                Side::Right => internal_hash(&acc, &sibling),
            };
        }
        hex::encode(acc) == merkle_root
    }
}

// Merkle rules: leaf = H(0x00 || leaf bytes), internal = H(0x01 || left || right),
// odd node promoted unchanged to the next level.
fn leaf_hash(leaf: &[u8]) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update([0x00]);
    h.update(leaf);
    h.finalize().to_vec()
}

fn internal_hash(left: &[u8], right: &[u8]) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update([0x01]);
    h.update(left);
    h.update(right);
    h.finalize().to_vec()
}

/// Merkle root over entry hashes (hex), empty set hashing to H("").
pub fn merkle_root(entry_hashes: &[String]) -> String {
    if entry_hashes.is_empty() {
        return sha256_hex(b"");
    }
    let mut level: Vec<Vec<u8>> = entry_hashes
        .iter()
        .map(|h| leaf_hash(&hex::decode(h).expect("entry hashes are valid hex")))
        .collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut iter = level.chunks(2);
        for chunk in &mut iter {
            match chunk {
                [left, right] => next.push(internal_hash(left, right)),
                [odd] => next.push(odd.clone()),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    hex::encode(&level[0])
}

/// What went wrong, and where, when verification fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    EntryHashMismatch,
    PrevLinkMismatch,
    MerkleRootMismatch,
    BlockHashMismatch,
    BlockLinkMismatch,
    BlockRangeMismatch,
    SignatureInvalid,
    ParseError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
}

impl VerificationReport {
    fn ok() -> Self {
        VerificationReport {
            ok: true,
            first_violation: None,
        }
    }
    fn violation(kind: ViolationKind, location: impl Into<String>) -> Self {
        VerificationReport {
            ok: false,
            first_violation: Some(Violation {
                kind,
                location: location.into(),
            }),
        }
    }
}

/// Filter for [`Ledger::query`]; empty filter matches everything.
#[derive(Debug, Clone, Default)]
pub struct EntryFilter {
    pub entry_type: Option<EntryType>,
    pub vendor_id: Option<String>,
    /// Inclusive `(from, to)` bounds on entry timestamps.
    pub time_range: Option<(i64, i64)>,
}

impl EntryFilter {
    fn matches(&self, entry: &LedgerEntry) -> bool {
        if let Some(t) = self.entry_type {
            if entry.entry_type != t {
                return false;
            }
        }
        if let Some(vendor) = &self.vendor_id {
            let found = entry
                .payload
                .get("vendor_id")
                .and_then(Value::as_str)
                .map(|v| v == vendor)
                .unwrap_or(false);
            if !found {
                return false;
            }
        }
        if let Some((from, to)) = self.time_range {
            if entry.timestamp < from || entry.timestamp > to {
                return false;
            }
        }
        true
    }
}

/// The ledger: all entries ever appended plus the sealed block chain.
/// Entries past the last block's range form the pending pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    entries: Vec<LedgerEntry>,
    blocks: Vec<Block>,
}

impl Ledger {
    /// Fresh ledger with a sealed genesis block over the empty entry set.
    pub fn genesis(created_at: i64) -> Ledger {
        let range = EntryRange { start: 0, end: 0 };
        let root = merkle_root(&[]);
        let hash = block_hash(0, ZERO_HASH, &root, created_at, range)
            .expect("genesis preimage serializes");
        Ledger {
            entries: Vec::new(),
            blocks: vec![Block {
                height: 0,
                prev_block_hash: ZERO_HASH.to_string(),
                merkle_root: root,
                sealed_at: created_at,
                entry_indices: range,
                block_hash: hash,
            }],
        }
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn entry(&self, index: u64) -> Option<&LedgerEntry> {
        self.entries.get(index as usize)
    }

    /// Index one past the last sealed entry.
    pub fn sealed_upto(&self) -> u64 {
        self.blocks.last().map(|b| b.entry_indices.end).unwrap_or(0)
    }

    pub fn pending_count(&self) -> usize {
        self.entries.len() - self.sealed_upto() as usize
    }

    /// Append an entry to the pending pool.
    pub fn append_entry(
        &mut self,
        entry_type: EntryType,
        payload: Value,
        timestamp: i64,
        signer: Option<&dyn EntrySigner>,
    ) -> Result<&LedgerEntry> {
        if !payload.is_object() {
            return Err(Error::MalformedPayload(
                "payload must be a JSON object".into(),
            ));
        }
        if let Some(prev) = self.entries.last() {
            if timestamp < prev.timestamp {
                return Err(Error::NonMonotonicTimestamp {
                    got: timestamp,
                    prev: prev.timestamp,
                });
            }
        }
        let index = self.entries.len() as u64;
        let prev_hash = self
            .entries
            .last()
            .map(|e| e.entry_hash.clone())
            .unwrap_or_else(|| ZERO_HASH.to_string());
        // also rejects floats anywhere in the payload
        let hash = entry_hash(index, timestamp, entry_type, &payload, &prev_hash)?;
        let signature = signer.map(|s| {
            let bytes = hex::decode(&hash).expect("entry hash is valid hex");
            s.sign_entry(&bytes)
        });
        self.entries.push(LedgerEntry {
            index,
            timestamp,
            entry_type,
            payload,
            prev_hash,
            entry_hash: hash,
            signature,
        });
        Ok(self.entries.last().expect("just pushed"))
    }

    /// Seal all pending entries into a new block.
    pub fn seal_block(&mut self, sealed_at: i64) -> Result<&Block> {
        let start = self.sealed_upto();
        let end = self.entries.len() as u64;
        if start == end {
            return Err(Error::NoPendingEntries);
        }
        let range = EntryRange { start, end };
        let hashes: Vec<String> = self.entries[start as usize..end as usize]
            .iter()
            .map(|e| e.entry_hash.clone())
            .collect();
        let root = merkle_root(&hashes);
        let height = self.blocks.len() as u64;
        let prev = self
            .blocks
            .last()
            .map(|b| b.block_hash.clone())
            .unwrap_or_else(|| ZERO_HASH.to_string());
        let hash = block_hash(height, &prev, &root, sealed_at, range)?;
        self.blocks.push(Block {
            height,
            prev_block_hash: prev,
            merkle_root: root,
            sealed_at,
            entry_indices: range,
            block_hash: hash,
        });
        Ok(self.blocks.last().expect("just pushed"))
    }

    /// Recompute every hash, link, root, and signature and report the first
    /// mismatch. Violations are reported, never thrown.
    pub fn verify_chain(&self) -> VerificationReport {
        for (i, entry) in self.entries.iter().enumerate() {
            let expected_prev = if i == 0 {
                ZERO_HASH.to_string()
            } else {
                self.entries[i - 1].entry_hash.clone()
            };
            if entry.prev_hash != expected_prev {
                return VerificationReport::violation(
                    ViolationKind::PrevLinkMismatch,
                    format!("entry {i}"),
                );
            }
            match entry_hash(
                entry.index,
                entry.timestamp,
                entry.entry_type,
                &entry.payload,
                &entry.prev_hash,
            ) {
                Ok(h) if h == entry.entry_hash && entry.index == i as u64 => {}
                _ => {
                    return VerificationReport::violation(
                        ViolationKind::EntryHashMismatch,
                        format!("entry {i}"),
                    )
                }
            }
            if let Some(sig) = &entry.signature {
                if !signature_valid(sig, &entry.entry_hash) {
                    return VerificationReport::violation(
                        ViolationKind::SignatureInvalid,
                        format!("entry {i}"),
                    );
                }
            }
        }
        let mut expected_start = 0u64;
        for (h, block) in self.blocks.iter().enumerate() {
            let range = block.entry_indices;
            if block.height != h as u64
                || range.start != expected_start
                || range.end < range.start
                || range.end > self.entries.len() as u64
            {
                return VerificationReport::violation(
                    ViolationKind::BlockRangeMismatch,
                    format!("block {h}"),
                );
            }
            expected_start = range.end;
            let expected_prev = if h == 0 {
                ZERO_HASH.to_string()
            } else {
                self.blocks[h - 1].block_hash.clone()
            };
            if block.prev_block_hash != expected_prev {
                return VerificationReport::violation(
                    ViolationKind::BlockLinkMismatch,
                    format!("block {h}"),
                );
            }
            let hashes: Vec<String> = self.entries[range.start as usize..range.end as usize]
                .iter()
                .map(|e| e.entry_hash.clone())
                .collect();
            if merkle_root(&hashes) != block.merkle_root {
                return VerificationReport::violation(
                    ViolationKind::MerkleRootMismatch,
                    format!("block {h}"),
                );
            }
            match block_hash(
                block.height,
                &block.prev_block_hash,
                &block.merkle_root,
                block.sealed_at,
                range,
            ) {
                Ok(bh) if bh == block.block_hash => {}
                _ => {
                    return VerificationReport::violation(
                        ViolationKind::BlockHashMismatch,
                        format!("block {h}"),
                    )
                }
            }
        }
        VerificationReport::ok()
    }

    /// Merkle inclusion proof for a sealed entry.
    pub fn prove_inclusion(&self, entry_index: u64) -> Result<InclusionProof> {
        if entry_index >= self.entries.len() as u64 {
            return Err(Error::UnknownEntry(entry_index));
        }
        let block = self
            .blocks
            .iter()
            .find(|b| b.entry_indices.contains(entry_index))
            .ok_or(Error::EntryNotSealed(entry_index))?;
        let range = block.entry_indices;
        let leaves: Vec<Vec<u8>> = self.entries[range.start as usize..range.end as usize]
            .iter()
            .map(|e| hex::decode(&e.entry_hash).expect("entry hash is valid hex"))
            .collect();
        let mut position = (entry_index - range.start) as usize;
        let mut level: Vec<Vec<u8>> = leaves.iter().map(|l| leaf_hash(l)).collect();
        let mut path = Vec::new();
        while level.len() > 1 {
            let sibling = if position.is_multiple_of(2) {
                position + 1
            } else {
                position - 1
            };
            if sibling < level.len() {
                let side = if sibling < position {
                    Side::Left
                } else {
                    Side::Right
                };
                path.push((hex::encode(&level[sibling]), side));
            }
            // odd node promoted: no path step
            let mut next = Vec::with_capacity(level.len().div_ceil(2));
            for chunk in level.chunks(2) {
                match chunk {
                    [l, r] => next.push(internal_hash(l, r)),
                    [odd] => next.push(odd.clone()),
                    _ => unreachable!(),
                }
            }
            position /= 2;
            level = next;
        }
        Ok(InclusionProof {
            entry_hash: self.entries[entry_index as usize].entry_hash.clone(),
            path,
            block_height: block.height,
        })
    }

    /// All matching entries in index order.
    pub fn query(&self, filter: &EntryFilter) -> Vec<&LedgerEntry> {
        self.entries.iter().filter(|e| filter.matches(e)).collect()
    }

    /// Distinct vendor ids seen in any payload, for reporting.
    pub fn vendor_ids(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter_map(|e| e.payload.get("vendor_id").and_then(Value::as_str))
            .map(String::from)
            .collect()
    }

    /// Truncate back to a known length, undoing a partially applied batch.
    pub(crate) fn truncate_entries(&mut self, len: usize) {
        debug_assert!(self.sealed_upto() as usize <= len);
        self.entries.truncate(len);
    }

    // ------------------------------------------------------------------
    // Persistence: line-delimited canonical JSON, one record per line, in
    // append order. Reload reproduces identical hashes and bytes.
    // ------------------------------------------------------------------

    pub fn to_lines(&self) -> Result<String> {
        let mut out = String::new();
        let mut entry_cursor = 0usize;
        for block in &self.blocks {
            for entry in
                &self.entries[block.entry_indices.start as usize..block.entry_indices.end as usize]
            {
                out.push_str(&record_line("entry", entry)?);
                entry_cursor += 1;
            }
            out.push_str(&record_line("block", block)?);
        }
        for entry in &self.entries[entry_cursor..] {
            out.push_str(&record_line("entry", entry)?);
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_lines()?.as_bytes())?;
        Ok(())
    }

    pub fn from_lines(reader: impl BufRead) -> Result<Ledger> {
        let mut entries = Vec::new();
        let mut blocks = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: PersistedRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Invalid(format!("line {}: {e}", n + 1)))?;
            match record {
                PersistedRecord::Entry(e) => entries.push(e),
                PersistedRecord::Block(b) => blocks.push(b),
            }
        }
        if blocks.is_empty() {
            return Err(Error::Invalid("ledger file has no genesis block".into()));
        }
        Ok(Ledger { entries, blocks })
    }

    pub fn load(path: &Path) -> Result<Ledger> {
        let file = std::fs::File::open(path)?;
        Self::from_lines(BufReader::new(file))
    }

    /// Load a persisted file and verify it, mapping parse failures to a
    /// `ParseError` violation instead of an error.
    pub fn verify_file(path: &Path) -> VerificationReport {
        match Self::load(path) {
            Ok(ledger) => ledger.verify_chain(),
            Err(e) => VerificationReport::violation(ViolationKind::ParseError, e.to_string()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PersistedRecord {
    Entry(LedgerEntry),
    Block(Block),
}

fn record_line<T: Serialize>(kind: &str, value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    v.as_object_mut()
        .expect("records are objects")
        .insert("kind".into(), Value::String(kind.into()));
    let mut line = canonical_string(&v)?;
    line.push('\n');
    Ok(line)
}

fn signature_valid(sig: &EntrySignature, entry_hash_hex: &str) -> bool {
    if sig.scheme != "ed25519" {
        return false;
    }
    use ed25519_dalek::{Signature, Verifier, VerifyingKey};
    let Ok(pk_bytes) = hex::decode(&sig.public_key) else {
        return false;
    };
    let Ok(pk_arr): std::result::Result<[u8; 32], _> = pk_bytes.try_into() else {
        return false;
    };
    let Ok(vk) = VerifyingKey::from_bytes(&pk_arr) else {
        return false;
    };
    let Ok(sig_bytes) = hex::decode(&sig.signature) else {
        return false;
    };
    let Ok(sig_arr): std::result::Result<[u8; 64], _> = sig_bytes.try_into() else {
        return false;
    };
    let Ok(hash_bytes) = hex::decode(entry_hash_hex) else {
        return false;
    };
    vk.verify(&hash_bytes, &Signature::from_bytes(&sig_arr))
        .is_ok()
}
