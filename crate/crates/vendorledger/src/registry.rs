//! Vendor identity registration and the built-in security control catalog.
//!
//! A vendor id is derived from its public key (first 20 bytes of the SHA-256
//! digest, hex), so registration is deterministic and at most one
//! registration per id can exist in a ledger.

use std::sync::OnceLock;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ledger::{EntryFilter, EntrySignature, EntrySigner, EntryType, Ledger};

pub const ED25519: &str = "ed25519";

/// Public key plus the scheme it belongs to, hex-encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    pub scheme: String,
    pub key: String,
}

impl PublicKey {
    pub fn key_bytes(&self) -> Result<Vec<u8>> {
        hex::decode(&self.key).map_err(|e| Error::Invalid(format!("bad public key hex: {e}")))
    }
}

/// Derive a vendor id from public key bytes: first 20 bytes of the digest.
pub fn vendor_id_for(public_key_bytes: &[u8]) -> String {
    let digest = Sha256::digest(public_key_bytes);
    hex::encode(&digest[..20])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VendorIdentity {
    pub vendor_id: String,
    pub public_key: PublicKey,
    pub display_name: String,
    pub registered_at: i64,
}

/// An ed25519 keypair held by a vendor. Deterministically derivable from a
/// seed string so replayed runs produce identical ledgers.
#[derive(Debug, Clone)]
pub struct VendorKey {
    signing: SigningKey,
}

impl VendorKey {
    pub fn from_seed(seed: &str) -> VendorKey {
        let secret: [u8; 32] = Sha256::digest(seed.as_bytes()).into();
        VendorKey {
            signing: SigningKey::from_bytes(&secret),
        }
    }

    pub fn from_secret_bytes(secret: &[u8; 32]) -> VendorKey {
        VendorKey {
            signing: SigningKey::from_bytes(secret),
        }
    }

    pub fn secret_hex(&self) -> String {
        hex::encode(self.signing.to_bytes())
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey {
            scheme: ED25519.to_string(),
            key: hex::encode(self.signing.verifying_key().to_bytes()),
        }
    }

    pub fn vendor_id(&self) -> String {
        vendor_id_for(&self.signing.verifying_key().to_bytes())
    }

    pub fn sign(&self, message: &[u8]) -> Vec<u8> {
        self.signing.sign(message).to_bytes().to_vec()
    }
}

impl EntrySigner for VendorKey {
    fn sign_entry(&self, entry_hash_bytes: &[u8]) -> EntrySignature {
        EntrySignature {
            scheme: ED25519.to_string(),
            public_key: self.public_key().key,
            signature: hex::encode(self.sign(entry_hash_bytes)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegistrationPayload {
    vendor_id: String,
    scheme: String,
    public_key: String,
    display_name: String,
    registered_at: i64,
}

/// Append a VendorRegistration entry and return the identity.
pub fn register_vendor(
    ledger: &mut Ledger,
    public_key: &PublicKey,
    display_name: &str,
    timestamp: i64,
) -> Result<VendorIdentity> {
    let vendor_id = vendor_id_for(&public_key.key_bytes()?);
    if find_identity(ledger, &vendor_id).is_some() {
        return Err(Error::DuplicateRegistration(vendor_id));
    }
    let identity = VendorIdentity {
        vendor_id: vendor_id.clone(),
        public_key: public_key.clone(),
        display_name: display_name.to_string(),
        registered_at: timestamp,
    };
    let payload = serde_json::to_value(RegistrationPayload {
        vendor_id,
        scheme: public_key.scheme.clone(),
        public_key: public_key.key.clone(),
        display_name: display_name.to_string(),
        registered_at: timestamp,
    })?;
    ledger.append_entry(EntryType::VendorRegistration, payload, timestamp, None)?;
    Ok(identity)
}

/// Reconstruct a registered identity from the ledger, if present.
pub fn find_identity(ledger: &Ledger, vendor_id: &str) -> Option<VendorIdentity> {
    let filter = EntryFilter {
        entry_type: Some(EntryType::VendorRegistration),
        vendor_id: Some(vendor_id.to_string()),
        time_range: None,
    };
    let entry = ledger.query(&filter).into_iter().next()?;
    let p: RegistrationPayload = serde_json::from_value(entry.payload.clone()).ok()?;
    Some(VendorIdentity {
        vendor_id: p.vendor_id,
        public_key: PublicKey {
            scheme: p.scheme,
            key: p.public_key,
        },
        display_name: p.display_name,
        registered_at: p.registered_at,
    })
}

/// Verify a detached signature over a challenge under the identity's key.
pub fn authenticate(identity: &VendorIdentity, challenge: &[u8], signature: &[u8]) -> Result<bool> {
    if challenge.is_empty() {
        return Err(Error::EmptyChallenge);
    }
    if identity.public_key.scheme != ED25519 {
        return Err(Error::UnsupportedScheme(identity.public_key.scheme.clone()));
    }
    let key_bytes = identity.public_key.key_bytes()?;
    let key_arr: [u8; 32] = key_bytes
        .try_into()
        .map_err(|_| Error::Invalid("ed25519 public key must be 32 bytes".into()))?;
    let vk = VerifyingKey::from_bytes(&key_arr)
        .map_err(|e| Error::Invalid(format!("invalid public key: {e}")))?;
    let sig_arr: [u8; 64] = match <[u8; 64]>::try_from(signature) {
        Ok(a) => a,
        Err(_) => return Ok(false),
    };
    Ok(vk
        .verify(challenge, &Signature::from_bytes(&sig_arr))
        .is_ok())
}

// ---------------------------------------------------------------------------
// Security control catalog
// ---------------------------------------------------------------------------

/// NIST SP 800-53 control family a control is filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NistFamily {
    /// Access Control
    AC,
    /// Identification and Authentication
    IA,
    /// System and Communications Protection
    SC,
    /// System and Information Integrity
    SI,
    /// Incident Response
    IR,
    /// Configuration Management
    CM,
    /// Supply Chain Risk Management
    SR,
    /// Risk Assessment
    RA,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityControl {
    pub control_id: String,
    pub threat_name: String,
    pub countermeasure: String,
    pub nist_family: NistFamily,
    pub source_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlCatalog {
    pub version: String,
    pub controls: Vec<SecurityControl>,
}

impl ControlCatalog {
    pub fn lookup(&self, control_id: &str) -> Result<&SecurityControl> {
        lookup_control(self, control_id)
    }

    pub fn contains(&self, control_id: &str) -> bool {
        self.controls.iter().any(|c| c.control_id == control_id)
    }
}

static BUILTIN_CATALOG_JSON: &str = include_str!("../fixtures/controls.json");
static BUILTIN: OnceLock<ControlCatalog> = OnceLock::new();

/// The built-in catalog of the 15 threat/countermeasure pairs.
pub fn builtin_catalog() -> &'static ControlCatalog {
    BUILTIN.get_or_init(|| {
        let controls: Vec<SecurityControl> =
            serde_json::from_str(BUILTIN_CATALOG_JSON).expect("embedded catalog parses");
        ControlCatalog {
            version: "builtin-1".to_string(),
            controls,
        }
    })
}

pub fn lookup_control<'a>(
    catalog: &'a ControlCatalog,
    control_id: &str,
) -> Result<&'a SecurityControl> {
    catalog
        .controls
        .iter()
        .find(|c| c.control_id == control_id)
        .ok_or_else(|| Error::UnknownControl(control_id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_fifteen_controls() {
        assert_eq!(builtin_catalog().controls.len(), 15);
    }

    #[test]
    fn zero_day_countermeasure_cites_bayesian_networks() {
        let c = lookup_control(builtin_catalog(), "zero_day").unwrap();
        assert!(c.countermeasure.contains("Bayesian networks"));
        assert_eq!(c.nist_family, NistFamily::RA);
    }

    #[test]
    fn known_lookups() {
        let catalog = builtin_catalog();
        let ssrf = lookup_control(catalog, "ssrf").unwrap();
        assert_eq!(ssrf.threat_name, "Server-Side Request Forgery");
        let sqli = lookup_control(catalog, "sqli").unwrap();
        assert_eq!(sqli.nist_family, NistFamily::SI);
        let sr = lookup_control(catalog, "supply_chain").unwrap();
        assert_eq!(sr.nist_family, NistFamily::SR);
    }

    #[test]
    fn unknown_and_empty_lookup_fail() {
        let catalog = builtin_catalog();
        assert!(matches!(
            lookup_control(catalog, "nonexistent"),
            Err(Error::UnknownControl(_))
        ));
        assert!(matches!(
            lookup_control(catalog, ""),
            Err(Error::UnknownControl(_))
        ));
    }

    #[test]
    fn catalog_immutable_across_calls() {
        assert_eq!(builtin_catalog(), builtin_catalog());
        assert!(builtin_catalog()
            .controls
            .iter()
            .map(|c| &c.control_id)
            .collect::<std::collections::BTreeSet<_>>()
            .len()
            .eq(&15));
    }

    #[test]
    fn register_and_duplicate() {
        let mut ledger = Ledger::genesis(0);
        let key = VendorKey::from_seed("vendor-a");
        let identity = register_vendor(&mut ledger, &key.public_key(), "Vendor A", 100).unwrap();
        assert_eq!(identity.vendor_id.len(), 40);
        assert_eq!(identity.vendor_id, key.vendor_id());
        let err = register_vendor(&mut ledger, &key.public_key(), "Vendor A again", 101);
        assert!(matches!(err, Err(Error::DuplicateRegistration(_))));
    }

    #[test]
    fn distinct_keys_distinct_ids() {
        let a = VendorKey::from_seed("a");
        let b = VendorKey::from_seed("b");
        assert_ne!(a.vendor_id(), b.vendor_id());
    }

    #[test]
    fn vendor_id_deterministic_across_ledgers() {
        let key = VendorKey::from_seed("same-seed");
        let mut l1 = Ledger::genesis(0);
        let mut l2 = Ledger::genesis(0);
        let i1 = register_vendor(&mut l1, &key.public_key(), "V", 50).unwrap();
        let i2 = register_vendor(&mut l2, &key.public_key(), "V", 50).unwrap();
        assert_eq!(i1, i2);
        assert_eq!(l1.entries()[0].entry_hash, l2.entries()[0].entry_hash);
    }

    #[test]
    fn authenticate_paths() {
        let key = VendorKey::from_seed("auth");
        let mut ledger = Ledger::genesis(0);
        let identity = register_vendor(&mut ledger, &key.public_key(), "V", 1).unwrap();
        let challenge = b"assessment-2024";
        let sig = key.sign(challenge);
        assert!(authenticate(&identity, challenge, &sig).unwrap());

        let other = VendorKey::from_seed("other");
        let bad_sig = other.sign(challenge);
        assert!(!authenticate(&identity, challenge, &bad_sig).unwrap());

        assert!(matches!(
            authenticate(&identity, b"", &sig),
            Err(Error::EmptyChallenge)
        ));

        let mut unsupported = identity.clone();
        unsupported.public_key.scheme = "rsa-pss".into();
        assert!(matches!(
            authenticate(&unsupported, challenge, &sig),
            Err(Error::UnsupportedScheme(_))
        ));
    }
}
