//! Continuous monitoring, incident response tracking, asset inventory, and
//! the before/after improvement metrics.
//!
//! Everything here is derived state: open vulnerabilities, incident
//! timelines, and metrics are recomputed from ledger entries, so reloading a
//! persisted ledger yields identical numbers.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::assessment::{Assessment, AssessmentState};
use crate::error::{Error, Result};
use crate::ledger::{EntryFilter, EntryType, Ledger, LedgerEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlertType {
    SyscallAudit,
    ThreatDetection,
    AnomalyFlag,
    RemediationApplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlertSeverity {
    Info,
    Warning,
    Critical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitoringAlert {
    pub vendor_id: String,
    pub alert_type: AlertType,
    pub severity: AlertSeverity,
    /// vuln_id for remediation alerts, process name for syscall audits, etc.
    pub subject: String,
    pub observed_at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub incident_id: String,
    pub vendor_id: String,
    pub detected_at: i64,
    pub responded_at: Option<i64>,
    pub remediation_steps: Vec<(String, i64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetInventory {
    authorized: BTreeSet<String>,
    unauthorized: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssetDecision {
    Allowed,
    Denied,
    Unknown,
}

impl AssetInventory {
    pub fn new(
        authorized: impl IntoIterator<Item = String>,
        unauthorized: impl IntoIterator<Item = String>,
    ) -> Result<AssetInventory> {
        let authorized: BTreeSet<String> = authorized.into_iter().collect();
        let unauthorized: BTreeSet<String> = unauthorized.into_iter().collect();
        if let Some(overlap) = authorized.intersection(&unauthorized).next() {
            return Err(Error::InventoryOverlap(overlap.clone()));
        }
        Ok(AssetInventory {
            authorized,
            unauthorized,
        })
    }

    pub fn authorized(&self) -> &BTreeSet<String> {
        &self.authorized
    }

    pub fn unauthorized(&self) -> &BTreeSet<String> {
        &self.unauthorized
    }

    pub fn check_asset(&self, asset_label: &str) -> AssetDecision {
        if self.authorized.contains(asset_label) {
            AssetDecision::Allowed
        } else if self.unauthorized.contains(asset_label) {
            AssetDecision::Denied
        } else {
            AssetDecision::Unknown
        }
    }
}

/// Anchor an inventory snapshot for a vendor.
pub fn record_inventory(
    ledger: &mut Ledger,
    vendor_id: &str,
    inventory: &AssetInventory,
    timestamp: i64,
) -> Result<LedgerEntry> {
    let payload = json!({
        "vendor_id": vendor_id,
        "authorized": inventory.authorized,
        "unauthorized": inventory.unauthorized,
    });
    Ok(ledger
        .append_entry(EntryType::AssetInventoryChange, payload, timestamp, None)?
        .clone())
}

fn require_monitoring(assessment: &Assessment, vendor_id: &str) -> Result<()> {
    if assessment.state != AssessmentState::Monitoring || assessment.vendor_id != vendor_id {
        return Err(Error::VendorNotMonitoring(vendor_id.to_string()));
    }
    Ok(())
}

/// Baseline findings minus distinct remediations, from the ledger alone.
pub fn open_vulnerabilities(ledger: &Ledger, vendor_id: &str) -> BTreeSet<String> {
    let mut open = BTreeSet::new();
    // only the first scan is the baseline of this assessment pass
    let baseline = ledger
        .query(&EntryFilter {
            entry_type: Some(EntryType::RiskScanRecord),
            vendor_id: Some(vendor_id.to_string()),
            time_range: None,
        })
        .into_iter()
        .next();
    if let Some(entry) = baseline {
        if let Some(findings) = entry.payload.get("findings").and_then(Value::as_array) {
            for f in findings {
                if f.get("status").and_then(Value::as_str) == Some("Open") {
                    if let Some(id) = f.get("vuln_id").and_then(Value::as_str) {
                        open.insert(id.to_string());
                    }
                }
            }
        }
    }
    for entry in ledger.query(&EntryFilter {
        entry_type: Some(EntryType::MonitoringAlert),
        vendor_id: Some(vendor_id.to_string()),
        time_range: None,
    }) {
        if entry.payload.get("alert_type").and_then(Value::as_str) == Some("RemediationApplied") {
            if let Some(subject) = entry.payload.get("subject").and_then(Value::as_str) {
                open.remove(subject);
            }
        }
    }
    open
}

/// Record a monitoring alert; remediation alerts flip the cited open
/// vulnerability to remediated in derived state.
pub fn ingest_alert(
    ledger: &mut Ledger,
    assessment: &Assessment,
    alert: &MonitoringAlert,
) -> Result<LedgerEntry> {
    require_monitoring(assessment, &alert.vendor_id)?;
    if alert.alert_type == AlertType::RemediationApplied {
        let open = open_vulnerabilities(ledger, &alert.vendor_id);
        if !open.contains(&alert.subject) {
            return Err(Error::UnknownVulnerability(alert.subject.clone()));
        }
    }
    let payload = serde_json::to_value(alert)?;
    Ok(ledger
        .append_entry(EntryType::MonitoringAlert, payload, alert.observed_at, None)?
        .clone())
}

/// Open a new incident for a monitored vendor.
pub fn open_incident(
    ledger: &mut Ledger,
    assessment: &Assessment,
    incident_id: &str,
    detected_at: i64,
) -> Result<IncidentRecord> {
    require_monitoring(assessment, &assessment.vendor_id)?;
    if find_incident(ledger, incident_id).is_some() {
        return Err(Error::DuplicateIncident(incident_id.to_string()));
    }
    let record = IncidentRecord {
        incident_id: incident_id.to_string(),
        vendor_id: assessment.vendor_id.clone(),
        detected_at,
        responded_at: None,
        remediation_steps: Vec::new(),
    };
    ledger.append_entry(
        EntryType::IncidentAction,
        json!({
            "action_kind": "detected",
            "incident_id": incident_id,
            "vendor_id": assessment.vendor_id,
            "detected_at": detected_at,
        }),
        detected_at,
        None,
    )?;
    Ok(record)
}

/// Record the response to an open incident, one entry per remediation step.
pub fn respond_incident(
    ledger: &mut Ledger,
    incident: &IncidentRecord,
    responded_at: i64,
    steps: &[String],
) -> Result<IncidentRecord> {
    if incident.responded_at.is_some()
        || find_incident(ledger, &incident.incident_id)
            .map(|i| i.responded_at.is_some())
            .unwrap_or(false)
    {
        return Err(Error::AlreadyResponded(incident.incident_id.clone()));
    }
    if responded_at < incident.detected_at {
        return Err(Error::TimeTravel {
            responded_at,
            detected_at: incident.detected_at,
        });
    }
    let steps: Vec<String> = if steps.is_empty() {
        vec!["response plan executed".to_string()]
    } else {
        steps.to_vec()
    };
    let checkpoint = ledger.entries().len();
    let mut updated = incident.clone();
    updated.responded_at = Some(responded_at);
    let result = (|| -> Result<()> {
        for (seq, step) in steps.iter().enumerate() {
            ledger.append_entry(
                EntryType::IncidentAction,
                json!({
                    "action_kind": "responded",
                    "incident_id": incident.incident_id,
                    "vendor_id": incident.vendor_id,
                    "detected_at": incident.detected_at,
                    "responded_at": responded_at,
                    "step": step,
                    "sequence": seq,
                }),
                responded_at,
                None,
            )?;
            updated.remediation_steps.push((step.clone(), responded_at));
        }
        Ok(())
    })();
    if let Err(e) = result {
        ledger.truncate_entries(checkpoint);
        return Err(e);
    }
    Ok(updated)
}

/// Rebuild an incident's timeline from the ledger.
pub fn find_incident(ledger: &Ledger, incident_id: &str) -> Option<IncidentRecord> {
    let mut record: Option<IncidentRecord> = None;
    for entry in ledger.query(&EntryFilter {
        entry_type: Some(EntryType::IncidentAction),
        ..Default::default()
    }) {
        if entry.payload.get("incident_id").and_then(Value::as_str) != Some(incident_id) {
            continue;
        }
        match entry.payload.get("action_kind").and_then(Value::as_str) {
            Some("detected") => {
                record = Some(IncidentRecord {
                    incident_id: incident_id.to_string(),
                    vendor_id: entry.payload["vendor_id"].as_str()?.to_string(),
                    detected_at: entry.payload["detected_at"].as_i64()?,
                    responded_at: None,
                    remediation_steps: Vec::new(),
                });
            }
            Some("responded") => {
                if let Some(r) = record.as_mut() {
                    r.responded_at = entry.payload["responded_at"].as_i64();
                    if let Some(step) = entry.payload.get("step").and_then(Value::as_str) {
                        r.remediation_steps
                            .push((step.to_string(), entry.timestamp));
                    }
                }
            }
            _ => {}
        }
    }
    record
}

/// The §before/after comparison: vulnerability reduction and mean incident
/// response times partitioned by an explicit cutover timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub vulns_before: u64,
    pub vulns_after: u64,
    pub vuln_reduction_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_response_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_response_after: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response_improvement_fraction: Option<f64>,
}

/// Compute metrics for a vendor as a pure function of the ledger.
pub fn compute_metrics(ledger: &Ledger, vendor_id: &str, cutover_at: i64) -> Result<Metrics> {
    let baseline = ledger
        .query(&EntryFilter {
            entry_type: Some(EntryType::RiskScanRecord),
            vendor_id: Some(vendor_id.to_string()),
            time_range: None,
        })
        .into_iter()
        .next()
        .ok_or_else(|| Error::NoBaselineScan(vendor_id.to_string()))?;
    let vulns_before = baseline
        .payload
        .get("findings")
        .and_then(Value::as_array)
        .map(|f| f.len() as u64)
        .unwrap_or(0);
    let vulns_after = open_vulnerabilities(ledger, vendor_id).len() as u64;
    let vuln_reduction_fraction = if vulns_before > 0 {
        (vulns_before - vulns_after) as f64 / vulns_before as f64
    } else {
        0.0
    };

    // responded incidents partitioned by detection time
    let mut durations_before = Vec::new();
    let mut durations_after = Vec::new();
    let mut seen = BTreeSet::new();
    for entry in ledger.query(&EntryFilter {
        entry_type: Some(EntryType::IncidentAction),
        vendor_id: Some(vendor_id.to_string()),
        time_range: None,
    }) {
        let Some(id) = entry.payload.get("incident_id").and_then(Value::as_str) else {
            continue;
        };
        if !seen.insert(id.to_string()) {
            continue;
        }
        let Some(incident) = find_incident(ledger, id) else {
            continue;
        };
        let Some(responded_at) = incident.responded_at else {
            continue;
        };
        let duration = (responded_at - incident.detected_at) as f64;
        if incident.detected_at < cutover_at {
            durations_before.push(duration);
        } else {
            durations_after.push(duration);
        }
    }
    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            None
        } else {
            Some(xs.iter().sum::<f64>() / xs.len() as f64)
        }
    };
    let mean_response_before = mean(&durations_before);
    let mean_response_after = mean(&durations_after);
    let response_improvement_fraction = match (mean_response_before, mean_response_after) {
        (Some(before), Some(after)) if before > 0.0 => Some((before - after) / before),
        _ => None,
    };
    Ok(Metrics {
        vulns_before,
        vulns_after,
        vuln_reduction_fraction,
        mean_response_before,
        mean_response_after,
        response_improvement_fraction,
    })
}
