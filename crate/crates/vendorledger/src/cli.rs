//! Command-line front end. Every subcommand delegates to one library
//! operation; the binary in `src/main.rs` is a thin wrapper around
//! [`run_from_env`].
//!
//! Exit codes: 0 success, 1 domain error (one diagnostic line on stderr),
//! 2 usage error. With `--format json` the output stream carries exactly
//! one JSON document with sorted keys.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::assessment::{self, AccessVerification, Assessment, AssessmentState, RiskScanRecord};
use crate::bayes;
use crate::contracts::{self, Attestation, ContractSpec};
use crate::error::{Error, Result};
use crate::ledger::{EntryFilter, EntryType, Ledger, VerificationReport};
use crate::monitor::{self, MonitoringAlert};
use crate::registry::{self, builtin_catalog, PublicKey, VendorKey, ED25519};
use crate::scenario::{self, Scenario};

pub const LEDGER_PATH_ENV: &str = "VENDORLEDGER_PATH";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "vendorledger",
    version,
    about = "Tamper-evident vendor risk-management ledger"
)]
struct Cli {
    /// Ledger file (defaults to $VENDORLEDGER_PATH)
    #[arg(long, global = true)]
    ledger: Option<PathBuf>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Timestamp in Unix seconds for appended entries; defaults to the
    /// newest ledger timestamp so runs stay deterministic
    #[arg(long, global = true)]
    at: Option<i64>,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Create an empty ledger with its genesis block
    Init,
    /// Derive a deterministic vendor keypair from a seed
    Keygen {
        #[arg(long)]
        seed: String,
    },
    /// Register a vendor identity on the ledger
    Register {
        #[arg(long)]
        display_name: String,
        /// Derive the key from a seed…
        #[arg(long, conflicts_with = "public_key")]
        seed: Option<String>,
        /// …or register a raw hex-encoded ed25519 public key
        #[arg(long)]
        public_key: Option<String>,
    },
    /// Deploy a compliance contract from a spec file
    DeployContract { spec_file: PathBuf },
    /// Anchor an evidence document, starting the assessment if needed
    SubmitDoc {
        #[arg(long)]
        assessment: String,
        /// Vendor key seed, used to authenticate the assessment
        #[arg(long)]
        seed: String,
        #[arg(long)]
        doc_type: String,
        #[arg(long)]
        content_file: PathBuf,
    },
    /// Evaluate a deployed contract against an attestation file
    CheckCompliance {
        #[arg(long)]
        assessment: String,
        #[arg(long)]
        contract: String,
        #[arg(long)]
        attestations: PathBuf,
    },
    /// Record a risk scan from a scan-record file
    RecordScan {
        #[arg(long)]
        assessment: String,
        #[arg(long)]
        scan: PathBuf,
    },
    /// Record an access-control verification from a file
    VerifyAccess {
        #[arg(long)]
        assessment: String,
        #[arg(long)]
        access: PathBuf,
    },
    /// Continuous-monitoring operations
    #[command(subcommand)]
    Monitor(MonitorCommand),
    /// Incident lifecycle operations
    #[command(subcommand)]
    Incident(IncidentCommand),
    /// Before/after metrics for a vendor
    Metrics {
        #[arg(long)]
        vendor: String,
        #[arg(long)]
        cutover: i64,
    },
    /// Seal pending entries into a block
    Seal,
    /// Verify the hash chain, blocks, and signatures of the ledger file
    Verify,
    /// Produce a Merkle inclusion proof for a sealed entry
    Prove {
        #[arg(long)]
        entry: u64,
    },
    /// List ledger entries, optionally filtered
    Query {
        #[arg(long)]
        entry_type: Option<String>,
        #[arg(long)]
        vendor: Option<String>,
        #[arg(long)]
        from: Option<i64>,
        #[arg(long)]
        to: Option<i64>,
    },
    /// Bayesian-network operations
    #[command(subcommand)]
    Bayes(BayesCommand),
    /// Replay a recorded case-study scenario and report its metrics
    Simulate { scenario_file: PathBuf },
    /// Print the built-in security-control catalog
    Catalog,
    /// Re-run a recorded command script deterministically
    Replay { script_file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum MonitorCommand {
    /// Record a monitoring alert from an alert file
    Ingest {
        #[arg(long)]
        assessment: String,
        #[arg(long)]
        alert: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum IncidentCommand {
    Open {
        #[arg(long)]
        assessment: String,
        #[arg(long)]
        incident: String,
        #[arg(long)]
        detected_at: i64,
    },
    Respond {
        #[arg(long)]
        incident: String,
        #[arg(long)]
        responded_at: i64,
        /// Remediation steps; a default step is recorded when omitted
        #[arg(long = "step")]
        steps: Vec<String>,
    },
}

#[derive(Debug, Args)]
struct BayesNetArgs {
    network_file: PathBuf,
    /// Observed states as Name=state, repeatable
    #[arg(long = "evidence")]
    evidence: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum BayesCommand {
    /// Validate a network spec file
    Build { network_file: PathBuf },
    /// Posterior distribution of one node given evidence
    Query {
        #[command(flatten)]
        net: BayesNetArgs,
        #[arg(long)]
        node: String,
    },
    /// Extract high-probability attack paths
    Paths {
        #[command(flatten)]
        net: BayesNetArgs,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value = "true")]
        compromised_state: String,
    },
}

/// Entry point for the binary: real process arguments, stdout/stderr, env.
pub fn run_from_env() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    run(&args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Testable entry point. `args` includes the program name.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let rendered = err.render().to_string();
            if err.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            1
        }
    }
}

struct Report {
    text: String,
    json: Value,
}

fn emit(cli: &Cli, stdout: &mut dyn Write, report: Report) -> Result<()> {
    match cli.format {
        OutputFormat::Text => writeln!(stdout, "{}", report.text)?,
        // serde_json object keys are sorted, so this is the canonical form
        OutputFormat::Json => writeln!(stdout, "{}", serde_json::to_string(&report.json)?)?,
    }
    Ok(())
}

fn ledger_path(cli: &Cli) -> Result<PathBuf> {
    if let Some(path) = &cli.ledger {
        return Ok(path.clone());
    }
    match std::env::var_os(LEDGER_PATH_ENV) {
        Some(path) => Ok(PathBuf::from(path)),
        None => Err(Error::Invalid(format!(
            "no ledger path: pass --ledger or set {LEDGER_PATH_ENV}"
        ))),
    }
}

fn load_ledger(path: &Path) -> Result<Ledger> {
    if !path.exists() {
        return Err(Error::Invalid(format!(
            "ledger file {} does not exist; run init first",
            path.display()
        )));
    }
    Ledger::load(path)
}

/// Explicit `--at` wins; otherwise reuse the newest ledger timestamp so the
/// monotonic-timestamp rule holds and reruns are reproducible.
fn effective_at(cli: &Cli, ledger: &Ledger) -> i64 {
    cli.at.unwrap_or_else(|| {
        ledger
            .entries()
            .last()
            .map(|e| e.timestamp)
            .unwrap_or_default()
            .max(0)
    })
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn parse_evidence(pairs: &[String]) -> Result<bayes::EvidenceSet> {
    let mut evidence = BTreeMap::new();
    for pair in pairs {
        let (name, state) = pair.split_once('=').ok_or_else(|| {
            Error::Invalid(format!("evidence {pair:?} is not of the form Name=state"))
        })?;
        evidence.insert(name.to_string(), state.to_string());
    }
    Ok(evidence)
}

fn load_assessment(ledger: &Ledger, assessment_id: &str) -> Result<Assessment> {
    assessment::reconstruct(ledger, assessment_id)
        .ok_or_else(|| Error::Invalid(format!("assessment {assessment_id} has no ledger entries")))
}

/// A reconstructed assessment parks at AccessVerified; monitoring commands
/// advance it through the explicit transition.
fn monitoring_assessment(ledger: &Ledger, assessment_id: &str) -> Result<Assessment> {
    let mut assessment = load_assessment(ledger, assessment_id)?;
    if assessment.state == AssessmentState::AccessVerified {
        assessment::enter_monitoring(&mut assessment)?;
    }
    Ok(assessment)
}

fn verification_report(report: &VerificationReport) -> Report {
    let text = match (&report.ok, &report.first_violation) {
        (true, _) => "ok".to_string(),
        (false, Some(v)) => format!("tampered: {:?} at {}", v.kind, v.location),
        (false, None) => "tampered".to_string(),
    };
    Report {
        text,
        json: json!({
            "ok": report.ok,
            "first_violation": report.first_violation.as_ref().map(|v| json!({
                "location": v.location,
                "kind": format!("{:?}", v.kind),
            })),
        }),
    }
}

fn percent(fraction: f64) -> i64 {
    (fraction * 100.0).round() as i64
}

fn metrics_report(metrics: &monitor::Metrics, vendor_id: &str) -> Report {
    let mut lines = vec![format!(
        "vulnerability reduction: {}% ({} -> {})",
        percent(metrics.vuln_reduction_fraction),
        metrics.vulns_before,
        metrics.vulns_after
    )];
    if let Some(improvement) = metrics.response_improvement_fraction {
        lines.push(format!(
            "response-time improvement: {}% ({:.0} s -> {:.0} s mean)",
            percent(improvement),
            metrics.mean_response_before.unwrap_or_default(),
            metrics.mean_response_after.unwrap_or_default()
        ));
    }
    Report {
        text: lines.join("\n"),
        json: json!({
            "vendor_id": vendor_id,
            "metrics": serde_json::to_value(metrics).unwrap_or(Value::Null),
        }),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        CliCommand::Init => {
            let path = ledger_path(cli)?;
            if path.exists() {
                return Err(Error::Invalid(format!(
                    "ledger file {} already exists",
                    path.display()
                )));
            }
            let ledger = Ledger::genesis(cli.at.unwrap_or(0));
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!("initialized ledger at {}", path.display()),
                    json: json!({"initialized": path.display().to_string()}),
                },
            )
        }
        CliCommand::Keygen { seed } => {
            let key = VendorKey::from_seed(seed);
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "vendor_id: {}\npublic_key: {}\nsecret_key: {}",
                        key.vendor_id(),
                        key.public_key().key,
                        key.secret_hex()
                    ),
                    json: json!({
                        "vendor_id": key.vendor_id(),
                        "scheme": ED25519,
                        "public_key": key.public_key().key,
                        "secret_key": key.secret_hex(),
                    }),
                },
            )
        }
        CliCommand::Register {
            display_name,
            seed,
            public_key,
        } => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let at = effective_at(cli, &ledger);
            let key = match (seed, public_key) {
                (Some(seed), _) => VendorKey::from_seed(seed).public_key(),
                (None, Some(hex_key)) => PublicKey {
                    scheme: ED25519.to_string(),
                    key: hex_key.clone(),
                },
                (None, None) => {
                    return Err(Error::Invalid(
                        "register needs --seed or --public-key".into(),
                    ))
                }
            };
            let identity = registry::register_vendor(&mut ledger, &key, display_name, at)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!("registered {}", identity.vendor_id),
                    json: json!({"registered": identity.vendor_id}),
                },
            )
        }
        CliCommand::DeployContract { spec_file } => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let at = effective_at(cli, &ledger);
            let spec: ContractSpec = read_json_file(spec_file)?;
            let contract = contracts::deploy_contract(&mut ledger, builtin_catalog(), &spec, at)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "deployed {} requiring {} control(s)",
                        contract.contract_id,
                        contract.required_controls.len()
                    ),
                    json: json!({"deployed": contract.contract_id}),
                },
            )
        }
        CliCommand::SubmitDoc {
            assessment,
            seed,
            doc_type,
            content_file,
        } => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let at = effective_at(cli, &ledger);
            let key = VendorKey::from_seed(seed);
            let identity = registry::find_identity(&ledger, &key.vendor_id())
                .ok_or_else(|| Error::VendorNotRegistered(key.vendor_id()))?;
            let mut state = match assessment::reconstruct(&ledger, assessment) {
                Some(existing) => existing,
                None => {
                    let challenge = assessment.as_bytes();
                    let signature = key.sign(challenge);
                    assessment::start_assessment(
                        &ledger, &identity, assessment, challenge, &signature, at,
                    )?
                }
            };
            let content = std::fs::read(content_file)?;
            let entry =
                assessment::submit_document(&mut ledger, &mut state, doc_type, &content, at)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "anchored {} for {} at entry {}",
                        doc_type, assessment, entry.index
                    ),
                    json: json!({
                        "assessment_id": assessment,
                        "entry_index": entry.index,
                        "content_hash": entry.payload["content_hash"],
                    }),
                },
            )
        }
        CliCommand::CheckCompliance {
            assessment,
            contract,
            attestations,
        } => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let at = effective_at(cli, &ledger);
            let contract = contracts::find_contract(&ledger, contract)
                .ok_or_else(|| Error::Invalid(format!("contract {contract} is not deployed")))?;
            let attestations: Vec<Attestation> = read_json_file(attestations)?;
            let mut state = load_assessment(&ledger, assessment)?;
            let verdict = assessment::run_compliance_check(
                &mut ledger,
                &mut state,
                &contract,
                &attestations,
                at,
            )?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "verdict: {:?} ({} discrepancies)",
                        verdict.outcome,
                        verdict.discrepancies.len()
                    ),
                    json: serde_json::to_value(&verdict)?,
                },
            )
        }
        CliCommand::RecordScan { assessment, scan } => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let record: RiskScanRecord = read_json_file(scan)?;
            let mut state = load_assessment(&ledger, assessment)?;
            assessment::record_risk_scan(&mut ledger, &mut state, &record)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!("recorded scan with {} finding(s)", record.findings.len()),
                    json: json!({
                        "assessment_id": assessment,
                        "findings": record.findings.len(),
                    }),
                },
            )
        }
        CliCommand::VerifyAccess { assessment, access } => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let verification: AccessVerification = read_json_file(access)?;
            let passed = verification.passes();
            let mut state = load_assessment(&ledger, assessment)?;
            assessment::verify_access_controls(&mut ledger, &mut state, &verification)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "access verification {}",
                        if passed {
                            "passed"
                        } else {
                            "failed; state unchanged"
                        }
                    ),
                    json: json!({"assessment_id": assessment, "passed": passed}),
                },
            )
        }
        CliCommand::Monitor(MonitorCommand::Ingest { assessment, alert }) => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let alert: MonitoringAlert = read_json_file(alert)?;
            let state = monitoring_assessment(&ledger, assessment)?;
            let entry = monitor::ingest_alert(&mut ledger, &state, &alert)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!("ingested alert at entry {}", entry.index),
                    json: json!({"entry_index": entry.index}),
                },
            )
        }
        CliCommand::Incident(IncidentCommand::Open {
            assessment,
            incident,
            detected_at,
        }) => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let state = monitoring_assessment(&ledger, assessment)?;
            let record = monitor::open_incident(&mut ledger, &state, incident, *detected_at)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!("opened incident {}", record.incident_id),
                    json: serde_json::to_value(&record)?,
                },
            )
        }
        CliCommand::Incident(IncidentCommand::Respond {
            incident,
            responded_at,
            steps,
        }) => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let record = monitor::find_incident(&ledger, incident)
                .ok_or_else(|| Error::Invalid(format!("incident {incident} is not recorded")))?;
            let updated = monitor::respond_incident(&mut ledger, &record, *responded_at, steps)?;
            ledger.save(&path)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "responded to {} after {} s",
                        updated.incident_id,
                        responded_at - updated.detected_at
                    ),
                    json: serde_json::to_value(&updated)?,
                },
            )
        }
        CliCommand::Metrics { vendor, cutover } => {
            let path = ledger_path(cli)?;
            let ledger = load_ledger(&path)?;
            let metrics = monitor::compute_metrics(&ledger, vendor, *cutover)?;
            emit(cli, stdout, metrics_report(&metrics, vendor))
        }
        CliCommand::Seal => {
            let path = ledger_path(cli)?;
            let mut ledger = load_ledger(&path)?;
            let at = effective_at(cli, &ledger);
            let block = ledger.seal_block(at)?;
            let report = Report {
                text: format!(
                    "sealed block {} ({} entries)",
                    block.height,
                    block.entry_indices.end - block.entry_indices.start
                ),
                json: json!({"height": block.height, "merkle_root": block.merkle_root}),
            };
            ledger.save(&path)?;
            emit(cli, stdout, report)
        }
        CliCommand::Verify => {
            let path = ledger_path(cli)?;
            let report = Ledger::verify_file(&path);
            let ok = report.ok;
            emit(cli, stdout, verification_report(&report))?;
            if ok {
                Ok(())
            } else {
                Err(Error::Invalid("ledger verification failed".into()))
            }
        }
        CliCommand::Prove { entry } => {
            let path = ledger_path(cli)?;
            let ledger = load_ledger(&path)?;
            let proof = ledger.prove_inclusion(*entry)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "entry {} proven in block {} with a {}-step path",
                        entry,
                        proof.block_height,
                        proof.path.len()
                    ),
                    json: serde_json::to_value(&proof)?,
                },
            )
        }
        CliCommand::Query {
            entry_type,
            vendor,
            from,
            to,
        } => {
            let path = ledger_path(cli)?;
            let ledger = load_ledger(&path)?;
            let entry_type = entry_type
                .as_deref()
                .map(str::parse::<EntryType>)
                .transpose()?;
            let time_range = match (from, to) {
                (None, None) => None,
                (from, to) => Some((from.unwrap_or(i64::MIN), to.unwrap_or(i64::MAX))),
            };
            let filter = EntryFilter {
                entry_type,
                vendor_id: vendor.clone(),
                time_range,
            };
            let entries = ledger.query(&filter);
            let text = entries
                .iter()
                .map(|e| format!("{}\t{}\t{}", e.index, e.timestamp, e.entry_type))
                .collect::<Vec<_>>()
                .join("\n");
            emit(
                cli,
                stdout,
                Report {
                    text,
                    json: json!({"entries": entries}),
                },
            )
        }
        CliCommand::Bayes(BayesCommand::Build { network_file }) => {
            let spec = bayes::parse_spec(&std::fs::read_to_string(network_file)?)?;
            let network = bayes::build_network(&spec)?;
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "valid network: {} node(s), {} edge(s)",
                        network.nodes().len(),
                        network.edges().len()
                    ),
                    json: json!({
                        "nodes": network.nodes().len(),
                        "edges": network.edges().len(),
                    }),
                },
            )
        }
        CliCommand::Bayes(BayesCommand::Query { net, node }) => {
            let spec = bayes::parse_spec(&std::fs::read_to_string(&net.network_file)?)?;
            let network = bayes::build_network(&spec)?;
            let evidence = parse_evidence(&net.evidence)?;
            let dist = bayes::posterior(&network, node, &evidence)?;
            let states = &network.node(node)?.states;
            let text = states
                .iter()
                .map(|s| format!("{s}: {:.6}", dist[s]))
                .collect::<Vec<_>>()
                .join("\n");
            emit(
                cli,
                stdout,
                Report {
                    text,
                    json: json!({"node": node, "posterior": dist}),
                },
            )
        }
        CliCommand::Bayes(BayesCommand::Paths {
            net,
            threshold,
            compromised_state,
        }) => {
            if !(0.0..=1.0).contains(threshold) {
                return Err(Error::Invalid(format!(
                    "threshold {threshold} outside [0, 1]"
                )));
            }
            let spec = bayes::parse_spec(&std::fs::read_to_string(&net.network_file)?)?;
            let network = bayes::build_network(&spec)?;
            let evidence = parse_evidence(&net.evidence)?;
            let paths =
                bayes::extract_attack_paths(&network, &evidence, *threshold, compromised_state)?;
            let text = if paths.is_empty() {
                "no attack paths above threshold".to_string()
            } else {
                paths
                    .iter()
                    .map(|p| format!("{}\tscore {}", p.nodes.join(" -> "), p.score_string()))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            emit(
                cli,
                stdout,
                Report {
                    text,
                    json: json!({"paths": paths}),
                },
            )
        }
        CliCommand::Simulate { scenario_file } => {
            let path = ledger_path(cli)?;
            let scenario = Scenario::from_file(scenario_file)?;
            let outcome = scenario::run_scenario(&scenario)?;
            outcome.ledger.save(&path)?;
            let metrics = metrics_report(&outcome.report.metrics, &outcome.report.vendor_id);
            emit(
                cli,
                stdout,
                Report {
                    text: format!(
                        "scenario complete for vendor {}\n{}",
                        outcome.report.vendor_id, metrics.text
                    ),
                    json: serde_json::to_value(&outcome.report)?,
                },
            )
        }
        CliCommand::Catalog => {
            let catalog = builtin_catalog();
            let controls = &catalog.controls;
            let text = controls
                .iter()
                .map(|c| format!("{}\t{:?}\t{}", c.control_id, c.nist_family, c.threat_name))
                .collect::<Vec<_>>()
                .join("\n");
            emit(
                cli,
                stdout,
                Report {
                    text,
                    json: json!({"controls": controls}),
                },
            )
        }
        CliCommand::Replay { script_file } => {
            let script: Vec<Vec<String>> = read_json_file(script_file)?;
            let mut outputs = Vec::new();
            for (step, argv) in script.iter().enumerate() {
                // deterministic timestamp counter: later flags override it
                let mut args = vec![
                    "vendorledger".to_string(),
                    "--at".to_string(),
                    (1_000 + 10 * step as i64).to_string(),
                ];
                if let Some(path) = &cli.ledger {
                    args.push("--ledger".to_string());
                    args.push(path.display().to_string());
                }
                args.extend(argv.iter().cloned());
                let mut step_out = Vec::new();
                let mut step_err = Vec::new();
                let code = run(&args, &mut step_out, &mut step_err);
                if code != 0 {
                    return Err(Error::Invalid(format!(
                        "replay step {step} exited {code}: {}",
                        String::from_utf8_lossy(&step_err).trim()
                    )));
                }
                outputs.push(String::from_utf8_lossy(&step_out).trim_end().to_string());
            }
            emit(
                cli,
                stdout,
                Report {
                    text: format!("replayed {} step(s)", script.len()),
                    json: json!({"steps": script.len(), "outputs": outputs}),
                },
            )
        }
    }
}
