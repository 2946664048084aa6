//! Attack-path extraction from posterior compromise probabilities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{posterior_compromise_map, BayesNetwork, EvidenceSet};

/// A directed chain of high-probability nodes, scored by the product of
/// their posterior compromise probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackPath {
    pub nodes: Vec<String>,
    pub score: f64,
}

impl AttackPath {
    /// The score as a fixed-point decimal string, safe to embed in hashed
    /// ledger payloads, which reject floats.
    pub fn score_string(&self) -> String {
        format!("{:.12}", self.score)
    }
}

/// Candidate nodes are those whose posterior compromise probability reaches
/// `threshold`; evidence nodes observed in the compromised state count with
/// probability 1 and other-state evidence nodes are excluded. The result is
/// every maximal directed path through the induced subgraph, sorted by score
/// descending with lexicographic node-sequence tie-break.
pub fn extract_attack_paths(
    network: &BayesNetwork,
    evidence: &EvidenceSet,
    threshold: f64,
    compromised_state_name: &str,
) -> Result<Vec<AttackPath>> {
    let posteriors = posterior_compromise_map(network, evidence, compromised_state_name)?;
    let mut probability: BTreeMap<String, f64> = BTreeMap::new();
    for (name, state) in evidence {
        if state == compromised_state_name {
            probability.insert(name.clone(), 1.0);
        }
    }
    probability.extend(posteriors);

    let candidates: BTreeMap<&str, f64> = probability
        .iter()
        .filter(|(_, &p)| p >= threshold)
        .map(|(name, &p)| (name.as_str(), p))
        .collect();

    // induced subgraph over the candidates
    let mut children: BTreeMap<&str, Vec<&str>> =
        candidates.keys().map(|&n| (n, Vec::new())).collect();
    let mut has_incoming: BTreeMap<&str, bool> = candidates.keys().map(|&n| (n, false)).collect();
    let edges = network.edges();
    for (parent, child) in &edges {
        if candidates.contains_key(parent.as_str()) && candidates.contains_key(child.as_str()) {
            children
                .get_mut(parent.as_str())
                .unwrap()
                .push(child.as_str());
            *has_incoming.get_mut(child.as_str()).unwrap() = true;
        }
    }

    // walk every path from a source; the network is a DAG, so recursion ends
    let mut paths = Vec::new();
    for (&source, &incoming) in &has_incoming {
        if !incoming {
            let mut current = vec![source];
            collect_maximal(&children, &mut current, &mut paths);
        }
    }

    let mut scored: Vec<AttackPath> = paths
        .into_iter()
        .map(|nodes| AttackPath {
            score: nodes.iter().map(|n| candidates[n.as_str()]).product(),
            nodes,
        })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.nodes.cmp(&b.nodes))
    });
    Ok(scored)
}

fn collect_maximal<'a>(
    children: &BTreeMap<&'a str, Vec<&'a str>>,
    current: &mut Vec<&'a str>,
    out: &mut Vec<Vec<String>>,
) {
    let tail = *current.last().expect("paths start non-empty");
    let next = &children[tail];
    if next.is_empty() {
        out.push(current.iter().map(|s| s.to_string()).collect());
        return;
    }
    for &child in next {
        current.push(child);
        collect_maximal(children, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::tests::alarm_fixture;
    use crate::bayes::{build_network, parse_spec, PROB_TOLERANCE};
    use serde_json::json;

    fn evidence(pairs: &[(&str, &str)]) -> EvidenceSet {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn no_certain_nodes_at_threshold_one() {
        let net = alarm_fixture();
        let paths = extract_attack_paths(&net, &EvidenceSet::new(), 1.0, "true").unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn fixture_single_path() {
        let net = alarm_fixture();
        let ev = evidence(&[("Alarm", "true")]);
        let paths = extract_attack_paths(&net, &ev, 0.5, "true").unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].nodes, vec!["Alarm", "Burglary"]);
        assert!((paths[0].score - 0.9).abs() < PROB_TOLERANCE);
        assert_eq!(paths[0].score_string(), "0.900000000000");
    }

    #[test]
    fn other_state_evidence_is_excluded() {
        let net = alarm_fixture();
        let ev = evidence(&[("Alarm", "false")]);
        // Alarm is out; Burglary's posterior (0.01) misses the threshold
        let paths = extract_attack_paths(&net, &ev, 0.5, "true").unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn threshold_zero_covers_all_nodes() {
        let net = alarm_fixture();
        let paths = extract_attack_paths(&net, &EvidenceSet::new(), 0.0, "true").unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].nodes, vec!["Alarm", "Burglary"]);
    }

    fn two_branch_fixture() -> BayesNetwork {
        // Root → {Left, Right}; Left → Leaf. High CPTs everywhere so the
        // whole graph passes a 0.5 threshold once Root is observed.
        let spec = parse_spec(
            &json!({
                "nodes": [
                    {"name": "Root", "cpt": {"": {"true": 0.3, "false": 0.7}}},
                    {"name": "Left", "parents": ["Root"], "cpt": {
                        "true": {"true": 0.9, "false": 0.1},
                        "false": {"true": 0.1, "false": 0.9}
                    }},
                    {"name": "Right", "parents": ["Root"], "cpt": {
                        "true": {"true": 0.8, "false": 0.2},
                        "false": {"true": 0.05, "false": 0.95}
                    }},
                    {"name": "Leaf", "parents": ["Left"], "cpt": {
                        "true": {"true": 0.7, "false": 0.3},
                        "false": {"true": 0.02, "false": 0.98}
                    }},
                    {"name": "Stray", "cpt": {"": {"true": 0.2, "false": 0.8}}}
                ]
            })
            .to_string(),
        )
        .unwrap();
        build_network(&spec).unwrap()
    }

    /// Brute-force oracle: enumerate every directed path in the induced
    /// subgraph and keep those that no longer path strictly contains.
    fn enumerate_maximal_paths(net: &BayesNetwork, candidates: &[&str]) -> Vec<Vec<String>> {
        let edges: Vec<(String, String)> = net
            .edges()
            .into_iter()
            .filter(|(a, b)| candidates.contains(&a.as_str()) && candidates.contains(&b.as_str()))
            .collect();
        let mut all: Vec<Vec<String>> = Vec::new();
        // grow paths breadth-first from every single node
        let mut frontier: Vec<Vec<String>> =
            candidates.iter().map(|&n| vec![n.to_string()]).collect();
        while let Some(path) = frontier.pop() {
            let tail = path.last().unwrap();
            let extensions: Vec<&(String, String)> =
                edges.iter().filter(|(a, _)| a == tail).collect();
            all.push(path.clone());
            for (_, b) in extensions {
                let mut longer = path.clone();
                longer.push(b.clone());
                frontier.push(longer);
            }
        }
        let is_subpath =
            |short: &[String], long: &[String]| long.windows(short.len()).any(|w| w == short);
        let mut maximal: Vec<Vec<String>> = all
            .iter()
            .filter(|p| !all.iter().any(|q| q.len() > p.len() && is_subpath(p, q)))
            .cloned()
            .collect();
        maximal.sort();
        maximal.dedup();
        maximal
    }

    #[test]
    fn two_branch_fixture_matches_path_enumeration() {
        let net = two_branch_fixture();
        let ev = evidence(&[("Root", "true")]);
        let got = extract_attack_paths(&net, &ev, 0.5, "true").unwrap();

        let map = posterior_compromise_map(&net, &ev, "true").unwrap();
        let mut candidates: Vec<&str> = map
            .iter()
            .filter(|(_, &p)| p >= 0.5)
            .map(|(n, _)| n.as_str())
            .collect();
        candidates.push("Root");
        candidates.sort();

        let mut got_nodes: Vec<Vec<String>> = got.iter().map(|p| p.nodes.clone()).collect();
        got_nodes.sort();
        assert_eq!(got_nodes, enumerate_maximal_paths(&net, &candidates));

        // with Root observed: Left 0.9, Right 0.8, Leaf 0.7·0.9 + 0.02·0.1
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].nodes, vec!["Root", "Right"]);
        assert!((got[0].score - 0.8).abs() < PROB_TOLERANCE);
        assert_eq!(got[1].nodes, vec!["Root", "Left", "Leaf"]);
        let leaf = 0.7 * 0.9 + 0.02 * 0.1;
        assert!((got[1].score - 0.9 * leaf).abs() < PROB_TOLERANCE);
    }

    #[test]
    fn raising_threshold_never_adds_paths() {
        let net = two_branch_fixture();
        let ev = evidence(&[("Root", "true")]);
        let mut last_node_count = usize::MAX;
        for t in [0.0, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let paths = extract_attack_paths(&net, &ev, t, "true").unwrap();
            let mut nodes: Vec<&String> = paths.iter().flat_map(|p| &p.nodes).collect();
            nodes.sort();
            nodes.dedup();
            assert!(nodes.len() <= last_node_count);
            last_node_count = nodes.len();
        }
    }
}
