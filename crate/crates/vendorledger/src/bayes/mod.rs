//! Bayesian-network engine for zero-day attack-path analysis.
//!
//! Networks are DAGs of discrete variables with conditional probability
//! tables, built from a JSON spec and immutable afterwards. Queries are
//! exact: the joint factorizes over the CPTs, and posteriors are computed by
//! variable elimination ([`inference`]). [`paths`] extracts high-probability
//! attack paths from posterior compromise probabilities.

mod inference;
mod paths;

pub use paths::{extract_attack_paths, AttackPath};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for CPT row sums and distribution normalization.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// One node of a network spec file. `states` defaults to {true, false};
/// CPT rows are keyed by comma-joined parent states in parent order, with
/// the empty key for root nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    #[serde(default = "default_states")]
    pub states: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: BTreeMap<String, BTreeMap<String, f64>>,
}

fn default_states() -> Vec<String> {
    vec!["true".to_string(), "false".to_string()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNode {
    pub name: String,
    pub states: Vec<String>,
    pub parents: Vec<String>,
    /// Row-major table: rows indexed by the mixed-radix combination of
    /// parent state indices (parent order), columns by own state index.
    rows: Vec<Vec<f64>>,
}

impl BayesNode {
    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// Distribution over own states for one parent-state combination.
    pub fn row(&self, row_index: usize) -> &[f64] {
        &self.rows[row_index]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNetwork {
    nodes: Vec<BayesNode>,
    index: HashMap<String, usize>,
}

/// Observed states keyed by node name.
pub type EvidenceSet = BTreeMap<String, String>;
/// A full state assignment, node name → state.
pub type Assignment = BTreeMap<String, String>;

impl BayesNetwork {
    pub fn nodes(&self) -> &[BayesNode] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Result<&BayesNode> {
        self.index
            .get(name)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub(crate) fn node_at(&self, index: usize) -> &BayesNode {
        &self.nodes[index]
    }

    /// parent→child edges by node name.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.nodes
            .iter()
            .flat_map(|n| {
                n.parents
                    .iter()
                    .map(|p| (p.clone(), n.name.clone()))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    fn validate_evidence(&self, evidence: &EvidenceSet) -> Result<()> {
        for (name, state) in evidence {
            let node = self.node(name)?;
            if node.state_index(state).is_none() {
                return Err(Error::UnknownState {
                    node: name.clone(),
                    state: state.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Validate a spec and build an immutable network.
pub fn build_network(spec: &NetworkSpec) -> Result<BayesNetwork> {
    let mut index = HashMap::new();
    for (i, node) in spec.nodes.iter().enumerate() {
        if index.insert(node.name.clone(), i).is_some() {
            return Err(Error::DuplicateNode(node.name.clone()));
        }
    }
    for node in &spec.nodes {
        if node.states.len() < 2 {
            return Err(Error::MalformedCpt {
                node: node.name.clone(),
                reason: "a node needs at least two states".into(),
            });
        }
        for parent in &node.parents {
            if !index.contains_key(parent) {
                return Err(Error::UnknownParent {
                    node: node.name.clone(),
                    parent: parent.clone(),
                });
            }
        }
    }
    // a valid topological order exists iff the graph is acyclic
    topological_order(spec, &index)?;

    let mut nodes = Vec::with_capacity(spec.nodes.len());
    for node_spec in &spec.nodes {
        nodes.push(build_node(node_spec, spec, &index)?);
    }
    Ok(BayesNetwork { nodes, index })
}

fn topological_order(spec: &NetworkSpec, index: &HashMap<String, usize>) -> Result<Vec<usize>> {
    let n = spec.nodes.len();
    let mut indegree = vec![0usize; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, node) in spec.nodes.iter().enumerate() {
        for parent in &node.parents {
            let p = index[parent];
            children[p].push(i);
            indegree[i] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push(c);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n)
            .find(|&i| indegree[i] > 0)
            .expect("a cycle leaves positive indegree");
        return Err(Error::CycleDetected(spec.nodes[stuck].name.clone()));
    }
    Ok(order)
}

fn build_node(
    node_spec: &NodeSpec,
    spec: &NetworkSpec,
    index: &HashMap<String, usize>,
) -> Result<BayesNode> {
    let parent_states: Vec<&[String]> = node_spec
        .parents
        .iter()
        .map(|p| spec.nodes[index[p]].states.as_slice())
        .collect();
    let row_count: usize = parent_states.iter().map(|s| s.len()).product();
    if node_spec.cpt.len() != row_count {
        return Err(Error::MalformedCpt {
            node: node_spec.name.clone(),
            reason: format!(
                "expected {row_count} CPT rows for the parent combinations, found {}",
                node_spec.cpt.len()
            ),
        });
    }
    let mut rows = Vec::with_capacity(row_count);
    for combo in 0..row_count {
        let key = row_key(combo, &parent_states);
        let row = node_spec.cpt.get(&key).ok_or_else(|| Error::MalformedCpt {
            node: node_spec.name.clone(),
            reason: format!("missing CPT row for parent states {key:?}"),
        })?;
        if row.len() != node_spec.states.len() {
            return Err(Error::MalformedCpt {
                node: node_spec.name.clone(),
                reason: format!("row {key:?} has wrong arity"),
            });
        }
        let mut values = Vec::with_capacity(node_spec.states.len());
        let mut sum = 0.0;
        for state in &node_spec.states {
            let p = *row.get(state).ok_or_else(|| Error::MalformedCpt {
                node: node_spec.name.clone(),
                reason: format!("row {key:?} is missing state {state:?}"),
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::MalformedCpt {
                    node: node_spec.name.clone(),
                    reason: format!("probability {p} outside [0,1] in row {key:?}"),
                });
            }
            sum += p;
            values.push(p);
        }
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::MalformedCpt {
                node: node_spec.name.clone(),
                reason: format!("row {key:?} sums to {sum}, not 1"),
            });
        }
        rows.push(values);
    }
    Ok(BayesNode {
        name: node_spec.name.clone(),
        states: node_spec.states.clone(),
        parents: node_spec.parents.clone(),
        rows,
    })
}

/// The comma-joined parent-state key for the `combo`-th parent combination,
/// mixed-radix with the last parent varying fastest.
fn row_key(combo: usize, parent_states: &[&[String]]) -> String {
    let mut indices = vec![0usize; parent_states.len()];
    let mut rest = combo;
    for i in (0..parent_states.len()).rev() {
        indices[i] = rest % parent_states[i].len();
        rest /= parent_states[i].len();
    }
    indices
        .iter()
        .zip(parent_states)
        .map(|(&i, states)| states[i].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn cpt_row_index(
    network: &BayesNetwork,
    node: &BayesNode,
    assignment_of: impl Fn(&str) -> usize,
) -> usize {
    let mut row = 0usize;
    for parent in &node.parents {
        let p = network.node(parent).expect("parents resolve");
        row = row * p.states.len() + assignment_of(parent);
    }
    row
}

/// Chain-rule joint probability of a full assignment.
pub fn joint_probability(network: &BayesNetwork, assignment: &Assignment) -> Result<f64> {
    let mut state_of = HashMap::new();
    for node in network.nodes() {
        let state = assignment
            .get(&node.name)
            .ok_or_else(|| Error::IncompleteAssignment(node.name.clone()))?;
        let idx = node.state_index(state).ok_or_else(|| Error::UnknownState {
            node: node.name.clone(),
            state: state.clone(),
        })?;
        state_of.insert(node.name.clone(), idx);
    }
    let mut product = 1.0;
    for node in network.nodes() {
        let row = cpt_row_index(network, node, |name| state_of[name]);
        product *= node.row(row)[state_of[&node.name]];
    }
    Ok(product)
}

/// Exact conditional distribution P(query | evidence) over the query node's
/// states, by variable elimination with a min-degree ordering.
pub fn posterior(
    network: &BayesNetwork,
    query: &str,
    evidence: &EvidenceSet,
) -> Result<BTreeMap<String, f64>> {
    network.node(query)?;
    network.validate_evidence(evidence)?;
    if evidence.contains_key(query) {
        return Err(Error::QueryIsEvidence(query.to_string()));
    }
    inference::posterior_by_elimination(network, query, evidence)
}

/// Posterior probability of the designated compromised state for every
/// non-evidence node.
pub fn posterior_compromise_map(
    network: &BayesNetwork,
    evidence: &EvidenceSet,
    compromised_state_name: &str,
) -> Result<BTreeMap<String, f64>> {
    network.validate_evidence(evidence)?;
    let mut map = BTreeMap::new();
    for node in network.nodes() {
        if evidence.contains_key(&node.name) {
            continue;
        }
        if node.state_index(compromised_state_name).is_none() {
            return Err(Error::MissingCompromisedState(
                node.name.clone(),
                compromised_state_name.to_string(),
            ));
        }
        let dist = posterior(network, &node.name, evidence)?;
        map.insert(node.name.clone(), dist[compromised_state_name]);
    }
    Ok(map)
}

/// Parse a network spec from JSON text.
pub fn parse_spec(text: &str) -> Result<NetworkSpec> {
    Ok(serde_json::from_str(text)?)
}
