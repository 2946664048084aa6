//! Exact inference by variable elimination.
//!
//! CPTs become factors, evidence restricts them, and hidden variables are
//! summed out one at a time following a min-degree ordering over the factor
//! interaction graph. The surviving factors multiply into an unnormalized
//! distribution over the query variable; its normalizer is P(evidence).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

use super::{cpt_row_index, BayesNetwork, EvidenceSet, PROB_TOLERANCE};

/// A table over a set of variables (identified by node index), row-major
/// with the last variable varying fastest.
#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn size(&self) -> usize {
        self.cards.iter().product()
    }

    fn value_at(&self, states: &HashMap<usize, usize>) -> f64 {
        let mut idx = 0;
        for (var, card) in self.vars.iter().zip(&self.cards) {
            idx = idx * card + states[var];
        }
        self.values[idx]
    }

    /// Fix `var` to `state`, dropping it from the scope.
    fn restrict(&self, var: usize, state: usize) -> Factor {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("restrict only on in-scope variables");
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut out = Factor {
            vars,
            cards,
            values: Vec::new(),
        };
        out.values = vec![0.0; out.size().max(1)];
        for (flat, value) in self.values.iter().enumerate() {
            let assignment = self.unflatten(flat);
            if assignment[pos] != state {
                continue;
            }
            let mut reduced = assignment;
            reduced.remove(pos);
            let idx = out.flatten(&reduced);
            out.values[idx] = *value;
        }
        out
    }

    fn multiply(&self, other: &Factor, card_of: &impl Fn(usize) -> usize) -> Factor {
        let mut vars: Vec<usize> = self.vars.clone();
        for &v in &other.vars {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.sort_unstable();
        let cards: Vec<usize> = vars.iter().map(|&v| card_of(v)).collect();
        let mut out = Factor {
            vars,
            cards,
            values: Vec::new(),
        };
        let size = out.size().max(1);
        let mut values = Vec::with_capacity(size);
        for flat in 0..size {
            let assignment = out.unflatten(flat);
            let states: HashMap<usize, usize> = out
                .vars
                .iter()
                .copied()
                .zip(assignment.iter().copied())
                .collect();
            values.push(self.value_at(&states) * other.value_at(&states));
        }
        out.values = values;
        out
    }

    /// Sum `var` out of the scope.
    fn marginalize(&self, var: usize) -> Factor {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("marginalize only on in-scope variables");
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut out = Factor {
            vars,
            cards,
            values: Vec::new(),
        };
        out.values = vec![0.0; out.size().max(1)];
        for (flat, value) in self.values.iter().enumerate() {
            let mut assignment = self.unflatten(flat);
            assignment.remove(pos);
            let idx = out.flatten(&assignment);
            out.values[idx] += value;
        }
        out
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.vars.len()];
        for i in (0..self.vars.len()).rev() {
            out[i] = flat % self.cards[i];
            flat /= self.cards[i];
        }
        out
    }

    fn flatten(&self, assignment: &[usize]) -> usize {
        let mut idx = 0;
        for (i, card) in self.cards.iter().enumerate() {
            idx = idx * card + assignment[i];
        }
        idx
    }
}

/// Min-degree elimination ordering over the variables in `hidden`, using the
/// interaction graph induced by the factor scopes.
fn min_degree_order(factors: &[Factor], hidden: &BTreeSet<usize>) -> Vec<usize> {
    let mut adjacency: HashMap<usize, BTreeSet<usize>> =
        hidden.iter().map(|&v| (v, BTreeSet::new())).collect();
    let connect = |adj: &mut HashMap<usize, BTreeSet<usize>>, scope: &[usize]| {
        for &a in scope {
            for &b in scope {
                if a != b {
                    if let Some(set) = adj.get_mut(&a) {
                        set.insert(b);
                    }
                }
            }
        }
    };
    for factor in factors {
        connect(&mut adjacency, &factor.vars);
    }
    let mut remaining = hidden.clone();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let &next = remaining
            .iter()
            .min_by_key(|&&v| {
                let degree = adjacency[&v]
                    .iter()
                    .filter(|n| remaining.contains(n))
                    .count();
                (degree, v)
            })
            .expect("remaining is non-empty");
        // eliminating `next` connects its live neighbors into a clique
        let neighbors: Vec<usize> = adjacency[&next]
            .iter()
            .copied()
            .filter(|n| remaining.contains(n) && *n != next)
            .collect();
        connect(&mut adjacency, &neighbors);
        remaining.remove(&next);
        order.push(next);
    }
    order
}

pub(super) fn posterior_by_elimination(
    network: &BayesNetwork,
    query: &str,
    evidence: &EvidenceSet,
) -> Result<BTreeMap<String, f64>> {
    let query_idx = network.node_index(query)?;
    let card_of = |v: usize| network.node_at(v).states.len();

    let evidence_states: HashMap<usize, usize> = evidence
        .iter()
        .map(|(name, state)| {
            let idx = network.node_index(name)?;
            let s = network
                .node_at(idx)
                .state_index(state)
                .expect("evidence validated by the caller");
            Ok((idx, s))
        })
        .collect::<Result<_>>()?;

    // one factor per CPT, restricted by the evidence
    let mut factors: Vec<Factor> = Vec::with_capacity(network.nodes().len());
    for (i, node) in network.nodes().iter().enumerate() {
        let mut vars: Vec<usize> = node
            .parents
            .iter()
            .map(|p| network.node_index(p).expect("parents resolve"))
            .collect();
        vars.push(i);
        vars.sort_unstable();
        let cards: Vec<usize> = vars.iter().map(|&v| card_of(v)).collect();
        let mut factor = Factor {
            vars,
            cards,
            values: Vec::new(),
        };
        let size = factor.size();
        let mut values = Vec::with_capacity(size);
        for flat in 0..size {
            let assignment = factor.unflatten(flat);
            let states: HashMap<usize, usize> = factor
                .vars
                .iter()
                .copied()
                .zip(assignment.iter().copied())
                .collect();
            let row = cpt_row_index(network, node, |name| {
                states[&network.node_index(name).expect("parents resolve")]
            });
            values.push(node.row(row)[states[&i]]);
        }
        factor.values = values;
        for (&var, &state) in &evidence_states {
            if factor.vars.contains(&var) {
                factor = factor.restrict(var, state);
            }
        }
        factors.push(factor);
    }

    let hidden: BTreeSet<usize> = (0..network.nodes().len())
        .filter(|&v| v != query_idx && !evidence_states.contains_key(&v))
        .collect();
    for var in min_degree_order(&factors, &hidden) {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&var));
        let product = touching
            .into_iter()
            .reduce(|a, b| a.multiply(&b, &card_of))
            .expect("every CPT factor mentions its own node");
        factors = rest;
        factors.push(product.marginalize(var));
    }

    let result = factors
        .into_iter()
        .reduce(|a, b| a.multiply(&b, &card_of))
        .expect("the query factor survives elimination");
    debug_assert_eq!(result.vars, vec![query_idx]);

    let normalizer: f64 = result.values.iter().sum();
    if normalizer <= PROB_TOLERANCE {
        return Err(Error::ZeroProbabilityEvidence);
    }
    let states = &network.node_at(query_idx).states;
    Ok(states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), result.values[i] / normalizer))
        .collect())
}
