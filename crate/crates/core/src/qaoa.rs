//! Max-Cut QAOA circuit construction and cost bookkeeping.
//!
//! The ansatz alternates a cost layer (one cx-rz-cx group per graph
//! edge, tagged with a group id) and a mixer layer (rx on every qubit,
//! lowered to the rz/sx basis). Classical bit i always receives qubit i,
//! so histogram keys read as qubit assignments directly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxCutGraph {
    pub n: usize,
    pub edges: Vec<GraphEdge>,
}

impl MaxCutGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let g = MaxCutGraph {
            n,
            edges: edges
                .into_iter()
                .map(|(u, v, weight)| GraphEdge { u, v, weight })
                .collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: MaxCutGraph =
            serde_json::from_str(text).map_err(|e| Error::GraphSchema(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::GraphSchema("graph has no vertices".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.edges {
            if e.u >= self.n || e.v >= self.n {
                return Err(Error::GraphSchema(format!(
                    "edge ({}, {}) outside 0..{}",
                    e.u, e.v, self.n
                )));
            }
            if e.u == e.v {
                return Err(Error::GraphSchema(format!("self-loop on {}", e.u)));
            }
            if !e.weight.is_finite() {
                return Err(Error::GraphSchema(format!(
                    "non-finite weight on ({}, {})",
                    e.u, e.v
                )));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::GraphSchema(format!(
                    "duplicate edge ({}, {})",
                    e.u, e.v
                )));
            }
        }
        Ok(())
    }
}

/// Builds the depth-p ansatz. Every cost group [cx, rz(2 gamma w), cx]
/// carries group id `rep * |edges| + edge_index`; mixers and the h and
/// measure fringes are untagged.
pub fn build_qaoa(graph: &MaxCutGraph, gammas: &[f64], betas: &[f64]) -> Result<Circuit> {
    graph.validate()?;
    if gammas.is_empty() || gammas.len() != betas.len() {
        return Err(Error::InvalidCircuit(
            "gammas and betas must have the same nonzero length".into(),
        ));
    }
    let n = graph.n;
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::h(q));
    }
    for (rep, (&gamma, &beta)) in gammas.iter().zip(betas).enumerate() {
        for (idx, e) in graph.edges.iter().enumerate() {
            let block = rep * graph.edges.len() + idx;
            gates.push(Gate::cx(e.u, e.v).with_block(block));
            gates.push(Gate::rz(2.0 * gamma * e.weight, e.v).with_block(block));
            gates.push(Gate::cx(e.u, e.v).with_block(block));
        }
        for q in 0..n {
            gates.extend(rx_gates(2.0 * beta, q));
        }
    }
    for q in 0..n {
        gates.push(Gate::measure(q, q));
    }
    Circuit::new(n, n, gates)
}

/// rx(theta) lowered to the rz/sx basis, up to global phase:
/// rz(pi/2) sx rz(theta + pi) sx rz(pi/2), first gate first.
pub fn rx_gates(theta: f64, q: usize) -> Vec<Gate> {
    use std::f64::consts::{FRAC_PI_2, PI};
    vec![
        Gate::rz(FRAC_PI_2, q),
        Gate::sx(q),
        Gate::rz(theta + PI, q),
        Gate::sx(q),
        Gate::rz(FRAC_PI_2, q),
    ]
}

/// Cut value of one assignment; character i of `bits` is vertex i.
pub fn cost_of_bits(graph: &MaxCutGraph, bits: &str) -> Result<f64> {
    if bits.chars().count() != graph.n {
        return Err(Error::WidthMismatch(format!(
            "assignment has {} bits for {} vertices",
            bits.chars().count(),
            graph.n
        )));
    }
    let side: Vec<bool> = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::GraphSchema(format!(
                "assignment character `{other}` is not 0 or 1"
            ))),
        })
        .collect::<Result<_>>()?;
    Ok(graph
        .edges
        .iter()
        .filter(|e| side[e.u] != side[e.v])
        .map(|e| e.weight)
        .sum())
}

/// Shot-weighted mean cut value of a measurement histogram.
pub fn average_cost(graph: &MaxCutGraph, histogram: &BTreeMap<String, u64>) -> Result<f64> {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return Err(Error::EmptyInput("histogram has no shots"));
    }
    let mut sum = 0.0;
    for (bits, &count) in histogram {
        sum += cost_of_bits(graph, bits)? * count as f64;
    }
    Ok(sum / total as f64)
}

/// Exhaustive optimum; the qubit cap keeps the 2^n scan honest.
pub fn max_cost(graph: &MaxCutGraph) -> Result<(f64, String)> {
    const BRUTE_FORCE_LIMIT: usize = 20;
    if graph.n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyQubits { n: graph.n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_mask = 0usize;
    for mask in 0..(1usize << graph.n) {
        let cost: f64 = graph
            .edges
            .iter()
            .filter(|e| (mask >> e.u) & 1 != (mask >> e.v) & 1)
            .map(|e| e.weight)
            .sum();
        if cost > best {
            best = cost;
            best_mask = mask;
        }
    }
    let bits: String = (0..graph.n)
        .map(|q| if (best_mask >> q) & 1 == 1 { '1' } else { '0' })
        .collect();
    Ok((best, bits))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegreeMode {
    /// Every vertex gets exactly this degree (n * d must be even).
    Regular(usize),
    /// Independent edges with probability d / (n - 1).
    Average(f64),
}

/// Seeded random unit-weight graph.
pub fn random_graph(n: usize, mode: DegreeMode, seed: u64) -> Result<MaxCutGraph> {
    if n < 2 {
        return Err(Error::GraphSchema("need at least two vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = match mode {
        DegreeMode::Regular(d) => {
            if d == 0 || d >= n || !(n * d).is_multiple_of(2) {
                return Err(Error::GraphSchema(format!(
                    "degree {d} is not realizable on {n} vertices"
                )));
            }
            sample_regular(n, d, &mut rng)?
        }
        DegreeMode::Average(d) => {
            if !(0.0..=(n - 1) as f64).contains(&d) {
                return Err(Error::GraphSchema(format!(
                    "average degree {d} is not realizable on {n} vertices"
                )));
            }
            let p = d / (n - 1) as f64;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            edges
        }
    };
    MaxCutGraph::new(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect())
}

/// Configuration-model pairing with rejection of loops and repeats.
fn sample_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    'attempt: for _ in 0..500 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::BTreeSet::new();
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        return Ok(edges);
    }
    Err(Error::GraphSchema(format!(
        "could not sample a {d}-regular graph on {n} vertices"
    )))
}
