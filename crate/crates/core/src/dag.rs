//! Gate dependency graph and error-propagation reach.
//!
//! There is an edge (a -> b) exactly when b is the next gate after a on at
//! least one shared qubit, so edges always point forward in list order and
//! the gate list itself is a topological order. Barriers take part as
//! ordinary nodes: they fence reordering and conservatively merge
//! propagation paths across their qubits.

use std::collections::BTreeSet;

use crate::circuit::{Circuit, GateId, QubitId};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DependencyGraph {
    succ: Vec<Vec<GateId>>,
    pred: Vec<Vec<GateId>>,
    levels: Vec<usize>,
    reach_counts: Vec<usize>,
}

impl DependencyGraph {
    pub fn build(circuit: &Circuit) -> Self {
        let n = circuit.gates().len();
        let mut succ: Vec<Vec<GateId>> = vec![Vec::new(); n];
        let mut pred: Vec<Vec<GateId>> = vec![Vec::new(); n];
        let mut last_on: Vec<Option<GateId>> = vec![None; circuit.num_qubits()];
        for g in circuit.gates() {
            for &q in &g.qubits {
                if let Some(p) = last_on[q] {
                    // A pair sharing two qubits gets a single edge.
                    if succ[p].last() != Some(&g.id) {
                        succ[p].push(g.id);
                        pred[g.id].push(p);
                    }
                }
                last_on[q] = Some(g.id);
            }
        }
        let erroneous: Vec<bool> =
            circuit.gates().iter().map(|g| g.kind.is_erroneous()).collect();
        let reach_counts = reach_counts_masked(&succ, &erroneous);
        DependencyGraph {
            succ,
            pred,
            levels: circuit.gate_layers().to_vec(),
            reach_counts,
        }
    }

    pub fn num_gates(&self) -> usize {
        self.succ.len()
    }

    /// Gates that directly follow `g` on some shared qubit.
    pub fn immediate_dependents(&self, g: GateId) -> Result<&[GateId]> {
        self.succ.get(g).map(Vec::as_slice).ok_or(Error::UnknownGate(g))
    }

    pub fn immediate_predecessors(&self, g: GateId) -> Result<&[GateId]> {
        self.pred.get(g).map(Vec::as_slice).ok_or(Error::UnknownGate(g))
    }

    /// Topological level of `g`; coincides with its ASAP layer.
    pub fn level(&self, g: GateId) -> Result<usize> {
        self.levels.get(g).copied().ok_or(Error::UnknownGate(g))
    }

    /// S_i: distinct erroneous gates reachable from `g`, excluding `g`.
    pub fn reachable_count(&self, g: GateId) -> Result<usize> {
        self.reach_counts.get(g).copied().ok_or(Error::UnknownGate(g))
    }

    pub fn reachable_counts(&self) -> &[usize] {
        &self.reach_counts
    }

    /// Reachable-gate counts against a caller-supplied node mask.
    pub fn reach_counts_for(&self, mask: &[bool]) -> Vec<usize> {
        reach_counts_masked(&self.succ, mask)
    }

    /// Qubits the gate's error can end up on: its own qubits plus the
    /// qubits of every reachable gate.
    pub fn propagation_footprint(
        &self,
        circuit: &Circuit,
        g: GateId,
    ) -> Result<BTreeSet<QubitId>> {
        let start = circuit.gate(g)?;
        let mut seen = vec![false; self.succ.len()];
        let mut stack = vec![g];
        seen[g] = true;
        let mut footprint: BTreeSet<QubitId> = start.qubits.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &w in &self.succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    footprint.extend(circuit.gates()[w].qubits.iter().copied());
                    stack.push(w);
                }
            }
        }
        Ok(footprint)
    }
}

/// Transitive-closure counts over `mask`ed nodes, excluding the node itself.
/// Edges only point forward, so one reverse sweep with bitsets suffices.
fn reach_counts_masked(succ: &[Vec<GateId>], mask: &[bool]) -> Vec<usize> {
    let n = succ.len();
    let words = n.div_ceil(64);
    let mut rows = vec![0u64; n * words];
    let mut mask_bits = vec![0u64; words];
    for (i, &m) in mask.iter().enumerate() {
        if m {
            mask_bits[i / 64] |= 1 << (i % 64);
        }
    }
    let mut counts = vec![0usize; n];
    for i in (0..n).rev() {
        // Split so the borrow of row i does not alias its successors.
        let (head, tail) = rows.split_at_mut(i * words + words);
        let row_i = &mut head[i * words..];
        for &j in &succ[i] {
            debug_assert!(j > i);
            let row_j = &tail[(j - i - 1) * words..(j - i) * words];
            for w in 0..words {
                row_i[w] |= row_j[w];
            }
            row_i[j / 64] |= 1u64 << (j % 64);
        }
        counts[i] = (0..words)
            .map(|w| (row_i[w] & mask_bits[w]).count_ones() as usize)
            .sum();
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn graph_of(gates: Vec<Gate>, nq: usize) -> (Circuit, DependencyGraph) {
        let c = Circuit::new(nq, 2, gates).unwrap();
        let g = DependencyGraph::build(&c);
        (c, g)
    }

    /// Brute-force closure by DFS from every node; the fixture values for
    /// the bitset sweep are frozen against this.
    fn reach_oracle(g: &DependencyGraph, c: &Circuit) -> Vec<usize> {
        let n = g.num_gates();
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                let mut stack = vec![s];
                let mut count = 0;
                while let Some(v) = stack.pop() {
                    for &w in g.immediate_dependents(v).unwrap() {
                        if !seen[w] {
                            seen[w] = true;
                            if c.gates()[w].kind.is_erroneous() {
                                count += 1;
                            }
                            stack.push(w);
                        }
                    }
                }
                count
            })
            .collect()
    }

    #[test]
    fn cnot_chain_edges_and_counts() {
        let (_, g) = graph_of(vec![Gate::cx(0, 1), Gate::cx(1, 2), Gate::cx(2, 3)], 4);
        assert_eq!(g.immediate_dependents(0).unwrap(), &[1]);
        assert_eq!(g.immediate_dependents(1).unwrap(), &[2]);
        assert_eq!(g.immediate_dependents(2).unwrap(), &[] as &[GateId]);
        assert_eq!(g.reachable_counts(), &[2, 1, 0]);
    }

    #[test]
    fn sx_chain_with_rz_between_counts_one() {
        let (_, g) = graph_of(
            vec![Gate::sx(0), Gate::rz(0.5, 0), Gate::sx(0), Gate::measure(0, 0)],
            1,
        );
        // rz and measure are reachable but carry no error.
        assert_eq!(g.reachable_count(0).unwrap(), 1);
    }

    #[test]
    fn fanout_dependents() {
        let (_, g) = graph_of(vec![Gate::cx(0, 1), Gate::cx(0, 2), Gate::cx(1, 3)], 4);
        assert_eq!(g.immediate_dependents(0).unwrap(), &[1, 2]);
    }

    #[test]
    fn double_shared_qubits_make_one_edge() {
        let (_, g) = graph_of(vec![Gate::cx(0, 1), Gate::cx(0, 1)], 2);
        assert_eq!(g.immediate_dependents(0).unwrap(), &[1]);
        assert_eq!(g.immediate_predecessors(1).unwrap(), &[0]);
    }

    #[test]
    fn barrier_is_a_node_and_fences_paths() {
        let (_, g) = graph_of(
            vec![Gate::h(0), Gate::barrier(vec![0, 1]), Gate::x(1)],
            2,
        );
        assert_eq!(g.immediate_dependents(0).unwrap(), &[1]);
        assert_eq!(g.immediate_dependents(1).unwrap(), &[2]);
        // x(1) is reachable from h(0) through the barrier.
        assert_eq!(g.reachable_count(0).unwrap(), 1);
    }

    #[test]
    fn counts_match_dfs_oracle_on_random_circuits() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..120 {
            let nq = rng.gen_range(2..7);
            let len = rng.gen_range(1..50);
            let mut gates = Vec::new();
            for _ in 0..len {
                let q = rng.gen_range(0..nq);
                match rng.gen_range(0..6) {
                    0 => gates.push(Gate::h(q)),
                    1 => gates.push(Gate::x(q)),
                    2 => gates.push(Gate::rz(1.1, q)),
                    3 | 4 => {
                        let mut t = rng.gen_range(0..nq);
                        while t == q {
                            t = rng.gen_range(0..nq);
                        }
                        gates.push(Gate::cx(q, t));
                    }
                    _ => gates.push(Gate::barrier(vec![q])),
                }
            }
            let c = Circuit::new(nq, 0, gates).unwrap();
            let g = DependencyGraph::build(&c);
            assert_eq!(g.reachable_counts(), reach_oracle(&g, &c).as_slice());
        }
    }

    #[test]
    fn footprint_covers_downstream_qubits() {
        let (c, g) = graph_of(vec![Gate::cx(0, 1), Gate::cx(1, 2)], 3);
        let fp = g.propagation_footprint(&c, 0).unwrap();
        assert_eq!(fp.into_iter().collect::<Vec<_>>(), vec![0, 1, 2]);
        let fp1 = g.propagation_footprint(&c, 1).unwrap();
        assert_eq!(fp1.into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn footprint_agrees_with_backward_traversal_per_qubit() {
        // Oracle: walking backward from an output qubit, a gate affects it
        // when it touches a tainted qubit, and then taints all its qubits.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..80 {
            let nq = rng.gen_range(2..6);
            let len = rng.gen_range(1..40);
            let mut gates = Vec::new();
            for _ in 0..len {
                let q = rng.gen_range(0..nq);
                if rng.gen_bool(0.5) {
                    let mut t = rng.gen_range(0..nq);
                    while t == q {
                        t = rng.gen_range(0..nq);
                    }
                    gates.push(Gate::cx(q, t));
                } else {
                    gates.push(Gate::sx(q));
                }
            }
            let c = Circuit::new(nq, 0, gates).unwrap();
            let g = DependencyGraph::build(&c);
            for out_q in 0..nq {
                let mut tainted = vec![false; nq];
                tainted[out_q] = true;
                let mut affected = std::collections::BTreeSet::new();
                for gate in c.gates().iter().rev() {
                    if gate.qubits.iter().any(|&q| tainted[q]) {
                        affected.insert(gate.id);
                        for &q in &gate.qubits {
                            tainted[q] = true;
                        }
                    }
                }
                for gate in c.gates() {
                    let fp = g.propagation_footprint(&c, gate.id).unwrap();
                    assert_eq!(
                        fp.contains(&out_q),
                        affected.contains(&gate.id),
                        "gate {} vs output qubit {out_q}",
                        gate.id
                    );
                }
            }
        }
    }
}
