//! Commutation tests between gate pairs and the legality predicate for
//! swapping two dependent gates without changing the schedule shape.

use crate::circuit::{Circuit, Gate, GateId, GateKind, QubitId};
use crate::dag::DependencyGraph;
use crate::error::{Error, Result};
use crate::unitary::{circuit_unitary, Mat};

/// Max entrywise residual of U1 U2 - U2 U1 accepted as zero.
pub const DEFAULT_MATRIX_TOL: f64 = 1e-12;

/// Whether two unitary gates commute as operators.
///
/// A small rule table answers the common structural cases; anything the
/// rules do not cover is decided numerically on the joint support.
/// Measures and barriers are not operators in this sense and are
/// rejected.
pub fn commutes(a: &Gate, b: &Gate, tol: f64) -> Result<bool> {
    if !a.kind.is_unitary() {
        return Err(Error::NonUnitary(a.kind.name()));
    }
    if !b.kind.is_unitary() {
        return Err(Error::NonUnitary(b.kind.name()));
    }
    if let Some(known) = commutation_rule(a, b) {
        return Ok(known);
    }
    commute_by_matrix(a, b, tol)
}

/// Structural fast path. `Some(true)` means the pair always commutes;
/// `None` defers to the matrix check. The table never claims a negative:
/// angle-dependent coincidences (e.g. rz(0) with anything) stay correct
/// because they fall through to the numerics.
fn commutation_rule(a: &Gate, b: &Gate) -> Option<bool> {
    if a.qubits.iter().all(|q| !b.qubits.contains(q)) {
        return Some(true);
    }
    use GateKind::*;
    match (&a.kind, &b.kind) {
        (Cx, Cx) => {
            let same_control = a.qubits[0] == b.qubits[0];
            let same_target = a.qubits[1] == b.qubits[1];
            let crossed = a.qubits[0] == b.qubits[1] || a.qubits[1] == b.qubits[0];
            if (same_control || same_target) && !crossed {
                return Some(true);
            }
        }
        (Rz(_), Cx) if a.qubits[0] == b.qubits[0] && a.qubits[0] != b.qubits[1] => {
            return Some(true)
        }
        (Cx, Rz(_)) if b.qubits[0] == a.qubits[0] && b.qubits[0] != a.qubits[1] => {
            return Some(true)
        }
        (X | Sx, Cx) if a.qubits[0] == b.qubits[1] && a.qubits[0] != b.qubits[0] => {
            return Some(true)
        }
        (Cx, X | Sx) if b.qubits[0] == a.qubits[1] && b.qubits[0] != a.qubits[0] => {
            return Some(true)
        }
        (Rz(_), Rz(_)) if a.qubits == b.qubits => return Some(true),
        _ => {}
    }
    if a.qubits == b.qubits && a.kind == b.kind {
        return Some(true);
    }
    None
}

fn commute_by_matrix(a: &Gate, b: &Gate, tol: f64) -> Result<bool> {
    let mut support: Vec<QubitId> = a.qubits.iter().chain(&b.qubits).copied().collect();
    support.sort_unstable();
    support.dedup();
    if support.len() > 3 {
        return Err(Error::SupportTooLarge { got: support.len(), limit: 3 });
    }
    let ua = gate_unitary_on(a, &support)?;
    let ub = gate_unitary_on(b, &support)?;
    let residual = ua.mul(&ub).sub(&ub.mul(&ua));
    Ok(residual.max_abs() <= tol)
}

/// Unitary of a single gate expressed on `support` (sorted, covering the
/// gate's qubits).
fn gate_unitary_on(gate: &Gate, support: &[QubitId]) -> Result<Mat> {
    let reindex = |q: QubitId| -> QubitId {
        support.iter().position(|&s| s == q).expect("support covers gate")
    };
    let mut local = gate.clone();
    local.qubits = gate.qubits.iter().map(|&q| reindex(q)).collect();
    let circuit = Circuit::new(support.len(), 0, vec![local])?;
    circuit_unitary(&circuit, support.len())
}

/// Whether exchanging the schedule slots of `a` and its immediate
/// dependent `b` is legal: the pair commutes, every qubit either gate
/// must traverse is idle for the crossing, and the relayered circuit
/// keeps the same depth and gate multiset.
pub fn can_swap_preserving_depth(
    circuit: &Circuit,
    dag: &DependencyGraph,
    a: GateId,
    b: GateId,
    tol: f64,
) -> Result<bool> {
    if !dag.immediate_dependents(a)?.contains(&b) {
        return Err(Error::NotDependent(a, b));
    }
    let ga = circuit.gate(a)?;
    let gb = circuit.gate(b)?;
    if !ga.kind.is_unitary() || !gb.kind.is_unitary() {
        return Ok(false);
    }
    if !commutes(ga, gb, tol)? {
        return Ok(false);
    }
    swap_preserves_shape(circuit, dag, a, b)
}

/// The structural half of [`can_swap_preserving_depth`]: everything
/// except operator commutation. Callers that already know their gates
/// commute (e.g. mutually diagonal fused groups) use this directly.
///
/// The idle conditions alone are not sufficient. A swap can *shorten*
/// the relayered circuit (the displaced gate may unblock a successor),
/// so the candidate is relayered and compared before being accepted.
pub fn swap_preserves_shape(
    circuit: &Circuit,
    dag: &DependencyGraph,
    a: GateId,
    b: GateId,
) -> Result<bool> {
    if !dag.immediate_dependents(a)?.contains(&b) {
        return Err(Error::NotDependent(a, b));
    }
    let ga = circuit.gate(a)?;
    let gb = circuit.gate(b)?;
    if !ga.kind.is_unitary() || !gb.kind.is_unitary() {
        return Ok(false);
    }

    let ta = circuit.layer_of(a)?;
    let tb = circuit.layer_of(b)?;
    debug_assert!(tb > ta, "a dependent sits strictly later");

    // a moves forward through (ta, tb]; b moves back through [ta, tb).
    // Qubits not shared with the partner must be idle along the way.
    let shared: Vec<QubitId> =
        ga.qubits.iter().filter(|q| gb.qubits.contains(q)).copied().collect();
    let idle = |qubits: &[QubitId], layers: std::ops::Range<usize>| -> bool {
        layers.clone().all(|layer| {
            circuit.layers()[layer].iter().all(|&g| {
                g == a || g == b || {
                    let occ = &circuit.gates()[g];
                    qubits.iter().all(|q| !occ.qubits.contains(q))
                }
            })
        })
    };
    let a_moves: Vec<QubitId> =
        ga.qubits.iter().filter(|q| !shared.contains(q)).copied().collect();
    let b_moves: Vec<QubitId> =
        gb.qubits.iter().filter(|q| !shared.contains(q)).copied().collect();
    if !idle(&a_moves, ta + 1..tb + 1) || !idle(&b_moves, ta..tb) {
        return Ok(false);
    }

    let (candidate, _) = circuit.apply_swap(a, b)?;
    Ok(candidate.depth() == circuit.depth()
        && candidate.multiset_signature() == circuit.multiset_signature())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_table_cases() {
        let t = DEFAULT_MATRIX_TOL;
        // Disjoint supports.
        assert!(commutes(&Gate::h(0), &Gate::x(1), t).unwrap());
        assert!(commutes(&Gate::cx(0, 1), &Gate::cx(2, 3), t).unwrap());
        // cx pairs sharing only the control, or only the target.
        assert!(commutes(&Gate::cx(0, 1), &Gate::cx(0, 2), t).unwrap());
        assert!(commutes(&Gate::cx(0, 1), &Gate::cx(2, 1), t).unwrap());
        // Diagonal on the control, bit flips on the target.
        assert!(commutes(&Gate::rz(0.7, 0), &Gate::cx(0, 1), t).unwrap());
        assert!(commutes(&Gate::x(1), &Gate::cx(0, 1), t).unwrap());
        assert!(commutes(&Gate::sx(1), &Gate::cx(0, 1), t).unwrap());
        // Same-axis rotations and identical gates.
        assert!(commutes(&Gate::rz(0.1, 0), &Gate::rz(2.2, 0), t).unwrap());
        assert!(commutes(&Gate::h(0), &Gate::h(0), t).unwrap());
    }

    #[test]
    fn matrix_fallback_cases() {
        let t = DEFAULT_MATRIX_TOL;
        assert!(!commutes(&Gate::h(0), &Gate::x(0), t).unwrap());
        assert!(!commutes(&Gate::rz(0.3, 0), &Gate::cx(1, 0), t).unwrap());
        assert!(!commutes(&Gate::h(1), &Gate::cx(0, 1), t).unwrap());
        assert!(!commutes(&Gate::x(0), &Gate::cx(0, 1), t).unwrap());
        // cx chains where one gate's control is the other's target.
        assert!(!commutes(&Gate::cx(0, 1), &Gate::cx(1, 2), t).unwrap());
        // Angle coincidences are caught numerically, not by the table.
        assert!(commutes(&Gate::rz(0.0, 0), &Gate::h(0), t).unwrap());
        assert!(commutes(&Gate::x(0), &Gate::rz(2.0 * std::f64::consts::PI, 0), t).unwrap());
    }

    #[test]
    fn non_unitary_operands_are_rejected() {
        let t = DEFAULT_MATRIX_TOL;
        assert!(matches!(
            commutes(&Gate::measure(0, 0), &Gate::x(0), t),
            Err(Error::NonUnitary("measure"))
        ));
        assert!(matches!(
            commutes(&Gate::x(0), &Gate::barrier(vec![0, 1]), t),
            Err(Error::NonUnitary("barrier"))
        ));
    }

    /// Every positive answer from the rule table must agree with the
    /// operator-level check over a pool of concrete gate pairs.
    #[test]
    fn rule_table_matches_matrices() {
        let pool = |q: &[QubitId]| -> Vec<Gate> {
            let mut gates = Vec::new();
            for &a in q {
                gates.push(Gate::h(a));
                gates.push(Gate::x(a));
                gates.push(Gate::sx(a));
                gates.push(Gate::rz(0.37, a));
                gates.push(Gate::rz(-1.91, a));
                for &b in q {
                    if a != b {
                        gates.push(Gate::cx(a, b));
                    }
                }
            }
            gates
        };
        let gates = pool(&[0, 1, 2]);
        let mut rule_hits = 0;
        for a in &gates {
            for b in &gates {
                if let Some(claim) = commutation_rule(a, b) {
                    rule_hits += 1;
                    let check = commute_by_matrix(a, b, DEFAULT_MATRIX_TOL).unwrap();
                    assert_eq!(claim, check, "rule disagrees for {a:?} vs {b:?}");
                }
            }
        }
        assert!(rule_hits > 100, "rule table barely fired ({rule_hits})");
    }

    #[test]
    fn commutation_is_symmetric() {
        let gates = [
            Gate::h(0),
            Gate::x(0),
            Gate::sx(1),
            Gate::rz(0.4, 0),
            Gate::cx(0, 1),
            Gate::cx(1, 0),
            Gate::cx(1, 2),
        ];
        for a in &gates {
            for b in &gates {
                assert_eq!(
                    commutes(a, b, DEFAULT_MATRIX_TOL).unwrap(),
                    commutes(b, a, DEFAULT_MATRIX_TOL).unwrap(),
                    "{a:?} vs {b:?}"
                );
            }
        }
    }

    #[test]
    fn swap_requires_dependence() {
        let c = Circuit::new(2, 0, vec![Gate::h(0), Gate::h(1)]).unwrap();
        let dag = DependencyGraph::build(&c);
        assert!(matches!(
            can_swap_preserving_depth(&c, &dag, 0, 1, DEFAULT_MATRIX_TOL),
            Err(Error::NotDependent(0, 1))
        ));
    }

    #[test]
    fn plain_dependent_pair_swaps() {
        let c =
            Circuit::new(1, 0, vec![Gate::rz(0.1, 0), Gate::rz(0.2, 0)]).unwrap();
        let dag = DependencyGraph::build(&c);
        assert!(can_swap_preserving_depth(&c, &dag, 0, 1, DEFAULT_MATRIX_TOL).unwrap());
    }

    #[test]
    fn non_commuting_pair_does_not_swap() {
        let c = Circuit::new(1, 0, vec![Gate::h(0), Gate::x(0)]).unwrap();
        let dag = DependencyGraph::build(&c);
        assert!(!can_swap_preserving_depth(&c, &dag, 0, 1, DEFAULT_MATRIX_TOL).unwrap());
    }

    #[test]
    fn busy_spectator_qubit_blocks_the_crossing() {
        // cx(0,1) at layer 0 with x(2) beside it; cx(0,2) must wait at
        // layer 1. Moving cx(0,2) back needs qubit 2 idle at layer 0.
        let c = Circuit::new(
            3,
            0,
            vec![Gate::cx(0, 1), Gate::x(2), Gate::cx(0, 2)],
        )
        .unwrap();
        let dag = DependencyGraph::build(&c);
        assert_eq!(c.layer_of(2).unwrap(), 1);
        assert!(!can_swap_preserving_depth(&c, &dag, 0, 2, DEFAULT_MATRIX_TOL).unwrap());
    }

    #[test]
    fn depth_compressing_swap_is_rejected() {
        // rz(0) then cx(0,1) then x(1): the pair (rz, cx) commutes and
        // every idle condition holds, but pulling cx to layer 0 lets
        // x(1) relayer into layer 1 and the depth drops from 3 to 2.
        let c = Circuit::new(
            2,
            0,
            vec![Gate::rz(0.5, 0), Gate::cx(0, 1), Gate::x(1)],
        )
        .unwrap();
        assert_eq!(c.depth(), 3);
        let dag = DependencyGraph::build(&c);
        let (candidate, _) = c.apply_swap(0, 1).unwrap();
        assert_eq!(candidate.depth(), 2, "swap would compress");
        assert!(!can_swap_preserving_depth(&c, &dag, 0, 1, DEFAULT_MATRIX_TOL).unwrap());
    }

    #[test]
    fn barrier_blocks_swaps_across_it() {
        let c = Circuit::new(
            1,
            0,
            vec![Gate::rz(0.1, 0), Gate::barrier(vec![0]), Gate::rz(0.2, 0)],
        )
        .unwrap();
        let dag = DependencyGraph::build(&c);
        // The barrier is the immediate dependent; it never swaps.
        assert!(!can_swap_preserving_depth(&c, &dag, 0, 1, DEFAULT_MATRIX_TOL).unwrap());
        // The rotations are not dag-adjacent at all.
        assert!(matches!(
            can_swap_preserving_depth(&c, &dag, 0, 2, DEFAULT_MATRIX_TOL),
            Err(Error::NotDependent(0, 2))
        ));
    }

    #[test]
    fn legal_swap_keeps_shape() {
        let c = Circuit::new(3, 0, vec![Gate::cx(0, 1), Gate::x(1), Gate::x(2)]).unwrap();
        let dag = DependencyGraph::build(&c);
        // x on the cx target commutes; the spectator on qubit 2 is
        // disjoint from both and blocks nothing.
        assert!(can_swap_preserving_depth(&c, &dag, 0, 1, DEFAULT_MATRIX_TOL).unwrap());
        let (swapped, _) = c.apply_swap(0, 1).unwrap();
        assert_eq!(swapped.depth(), c.depth());
        assert_eq!(swapped.multiset_signature(), c.multiset_signature());
    }

    #[test]
    fn occupied_lane_blocks_the_displaced_gate() {
        // Same pair, but h(0) occupies qubit 0 in the layer cx must move
        // into, so the crossing is illegal.
        let c = Circuit::new(2, 0, vec![Gate::cx(0, 1), Gate::x(1), Gate::h(0)]).unwrap();
        let dag = DependencyGraph::build(&c);
        assert!(!can_swap_preserving_depth(&c, &dag, 0, 1, DEFAULT_MATRIX_TOL).unwrap());
    }
}
