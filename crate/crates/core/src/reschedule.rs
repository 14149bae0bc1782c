//! Schedule search over legal gate swaps.
//!
//! Every move exchanges the slots of a gate and one of its immediate
//! dependents, subject to [`crate::commute::can_swap_preserving_depth`],
//! so depth and the gate multiset are invariants of every pass. The
//! greedy pass climbs WESP one swap at a time; the exhaustive pass
//! enumerates the whole reachable schedule class. A second engine level
//! works on cx-rz-cx groups as single units and reorders those.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Instant;

use crate::calibration::Calibration;
use crate::circuit::{Circuit, Gate, GateId, GateKind, QubitId};
use crate::commute::{can_swap_preserving_depth, swap_preserves_shape};
use crate::dag::DependencyGraph;
use crate::error::{Error, Result};
use crate::metrics::{measure_factor, wesp, wesp_masked};

#[derive(Debug, Clone)]
pub struct RescheduleResult {
    pub circuit: Circuit,
    pub swaps_applied: usize,
    /// Score of the input schedule, on the level the pass works at
    /// (elementary WESP, or group-level WESP for the zz pass).
    pub wesp_before: f64,
    pub wesp_after: f64,
    pub elapsed_ms: f64,
    /// Distinct schedules visited; only the exhaustive pass sets this.
    pub schedules_enumerated: Option<u64>,
}

/// A candidate score must clear the current one by more than product
/// reassociation noise, otherwise reordering equal factors could count
/// a one-ulp wobble as a gain.
const SCORE_TIE_EPS: f64 = 1e-12;

fn improves(candidate: f64, current: f64) -> bool {
    candidate > current + current.abs() * SCORE_TIE_EPS
}

/// One greedy sweep walks the layers front to back. Each eligible gate
/// anchors at most once per sweep: among its immediate dependents whose
/// swap is legal, the one with the best strictly-improving score is
/// applied, the circuit is rebuilt, and the layer is rescanned. Strict
/// improvement means ties keep the current schedule, so a sweep over an
/// already-optimal or uniform-rate circuit applies nothing; gains below
/// `SCORE_TIE_EPS` relative count as ties.
fn greedy_sweeps<E, L, S>(
    input: &Circuit,
    sweeps: usize,
    eligible: E,
    legal: L,
    score: S,
) -> Result<(Circuit, usize, f64, f64)>
where
    E: Fn(&Gate) -> bool,
    L: Fn(&Circuit, &DependencyGraph, GateId, GateId) -> Result<bool>,
    S: Fn(&Circuit) -> Result<f64>,
{
    let mut current = input.clone();
    let mut dag = DependencyGraph::build(&current);
    let mut current_score = score(&current)?;
    let initial_score = current_score;
    // Stable identity per gate across swaps, for the once-per-sweep rule.
    let mut uid: Vec<usize> = (0..current.gates().len()).collect();
    let mut total_swaps = 0usize;

    for _ in 0..sweeps.max(1) {
        let mut done: BTreeSet<usize> = BTreeSet::new();
        let mut applied_this_sweep = 0usize;
        let mut layer = 0usize;
        while layer < current.layers().len() {
            let ids: Vec<GateId> = current.layers()[layer].clone();
            let mut rescan = false;
            for g in ids {
                if !eligible(&current.gates()[g]) || !done.insert(uid[g]) {
                    continue;
                }
                let dependents: Vec<GateId> = dag.immediate_dependents(g)?.to_vec();
                let mut best: Option<(f64, Circuit, Vec<GateId>)> = None;
                for b in dependents {
                    if !eligible(&current.gates()[b]) {
                        continue;
                    }
                    if !legal(&current, &dag, g, b)? {
                        continue;
                    }
                    let (candidate, perm) = current.apply_swap(g, b)?;
                    let s = score(&candidate)?;
                    if improves(s, current_score)
                        && best.as_ref().is_none_or(|(bs, _, _)| s > *bs)
                    {
                        best = Some((s, candidate, perm));
                    }
                }
                if let Some((s, candidate, perm)) = best {
                    let mut moved = vec![0usize; uid.len()];
                    for (old, &u) in uid.iter().enumerate() {
                        moved[perm[old]] = u;
                    }
                    uid = moved;
                    current = candidate;
                    dag = DependencyGraph::build(&current);
                    current_score = s;
                    total_swaps += 1;
                    applied_this_sweep += 1;
                    rescan = true;
                    break;
                }
            }
            if !rescan {
                layer += 1;
            }
        }
        if applied_this_sweep == 0 {
            break;
        }
    }
    Ok((current, total_swaps, initial_score, current_score))
}

/// Greedy WESP climb over elementary gate swaps.
pub fn reschedule_greedy(
    circuit: &Circuit,
    calibration: &Calibration,
    sweeps: usize,
    tol: f64,
) -> Result<RescheduleResult> {
    let start = Instant::now();
    calibration.covers(circuit)?;
    let (result, swaps, before, after) = greedy_sweeps(
        circuit,
        sweeps,
        |g: &Gate| g.kind.is_unitary(),
        |c, dag, a, b| can_swap_preserving_depth(c, dag, a, b, tol),
        |c| wesp(c, calibration),
    )?;
    Ok(RescheduleResult {
        circuit: result,
        swaps_applied: swaps,
        wesp_before: before,
        wesp_after: after,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        schedules_enumerated: None,
    })
}

/// Exhaustive search of the swap-reachable schedule class.
///
/// Schedules are identified by their canonical layer-by-layer key, so
/// two swap paths to the same diagram count once. Returns the best
/// schedule (ties broken toward the smallest canonical key) with
/// `swaps_applied` holding its distance from the input in swaps. Bails
/// out with [`Error::ScheduleLimit`] as soon as more than `limit`
/// distinct schedules are seen.
pub fn reschedule_exhaustive(
    circuit: &Circuit,
    calibration: &Calibration,
    limit: u64,
    tol: f64,
) -> Result<RescheduleResult> {
    let start = Instant::now();
    calibration.covers(circuit)?;
    let wesp_before = wesp(circuit, calibration)?;

    let initial_key = circuit.schedule_key();
    let mut visited = BTreeSet::new();
    visited.insert(initial_key.clone());
    if visited.len() as u64 > limit {
        return Err(Error::ScheduleLimit { found: visited.len() as u64, limit });
    }
    let mut queue: VecDeque<(Circuit, usize)> = VecDeque::new();
    queue.push_back((circuit.clone(), 0));
    let mut best = (wesp_before, initial_key, circuit.clone(), 0usize);

    while let Some((state, dist)) = queue.pop_front() {
        let dag = DependencyGraph::build(&state);
        for g in 0..state.gates().len() {
            for &b in dag.immediate_dependents(g)? {
                if !can_swap_preserving_depth(&state, &dag, g, b, tol)? {
                    continue;
                }
                let (candidate, _) = state.apply_swap(g, b)?;
                let key = candidate.schedule_key();
                if !visited.insert(key.clone()) {
                    continue;
                }
                if visited.len() as u64 > limit {
                    return Err(Error::ScheduleLimit {
                        found: visited.len() as u64,
                        limit,
                    });
                }
                let w = wesp(&candidate, calibration)?;
                if w > best.0 || (w == best.0 && key < best.1) {
                    best = (w, key, candidate.clone(), dist + 1);
                }
                queue.push_back((candidate, dist + 1));
            }
        }
    }
    Ok(RescheduleResult {
        circuit: best.2,
        swaps_applied: best.3,
        wesp_before,
        wesp_after: best.0,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        schedules_enumerated: Some(visited.len() as u64),
    })
}

/// A tagged cx-rz-cx group acting as one two-qubit rotation unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ZzBlock {
    pub block_id: usize,
    /// Gate ids of [cx, rz, cx] in list order.
    pub gates: [GateId; 3],
    pub control: QubitId,
    pub target: QubitId,
    pub angle: f64,
}

/// How a group's error rate is assembled from its members' rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockErrorModel {
    /// 1 - prod(1 - e): the chance that at least one member faults.
    Complement,
    /// prod of the erroneous members' rates (virtual rotations carry no
    /// rate and are excluded, otherwise every product would be zero).
    Product,
}

/// Collects and validates each tagged group: exactly three gates shaped
/// cx / rz-on-target / cx with matching orientation, and no untagged
/// gate interleaved on the group's qubits. Returned in list order.
pub fn extract_blocks(circuit: &Circuit) -> Result<Vec<ZzBlock>> {
    let mut by_tag: BTreeMap<usize, Vec<GateId>> = BTreeMap::new();
    for gate in circuit.gates() {
        if let Some(tag) = gate.block_id {
            by_tag.entry(tag).or_default().push(gate.id);
        }
    }
    let mut blocks = Vec::with_capacity(by_tag.len());
    for (tag, ids) in by_tag {
        if ids.len() != 3 {
            return Err(Error::MalformedBlock(
                tag,
                format!("{} gates tagged, need exactly 3", ids.len()),
            ));
        }
        let (i, j, k) = (ids[0], ids[1], ids[2]);
        let front = &circuit.gates()[i];
        let middle = &circuit.gates()[j];
        let back = &circuit.gates()[k];
        if front.kind != GateKind::Cx || back.kind != GateKind::Cx {
            return Err(Error::MalformedBlock(
                tag,
                "group must open and close with cx".into(),
            ));
        }
        let angle = match middle.kind {
            GateKind::Rz(theta) => theta,
            _ => {
                return Err(Error::MalformedBlock(
                    tag,
                    "group center must be an rz".into(),
                ))
            }
        };
        if front.qubits != back.qubits {
            return Err(Error::MalformedBlock(
                tag,
                "cx pair must share one orientation".into(),
            ));
        }
        if middle.qubits[0] != front.qubits[1] {
            return Err(Error::MalformedBlock(
                tag,
                "rotation must sit on the cx target".into(),
            ));
        }
        for mid in i + 1..k {
            if mid == j {
                continue;
            }
            let other = &circuit.gates()[mid];
            if other.qubits.iter().any(|q| front.qubits.contains(q)) {
                return Err(Error::MalformedBlock(
                    tag,
                    format!("gate {mid} interleaves the group"),
                ));
            }
        }
        blocks.push(ZzBlock {
            block_id: tag,
            gates: [i, j, k],
            control: front.qubits[0],
            target: front.qubits[1],
            angle,
        });
    }
    blocks.sort_by_key(|b| b.gates[0]);
    Ok(blocks)
}

/// Error rate per group under the chosen model.
pub fn block_errors(
    circuit: &Circuit,
    blocks: &[ZzBlock],
    calibration: &Calibration,
    model: BlockErrorModel,
) -> Result<Vec<f64>> {
    blocks
        .iter()
        .map(|b| {
            let mut survival = 1.0;
            let mut fault_product = 1.0;
            for &g in &b.gates {
                let gate = &circuit.gates()[g];
                let e = calibration.gate_error(gate)?;
                survival *= 1.0 - e;
                if gate.kind.is_erroneous() {
                    fault_product *= e;
                }
            }
            Ok(match model {
                BlockErrorModel::Complement => 1.0 - survival,
                BlockErrorModel::Product => fault_product,
            })
        })
        .collect()
}

/// Each group collapses to one placeholder two-qubit gate at the
/// position of its first member; everything untagged is kept as is.
fn abstract_block_circuit(circuit: &Circuit, blocks: &[ZzBlock]) -> Result<Circuit> {
    let mut role: BTreeMap<GateId, Option<&ZzBlock>> = BTreeMap::new();
    for b in blocks {
        role.insert(b.gates[0], Some(b));
        role.insert(b.gates[1], None);
        role.insert(b.gates[2], None);
    }
    let mut gates = Vec::new();
    for gate in circuit.gates() {
        match role.get(&gate.id) {
            Some(Some(b)) => {
                gates.push(Gate::cx(b.control, b.target).with_block(b.block_id))
            }
            Some(None) => {}
            None => gates.push(gate.clone()),
        }
    }
    Circuit::new(circuit.num_qubits(), circuit.num_clbits(), gates)
}

/// Inverse of [`abstract_block_circuit`] for a reordered placeholder
/// circuit: each placeholder expands back to its original three gates
/// in their original internal order.
fn expand_blocks(
    abstracted: &Circuit,
    original: &Circuit,
    blocks: &[ZzBlock],
) -> Result<Circuit> {
    let by_tag: BTreeMap<usize, &ZzBlock> =
        blocks.iter().map(|b| (b.block_id, b)).collect();
    let mut gates = Vec::new();
    for gate in abstracted.gates() {
        match gate.block_id {
            Some(tag) => {
                let b = by_tag
                    .get(&tag)
                    .ok_or_else(|| Error::MalformedBlock(tag, "unknown group".into()))?;
                for &orig in &b.gates {
                    gates.push(original.gates()[orig].clone());
                }
            }
            None => gates.push(gate.clone()),
        }
    }
    Circuit::new(original.num_qubits(), original.num_clbits(), gates)
}

/// Greedy climb at the group level: tagged cx-rz-cx units are reordered
/// as wholes, scored by WESP over group error rates. Mutually diagonal
/// rotations always commute, so legality is purely structural, with one
/// extra condition: the re-expanded elementary circuit must keep the
/// input's depth and gate multiset.
///
/// `wesp_before`/`wesp_after` are group-level scores; a circuit without
/// tags passes through untouched.
pub fn reschedule_zz(
    circuit: &Circuit,
    calibration: &Calibration,
    sweeps: usize,
    model: BlockErrorModel,
) -> Result<RescheduleResult> {
    let start = Instant::now();
    calibration.covers(circuit)?;
    let blocks = extract_blocks(circuit)?;
    let mf = measure_factor(circuit, calibration)?;
    if blocks.is_empty() {
        return Ok(RescheduleResult {
            circuit: circuit.clone(),
            swaps_applied: 0,
            wesp_before: mf,
            wesp_after: mf,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            schedules_enumerated: None,
        });
    }
    let rates = block_errors(circuit, &blocks, calibration, model)?;
    let rate_by_tag: BTreeMap<usize, f64> = blocks
        .iter()
        .zip(&rates)
        .map(|(b, &r)| (b.block_id, r))
        .collect();
    let abstracted = abstract_block_circuit(circuit, &blocks)?;
    let elem_depth = circuit.depth();
    let elem_multiset = circuit.multiset_signature();

    let score = |c: &Circuit| -> Result<f64> {
        let dag = DependencyGraph::build(c);
        let mask: Vec<bool> = c.gates().iter().map(|g| g.block_id.is_some()).collect();
        let rates: Vec<f64> = c
            .gates()
            .iter()
            .map(|g| g.block_id.map(|t| rate_by_tag[&t]).unwrap_or(0.0))
            .collect();
        wesp_masked(&dag, &mask, &rates, mf)
    };
    let legal = |c: &Circuit, dag: &DependencyGraph, a: GateId, b: GateId| -> Result<bool> {
        if !swap_preserves_shape(c, dag, a, b)? {
            return Ok(false);
        }
        let (candidate, _) = c.apply_swap(a, b)?;
        let expanded = expand_blocks(&candidate, circuit, &blocks)?;
        Ok(expanded.depth() == elem_depth
            && expanded.multiset_signature() == elem_multiset)
    };
    let (abs_final, swaps, before, after) = greedy_sweeps(
        &abstracted,
        sweeps,
        |g: &Gate| g.block_id.is_some(),
        legal,
        score,
    )?;

    let result = expand_blocks(&abs_final, circuit, &blocks)?;
    if result.depth() != elem_depth || result.multiset_signature() != elem_multiset {
        return Err(Error::Invariant(
            "group reorder changed the elementary schedule shape".into(),
        ));
    }
    Ok(RescheduleResult {
        circuit: result,
        swaps_applied: swaps,
        wesp_before: before,
        wesp_after: after,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        schedules_enumerated: None,
    })
}

/// Group-level pass followed by the elementary greedy pass. The scores
/// reported are elementary WESP of the input and of the final circuit.
pub fn reschedule_combined(
    circuit: &Circuit,
    calibration: &Calibration,
    sweeps: usize,
    model: BlockErrorModel,
    tol: f64,
) -> Result<RescheduleResult> {
    let start = Instant::now();
    let wesp_before = wesp(circuit, calibration)?;
    let zz = reschedule_zz(circuit, calibration, sweeps, model)?;
    let elem = reschedule_greedy(&zz.circuit, calibration, sweeps, tol)?;
    Ok(RescheduleResult {
        circuit: elem.circuit,
        swaps_applied: zz.swaps_applied + elem.swaps_applied,
        wesp_before,
        wesp_after: elem.wesp_after,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        schedules_enumerated: None,
    })
}
