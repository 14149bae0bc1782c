//! Noisy sampling of small circuits.
//!
//! The noise model is stochastic Pauli injection: after each erroneous
//! gate one Bernoulli draw decides whether it faulted, and a faulted
//! gate applies an independent uniform non-identity Pauli to every qubit
//! it touches. Readout applies an independent flip per measured qubit.
//! Shots are independent streams of one counter-based RNG, so histograms
//! are reproducible for a given seed and schedule and the shot loop can
//! run in parallel.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::circuit::{Circuit, GateId, GateKind, QubitId};
use crate::error::{Error, Result};
use crate::unitary::{apply_single, circuit_unitary, equal_up_to_global_phase, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [C64; 4] {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::X => [zero, one, one, zero],
            Pauli::Y => [zero, -i, i, zero],
            Pauli::Z => [one, zero, zero, -one],
        }
    }
}

/// How a single Pauli on one leg of a cx propagates through it:
/// cx (P on control/target) cx. The result is a pair of Pauli factors
/// (control leg, target leg), `None` meaning identity; the sign is +1
/// for every entry of this table.
pub fn pauli_conjugate_cx(p: Pauli, on_control: bool) -> (Option<Pauli>, Option<Pauli>) {
    match (p, on_control) {
        (Pauli::X, true) => (Some(Pauli::X), Some(Pauli::X)),
        (Pauli::X, false) => (None, Some(Pauli::X)),
        (Pauli::Z, true) => (Some(Pauli::Z), None),
        (Pauli::Z, false) => (Some(Pauli::Z), Some(Pauli::Z)),
        (Pauli::Y, true) => (Some(Pauli::Y), Some(Pauli::X)),
        (Pauli::Y, false) => (Some(Pauli::Z), Some(Pauli::Y)),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub shots: u64,
    pub seed: u64,
    /// Statevector width cap; 2^n amplitudes are materialized per shot.
    pub qubit_limit: usize,
    /// Replaces every random Pauli draw with a fixed Pauli. Lets tests
    /// pin the fault channel; leave `None` for the real model.
    pub pauli_override: Option<Pauli>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { shots: 8192, seed: 0, qubit_limit: 14, pauli_override: None }
    }
}

/// Sample the circuit under the calibrated noise model.
///
/// Keys are bitstrings with character i holding classical bit i;
/// unwritten classical bits stay '0'.
pub fn sample_noisy(
    circuit: &Circuit,
    calibration: &Calibration,
    config: &SimConfig,
) -> Result<BTreeMap<String, u64>> {
    calibration.covers(circuit)?;
    run(circuit, Some(calibration), config)
}

/// Sample the circuit without any noise.
pub fn sample_ideal(circuit: &Circuit, config: &SimConfig) -> Result<BTreeMap<String, u64>> {
    run(circuit, None, config)
}

/// Whether two circuits implement the same unitary up to global phase.
/// Measures must target the same qubits; barriers are transparent.
pub fn unitary_equivalent(a: &Circuit, b: &Circuit, tol: f64) -> Result<bool> {
    const VERIFY_QUBIT_LIMIT: usize = 6;
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::WidthMismatch(format!(
            "{} vs {} qubits",
            a.num_qubits(),
            b.num_qubits()
        )));
    }
    if a.measured_qubits() != b.measured_qubits() {
        return Ok(false);
    }
    let ua = circuit_unitary(a, VERIFY_QUBIT_LIMIT)?;
    let ub = circuit_unitary(b, VERIFY_QUBIT_LIMIT)?;
    Ok(equal_up_to_global_phase(&ua, &ub, tol))
}

struct ShotPlan<'c> {
    circuit: &'c Circuit,
    /// Gate ids in execution order: layer-major, ascending id inside a
    /// layer.
    order: Vec<GateId>,
    /// Fault probability per gate id (zero entries never fault).
    rates: Vec<f64>,
    /// (qubit, classical bit, flip probability) per measure, in
    /// execution order.
    readout: Vec<(QubitId, usize, f64)>,
    pauli_override: Option<Pauli>,
}

fn run(
    circuit: &Circuit,
    calibration: Option<&Calibration>,
    config: &SimConfig,
) -> Result<BTreeMap<String, u64>> {
    let n = circuit.num_qubits();
    if n > config.qubit_limit {
        return Err(Error::TooManyQubits { n, limit: config.qubit_limit });
    }
    check_measurements(circuit)?;

    let order: Vec<GateId> =
        circuit.layers().iter().flat_map(|l| l.iter().copied()).collect();
    let mut rates = vec![0.0; circuit.gates().len()];
    let mut readout = Vec::new();
    for &g in &order {
        let gate = &circuit.gates()[g];
        match gate.kind {
            GateKind::Measure => {
                let flip = match calibration {
                    Some(c) => c.gate_error(gate)?,
                    None => 0.0,
                };
                readout.push((gate.qubits[0], gate.clbit.expect("measure"), flip));
            }
            _ if gate.kind.is_erroneous() => {
                if let Some(c) = calibration {
                    rates[g] = c.gate_error(gate)?;
                }
            }
            _ => {}
        }
    }
    let plan = ShotPlan {
        circuit,
        order,
        rates,
        readout,
        pauli_override: config.pauli_override,
    };

    let histogram = (0..config.shots)
        .into_par_iter()
        .fold(BTreeMap::<String, u64>::new, |mut acc, shot| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(shot);
            *acc.entry(run_shot(&plan, &mut rng)).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (key, count) in b {
                *a.entry(key).or_insert(0) += count;
            }
            a
        });
    Ok(histogram)
}

fn run_shot(plan: &ShotPlan, rng: &mut ChaCha8Rng) -> String {
    let n = plan.circuit.num_qubits();
    let mut state = vec![C64::new(0.0, 0.0); 1 << n];
    state[0] = C64::new(1.0, 0.0);

    for &g in &plan.order {
        let gate = &plan.circuit.gates()[g];
        match gate.kind {
            GateKind::Barrier | GateKind::Measure => continue,
            _ => crate::unitary::apply_gate(&mut state, gate)
                .expect("plan holds only unitaries past this point"),
        }
        if plan.rates[g] > 0.0 && rng.gen::<f64>() < plan.rates[g] {
            for &q in &gate.qubits {
                let pauli = plan.pauli_override.unwrap_or_else(|| {
                    match rng.gen_range(0..3u8) {
                        0 => Pauli::X,
                        1 => Pauli::Y,
                        _ => Pauli::Z,
                    }
                });
                apply_single(&mut state, q, &pauli.matrix());
            }
        }
    }

    let outcome = sample_outcome(&state, rng.gen::<f64>());
    let mut bits = vec!['0'; plan.circuit.num_clbits()];
    for &(q, c, flip) in &plan.readout {
        let mut bit = (outcome >> q) & 1 == 1;
        if flip > 0.0 && rng.gen::<f64>() < flip {
            bit = !bit;
        }
        bits[c] = if bit { '1' } else { '0' };
    }
    bits.into_iter().collect()
}

fn sample_outcome(state: &[C64], r: f64) -> usize {
    let mut cumulative = 0.0;
    for (idx, amp) in state.iter().enumerate() {
        cumulative += amp.norm_sqr();
        if r < cumulative {
            return idx;
        }
    }
    state.len() - 1
}

/// Measurement must be terminal per qubit and classical bits must not
/// collide, otherwise deferred joint sampling would be wrong.
fn check_measurements(circuit: &Circuit) -> Result<()> {
    let mut measured_qubit = vec![false; circuit.num_qubits()];
    let mut written_clbit = vec![false; circuit.num_clbits()];
    for gate in circuit.gates() {
        match gate.kind {
            GateKind::Measure => {
                let q = gate.qubits[0];
                if measured_qubit[q] {
                    return Err(Error::InvalidCircuit(format!(
                        "qubit {q} measured twice"
                    )));
                }
                measured_qubit[q] = true;
                let c = gate.clbit.expect("measure");
                if written_clbit[c] {
                    return Err(Error::InvalidCircuit(format!(
                        "classical bit {c} written twice"
                    )));
                }
                written_clbit[c] = true;
            }
            GateKind::Barrier => {}
            _ => {
                for &q in &gate.qubits {
                    if measured_qubit[q] {
                        return Err(Error::InvalidCircuit(format!(
                            "gate on qubit {q} after its measurement"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}
