//! Schedule quality metrics.
//!
//! ESP multiplies per-gate survival probabilities. WESP additionally
//! inflates each gate's error rate by how much of the remaining circuit
//! can be tainted by a fault in it, so two schedules with identical gate
//! multisets can score differently. Both include the readout factor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::circuit::{Circuit, GateId, QubitId};
use crate::dag::DependencyGraph;
use crate::error::{Error, Result};

/// Per-gate WESP contribution for the erroneous gates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateMetric {
    pub gate: GateId,
    pub kind: String,
    pub qubits: Vec<QubitId>,
    pub layer: usize,
    /// Calibrated error rate e_g.
    pub error_rate: f64,
    /// Erroneous gates a fault here can reach.
    pub dependents: usize,
    /// dependents / erroneous gate count.
    pub weight: f64,
    /// weight * (e_g - min e) added on top of e_g, saturating at 1.
    pub inflation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub wesp: f64,
    pub esp: f64,
    pub erroneous_gates: usize,
    pub min_gate_error: f64,
    /// Product of (1 - readout error) over the measured qubits.
    pub measure_factor: f64,
    pub gates: Vec<GateMetric>,
}

pub fn esp(circuit: &Circuit, calibration: &Calibration) -> Result<f64> {
    calibration.covers(circuit)?;
    let mut p = 1.0;
    for gate in circuit.gates() {
        if gate.kind.is_erroneous() {
            p *= 1.0 - calibration.gate_error(gate)?;
        }
    }
    Ok(p * measure_factor(circuit, calibration)?)
}

pub fn wesp(circuit: &Circuit, calibration: &Calibration) -> Result<f64> {
    Ok(wesp_report(circuit, calibration)?.wesp)
}

pub fn wesp_report(circuit: &Circuit, calibration: &Calibration) -> Result<MetricReport> {
    calibration.covers(circuit)?;
    let dag = DependencyGraph::build(circuit);
    let erroneous: Vec<GateId> = circuit
        .gates()
        .iter()
        .filter(|g| g.kind.is_erroneous())
        .map(|g| g.id)
        .collect();
    let count = erroneous.len();

    let mut rates = vec![0.0; circuit.gates().len()];
    for gate in circuit.gates() {
        rates[gate.id] = calibration.gate_error(gate)?;
    }
    let min_error = erroneous
        .iter()
        .map(|&g| rates[g])
        .fold(f64::INFINITY, f64::min);
    let min_error = if count == 0 { 0.0 } else { min_error };

    let measure_factor = measure_factor(circuit, calibration)?;
    let mut wesp = measure_factor;
    let mut esp = measure_factor;
    let mut gates = Vec::with_capacity(count);
    for &g in &erroneous {
        let gate = &circuit.gates()[g];
        let dependents = dag.reachable_count(g)?;
        let weight = dependents as f64 / count as f64;
        let inflation = weight * (rates[g] - min_error);
        wesp *= 1.0 - (rates[g] + inflation).min(1.0);
        esp *= 1.0 - rates[g];
        gates.push(GateMetric {
            gate: g,
            kind: gate.kind.name().to_string(),
            qubits: gate.qubits.clone(),
            layer: circuit.layer_of(g)?,
            error_rate: rates[g],
            dependents,
            weight,
            inflation,
        });
    }
    Ok(MetricReport {
        wesp,
        esp,
        erroneous_gates: count,
        min_gate_error: min_error,
        measure_factor,
        gates,
    })
}

/// WESP over an arbitrary choice of which gates carry error.
///
/// `mask[g]` selects the gates that contribute a survival factor and
/// `rates[g]` gives their error rates (ignored where the mask is off).
/// Dependent counts are recomputed against the mask. This is the same
/// arithmetic as [`wesp_report`], exposed so coarser units (e.g. fused
/// gate groups) can be scored on their own abstraction level.
pub fn wesp_masked(
    dag: &DependencyGraph,
    mask: &[bool],
    rates: &[f64],
    measure_factor: f64,
) -> Result<f64> {
    if mask.len() != dag.num_gates() || rates.len() != dag.num_gates() {
        return Err(Error::Invariant(
            "mask and rates must cover every gate".into(),
        ));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Ok(measure_factor);
    }
    for (g, &m) in mask.iter().enumerate() {
        if m && !(0.0..=1.0).contains(&rates[g]) {
            return Err(Error::RateRange(format!(
                "rate {} for gate {g} outside [0, 1]",
                rates[g]
            )));
        }
    }
    let reach = dag.reach_counts_for(mask);
    let min_error = mask
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m)
        .map(|(g, _)| rates[g])
        .fold(f64::INFINITY, f64::min);
    let mut p = measure_factor;
    for (g, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let weight = reach[g] as f64 / count as f64;
        let inflated = rates[g] + weight * (rates[g] - min_error);
        p *= 1.0 - inflated.min(1.0);
    }
    Ok(p)
}

pub fn measure_factor(circuit: &Circuit, calibration: &Calibration) -> Result<f64> {
    let mut p = 1.0;
    for gate in circuit.gates() {
        if gate.kind == crate::circuit::GateKind::Measure {
            p *= 1.0 - calibration.gate_error(gate)?;
        }
    }
    Ok(p)
}

/// Fraction of shots that returned `target`.
pub fn pst(histogram: &BTreeMap<String, u64>, target: &str) -> Result<f64> {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return Err(Error::EmptyInput("histogram has no shots"));
    }
    let hits = histogram.get(target).copied().unwrap_or(0);
    Ok(hits as f64 / total as f64)
}

/// average achieved cost over the best achievable cost.
pub fn approximation_ratio(average_cost: f64, best_cost: f64) -> Result<f64> {
    if best_cost == 0.0 {
        return Err(Error::UndefinedRatio("best cost is zero"));
    }
    Ok(average_cost / best_cost)
}

/// Percentage of the ideal approximation ratio lost to noise:
/// 100 * (ideal - noisy) / ideal.
pub fn arg(ideal_ratio: f64, noisy_ratio: f64) -> Result<f64> {
    if ideal_ratio == 0.0 {
        return Err(Error::UndefinedRatio("ideal approximation ratio is zero"));
    }
    Ok(100.0 * (ideal_ratio - noisy_ratio) / ideal_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{Calibration, GateErrors, QubitCalibration};
    use crate::circuit::Gate;

    fn qubit(id: QubitId, readout: f64, errors: GateErrors) -> QubitCalibration {
        QubitCalibration { id, readout_error: readout, gate_errors: errors }
    }

    fn h_only(rate: f64) -> GateErrors {
        GateErrors { h: rate, ..GateErrors::default() }
    }

    /// Three independent h gates: no dependency structure, so ESP is the
    /// plain survival product and WESP equals it up to the inflation of
    /// the sole above-minimum gate.
    #[test]
    fn esp_is_the_survival_product() {
        let c = Circuit::new(3, 0, vec![Gate::h(0), Gate::h(1), Gate::h(2)]).unwrap();
        let calib = Calibration {
            name: String::new(),
            qubits: vec![
                qubit(0, 0.0, h_only(0.01)),
                qubit(1, 0.0, h_only(0.02)),
                qubit(2, 0.0, h_only(0.03)),
            ],
            edges: vec![],
        };
        let got = esp(&c, &calib).unwrap();
        assert!((got - 0.99 * 0.98 * 0.97).abs() < 1e-15, "{got}");
        // Parallel gates reach nothing, so every weight is zero and
        // WESP coincides with ESP even though the rates differ.
        assert!((wesp(&c, &calib).unwrap() - got).abs() < 1e-15);
    }

    /// Serial chain h-x-sx on one qubit with rates 0.03/0.01/0.01.
    /// S = [2, 1, 0], G = 3, min e = 0.01, so only the front gate is
    /// inflated: by (2/3) * 0.02.
    #[test]
    fn wesp_inflates_early_noisy_gates() {
        let c = Circuit::new(1, 0, vec![Gate::h(0), Gate::x(0), Gate::sx(0)]).unwrap();
        let calib = Calibration {
            name: String::new(),
            qubits: vec![qubit(
                0,
                0.0,
                GateErrors { h: 0.03, x: 0.01, sx: 0.01, rz: 0.0 },
            )],
            edges: vec![],
        };
        let report = wesp_report(&c, &calib).unwrap();
        let expected = (1.0 - (0.03 + (2.0 / 3.0) * 0.02)) * 0.99 * 0.99;
        assert!((report.wesp - expected).abs() < 1e-15, "{}", report.wesp);
        assert!((report.esp - 0.97 * 0.99 * 0.99).abs() < 1e-15);
        assert!(report.wesp < report.esp);
        assert_eq!(report.erroneous_gates, 3);
        assert!((report.min_gate_error - 0.01).abs() < 1e-15);
        let s: Vec<usize> = report.gates.iter().map(|g| g.dependents).collect();
        assert_eq!(s, vec![2, 1, 0]);
        assert!((report.gates[0].inflation - (2.0 / 3.0) * 0.02).abs() < 1e-15);
        assert_eq!(report.gates[1].inflation, 0.0);
    }

    /// Two chained cx (0.02 then 0.01) and three measured qubits at 0.01:
    /// G=2, S=[1,0], so the front cx is inflated by 0.5 * 0.01 and
    /// wesp = 0.975 * 0.99 * 0.99^3.
    #[test]
    fn two_cx_chain_hand_value() {
        let gates = vec![
            Gate::cx(0, 1),
            Gate::cx(1, 2),
            Gate::measure(0, 0),
            Gate::measure(1, 1),
            Gate::measure(2, 2),
        ];
        let c = Circuit::new(3, 3, gates).unwrap();
        let mut calib = Calibration::uniform_line(3, 0.0, 0.0, 0.01);
        calib.edges[0].cx_error = 0.02;
        calib.edges[1].cx_error = 0.01;
        let report = wesp_report(&c, &calib).unwrap();
        let expected = 0.975 * 0.99 * 0.99f64.powi(3);
        assert!((report.wesp - expected).abs() < 1e-15, "{}", report.wesp);
        let s: Vec<usize> = report.gates.iter().map(|g| g.dependents).collect();
        assert_eq!(s, vec![1, 0]);
        assert!((report.wesp - 0.936581).abs() < 1e-6);
    }

    #[test]
    fn uniform_rates_collapse_wesp_to_esp() {
        let gates = vec![
            Gate::h(0),
            Gate::cx(0, 1),
            Gate::sx(1),
            Gate::cx(1, 2),
            Gate::x(2),
            Gate::measure(0, 0),
            Gate::measure(2, 1),
        ];
        let c = Circuit::new(3, 2, gates).unwrap();
        // Uniform means one rate across every erroneous gate, cx included.
        let calib = Calibration::uniform_line(3, 0.013, 0.013, 0.021);
        let report = wesp_report(&c, &calib).unwrap();
        assert!(
            (report.wesp - report.esp).abs() <= 1e-12,
            "wesp {} esp {}",
            report.wesp,
            report.esp
        );
        assert!(report.gates.iter().all(|g| g.inflation == 0.0));
    }

    #[test]
    fn inflated_rate_saturates_at_one() {
        // Front gate at 0.9 with weight 2/3 inflates past 1 and the
        // whole product collapses to zero.
        let c = Circuit::new(1, 0, vec![Gate::h(0), Gate::x(0), Gate::sx(0)]).unwrap();
        let calib = Calibration {
            name: String::new(),
            qubits: vec![qubit(
                0,
                0.0,
                GateErrors { h: 0.9, x: 0.0, sx: 0.0, rz: 0.0 },
            )],
            edges: vec![],
        };
        assert_eq!(wesp(&c, &calib).unwrap(), 0.0);
        assert!(esp(&c, &calib).unwrap() > 0.0);
    }

    #[test]
    fn readout_factor_multiplies_both_metrics() {
        let c = Circuit::new(
            2,
            2,
            vec![Gate::h(0), Gate::measure(0, 0), Gate::measure(1, 1)],
        )
        .unwrap();
        let calib = Calibration {
            name: String::new(),
            qubits: vec![
                qubit(0, 0.02, h_only(0.01)),
                qubit(1, 0.05, GateErrors::default()),
            ],
            edges: vec![],
        };
        let expected = 0.99 * 0.98 * 0.95;
        assert!((esp(&c, &calib).unwrap() - expected).abs() < 1e-15);
        assert!((wesp(&c, &calib).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn no_erroneous_gates_leaves_the_readout_factor() {
        let c = Circuit::new(
            1,
            1,
            vec![Gate::rz(0.4, 0), Gate::barrier(vec![0]), Gate::measure(0, 0)],
        )
        .unwrap();
        let calib = Calibration {
            name: String::new(),
            qubits: vec![qubit(0, 0.03, GateErrors::default())],
            edges: vec![],
        };
        let report = wesp_report(&c, &calib).unwrap();
        assert_eq!(report.erroneous_gates, 0);
        assert!((report.wesp - 0.97).abs() < 1e-15);
        assert_eq!(report.wesp, report.esp);
        assert!(report.gates.is_empty());
    }

    #[test]
    fn masked_form_reproduces_the_calibrated_form() {
        let gates = vec![
            Gate::h(0),
            Gate::cx(0, 1),
            Gate::rz(0.3, 1),
            Gate::cx(0, 1),
            Gate::sx(1),
            Gate::measure(0, 0),
            Gate::measure(1, 1),
        ];
        let c = Circuit::new(2, 2, gates).unwrap();
        let calib = Calibration::uniform_line(2, 0.002, 0.017, 0.03);
        let dag = DependencyGraph::build(&c);
        let mask: Vec<bool> =
            c.gates().iter().map(|g| g.kind.is_erroneous()).collect();
        let rates: Vec<f64> = c
            .gates()
            .iter()
            .map(|g| calib.gate_error(g).unwrap())
            .collect();
        let mf = measure_factor(&c, &calib).unwrap();
        let via_mask = wesp_masked(&dag, &mask, &rates, mf).unwrap();
        let direct = wesp(&c, &calib).unwrap();
        assert!((via_mask - direct).abs() < 1e-15);
    }

    #[test]
    fn masked_form_checks_lengths_and_rates() {
        let c = Circuit::new(1, 0, vec![Gate::h(0), Gate::x(0)]).unwrap();
        let dag = DependencyGraph::build(&c);
        assert!(matches!(
            wesp_masked(&dag, &[true], &[0.1], 1.0),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(
            wesp_masked(&dag, &[true, true], &[0.1, 1.5], 1.0),
            Err(Error::RateRange(_))
        ));
    }

    #[test]
    fn pst_counts_matching_shots() {
        let mut hist = BTreeMap::new();
        hist.insert("00".to_string(), 3);
        hist.insert("01".to_string(), 1);
        assert!((pst(&hist, "00").unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(pst(&hist, "11").unwrap(), 0.0);
        assert!(matches!(
            pst(&BTreeMap::new(), "0"),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn ratio_metrics() {
        assert!((approximation_ratio(4.5, 5.0).unwrap() - 0.9).abs() < 1e-15);
        assert!(matches!(
            approximation_ratio(1.0, 0.0),
            Err(Error::UndefinedRatio(_))
        ));
        assert!((arg(0.9, 0.72).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(arg(0.5, 0.5).unwrap(), 0.0);
        assert!(matches!(arg(0.0, 0.1), Err(Error::UndefinedRatio(_))));
    }
}
