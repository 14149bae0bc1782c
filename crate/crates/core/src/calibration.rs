//! Device calibration data: per-qubit gate and readout error rates plus
//! a coupling map with per-edge cx error rates.
//!
//! The JSON layout is the wire format used by the command-line tools:
//!
//! ```json
//! {
//!   "name": "line5",
//!   "qubits": [
//!     { "id": 0, "readout_error": 0.01,
//!       "gate_errors": { "h": 0.001, "x": 0.001, "sx": 0.001, "rz": 0.0 } }
//!   ],
//!   "edges": [
//!     { "qubits": [0, 1], "cx_error": 0.02 }
//!   ]
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, QubitId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(default)]
    pub name: String,
    pub qubits: Vec<QubitCalibration>,
    #[serde(default)]
    pub edges: Vec<EdgeCalibration>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub id: QubitId,
    pub readout_error: f64,
    pub gate_errors: GateErrors,
}

/// Single-qubit error rates per kind. `rz` is virtual and must stay zero.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GateErrors {
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub sx: f64,
    #[serde(default)]
    pub rz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeCalibration {
    /// Unordered pair; the rate applies to cx in either direction.
    pub qubits: [QubitId; 2],
    pub cx_error: f64,
}

impl Calibration {
    pub fn from_json(text: &str) -> Result<Self> {
        let cal: Calibration =
            serde_json::from_str(text).map_err(|e| Error::CalibrationSchema(e.to_string()))?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for q in &self.qubits {
            if seen.insert(q.id, true).is_some() {
                return Err(Error::CalibrationSchema(format!(
                    "duplicate qubit id {}",
                    q.id
                )));
            }
            check_rate("readout_error", q.id, q.readout_error)?;
            check_rate("h", q.id, q.gate_errors.h)?;
            check_rate("x", q.id, q.gate_errors.x)?;
            check_rate("sx", q.id, q.gate_errors.sx)?;
            if q.gate_errors.rz != 0.0 {
                return Err(Error::CalibrationSchema(format!(
                    "rz error must be 0, qubit {} has {}",
                    q.id, q.gate_errors.rz
                )));
            }
        }
        let mut edges_seen = BTreeMap::new();
        for e in &self.edges {
            let [a, b] = e.qubits;
            if a == b {
                return Err(Error::CalibrationSchema(format!("edge ({a}, {b}) is a loop")));
            }
            if !seen.contains_key(&a) || !seen.contains_key(&b) {
                return Err(Error::CalibrationSchema(format!(
                    "edge ({a}, {b}) references an unknown qubit"
                )));
            }
            let key = (a.min(b), a.max(b));
            if edges_seen.insert(key, true).is_some() {
                return Err(Error::CalibrationSchema(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            if !(0.0..=1.0).contains(&e.cx_error) {
                return Err(Error::RateRange(format!(
                    "cx_error {} on edge ({a}, {b})",
                    e.cx_error
                )));
            }
        }
        Ok(())
    }

    fn qubit(&self, q: QubitId) -> Result<&QubitCalibration> {
        self.qubits
            .iter()
            .find(|c| c.id == q)
            .ok_or_else(|| Error::Coverage(format!("qubit {q}")))
    }

    /// Error rate of one gate. Barriers are free; measures report their
    /// qubit's readout error.
    pub fn gate_error(&self, gate: &Gate) -> Result<f64> {
        match gate.kind {
            GateKind::Barrier => Ok(0.0),
            GateKind::Measure => self.readout_error(gate.qubits[0]),
            GateKind::Rz(_) => {
                self.qubit(gate.qubits[0])?;
                Ok(0.0)
            }
            GateKind::H => Ok(self.qubit(gate.qubits[0])?.gate_errors.h),
            GateKind::X => Ok(self.qubit(gate.qubits[0])?.gate_errors.x),
            GateKind::Sx => Ok(self.qubit(gate.qubits[0])?.gate_errors.sx),
            GateKind::Cx => self.cx_error(gate.qubits[0], gate.qubits[1]),
        }
    }

    pub fn readout_error(&self, q: QubitId) -> Result<f64> {
        Ok(self.qubit(q)?.readout_error)
    }

    pub fn cx_error(&self, a: QubitId, b: QubitId) -> Result<f64> {
        self.edges
            .iter()
            .find(|e| {
                (e.qubits[0] == a && e.qubits[1] == b)
                    || (e.qubits[0] == b && e.qubits[1] == a)
            })
            .map(|e| e.cx_error)
            .ok_or(Error::Uncoupled(a, b))
    }

    /// Checks that every qubit and every cx pair of the circuit is covered.
    pub fn covers(&self, circuit: &Circuit) -> Result<()> {
        for q in 0..circuit.num_qubits() {
            self.qubit(q)?;
        }
        for g in circuit.gates() {
            if g.kind == GateKind::Cx {
                self.cx_error(g.qubits[0], g.qubits[1])?;
            }
        }
        Ok(())
    }

    /// Uniform rates on a line coupling 0-1-2-...-(n-1). Test helper.
    pub fn uniform_line(
        n: usize,
        single_error: f64,
        cx_error: f64,
        readout_error: f64,
    ) -> Calibration {
        Calibration {
            name: format!("line{n}-uniform"),
            qubits: (0..n)
                .map(|id| QubitCalibration {
                    id,
                    readout_error,
                    gate_errors: GateErrors {
                        h: single_error,
                        x: single_error,
                        sx: single_error,
                        rz: 0.0,
                    },
                })
                .collect(),
            edges: (0..n.saturating_sub(1))
                .map(|i| EdgeCalibration { qubits: [i, i + 1], cx_error })
                .collect(),
        }
    }

    /// Uniform rates on an all-to-all coupling. Test helper.
    pub fn uniform_full(
        n: usize,
        single_error: f64,
        cx_error: f64,
        readout_error: f64,
    ) -> Calibration {
        let mut cal = Calibration::uniform_line(n, single_error, cx_error, readout_error);
        cal.name = format!("full{n}-uniform");
        cal.edges = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| EdgeCalibration {
                qubits: [a, b],
                cx_error,
            }))
            .collect();
        cal
    }
}

fn check_rate(what: &str, q: QubitId, rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
        return Err(Error::RateRange(format!("{what} {rate} on qubit {q}")));
    }
    Ok(())
}
