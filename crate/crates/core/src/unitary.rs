//! Dense unitaries for small qubit counts.
//!
//! Statevectors and matrices index qubits little-endian: qubit 0 is the
//! least significant bit of the basis index.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub dim: usize,
    pub a: Vec<C64>,
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Mat { dim, a: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m.a[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.a[r * self.dim + c]
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Mat::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let v = self.a[r * d + k];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..d {
                    out.a[r * d + c] += v * rhs.a[k * d + c];
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (o, r) in out.a.iter_mut().zip(rhs.a.iter()) {
            *o -= r;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Column `c` as a statevector.
    fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self.at(r, c)).collect()
    }

    fn set_column(&mut self, c: usize, col: &[C64]) {
        for (r, v) in col.iter().enumerate() {
            self.a[r * self.dim + c] = *v;
        }
    }
}

/// 2x2 unitary of a single-qubit kind.
pub fn single_qubit_matrix(kind: GateKind) -> Result<[C64; 4]> {
    let z = |re: f64, im: f64| C64::new(re, im);
    match kind {
        GateKind::H => Ok([
            z(FRAC_1_SQRT_2, 0.0),
            z(FRAC_1_SQRT_2, 0.0),
            z(FRAC_1_SQRT_2, 0.0),
            z(-FRAC_1_SQRT_2, 0.0),
        ]),
        GateKind::X => Ok([z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)]),
        GateKind::Sx => Ok([
            z(0.5, 0.5),
            z(0.5, -0.5),
            z(0.5, -0.5),
            z(0.5, 0.5),
        ]),
        GateKind::Rz(theta) => {
            let half = theta / 2.0;
            Ok([
                C64::from_polar(1.0, -half),
                z(0.0, 0.0),
                z(0.0, 0.0),
                C64::from_polar(1.0, half),
            ])
        }
        other => Err(Error::NonUnitary(other.name())),
    }
}

/// Applies a single-qubit unitary to `state` in place.
pub fn apply_single(state: &mut [C64], q: usize, m: &[C64; 4]) {
    let bit = 1usize << q;
    let n = state.len();
    let mut i = 0;
    while i < n {
        if i & bit == 0 {
            let a = state[i];
            let b = state[i | bit];
            state[i] = m[0] * a + m[1] * b;
            state[i | bit] = m[2] * a + m[3] * b;
        }
        i += 1;
    }
}

/// Applies a CNOT with the given control and target to `state` in place.
pub fn apply_cx(state: &mut [C64], control: usize, target: usize) {
    let cbit = 1usize << control;
    let tbit = 1usize << target;
    for i in 0..state.len() {
        if i & cbit != 0 && i & tbit == 0 {
            state.swap(i, i | tbit);
        }
    }
}

/// Applies one gate to a statevector over `num_qubits` qubits. Barriers do
/// nothing; measures are rejected.
pub fn apply_gate(state: &mut [C64], gate: &Gate) -> Result<()> {
    match gate.kind {
        GateKind::Barrier => Ok(()),
        GateKind::Measure => Err(Error::NonUnitary("measure")),
        GateKind::Cx => {
            apply_cx(state, gate.qubits[0], gate.qubits[1]);
            Ok(())
        }
        kind => {
            let m = single_qubit_matrix(kind)?;
            apply_single(state, gate.qubits[0], &m);
            Ok(())
        }
    }
}

/// Full unitary of a circuit, built column by column. Barriers are skipped
/// and measures ignored (the comparison happens pre-measurement).
pub fn circuit_unitary(circuit: &Circuit, qubit_limit: usize) -> Result<Mat> {
    let n = circuit.num_qubits();
    if n > qubit_limit {
        return Err(Error::TooManyQubits { n, limit: qubit_limit });
    }
    let dim = 1usize << n;
    let mut u = Mat::identity(dim);
    for c in 0..dim {
        let mut col = u.column(c);
        for gate in circuit.gates() {
            if gate.kind == GateKind::Measure {
                continue;
            }
            apply_gate(&mut col, gate)?;
        }
        u.set_column(c, &col);
    }
    Ok(u)
}

/// Whether `a = phase * b` for some unit-modulus phase, to `tol` per entry.
pub fn equal_up_to_global_phase(a: &Mat, b: &Mat, tol: f64) -> bool {
    if a.dim != b.dim {
        return false;
    }
    let mut best = (0usize, 0.0f64);
    for (i, z) in a.a.iter().enumerate() {
        let n = z.norm();
        if n > best.1 {
            best = (i, n);
        }
    }
    if best.1 <= tol {
        // a is (near) zero; unitaries never are, but stay defensive.
        return b.max_abs() <= tol;
    }
    let denom = b.a[best.0];
    if denom.norm() <= tol {
        return false;
    }
    let phase = a.a[best.0] / denom;
    if (phase.norm() - 1.0).abs() > tol {
        return false;
    }
    a.a.iter()
        .zip(b.a.iter())
        .all(|(x, y)| (x - phase * y).norm() <= tol)
}
