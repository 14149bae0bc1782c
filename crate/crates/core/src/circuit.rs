//! Circuit IR: gates, ASAP layering, and structural edits.
//!
//! A circuit is an ordered gate list over `num_qubits` qubits and
//! `num_clbits` classical bits. Layers are derived, not stored state:
//! every constructor and edit recomputes the ASAP layering, in which a
//! gate sits one past the deepest layer among its per-qubit predecessors.

use crate::error::{Error, Result};

pub type QubitId = usize;
pub type GateId = usize;

/// Supported gate kinds. `Rz` carries its angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    Sx,
    Rz(f64),
    Cx,
    Measure,
    Barrier,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Sx => "sx",
            GateKind::Rz(_) => "rz",
            GateKind::Cx => "cx",
            GateKind::Measure => "measure",
            GateKind::Barrier => "barrier",
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Barrier)
    }

    /// Kinds that carry a nonzero hardware error rate. `rz` is virtual
    /// (frame change), barriers and measures are not gates in this sense.
    pub fn is_erroneous(&self) -> bool {
        matches!(self, GateKind::H | GateKind::X | GateKind::Sx | GateKind::Cx)
    }

    fn tag(&self) -> u8 {
        match self {
            GateKind::H => 0,
            GateKind::X => 1,
            GateKind::Sx => 2,
            GateKind::Rz(_) => 3,
            GateKind::Cx => 4,
            GateKind::Measure => 5,
            GateKind::Barrier => 6,
        }
    }

    fn angle_bits(&self) -> u64 {
        match self {
            GateKind::Rz(theta) => theta.to_bits(),
            _ => 0,
        }
    }
}

/// One gate instance. Ids are positional: `gates[i].id == i` always, and
/// every structural edit reassigns them.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub id: GateId,
    pub kind: GateKind,
    /// For `cx` the order is `[control, target]`.
    pub qubits: Vec<QubitId>,
    /// Target classical bit, `measure` only.
    pub clbit: Option<usize>,
    /// Tag linking the gate to a compound (ZZ) block, if any.
    pub block_id: Option<usize>,
}

impl Gate {
    fn new(kind: GateKind, qubits: Vec<QubitId>) -> Self {
        Gate { id: 0, kind, qubits, clbit: None, block_id: None }
    }

    pub fn h(q: QubitId) -> Self {
        Gate::new(GateKind::H, vec![q])
    }

    pub fn x(q: QubitId) -> Self {
        Gate::new(GateKind::X, vec![q])
    }

    pub fn sx(q: QubitId) -> Self {
        Gate::new(GateKind::Sx, vec![q])
    }

    pub fn rz(theta: f64, q: QubitId) -> Self {
        Gate::new(GateKind::Rz(theta), vec![q])
    }

    pub fn cx(control: QubitId, target: QubitId) -> Self {
        Gate::new(GateKind::Cx, vec![control, target])
    }

    pub fn measure(q: QubitId, c: usize) -> Self {
        let mut g = Gate::new(GateKind::Measure, vec![q]);
        g.clbit = Some(c);
        g
    }

    pub fn barrier(qubits: Vec<QubitId>) -> Self {
        Gate::new(GateKind::Barrier, qubits)
    }

    pub fn with_block(mut self, block_id: usize) -> Self {
        self.block_id = Some(block_id);
        self
    }

    /// Identity of the gate minus its position. Used for multiset and
    /// schedule comparisons.
    pub fn signature(&self) -> GateSignature {
        (
            self.kind.tag(),
            self.kind.angle_bits(),
            self.qubits.clone(),
            self.clbit,
            self.block_id,
        )
    }

    /// Signature equality with an angle tolerance instead of bit equality.
    pub fn matches(&self, other: &Gate, angle_tol: f64) -> bool {
        let angles_close = match (self.kind, other.kind) {
            (GateKind::Rz(a), GateKind::Rz(b)) => (a - b).abs() <= angle_tol,
            (a, b) => a == b,
        };
        angles_close
            && self.kind.tag() == other.kind.tag()
            && self.qubits == other.qubits
            && self.clbit == other.clbit
    }
}

pub type GateSignature = (u8, u64, Vec<QubitId>, Option<usize>, Option<usize>);

/// Gate list plus its derived ASAP layering.
#[derive(Debug, Clone)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
    layers: Vec<Vec<GateId>>,
    gate_layer: Vec<usize>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize, mut gates: Vec<Gate>) -> Result<Self> {
        for (i, g) in gates.iter_mut().enumerate() {
            g.id = i;
            validate_gate(g, num_qubits, num_clbits)?;
        }
        let (layers, gate_layer) = compute_layers(num_qubits, &gates);
        Ok(Circuit { num_qubits, num_clbits, gates, layers, gate_layer })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> Result<&Gate> {
        self.gates.get(id).ok_or(Error::UnknownGate(id))
    }

    /// ASAP layers as gate-id sets, in execution order. Layers holding only
    /// barriers still appear here; `depth` skips them.
    pub fn layers(&self) -> &[Vec<GateId>] {
        &self.layers
    }

    pub fn layer_of(&self, id: GateId) -> Result<usize> {
        self.gate_layer.get(id).copied().ok_or(Error::UnknownGate(id))
    }

    pub fn gate_layers(&self) -> &[usize] {
        &self.gate_layer
    }

    /// Number of layers occupied by at least one non-barrier gate.
    pub fn depth(&self) -> usize {
        self.layers
            .iter()
            .filter(|layer| {
                layer.iter().any(|&g| self.gates[g].kind != GateKind::Barrier)
            })
            .count()
    }

    /// Total gate count, or only the erroneous kinds (no rz, barrier, measure).
    pub fn gate_count(&self, erroneous_only: bool) -> usize {
        if erroneous_only {
            self.gates.iter().filter(|g| g.kind.is_erroneous()).count()
        } else {
            self.gates.len()
        }
    }

    /// Qubits carrying at least one measure, ascending.
    pub fn measured_qubits(&self) -> Vec<QubitId> {
        let mut qs: Vec<QubitId> = self
            .gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .map(|g| g.qubits[0])
            .collect();
        qs.sort_unstable();
        qs.dedup();
        qs
    }

    /// Exchanges the layer slots of gates `a` and `b`, reorders the gate
    /// list accordingly, and relayers. Returns the new circuit plus the
    /// position permutation (`perm[old_id] = new_id`). Purely structural:
    /// commutation and depth legality are the caller's concern.
    pub fn apply_swap(&self, a: GateId, b: GateId) -> Result<(Circuit, Vec<GateId>)> {
        if a == b {
            return Err(Error::InvalidCircuit("swap of a gate with itself".into()));
        }
        self.gate(a)?;
        self.gate(b)?;
        let n = self.gates.len();
        let mut slot = self.gate_layer.clone();
        slot.swap(a, b);
        // The pair also trades list-position tiebreaks so the incoming gate
        // lands exactly where the outgoing one sat inside its layer.
        let tie = |g: GateId| -> GateId {
            if g == a {
                b
            } else if g == b {
                a
            } else {
                g
            }
        };
        let mut order: Vec<GateId> = (0..n).collect();
        order.sort_by_key(|&g| (slot[g], tie(g)));
        let mut perm = vec![0; n];
        let mut gates = Vec::with_capacity(n);
        for (new_id, &old_id) in order.iter().enumerate() {
            perm[old_id] = new_id;
            let mut g = self.gates[old_id].clone();
            g.id = new_id;
            gates.push(g);
        }
        let (layers, gate_layer) = compute_layers(self.num_qubits, &gates);
        Ok((
            Circuit {
                num_qubits: self.num_qubits,
                num_clbits: self.num_clbits,
                gates,
                layers,
                gate_layer,
            },
            perm,
        ))
    }

    /// Sorted gate signatures; equal multisets mean the same gates were
    /// only reordered.
    pub fn multiset_signature(&self) -> Vec<GateSignature> {
        let mut sig: Vec<GateSignature> = self.gates.iter().map(Gate::signature).collect();
        sig.sort();
        sig
    }

    /// Canonical schedule key: layer by layer, gates ordered by their
    /// smallest qubit (within a layer qubit sets are disjoint). Two
    /// circuits with the same key are the same schedule, whatever the
    /// list order within layers.
    pub fn schedule_key(&self) -> Vec<GateSignature> {
        let mut key = Vec::with_capacity(self.gates.len());
        for layer in &self.layers {
            let mut ids = layer.clone();
            ids.sort_by_key(|&g| self.gates[g].qubits.iter().copied().min().unwrap_or(0));
            for id in ids {
                key.push(self.gates[id].signature());
            }
        }
        key
    }

    /// Gate-for-gate equality in list order, angles compared to `angle_tol`.
    /// Block tags are ignored; they are sidecar metadata.
    pub fn same_gates(&self, other: &Circuit, angle_tol: f64) -> bool {
        self.num_qubits == other.num_qubits
            && self.num_clbits == other.num_clbits
            && self.gates.len() == other.gates.len()
            && self
                .gates
                .iter()
                .zip(other.gates.iter())
                .all(|(a, b)| a.matches(b, angle_tol))
    }
}

fn validate_gate(g: &Gate, num_qubits: usize, num_clbits: usize) -> Result<()> {
    let arity_ok = match g.kind {
        GateKind::Cx => g.qubits.len() == 2,
        GateKind::Barrier => !g.qubits.is_empty(),
        _ => g.qubits.len() == 1,
    };
    if !arity_ok {
        return Err(Error::InvalidCircuit(format!(
            "{} takes {} qubit(s), got {}",
            g.kind.name(),
            match g.kind {
                GateKind::Cx => "2",
                GateKind::Barrier => "1 or more",
                _ => "1",
            },
            g.qubits.len()
        )));
    }
    for &q in &g.qubits {
        if q >= num_qubits {
            return Err(Error::Register(format!(
                "qubit {q} out of range for {} qubits",
                num_qubits
            )));
        }
    }
    let mut qs = g.qubits.clone();
    qs.sort_unstable();
    qs.dedup();
    if qs.len() != g.qubits.len() {
        return Err(Error::InvalidCircuit(format!(
            "{} repeats a qubit operand",
            g.kind.name()
        )));
    }
    if let GateKind::Rz(theta) = g.kind {
        if !theta.is_finite() {
            return Err(Error::InvalidCircuit("rz angle is not finite".into()));
        }
    }
    match (g.kind, g.clbit) {
        (GateKind::Measure, Some(c)) => {
            if c >= num_clbits {
                return Err(Error::Register(format!(
                    "classical bit {c} out of range for {num_clbits} bits"
                )));
            }
        }
        (GateKind::Measure, None) => {
            return Err(Error::InvalidCircuit("measure without a classical bit".into()));
        }
        (_, Some(_)) => {
            return Err(Error::InvalidCircuit(format!(
                "{} cannot write a classical bit",
                g.kind.name()
            )));
        }
        _ => {}
    }
    Ok(())
}

fn compute_layers(num_qubits: usize, gates: &[Gate]) -> (Vec<Vec<GateId>>, Vec<usize>) {
    let mut next_free = vec![0usize; num_qubits];
    let mut layers: Vec<Vec<GateId>> = Vec::new();
    let mut gate_layer = Vec::with_capacity(gates.len());
    for g in gates {
        let layer = g.qubits.iter().map(|&q| next_free[q]).max().unwrap_or(0);
        for &q in &g.qubits {
            next_free[q] = layer + 1;
        }
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(g.id);
        gate_layer.push(layer);
    }
    (layers, gate_layer)
}
