//! Batch front end: score, reorder, simulate, and generate circuits.
//! Every report is JSON with a fixed field order so runs can be diffed;
//! bitstrings are little-endian (string index i is classical bit c[i]).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qresched::calibration::Calibration;
use qresched::circuit::{Circuit, Gate};
use qresched::commute::DEFAULT_MATRIX_TOL;
use qresched::error::Error as CoreError;
use qresched::metrics::{approximation_ratio, arg, pst, wesp_report, GateMetric};
use qresched::qaoa::{average_cost, build_qaoa, max_cost, MaxCutGraph};
use qresched::qasm::{emit_qasm, parse_qasm};
use qresched::reschedule::{
    reschedule_combined, reschedule_exhaustive, reschedule_greedy, reschedule_zz,
    BlockErrorModel, RescheduleResult,
};
use qresched::sim::{sample_ideal, sample_noisy, unitary_equivalent, SimConfig};

/// Global-phase tolerance for the post-reschedule self check.
const EQUIV_TOL: f64 = 1e-10;

const BIT_ORDER: &str = "string index i is classical bit c[i]";

#[derive(Parser)]
#[command(
    name = "qresched",
    version,
    about = "Noise-aware rescheduling of OpenQASM 2.0 circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a circuit against a calibration: ESP, WESP, per-gate table.
    Metrics(MetricsArgs),
    /// Reorder commuting gates to raise WESP and write the result.
    Reschedule(RescheduleArgs),
    /// Sample a circuit under calibrated stochastic Pauli noise.
    Simulate(SimulateArgs),
    /// Generate a Max-Cut QAOA circuit plus its block-tag sidecar.
    Qaoa(QaoaArgs),
}

#[derive(Args)]
struct MetricsArgs {
    /// Circuit file (OpenQASM 2.0).
    #[arg(long)]
    qasm: PathBuf,
    /// Calibration file (JSON).
    #[arg(long)]
    calibration: PathBuf,
}

#[derive(Args)]
struct RescheduleArgs {
    /// Circuit file (OpenQASM 2.0).
    #[arg(long)]
    qasm: PathBuf,
    /// Calibration file (JSON).
    #[arg(long)]
    calibration: PathBuf,
    /// Which pass to run. zz and both need a block-tag sidecar
    /// (<qasm>.tags.json) next to the input.
    #[arg(long, value_enum)]
    level: Level,
    /// Greedy sweeps over the layers; each sweep stops when nothing
    /// improves.
    #[arg(long, default_value_t = 1)]
    sweeps: usize,
    /// Enumerate every reachable schedule instead of the greedy walk,
    /// failing if more than LIMIT exist. Elementary level only.
    #[arg(long, value_name = "LIMIT")]
    exhaustive: Option<u64>,
    /// Self check that the output implements the input unitary. auto
    /// turns it on below 7 qubits.
    #[arg(long, value_enum, default_value_t = Verify::Auto)]
    verify: Verify,
    /// Where to write the rescheduled circuit.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Circuit file (OpenQASM 2.0).
    #[arg(long)]
    qasm: PathBuf,
    /// Calibration file (JSON).
    #[arg(long)]
    calibration: PathBuf,
    /// Shots to sample.
    #[arg(long, default_value_t = 8192)]
    shots: u64,
    /// RNG seed; every shot derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target bitstring for PST (exactly one of --expected / --graph).
    #[arg(long, value_name = "BITS")]
    expected: Option<String>,
    /// Max-Cut graph for the approximation ratio.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Second circuit to simulate under the same settings, reported as
    /// ideal-vs-noisy percentage gaps on both sides.
    #[arg(long, value_name = "BASE")]
    compare: Option<PathBuf>,
}

#[derive(Args)]
struct QaoaArgs {
    /// Max-Cut graph file (JSON).
    #[arg(long)]
    graph: PathBuf,
    /// Cost angles, comma separated; a single value is repeated to -p.
    #[arg(long, value_delimiter = ',', required = true)]
    gamma: Vec<f64>,
    /// Mixer angles, same shape rules as --gamma.
    #[arg(long, value_delimiter = ',', required = true)]
    beta: Vec<f64>,
    /// Repetitions; defaults to the length of --gamma.
    #[arg(short, long)]
    p: Option<usize>,
    /// Where to write the circuit; the sidecar goes to <output>.tags.json.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Level {
    Elementary,
    Zz,
    Both,
}

impl Level {
    fn name(self) -> &'static str {
        match self {
            Level::Elementary => "elementary",
            Level::Zz => "zz",
            Level::Both => "both",
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Verify {
    Auto,
    On,
    Off,
}

/// Exit code 2 is an input problem, 3 a broken internal invariant.
enum Failure {
    Input(String),
    Invariant(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Metrics(a) => cmd_metrics(a),
        Command::Reschedule(a) => cmd_reschedule(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Qaoa(a) => cmd_qaoa(a),
    }
}

#[derive(Serialize)]
struct FileRef {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Shape {
    qubits: usize,
    clbits: usize,
    gates: usize,
    depth: usize,
}

impl Shape {
    fn of(c: &Circuit) -> Self {
        Shape {
            qubits: c.num_qubits(),
            clbits: c.num_clbits(),
            gates: c.gates().len(),
            depth: c.depth(),
        }
    }
}

/// Gate-index / block-id pairs carried next to a circuit file, since
/// OpenQASM 2.0 has no annotation syntax of its own.
#[derive(Serialize, Deserialize)]
struct TagSidecar {
    blocks: Vec<[usize; 2]>,
}

impl TagSidecar {
    fn of(circuit: &Circuit) -> Self {
        let blocks = circuit
            .gates()
            .iter()
            .filter_map(|g| g.block_id.map(|b| [g.id, b]))
            .collect();
        TagSidecar { blocks }
    }

    fn apply(&self, circuit: &Circuit) -> Result<Circuit, Failure> {
        let mut gates: Vec<Gate> = circuit.gates().to_vec();
        for &[idx, block] in &self.blocks {
            let g = gates.get_mut(idx).ok_or_else(|| {
                Failure::Input(format!("tag index {idx} is outside the circuit"))
            })?;
            *g = g.clone().with_block(block);
        }
        Ok(Circuit::new(circuit.num_qubits(), circuit.num_clbits(), gates)?)
    }
}

fn read_file(path: &Path) -> Result<(String, FileRef), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(text.as_bytes());
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok((text, FileRef { path: path.display().to_string(), sha256 }))
}

fn load_circuit(path: &Path) -> Result<(Circuit, FileRef), Failure> {
    let (text, fref) = read_file(path)?;
    Ok((parse_qasm(&text)?, fref))
}

fn load_calibration(path: &Path) -> Result<(Calibration, FileRef), Failure> {
    let (text, fref) = read_file(path)?;
    Ok((Calibration::from_json(&text)?, fref))
}

fn load_graph(path: &Path) -> Result<(MaxCutGraph, FileRef), Failure> {
    let (text, fref) = read_file(path)?;
    Ok((MaxCutGraph::from_json(&text)?, fref))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn tags_path(qasm: &Path) -> PathBuf {
    PathBuf::from(format!("{}.tags.json", qasm.display()))
}

fn print_report<T: Serialize>(report: &T) {
    println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
}

#[derive(Serialize)]
struct MetricsReport {
    command: &'static str,
    qasm: FileRef,
    calibration: FileRef,
    circuit: Shape,
    esp: f64,
    wesp: f64,
    /// "λ=0" when no gate carries any inflation, so WESP equals ESP.
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
    erroneous_gates: usize,
    measured_qubits: usize,
    measure_factor: f64,
    min_gate_error: f64,
    gates: Vec<GateMetric>,
}

fn cmd_metrics(a: MetricsArgs) -> Result<(), Failure> {
    let (circuit, qasm_ref) = load_circuit(&a.qasm)?;
    let (cal, cal_ref) = load_calibration(&a.calibration)?;
    cal.covers(&circuit)?;
    let report = wesp_report(&circuit, &cal)?;
    let lambda_zero = report.gates.iter().all(|g| g.inflation == 0.0);
    print_report(&MetricsReport {
        command: "metrics",
        qasm: qasm_ref,
        calibration: cal_ref,
        circuit: Shape::of(&circuit),
        esp: report.esp,
        wesp: report.wesp,
        note: lambda_zero.then_some("λ=0"),
        erroneous_gates: report.erroneous_gates,
        measured_qubits: circuit.measured_qubits().len(),
        measure_factor: report.measure_factor,
        min_gate_error: report.min_gate_error,
        gates: report.gates,
    });
    Ok(())
}

#[derive(Serialize)]
struct RescheduleReport {
    command: &'static str,
    qasm: FileRef,
    calibration: FileRef,
    level: &'static str,
    sweeps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive_limit: Option<u64>,
    circuit: Shape,
    swaps_applied: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedules_enumerated: Option<u64>,
    esp: f64,
    wesp_before: f64,
    wesp_after: f64,
    elapsed_ms: f64,
    verify: &'static str,
    output: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    tags_output: Option<String>,
}

fn cmd_reschedule(a: RescheduleArgs) -> Result<(), Failure> {
    if a.exhaustive.is_some() && a.level != Level::Elementary {
        return Err(Failure::Input(
            "--exhaustive only applies to --level elementary".into(),
        ));
    }
    let (mut circuit, qasm_ref) = load_circuit(&a.qasm)?;
    let (cal, cal_ref) = load_calibration(&a.calibration)?;
    cal.covers(&circuit)?;

    let sidecar = tags_path(&a.qasm);
    let tagged = sidecar.exists();
    if tagged {
        let (text, _) = read_file(&sidecar)?;
        let tags: TagSidecar = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("{}: {e}", sidecar.display())))?;
        circuit = tags.apply(&circuit)?;
    } else if a.level != Level::Elementary {
        return Err(Failure::Input(format!(
            "--level {} needs block tags; no sidecar at {}",
            a.level.name(),
            sidecar.display()
        )));
    }

    let result: RescheduleResult = match (a.level, a.exhaustive) {
        (Level::Elementary, Some(limit)) => {
            reschedule_exhaustive(&circuit, &cal, limit, DEFAULT_MATRIX_TOL)?
        }
        (Level::Elementary, None) => {
            reschedule_greedy(&circuit, &cal, a.sweeps, DEFAULT_MATRIX_TOL)?
        }
        (Level::Zz, _) => {
            reschedule_zz(&circuit, &cal, a.sweeps, BlockErrorModel::Complement)?
        }
        (Level::Both, _) => reschedule_combined(
            &circuit,
            &cal,
            a.sweeps,
            BlockErrorModel::Complement,
            DEFAULT_MATRIX_TOL,
        )?,
    };

    if result.circuit.depth() != circuit.depth() {
        return Err(Failure::Invariant(format!(
            "depth changed: {} -> {}",
            circuit.depth(),
            result.circuit.depth()
        )));
    }
    if result.circuit.multiset_signature() != circuit.multiset_signature() {
        return Err(Failure::Invariant("gate multiset changed".into()));
    }
    if result.wesp_after < result.wesp_before {
        return Err(Failure::Invariant(format!(
            "score dropped: {} -> {}",
            result.wesp_before, result.wesp_after
        )));
    }
    let check = match a.verify {
        Verify::On => true,
        Verify::Off => false,
        Verify::Auto => circuit.num_qubits() < 7,
    };
    if check && !unitary_equivalent(&circuit, &result.circuit, EQUIV_TOL)? {
        return Err(Failure::Invariant(
            "output is not unitarily equivalent to the input".into(),
        ));
    }

    write_file(&a.output, &emit_qasm(&result.circuit))?;
    let tags_output = if tagged {
        let out = tags_path(&a.output);
        let body = serde_json::to_string_pretty(&TagSidecar::of(&result.circuit))
            .expect("sidecar serializes");
        write_file(&out, &body)?;
        Some(out.display().to_string())
    } else {
        None
    };

    let esp = qresched::metrics::esp(&circuit, &cal)?;
    print_report(&RescheduleReport {
        command: "reschedule",
        qasm: qasm_ref,
        calibration: cal_ref,
        level: a.level.name(),
        sweeps: a.sweeps,
        exhaustive_limit: a.exhaustive,
        circuit: Shape::of(&result.circuit),
        swaps_applied: result.swaps_applied,
        schedules_enumerated: result.schedules_enumerated,
        esp,
        wesp_before: result.wesp_before,
        wesp_after: result.wesp_after,
        elapsed_ms: result.elapsed_ms,
        verify: if check { "passed" } else { "skipped" },
        output: a.output.display().to_string(),
        tags_output,
    });
    Ok(())
}

#[derive(Serialize)]
struct PstReport {
    expected: String,
    ideal: f64,
    noisy: f64,
}

#[derive(Serialize)]
struct ArReport {
    graph: FileRef,
    max_cost: f64,
    best_bits: String,
    ideal_average: f64,
    noisy_average: f64,
    ideal_ratio: f64,
    noisy_ratio: f64,
}

#[derive(Serialize)]
struct CompareReport {
    qasm: FileRef,
    ideal: f64,
    noisy: f64,
    /// Ideal-vs-noisy gap of the compared circuit, percent.
    arg_percent: f64,
    /// Same gap for the --qasm circuit.
    main_arg_percent: f64,
    /// arg_percent - main_arg_percent; positive means --qasm sits
    /// closer to ideal.
    delta_percent: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    qasm: FileRef,
    calibration: FileRef,
    circuit: Shape,
    shots: u64,
    seed: u64,
    bit_order: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pst: Option<PstReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    approximation: Option<ArReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compare: Option<CompareReport>,
    histogram: std::collections::BTreeMap<String, u64>,
}

/// The scalar a simulation is judged by: PST against a target string,
/// or the Max-Cut approximation ratio against a graph.
enum Objective {
    Expected(String),
    Graph(MaxCutGraph, FileRef),
}

impl Objective {
    fn score(
        &self,
        circuit: &Circuit,
        hist: &std::collections::BTreeMap<String, u64>,
    ) -> Result<f64, Failure> {
        match self {
            Objective::Expected(bits) => {
                if bits.len() != circuit.num_clbits() {
                    return Err(Failure::Input(format!(
                        "--expected has {} bits, circuit writes {}",
                        bits.len(),
                        circuit.num_clbits()
                    )));
                }
                Ok(pst(hist, bits)?)
            }
            Objective::Graph(graph, _) => {
                let avg = average_cost(graph, hist)?;
                let (best, _) = max_cost(graph)?;
                Ok(approximation_ratio(avg, best)?)
            }
        }
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let objective = match (&a.expected, &a.graph) {
        (Some(bits), None) => {
            if !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Failure::Input(format!(
                    "--expected must be a 0/1 string, got {bits:?}"
                )));
            }
            Objective::Expected(bits.clone())
        }
        (None, Some(path)) => {
            let (graph, gref) = load_graph(path)?;
            Objective::Graph(graph, gref)
        }
        _ => {
            return Err(Failure::Input(
                "exactly one of --expected or --graph is required".into(),
            ))
        }
    };

    let (circuit, qasm_ref) = load_circuit(&a.qasm)?;
    let (cal, cal_ref) = load_calibration(&a.calibration)?;
    cal.covers(&circuit)?;
    let config = SimConfig { shots: a.shots, seed: a.seed, ..SimConfig::default() };

    let noisy_hist = sample_noisy(&circuit, &cal, &config)?;
    let ideal_hist = sample_ideal(&circuit, &config)?;
    let noisy = objective.score(&circuit, &noisy_hist)?;
    let ideal = objective.score(&circuit, &ideal_hist)?;

    let compare = match &a.compare {
        None => None,
        Some(path) => {
            let (base, base_ref) = load_circuit(path)?;
            cal.covers(&base)?;
            let base_noisy_hist = sample_noisy(&base, &cal, &config)?;
            let base_ideal_hist = sample_ideal(&base, &config)?;
            let base_noisy = objective.score(&base, &base_noisy_hist)?;
            let base_ideal = objective.score(&base, &base_ideal_hist)?;
            let arg_base = arg(base_ideal, base_noisy)?;
            let arg_main = arg(ideal, noisy)?;
            Some(CompareReport {
                qasm: base_ref,
                ideal: base_ideal,
                noisy: base_noisy,
                arg_percent: arg_base,
                main_arg_percent: arg_main,
                delta_percent: arg_base - arg_main,
            })
        }
    };

    let (pst_out, ar_out) = match objective {
        Objective::Expected(bits) => (
            Some(PstReport { expected: bits, ideal, noisy }),
            None,
        ),
        Objective::Graph(graph, gref) => {
            let (best, best_bits) = max_cost(&graph)?;
            (
                None,
                Some(ArReport {
                    graph: gref,
                    max_cost: best,
                    best_bits,
                    ideal_average: ideal * best,
                    noisy_average: noisy * best,
                    ideal_ratio: ideal,
                    noisy_ratio: noisy,
                }),
            )
        }
    };

    print_report(&SimulateReport {
        command: "simulate",
        qasm: qasm_ref,
        calibration: cal_ref,
        circuit: Shape::of(&circuit),
        shots: a.shots,
        seed: a.seed,
        bit_order: BIT_ORDER,
        pst: pst_out,
        approximation: ar_out,
        compare,
        histogram: noisy_hist,
    });
    Ok(())
}

#[derive(Serialize)]
struct QaoaReport {
    command: &'static str,
    graph: FileRef,
    n: usize,
    edges: usize,
    p: usize,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    circuit: Shape,
    blocks: usize,
    output: String,
    tags_output: String,
}

/// A single angle is repeated to length p; otherwise the list must
/// already have length p.
fn tile(kind: &str, values: &[f64], p: usize) -> Result<Vec<f64>, Failure> {
    match values.len() {
        1 => Ok(vec![values[0]; p]),
        n if n == p => Ok(values.to_vec()),
        n => Err(Failure::Input(format!(
            "--{kind} has {n} values but p = {p}; give 1 or {p}"
        ))),
    }
}

fn cmd_qaoa(a: QaoaArgs) -> Result<(), Failure> {
    let (graph, graph_ref) = load_graph(&a.graph)?;
    let p = a.p.unwrap_or(a.gamma.len());
    if p == 0 {
        return Err(Failure::Input("p must be at least 1".into()));
    }
    let gammas = tile("gamma", &a.gamma, p)?;
    let betas = tile("beta", &a.beta, p)?;

    let circuit = build_qaoa(&graph, &gammas, &betas)?;
    let blocks: BTreeSet<usize> =
        circuit.gates().iter().filter_map(|g| g.block_id).collect();

    write_file(&a.output, &emit_qasm(&circuit))?;
    let tags_out = tags_path(&a.output);
    let body = serde_json::to_string_pretty(&TagSidecar::of(&circuit))
        .expect("sidecar serializes");
    write_file(&tags_out, &body)?;

    print_report(&QaoaReport {
        command: "qaoa",
        graph: graph_ref,
        n: graph.n,
        edges: graph.edges.len(),
        p,
        gamma: gammas,
        beta: betas,
        circuit: Shape::of(&circuit),
        blocks: blocks.len(),
        output: a.output.display().to_string(),
        tags_output: tags_out.display().to_string(),
    });
    Ok(())
}
