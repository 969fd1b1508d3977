//! Logical circuit representation and the deterministic workload generators.
//!
//! Eight algorithm families with three structural sub-variants each. The
//! generators emit gate-level circuits whose shape (width, 2Q density,
//! interaction graph) is what later leaks through compilation metadata;
//! angles are sampled but never matter beyond approximate-QFT pruning.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{rng_for, str_tag};

pub const MIN_WIDTH: usize = 4;
pub const MAX_WIDTH: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("invalid circuit spec: {0}")]
    InvalidSpec(String),
    #[error("invalid gate {kind:?} on {qubits:?}: {reason}")]
    InvalidGate {
        kind: GateKind,
        qubits: Vec<usize>,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Cx,
    Swap,
    H,
    X,
    Sx,
    Id,
    Rz,
    Ry,
    Cp,
    Rzz,
    Crz,
    Ccx,
    /// Measure/prepare boundary left behind by a wire cut. Depth neutral.
    Marker,
}

impl GateKind {
    pub fn n_qubits(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Swap | GateKind::Cp | GateKind::Rzz | GateKind::Crz => 2,
            GateKind::Ccx => 3,
            _ => 1,
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            GateKind::Rz | GateKind::Ry | GateKind::Cp | GateKind::Rzz | GateKind::Crz => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Cx => "cx",
            GateKind::Swap => "swap",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Sx => "sx",
            GateKind::Id => "id",
            GateKind::Rz => "rz",
            GateKind::Ry => "ry",
            GateKind::Cp => "cp",
            GateKind::Rzz => "rzz",
            GateKind::Crz => "crz",
            GateKind::Ccx => "ccx",
            GateKind::Marker => "marker",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
}

impl GateOp {
    /// Builds an op, checking arity and qubit distinctness.
    pub fn new(kind: GateKind, params: Vec<f64>, qubits: Vec<usize>) -> Result<Self, CircuitError> {
        let bad = |reason: &str| CircuitError::InvalidGate {
            kind,
            qubits: qubits.clone(),
            reason: reason.to_string(),
        };
        if qubits.len() != kind.n_qubits() {
            return Err(bad("wrong qubit count"));
        }
        if params.len() != kind.n_params() {
            return Err(bad("wrong parameter count"));
        }
        let distinct: BTreeSet<_> = qubits.iter().collect();
        if distinct.len() != qubits.len() {
            return Err(bad("repeated qubit"));
        }
        Ok(GateOp { kind, params, qubits })
    }

    pub(crate) fn raw(kind: GateKind, params: &[f64], qubits: &[usize]) -> Self {
        debug_assert_eq!(qubits.len(), kind.n_qubits());
        debug_assert_eq!(params.len(), kind.n_params());
        GateOp {
            kind,
            params: params.to_vec(),
            qubits: qubits.to_vec(),
        }
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.qubits.len() >= 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "HEA")]
    Hea,
    #[serde(rename = "QAOA")]
    Qaoa,
    #[serde(rename = "QFT")]
    Qft,
    Random,
    #[serde(rename = "QML")]
    Qml,
    Sim,
    Chem,
    Oracle,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Hea,
        Family::Qaoa,
        Family::Qft,
        Family::Random,
        Family::Qml,
        Family::Sim,
        Family::Chem,
        Family::Oracle,
    ];

    pub fn index(self) -> usize {
        Family::ALL.iter().position(|&f| f == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Hea => "HEA",
            Family::Qaoa => "QAOA",
            Family::Qft => "QFT",
            Family::Random => "Random",
            Family::Qml => "QML",
            Family::Sim => "Sim",
            Family::Chem => "Chem",
            Family::Oracle => "Oracle",
        }
    }

    pub fn subvariants(self) -> [Subvariant; 3] {
        use Subvariant::*;
        match self {
            Family::Hea => [Linear, Circular, ReverseLinear],
            Family::Qaoa => [P1, P2, P3],
            Family::Qft => [Standard, NoSwaps, Approx],
            Family::Random => [Shallow, Medium, Deep],
            Family::Qml => [ZMap, ZzMap, PauliMap],
            Family::Sim => [Ising, Heisenberg, Xy],
            Family::Chem => [ExcitationSo4, Real, Complex],
            Family::Oracle => [BernsteinVazirani, DeutschJozsa, Grover],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CircuitError::InvalidSpec(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subvariant {
    Linear,
    Circular,
    ReverseLinear,
    P1,
    P2,
    P3,
    Standard,
    NoSwaps,
    Approx,
    Shallow,
    Medium,
    Deep,
    ZMap,
    ZzMap,
    PauliMap,
    Ising,
    Heisenberg,
    Xy,
    ExcitationSo4,
    Real,
    Complex,
    #[serde(rename = "bv")]
    BernsteinVazirani,
    DeutschJozsa,
    Grover,
}

impl Subvariant {
    pub fn family(self) -> Family {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.subvariants().contains(&self))
            .unwrap()
    }

    /// Position of the sub-variant inside its family (the A2 label).
    pub fn index(self) -> usize {
        self.family()
            .subvariants()
            .iter()
            .position(|&s| s == self)
            .unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Chain,
    Grid,
    Irregular,
}

impl Geometry {
    pub const ALL: [Geometry; 3] = [Geometry::Chain, Geometry::Grid, Geometry::Irregular];
}

/// Generator-declared metadata used for the Hamiltonian-structure labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub geometry: Geometry,
    /// Largest simultaneous interaction arity of the underlying problem.
    pub max_term_weight: usize,
    /// The workload lives on a small core of the register (Grover).
    pub oracle_core: bool,
    pub extra: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    pub n_qubits: usize,
    pub gates: Vec<GateOp>,
    pub family: Family,
    pub subvariant: Subvariant,
    pub instance_id: u64,
    pub seed: u64,
    pub gen_params: GenParams,
}

impl LogicalCircuit {
    pub fn push(&mut self, kind: GateKind, params: &[f64], qubits: &[usize]) {
        debug_assert!(qubits.iter().all(|&q| q < self.n_qubits));
        self.gates.push(GateOp::raw(kind, params, qubits));
    }

    /// Qubits touched by at least one op, sorted.
    pub fn active_qubits(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.gates.iter().flat_map(|g| g.qubits.iter().copied()).collect();
        set.into_iter().collect()
    }

    pub fn active_width(&self) -> usize {
        self.active_qubits().len()
    }

    /// Checks every op's arity and that qubit indices are in range.
    pub fn validate(&self) -> Result<(), CircuitError> {
        for g in &self.gates {
            GateOp::new(g.kind, g.params.clone(), g.qubits.clone())?;
            if g.qubits.iter().any(|&q| q >= self.n_qubits) {
                return Err(CircuitError::InvalidGate {
                    kind: g.kind,
                    qubits: g.qubits.clone(),
                    reason: format!("qubit out of range for width {}", self.n_qubits),
                });
            }
        }
        Ok(())
    }

    /// Empty circuit that keeps this circuit's provenance.
    pub fn empty_like(&self, n_qubits: usize) -> LogicalCircuit {
        LogicalCircuit {
            n_qubits,
            gates: Vec::new(),
            family: self.family,
            subvariant: self.subvariant,
            instance_id: self.instance_id,
            seed: self.seed,
            gen_params: self.gen_params.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub n_nodes: usize,
    /// Keyed by `(i, j)` with `i < j`.
    pub edges: BTreeMap<(usize, usize), usize>,
    pub max_term_weight: usize,
}

impl InteractionGraph {
    /// Symmetric lookup.
    pub fn weight(&self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        self.edges.get(&key).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> usize {
        self.edges.values().sum()
    }

    pub fn unique_degree(&self, node: usize) -> usize {
        self.edges.keys().filter(|&&(a, b)| a == node || b == node).count()
    }

    /// Mean number of distinct interaction partners per qubit.
    pub fn mean_unique_degree(&self) -> f64 {
        if self.n_nodes == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.n_nodes as f64
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(a, b) in self.edges.keys() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

/// Tallies multi-qubit interactions (every pair of a 3-qubit op counts).
pub fn interaction_graph(circuit: &LogicalCircuit) -> InteractionGraph {
    let mut edges = BTreeMap::new();
    let mut max_arity = 1;
    for g in &circuit.gates {
        max_arity = max_arity.max(g.qubits.len());
        for (i, &a) in g.qubits.iter().enumerate() {
            for &b in &g.qubits[i + 1..] {
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }
    let declared = circuit.gen_params.max_term_weight;
    InteractionGraph {
        n_nodes: circuit.n_qubits,
        edges,
        max_term_weight: if declared > 0 { declared } else { max_arity },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalMetrics {
    pub depth: usize,
    pub twoq_count: usize,
}

/// ASAP layer index for every op. Markers do not occupy a layer; they get the
/// layer of the wire frontier they sit on.
pub fn asap_layers(n_qubits: usize, gates: &[GateOp]) -> Vec<usize> {
    let mut frontier = vec![0usize; n_qubits];
    gates
        .iter()
        .map(|g| {
            let start = g.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
            if g.kind != GateKind::Marker {
                for &q in &g.qubits {
                    frontier[q] = start + 1;
                }
            }
            start
        })
        .collect()
}

pub fn gate_depth(n_qubits: usize, gates: &[GateOp]) -> usize {
    let mut frontier = vec![0usize; n_qubits];
    let mut depth = 0;
    for g in gates.iter().filter(|g| g.kind != GateKind::Marker) {
        let start = g.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
        for &q in &g.qubits {
            frontier[q] = start + 1;
        }
        depth = depth.max(start + 1);
    }
    depth
}

pub fn logical_metrics(circuit: &LogicalCircuit) -> LogicalMetrics {
    LogicalMetrics {
        depth: gate_depth(circuit.n_qubits, &circuit.gates),
        twoq_count: circuit.gates.iter().filter(|g| g.is_multi_qubit()).count(),
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Probability that a Sim or Random instance is laid out on a 2D grid.
pub const GRID_MODE_RATE: f64 = 0.25;
/// Approximate QFT drops controlled phases with angle below pi / 2^3.
pub const APPROX_QFT_DEGREE: usize = 3;

struct Builder {
    c: LogicalCircuit,
    rng: ChaCha8Rng,
}

impl Builder {
    fn angle(&mut self) -> f64 {
        self.rng.random_range(0.0..2.0 * PI)
    }

    fn g(&mut self, kind: GateKind, qubits: &[usize]) {
        let params: Vec<f64> = (0..kind.n_params()).map(|_| self.angle()).collect();
        self.c.push(kind, &params, qubits);
    }

    fn gp(&mut self, kind: GateKind, param: f64, qubits: &[usize]) {
        self.c.push(kind, &[param], qubits);
    }

    /// e^{-i t Z_a Z_b} as CX . RZ . CX.
    fn zz(&mut self, a: usize, b: usize) {
        self.g(GateKind::Cx, &[a, b]);
        self.g(GateKind::Rz, &[b]);
        self.g(GateKind::Cx, &[a, b]);
    }

    /// RX via H . RZ . H.
    fn rx(&mut self, q: usize) {
        self.g(GateKind::H, &[q]);
        self.g(GateKind::Rz, &[q]);
        self.g(GateKind::H, &[q]);
    }

    /// Toffoli expanded into the standard 6-CX network.
    fn ccx(&mut self, c0: usize, c1: usize, t: usize) {
        for op in ccx_template(c0, c1, t) {
            self.c.gates.push(op);
        }
    }
}

/// Standard 6-CX Toffoli network (H, T-ladder as RZ(+-pi/4)).
pub fn ccx_template(c0: usize, c1: usize, t: usize) -> Vec<GateOp> {
    let q = PI / 4.0;
    use GateKind::*;
    vec![
        GateOp::raw(H, &[], &[t]),
        GateOp::raw(Cx, &[], &[c1, t]),
        GateOp::raw(Rz, &[-q], &[t]),
        GateOp::raw(Cx, &[], &[c0, t]),
        GateOp::raw(Rz, &[q], &[t]),
        GateOp::raw(Cx, &[], &[c1, t]),
        GateOp::raw(Rz, &[-q], &[t]),
        GateOp::raw(Cx, &[], &[c0, t]),
        GateOp::raw(Rz, &[q], &[c1]),
        GateOp::raw(Rz, &[q], &[t]),
        GateOp::raw(H, &[], &[t]),
        GateOp::raw(Cx, &[], &[c0, c1]),
        GateOp::raw(Rz, &[q], &[c0]),
        GateOp::raw(Rz, &[-q], &[c1]),
        GateOp::raw(Cx, &[], &[c0, c1]),
    ]
}

fn chain_edges(n: usize) -> Vec<(usize, usize)> {
    // brick order: even bonds then odd bonds
    let mut e: Vec<_> = (0..n.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)).collect();
    e.extend((1..n.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)));
    e
}

/// Row-major grid with `ceil(sqrt(n))` columns; edges in four colour classes.
pub fn grid_edges(n: usize) -> Vec<(usize, usize)> {
    let cols = (n as f64).sqrt().ceil() as usize;
    let mut classes: [Vec<(usize, usize)>; 4] = Default::default();
    for i in 0..n {
        let (r, c) = (i / cols, i % cols);
        if c + 1 < cols && i + 1 < n {
            classes[c % 2].push((i, i + 1));
        }
        if i + cols < n {
            classes[2 + r % 2].push((i, i + cols));
        }
    }
    classes.concat()
}

pub fn generate(family: Family, subvariant: Subvariant, n_qubits: usize, seed: u64) -> Result<LogicalCircuit, CircuitError> {
    if subvariant.family() != family {
        return Err(CircuitError::InvalidSpec(format!(
            "sub-variant {subvariant:?} does not belong to family {family}"
        )));
    }
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&n_qubits) {
        return Err(CircuitError::InvalidSpec(format!(
            "width {n_qubits} outside [{MIN_WIDTH}, {MAX_WIDTH}]"
        )));
    }
    let rng = rng_for(seed, &[str_tag(family.name()), subvariant.index() as u64, n_qubits as u64]);
    let mut b = Builder {
        c: LogicalCircuit {
            n_qubits,
            gates: Vec::new(),
            family,
            subvariant,
            instance_id: 0,
            seed,
            gen_params: GenParams {
                geometry: Geometry::Chain,
                max_term_weight: 2,
                oracle_core: false,
                extra: BTreeMap::new(),
            },
        },
        rng,
    };
    match family {
        Family::Hea => gen_hea(&mut b, subvariant),
        Family::Qaoa => gen_qaoa(&mut b, subvariant),
        Family::Qft => gen_qft(&mut b, subvariant),
        Family::Random => gen_random(&mut b, subvariant),
        Family::Qml => gen_qml(&mut b, subvariant),
        Family::Sim => gen_sim(&mut b, subvariant),
        Family::Chem => gen_chem(&mut b, subvariant),
        Family::Oracle => gen_oracle(&mut b, subvariant),
    }
    Ok(b.c)
}

fn gen_hea(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    let layers = b.rng.random_range(1..=3usize);
    b.c.gen_params.extra.insert("layers".into(), layers as i64);
    for _ in 0..layers {
        for q in 0..n {
            b.g(GateKind::Ry, &[q]);
            b.g(GateKind::Rz, &[q]);
        }
    }
    match sub {
        Subvariant::Linear => (0..n - 1).for_each(|i| b.g(GateKind::Cx, &[i, i + 1])),
        Subvariant::ReverseLinear => (0..n - 1).rev().for_each(|i| b.g(GateKind::Cx, &[i + 1, i])),
        _ => {
            b.g(GateKind::Cx, &[n - 1, 0]);
            (0..n - 1).for_each(|i| b.g(GateKind::Cx, &[i, i + 1]));
        }
    }
}

fn gen_qaoa(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    let p = sub.index() + 1;
    b.c.gen_params.extra.insert("p".into(), p as i64);
    (0..n).for_each(|q| b.g(GateKind::H, &[q]));
    for _ in 0..p {
        for (i, j) in chain_edges(n) {
            b.zz(i, j);
        }
        (0..n).for_each(|q| b.rx(q));
    }
}

fn gen_qft(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    b.c.gen_params.geometry = Geometry::Irregular;
    for j in 0..n {
        b.g(GateKind::H, &[j]);
        for k in j + 1..n {
            let dist = k - j;
            if sub == Subvariant::Approx && dist > APPROX_QFT_DEGREE {
                continue;
            }
            b.gp(GateKind::Cp, PI / (1u64 << dist) as f64, &[k, j]);
        }
    }
    if sub != Subvariant::NoSwaps {
        for i in 0..n / 2 {
            b.g(GateKind::Swap, &[i, n - 1 - i]);
        }
    }
}

fn gen_random(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    let (layers, density) = match sub {
        Subvariant::Shallow => (2, 0.2),
        Subvariant::Medium => (5, 0.5),
        _ => (10, 0.9),
    };
    let grid = b.rng.random_bool(GRID_MODE_RATE);
    b.c.gen_params.geometry = if grid { Geometry::Grid } else { Geometry::Irregular };
    b.c.gen_params.extra.insert("layers".into(), layers);
    let grid_pairs = grid_edges(n);
    let per_layer = ((density * n as f64).round() as usize).max(1);
    for _ in 0..layers {
        for q in 0..n {
            b.g(GateKind::Rz, &[q]);
            b.g(GateKind::Ry, &[q]);
            b.g(GateKind::Rz, &[q]);
        }
        for _ in 0..per_layer {
            let (c, t) = if grid {
                let &(x, y) = grid_pairs.choose(&mut b.rng).unwrap();
                if b.rng.random_bool(0.5) { (x, y) } else { (y, x) }
            } else {
                let c = b.rng.random_range(0..n);
                let mut t = b.rng.random_range(0..n - 1);
                if t >= c {
                    t += 1;
                }
                (c, t)
            };
            b.g(GateKind::Cx, &[c, t]);
        }
    }
}

fn gen_qml(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    let reps = 2;
    let mut pairs = Vec::new();
    if sub != Subvariant::ZMap {
        pairs.extend(chain_edges(n));
    }
    if sub == Subvariant::PauliMap {
        pairs.extend((0..n.saturating_sub(2)).map(|i| (i, i + 2)));
    }
    for _ in 0..reps {
        for q in 0..n {
            b.g(GateKind::H, &[q]);
            b.g(GateKind::Rz, &[q]);
        }
        for &(i, j) in &pairs {
            b.zz(i, j);
        }
    }
    if sub == Subvariant::ZMap {
        b.c.gen_params.max_term_weight = 1;
    }
}

fn gen_sim(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    let grid = b.rng.random_bool(GRID_MODE_RATE);
    let edges = if grid {
        b.c.gen_params.geometry = Geometry::Grid;
        grid_edges(n)
    } else {
        chain_edges(n)
    };
    for (a, c) in edges {
        match sub {
            Subvariant::Ising => b.zz(a, c),
            Subvariant::Heisenberg => {
                // XX+YY+ZZ in the three-CX canonical form
                b.g(GateKind::Cx, &[c, a]);
                b.g(GateKind::Rz, &[a]);
                b.g(GateKind::Ry, &[c]);
                b.g(GateKind::Cx, &[a, c]);
                b.g(GateKind::Ry, &[c]);
                b.g(GateKind::Cx, &[c, a]);
            }
            _ => {
                // XX block then YY block
                b.g(GateKind::H, &[a]);
                b.g(GateKind::H, &[c]);
                b.zz(a, c);
                b.g(GateKind::H, &[a]);
                b.g(GateKind::H, &[c]);
                b.g(GateKind::Sx, &[a]);
                b.g(GateKind::Sx, &[c]);
                b.zz(a, c);
                b.g(GateKind::Sx, &[a]);
                b.g(GateKind::Sx, &[c]);
            }
        }
    }
    if sub == Subvariant::Ising {
        (0..n).for_each(|q| b.rx(q));
    }
}

fn gen_chem(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    b.c.gen_params.max_term_weight = 4;
    (0..n / 2).for_each(|q| b.g(GateKind::X, &[q]));
    let reps = 2;
    for _ in 0..reps {
        for i in 0..n - 1 {
            let (a, c) = (i, i + 1);
            match sub {
                Subvariant::ExcitationSo4 => {
                    b.g(GateKind::Ry, &[a]);
                    b.g(GateKind::Ry, &[c]);
                    b.g(GateKind::Cx, &[a, c]);
                    b.g(GateKind::Ry, &[a]);
                    b.g(GateKind::Ry, &[c]);
                    b.g(GateKind::Cx, &[a, c]);
                }
                Subvariant::Real => {
                    b.g(GateKind::Ry, &[a]);
                    b.g(GateKind::Cx, &[a, c]);
                    b.g(GateKind::Ry, &[c]);
                }
                _ => {
                    b.g(GateKind::Cx, &[c, a]);
                    b.g(GateKind::Rz, &[a]);
                    b.g(GateKind::Ry, &[c]);
                    b.g(GateKind::Cx, &[a, c]);
                    b.g(GateKind::Ry, &[c]);
                    b.g(GateKind::Cx, &[c, a]);
                }
            }
        }
    }
}

fn gen_oracle(b: &mut Builder, sub: Subvariant) {
    let n = b.c.n_qubits;
    b.c.gen_params.geometry = Geometry::Irregular;
    match sub {
        Subvariant::BernsteinVazirani | Subvariant::DeutschJozsa => {
            let target = n - 1;
            let inputs: Vec<usize> = if sub == Subvariant::BernsteinVazirani {
                let mut s: Vec<usize> = (0..target).filter(|_| b.rng.random_bool(0.5)).collect();
                if s.is_empty() {
                    s.push(b.rng.random_range(0..target));
                }
                s
            } else {
                (0..target).collect()
            };
            b.c.gen_params.max_term_weight = n;
            b.c.gen_params.extra.insert("fan_in".into(), inputs.len() as i64);
            b.g(GateKind::X, &[target]);
            (0..n).for_each(|q| b.g(GateKind::H, &[q]));
            let flips: Vec<usize> = if sub == Subvariant::DeutschJozsa {
                inputs.iter().copied().filter(|_| b.rng.random_bool(0.5)).collect()
            } else {
                Vec::new()
            };
            flips.iter().for_each(|&q| b.g(GateKind::X, &[q]));
            for &q in &inputs {
                b.g(GateKind::Cx, &[q, target]);
            }
            flips.iter().for_each(|&q| b.g(GateKind::X, &[q]));
            (0..target).for_each(|q| b.g(GateKind::H, &[q]));
        }
        _ => {
            // one Grover iteration on a 3-qubit core
            b.c.gen_params.oracle_core = true;
            b.c.gen_params.max_term_weight = 3;
            let core = [0usize, 1, 2];
            let marked: Vec<bool> = (0..3).map(|_| b.rng.random_bool(0.5)).collect();
            core.iter().for_each(|&q| b.g(GateKind::H, &[q]));
            let flip = |b: &mut Builder| {
                for (q, &m) in marked.iter().enumerate() {
                    if !m {
                        b.g(GateKind::X, &[q]);
                    }
                }
            };
            flip(b);
            b.g(GateKind::H, &[2]);
            b.ccx(0, 1, 2);
            b.g(GateKind::H, &[2]);
            flip(b);
            core.iter().for_each(|&q| b.g(GateKind::H, &[q]));
            core.iter().for_each(|&q| b.g(GateKind::X, &[q]));
            b.g(GateKind::H, &[2]);
            b.ccx(0, 1, 2);
            b.g(GateKind::H, &[2]);
            core.iter().for_each(|&q| b.g(GateKind::X, &[q]));
            core.iter().for_each(|&q| b.g(GateKind::H, &[q]));
        }
    }
}
