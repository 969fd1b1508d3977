//! Wire and gate cutting of logical circuits, and assembly of fixed-size
//! cutting jobs.
//!
//! Only the shape of the fragments is modelled. Quasi-probability weights and
//! reconstruction never reach the provider and are not represented.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    asap_layers, generate, gate_depth, CircuitError, Family, GateKind, GateOp, LogicalCircuit, Subvariant, MAX_WIDTH,
    MIN_WIDTH,
};
use crate::labels::{job_labels, JobLabels};
use crate::seed::{derive_seed, rng_for, str_tag};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("degenerate cut: {0}")]
    DegenerateCut(String),
    #[error("invalid cut spec: {0}")]
    InvalidSpec(String),
    #[error("cannot cut {family} instance {instance} into {k} fragments even at width {MAX_WIDTH}")]
    ParentTooSmall { family: Family, instance: u64, k: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Wire,
    Gate,
}

impl Mechanism {
    pub const ALL: [Mechanism; 2] = [Mechanism::Wire, Mechanism::Gate];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutPoint {
    /// Cut `qubit` right before ASAP layer `layer`.
    Wire { qubit: usize, layer: usize },
    /// Cut the 2Q gate at this position of the gate list.
    Gate { gate_index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSpec {
    pub mechanism: Mechanism,
    pub cut_points: Vec<CutPoint>,
    pub target_fragments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub circuit: LogicalCircuit,
    pub parent_instance: u64,
    pub frag_index: usize,
    pub mechanism: Mechanism,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuttingJob {
    pub job_id: u64,
    pub parent: LogicalCircuit,
    pub fragments: Vec<Fragment>,
    pub labels: JobLabels,
    /// `submission_order[i]` is the execution rank of fragment `i`.
    pub submission_order: Vec<usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Builds a fragment circuit from selected ops of `parent`, relabelling the
/// used qubits compactly in index order.
fn extract(parent: &LogicalCircuit, ops: &[GateOp]) -> LogicalCircuit {
    let mut used: Vec<usize> = ops.iter().flat_map(|g| g.qubits.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let local: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut c = parent.empty_like(used.len());
    c.gates = ops
        .iter()
        .map(|g| GateOp {
            kind: g.kind,
            params: g.params.clone(),
            qubits: g.qubits.iter().map(|q| local[q]).collect(),
        })
        .collect();
    c
}

fn wrap(circuits: Vec<LogicalCircuit>, parent: &LogicalCircuit, mechanism: Mechanism) -> Vec<Fragment> {
    circuits
        .into_iter()
        .enumerate()
        .map(|(i, circuit)| Fragment {
            circuit,
            parent_instance: parent.instance_id,
            frag_index: i,
            mechanism,
        })
        .collect()
}

/// Cut points separating the circuit into time slabs at the given layer
/// boundaries. A wire is cut once in each idle gap that crosses a boundary.
pub fn time_slice_cuts(circuit: &LogicalCircuit, boundaries: &[usize]) -> Vec<CutPoint> {
    let layers = asap_layers(circuit.n_qubits, &circuit.gates);
    let mut wire_layers: Vec<Vec<usize>> = vec![Vec::new(); circuit.n_qubits];
    for (g, &l) in circuit.gates.iter().zip(&layers) {
        if g.kind != GateKind::Marker {
            for &q in &g.qubits {
                wire_layers[q].push(l);
            }
        }
    }
    let mut out = Vec::new();
    for (qubit, ls) in wire_layers.iter().enumerate() {
        for pair in ls.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if let Some(&layer) = boundaries.iter().find(|&&l| a < l && l <= b) {
                out.push(CutPoint::Wire { qubit, layer });
            }
        }
    }
    out
}

/// Splits the circuit at time points on chosen wires. Fragments are the
/// connected components of the wire-segment graph; a measure/prepare marker is
/// placed on each side of every cut.
pub fn cut_wire(circuit: &LogicalCircuit, spec: &CutSpec) -> Result<Vec<Fragment>, CutError> {
    if spec.mechanism != Mechanism::Wire {
        return Err(CutError::InvalidSpec("cut_wire needs a wire-mechanism spec".into()));
    }
    if spec.cut_points.is_empty() {
        return Err(CutError::InvalidSpec("no cut points".into()));
    }
    let n = circuit.n_qubits;
    let layers = asap_layers(n, &circuit.gates);
    let mut cuts: Vec<Vec<usize>> = vec![Vec::new(); n];
    for cp in &spec.cut_points {
        match *cp {
            CutPoint::Wire { qubit, layer } if qubit < n => cuts[qubit].push(layer),
            _ => return Err(CutError::InvalidSpec(format!("{cp:?} is not a wire location"))),
        }
    }
    for c in cuts.iter_mut() {
        c.sort_unstable();
        c.dedup();
    }
    let segment = |q: usize, layer: usize| cuts[q].iter().take_while(|&&l| l <= layer).count();

    // every segment on a cut wire must hold at least one real op
    let mut seg_ops: Vec<Vec<usize>> = cuts.iter().map(|c| vec![0; c.len() + 1]).collect();
    for (g, &l) in circuit.gates.iter().zip(&layers) {
        if g.kind == GateKind::Marker {
            continue;
        }
        for &q in &g.qubits {
            seg_ops[q][segment(q, l)] += 1;
        }
    }
    for q in 0..n {
        if !cuts[q].is_empty() && seg_ops[q].contains(&0) {
            return Err(CutError::DegenerateCut(format!(
                "wire {q} cut at layers {:?} leaves an empty segment",
                cuts[q]
            )));
        }
    }

    let offsets: Vec<usize> = cuts
        .iter()
        .scan(0, |acc, c| {
            let o = *acc;
            *acc += c.len() + 1;
            Some(o)
        })
        .collect();
    let node_count = offsets.last().map_or(0, |&o| o + cuts[n - 1].len() + 1);
    let node = |q: usize, s: usize| offsets[q] + s;
    let mut uf = UnionFind::new(node_count);
    for (g, &l) in circuit.gates.iter().zip(&layers) {
        let first = node(g.qubits[0], segment(g.qubits[0], l));
        for &q in &g.qubits[1..] {
            uf.union(first, node(q, segment(q, l)));
        }
    }

    // first and last op index of every wire segment, for marker placement
    let mut span: Vec<Vec<(usize, usize)>> = cuts.iter().map(|c| vec![(usize::MAX, 0); c.len() + 1]).collect();
    for (i, (g, &l)) in circuit.gates.iter().zip(&layers).enumerate() {
        for &q in &g.qubits {
            let e = &mut span[q][segment(q, l)];
            *e = (e.0.min(i), e.1.max(i));
        }
    }

    // group ops by component root; components ordered by first op. Each op
    // carries a sort key so merged groups can be put back in parent order.
    let mut comp_order: Vec<usize> = Vec::new();
    let mut comp_ops: BTreeMap<usize, Vec<(usize, GateOp)>> = BTreeMap::new();
    for (i, (g, &l)) in circuit.gates.iter().zip(&layers).enumerate() {
        let root = uf.find(node(g.qubits[0], segment(g.qubits[0], l)));
        if !comp_ops.contains_key(&root) {
            comp_order.push(root);
        }
        comp_ops.entry(root).or_default().push((2 * i + 1, g.clone()));
    }
    // boundary markers: end of the segment before each cut, start of the one after
    for q in 0..n {
        for (s, _) in cuts[q].iter().enumerate() {
            let before = uf.find(node(q, s));
            let after = uf.find(node(q, s + 1));
            let m = GateOp::raw(GateKind::Marker, &[], &[q]);
            comp_ops.get_mut(&before).unwrap().push((2 * span[q][s].1 + 2, m.clone()));
            comp_ops.get_mut(&after).unwrap().push((2 * span[q][s + 1].0, m));
        }
    }
    let mut groups: Vec<Vec<(usize, GateOp)>> = comp_order.iter().map(|r| comp_ops.remove(r).unwrap()).collect();
    merge_smallest(&mut groups, spec.target_fragments);
    let circuits = groups
        .into_iter()
        .map(|mut ops| {
            ops.sort_by_key(|(k, _)| *k);
            let ops: Vec<GateOp> = ops.into_iter().map(|(_, g)| g).collect();
            extract(circuit, &ops)
        })
        .collect();
    Ok(wrap(circuits, circuit, Mechanism::Wire))
}

/// Merges the two smallest groups (by op count) until at most `target` remain.
fn merge_smallest<T>(groups: &mut Vec<Vec<T>>, target: usize) {
    while groups.len() > target.max(1) {
        let mut idx: Vec<usize> = (0..groups.len()).collect();
        idx.sort_by_key(|&i| (groups[i].len(), i));
        let (a, b) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
        let moved = groups.remove(b);
        groups[a].extend(moved);
    }
}

/// Deletes the cut 2Q gates (leaving an RZ placeholder on each endpoint) and
/// partitions the qubits into `target_fragments` parts.
pub fn cut_gate(circuit: &LogicalCircuit, spec: &CutSpec) -> Result<Vec<Fragment>, CutError> {
    if spec.mechanism != Mechanism::Gate {
        return Err(CutError::InvalidSpec("cut_gate needs a gate-mechanism spec".into()));
    }
    if spec.cut_points.is_empty() {
        return Err(CutError::InvalidSpec("no cut points".into()));
    }
    if spec.target_fragments < 2 {
        return Err(CutError::InvalidSpec("gate cuts need at least 2 target fragments".into()));
    }
    let mut is_cut = vec![false; circuit.gates.len()];
    for cp in &spec.cut_points {
        match *cp {
            CutPoint::Gate { gate_index } if gate_index < circuit.gates.len() => {
                if circuit.gates[gate_index].qubits.len() < 2 {
                    return Err(CutError::InvalidSpec(format!("gate {gate_index} is not a multi-qubit gate")));
                }
                is_cut[gate_index] = true;
            }
            _ => return Err(CutError::InvalidSpec(format!("{cp:?} is not a gate location"))),
        }
    }
    let active = circuit.active_qubits();
    if active.len() < spec.target_fragments {
        return Err(CutError::DegenerateCut(format!(
            "{} active qubits cannot form {} parts",
            active.len(),
            spec.target_fragments
        )));
    }
    let mut uf = UnionFind::new(circuit.n_qubits);
    for (g, &cut) in circuit.gates.iter().zip(&is_cut) {
        if !cut {
            for &q in &g.qubits[1..] {
                uf.union(g.qubits[0], q);
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &q in &active {
        comps.entry(uf.find(q)).or_default().push(q);
    }
    let mut parts: Vec<Vec<usize>> = comps.into_values().collect();
    if parts.len() < spec.target_fragments {
        parts = index_blocks(&active, spec.target_fragments);
    } else {
        while parts.len() > spec.target_fragments {
            let mut idx: Vec<usize> = (0..parts.len()).collect();
            idx.sort_by_key(|&i| (parts[i].len(), parts[i][0]));
            let (a, b) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
            let moved = parts.remove(b);
            parts[a].extend(moved);
            parts[a].sort_unstable();
        }
    }
    Ok(split_by_partition(circuit, &parts, &is_cut))
}

/// Contiguous blocks of (nearly) equal size.
fn index_blocks(qubits: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = qubits.len();
    (0..k).map(|i| qubits[i * n / k..(i + 1) * n / k].to_vec()).collect()
}

/// Every op spanning two parts (or explicitly cut) becomes RZ placeholders.
fn split_by_partition(circuit: &LogicalCircuit, parts: &[Vec<usize>], is_cut: &[bool]) -> Vec<Fragment> {
    let mut owner = vec![usize::MAX; circuit.n_qubits];
    for (p, qs) in parts.iter().enumerate() {
        for &q in qs {
            owner[q] = p;
        }
    }
    let mut ops: Vec<Vec<GateOp>> = vec![Vec::new(); parts.len()];
    for (g, &cut) in circuit.gates.iter().zip(is_cut) {
        let first = owner[g.qubits[0]];
        let spans = g.qubits.iter().any(|&q| owner[q] != first);
        if cut || spans {
            for &q in &g.qubits {
                ops[owner[q]].push(GateOp::raw(GateKind::Rz, &[0.0], &[q]));
            }
        } else {
            ops[first].push(g.clone());
        }
    }
    let circuits = ops.iter().map(|o| extract(circuit, o)).collect();
    wrap(circuits, circuit, Mechanism::Gate)
}

// ---------------------------------------------------------------------------
// Job assembly
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub families: Vec<Family>,
    pub instances_per_family: usize,
    pub fragments_per_job: usize,
    pub min_width: usize,
    pub max_width: usize,
    /// Fraction of the parent's active qubits peeled off by a gate cut.
    pub gate_peel_fraction: f64,
    /// Time slabs per wire-cut parent; must divide `fragments_per_job`.
    pub wire_pieces: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            families: Family::ALL.to_vec(),
            instances_per_family: 25,
            fragments_per_job: 6,
            min_width: MIN_WIDTH,
            max_width: MAX_WIDTH,
            gate_peel_fraction: 0.1,
            wire_pieces: 2,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<(), CutError> {
        let bad = |m: String| Err(CutError::InvalidSpec(m));
        if self.families.is_empty() {
            return bad("families: empty".into());
        }
        if self.instances_per_family == 0 {
            return bad("instances_per_family: must be positive".into());
        }
        if self.fragments_per_job < 2 || self.fragments_per_job % 2 != 0 {
            return bad(format!("fragments_per_job: {} must be even and >= 2", self.fragments_per_job));
        }
        if self.wire_pieces < 2 || self.fragments_per_job % self.wire_pieces != 0 {
            return bad(format!(
                "wire_pieces: {} must be >= 2 and divide fragments_per_job {}",
                self.wire_pieces, self.fragments_per_job
            ));
        }
        if self.min_width < MIN_WIDTH || self.max_width > MAX_WIDTH || self.min_width > self.max_width {
            return bad(format!(
                "width range [{}, {}] must lie in [{MIN_WIDTH}, {MAX_WIDTH}]",
                self.min_width, self.max_width
            ));
        }
        if !(self.gate_peel_fraction > 0.0 && self.gate_peel_fraction <= 0.5) {
            return bad("gate_peel_fraction: must be in (0, 0.5]".into());
        }
        Ok(())
    }
}

/// Seeded balanced assignment: `counts` copies of each item, shuffled.
fn balanced<T: Copy>(items: &[T], len: usize, rng: &mut impl Rng) -> Vec<T> {
    let mut v: Vec<T> = (0..len).map(|i| items[i % items.len()]).collect();
    v.shuffle(rng);
    v
}

/// Wire-cuts into `pieces` time slabs with boundary layers drawn from the
/// middle 60% of the depth axis; each slab is submitted as `k / pieces`
/// sub-experiments.
fn wire_job(parent: &LogicalCircuit, k: usize, pieces: usize, seed: u64) -> Result<Vec<Fragment>, CutError> {
    let depth = gate_depth(parent.n_qubits, &parent.gates);
    if depth < pieces {
        return Err(CutError::DegenerateCut(format!("depth {depth} cannot be sliced")));
    }
    let lo = ((depth as f64) * 0.2).floor().max(1.0) as usize;
    let hi = ((depth as f64) * 0.8).ceil() as usize;
    let mut candidates: Vec<usize> = if hi > lo && hi - lo >= pieces - 1 {
        (lo..hi).collect()
    } else {
        (1..depth).collect()
    };
    let mut rng = rng_for(seed, &[str_tag("wire-layers")]);
    candidates.shuffle(&mut rng);
    let mut layers: Vec<usize> = candidates.into_iter().take(pieces - 1).collect();
    layers.sort_unstable();
    let cut_points = time_slice_cuts(parent, &layers);
    let spec = CutSpec {
        mechanism: Mechanism::Wire,
        cut_points,
        target_fragments: pieces,
    };
    let frags = cut_wire(parent, &spec)?;
    if frags.len() != pieces {
        return Err(CutError::DegenerateCut(format!("{} wire fragments instead of {pieces}", frags.len())));
    }
    Ok(replicate(&frags, k))
}

/// Repeats each subcircuit `k / len` times, numbering fragments in order.
fn replicate(frags: &[Fragment], k: usize) -> Vec<Fragment> {
    let reps = k / frags.len();
    let mut out = Vec::with_capacity(k);
    for f in frags {
        for _ in 0..reps {
            let mut c = f.clone();
            c.frag_index = out.len();
            out.push(c);
        }
    }
    out
}

/// Gate-cuts off a block of the highest-index active qubits, leaving two
/// subcircuits; each is submitted as `k / 2` sub-experiments.
fn gate_job(parent: &LogicalCircuit, k: usize, peel: f64) -> Result<Vec<Fragment>, CutError> {
    let active = parent.active_qubits();
    if active.len() < 2 {
        return Err(CutError::DegenerateCut("fewer than 2 active qubits".into()));
    }
    let m = ((active.len() as f64 * peel).round() as usize).clamp(1, active.len() - 1);
    let split = active.len() - m;
    let mut side = vec![0u8; parent.n_qubits];
    for &q in &active[split..] {
        side[q] = 1;
    }
    let cut_points: Vec<CutPoint> = parent
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.qubits.len() >= 2 && g.qubits.iter().any(|&q| side[q] != side[g.qubits[0]]))
        .map(|(gate_index, _)| CutPoint::Gate { gate_index })
        .collect();
    let parts = vec![active[..split].to_vec(), active[split..].to_vec()];
    let frags = if cut_points.is_empty() {
        let is_cut = vec![false; parent.gates.len()];
        split_by_partition(parent, &parts, &is_cut)
    } else {
        let is_cut: Vec<bool> = (0..parent.gates.len())
            .map(|i| cut_points.contains(&CutPoint::Gate { gate_index: i }))
            .collect();
        split_by_partition(parent, &parts, &is_cut)
    };
    Ok(replicate(&frags, k))
}

fn cut_parent(parent: &LogicalCircuit, mechanism: Mechanism, cfg: &CorpusConfig, seed: u64) -> Result<Vec<Fragment>, CutError> {
    match mechanism {
        Mechanism::Wire => wire_job(parent, cfg.fragments_per_job, cfg.wire_pieces, seed),
        Mechanism::Gate => gate_job(parent, cfg.fragments_per_job, cfg.gate_peel_fraction),
    }
}

#[derive(Debug, Clone, Copy)]
struct ParentPlan {
    family: Family,
    subvariant: Subvariant,
    mechanism: Mechanism,
    instance: u64,
    width: usize,
    seed: u64,
}

pub fn assemble_jobs(cfg: &CorpusConfig, seed: u64) -> Result<Vec<CuttingJob>, CutError> {
    cfg.validate()?;
    let mut plans = Vec::new();
    for &family in &cfg.families {
        let mut rng = rng_for(seed, &[str_tag("plan"), str_tag(family.name())]);
        let subs = balanced(&family.subvariants(), cfg.instances_per_family, &mut rng);
        let mechs = balanced(&Mechanism::ALL, cfg.instances_per_family, &mut rng);
        for (i, (&subvariant, &mechanism)) in subs.iter().zip(&mechs).enumerate() {
            let instance = plans.len() as u64;
            plans.push(ParentPlan {
                family,
                subvariant,
                mechanism,
                instance,
                width: rng.random_range(cfg.min_width..=cfg.max_width),
                seed: derive_seed(seed, &[str_tag("parent"), str_tag(family.name()), i as u64]),
            });
        }
    }
    let mut job_ids: Vec<u64> = (0..plans.len() as u64).collect();
    job_ids.shuffle(&mut rng_for(seed, &[str_tag("job-ids")]));

    plans
        .par_iter()
        .zip(job_ids.par_iter())
        .map(|(p, &job_id)| build_job(p, job_id, cfg))
        .collect()
}

fn build_job(p: &ParentPlan, job_id: u64, cfg: &CorpusConfig) -> Result<CuttingJob, CutError> {
    let k = cfg.fragments_per_job;
    for width in p.width..=MAX_WIDTH {
        let mut parent = generate(p.family, p.subvariant, width, p.seed)?;
        parent.instance_id = p.instance;
        let frags = match cut_parent(&parent, p.mechanism, cfg, p.seed) {
            Ok(f) => f,
            Err(CutError::DegenerateCut(_)) => continue,
            Err(e) => return Err(e),
        };
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut rng_for(p.seed, &[str_tag("submission")]));
        let labels = job_labels(&parent, p.mechanism);
        return Ok(CuttingJob {
            job_id,
            parent,
            fragments: frags,
            labels,
            submission_order: order,
        });
    }
    Err(CutError::ParentTooSmall {
        family: p.family,
        instance: p.instance,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{logical_metrics, Subvariant};

    fn raw_circuit(n: usize, gates: Vec<GateOp>) -> LogicalCircuit {
        let mut c = generate(Family::Random, Subvariant::Shallow, 4, 0).unwrap();
        c.n_qubits = n;
        c.gates = gates;
        c
    }

    fn cx(a: usize, b: usize) -> GateOp {
        GateOp::raw(GateKind::Cx, &[], &[a, b])
    }

    fn wire_spec(points: Vec<(usize, usize)>, k: usize) -> CutSpec {
        CutSpec {
            mechanism: Mechanism::Wire,
            cut_points: points.into_iter().map(|(qubit, layer)| CutPoint::Wire { qubit, layer }).collect(),
            target_fragments: k,
        }
    }

    #[test]
    fn wire_cut_on_chain() {
        let c = raw_circuit(4, vec![cx(0, 1), cx(1, 2), cx(2, 3)]);
        let frags = cut_wire(&c, &wire_spec(vec![(1, 1)], 2)).unwrap();
        assert_eq!(frags.len(), 2);
        let mut twoq: Vec<usize> = frags.iter().map(|f| logical_metrics(&f.circuit).twoq_count).collect();
        twoq.sort();
        assert_eq!(twoq, vec![1, 2]);
        for f in &frags {
            assert!(logical_metrics(&f.circuit).depth < 3);
            assert_eq!(f.circuit.gates.iter().filter(|g| g.kind == GateKind::Marker).count(), 1);
        }
    }

    #[test]
    fn wire_cut_single_gate_is_degenerate() {
        let c = raw_circuit(2, vec![cx(0, 1)]);
        for layer in 0..3 {
            let r = cut_wire(&c, &wire_spec(vec![(0, layer)], 2));
            assert!(matches!(r, Err(CutError::DegenerateCut(_))), "layer {layer}");
        }
    }

    #[test]
    fn qft_mid_cut_fragments_are_shallower() {
        let c = generate(Family::Qft, Subvariant::Standard, 8, 0).unwrap();
        let d = logical_metrics(&c).depth;
        let spec = CutSpec {
            mechanism: Mechanism::Wire,
            cut_points: time_slice_cuts(&c, &[d / 2]),
            target_fragments: 2,
        };
        let frags = cut_wire(&c, &spec).unwrap();
        assert_eq!(frags.len(), 2);
        for f in &frags {
            assert!(logical_metrics(&f.circuit).depth < d);
        }
    }

    #[test]
    fn gate_cut_single_cx() {
        let c = raw_circuit(2, vec![cx(0, 1)]);
        let spec = CutSpec {
            mechanism: Mechanism::Gate,
            cut_points: vec![CutPoint::Gate { gate_index: 0 }],
            target_fragments: 2,
        };
        let frags = cut_gate(&c, &spec).unwrap();
        assert_eq!(frags.len(), 2);
        for f in &frags {
            assert_eq!(f.circuit.n_qubits, 1);
            assert_eq!(f.circuit.gates.len(), 1);
            assert_eq!(f.circuit.gates[0].kind, GateKind::Rz);
            assert_eq!(logical_metrics(&f.circuit).depth, 1);
        }
    }

    #[test]
    fn gate_cut_qaoa_middle_bond() {
        let c = generate(Family::Qaoa, Subvariant::P1, 6, 2).unwrap();
        let cut_points: Vec<CutPoint> = c
            .gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind == GateKind::Cx && g.qubits == vec![2, 3])
            .map(|(gate_index, _)| CutPoint::Gate { gate_index })
            .collect();
        assert_eq!(cut_points.len(), 2);
        let spec = CutSpec {
            mechanism: Mechanism::Gate,
            cut_points,
            target_fragments: 2,
        };
        let frags = cut_gate(&c, &spec).unwrap();
        assert_eq!(frags.len(), 2);
        for f in &frags {
            assert_eq!(f.circuit.n_qubits, 3);
            assert_eq!(logical_metrics(&f.circuit).twoq_count, 4);
        }
    }

    #[test]
    fn gate_cut_rejects_single_qubit_target() {
        let c = raw_circuit(2, vec![GateOp::raw(GateKind::H, &[], &[0]), cx(0, 1)]);
        let spec = CutSpec {
            mechanism: Mechanism::Gate,
            cut_points: vec![CutPoint::Gate { gate_index: 0 }],
            target_fragments: 2,
        };
        assert!(matches!(cut_gate(&c, &spec), Err(CutError::InvalidSpec(_))));
    }

    #[test]
    fn gate_cut_falls_back_to_index_blocks() {
        // cutting one CX of a triangle disconnects nothing
        let c = raw_circuit(3, vec![cx(0, 1), cx(1, 2), cx(0, 2)]);
        let spec = CutSpec {
            mechanism: Mechanism::Gate,
            cut_points: vec![CutPoint::Gate { gate_index: 0 }],
            target_fragments: 2,
        };
        let frags = cut_gate(&c, &spec).unwrap();
        assert_eq!(frags.len(), 2);
        let widths: Vec<usize> = frags.iter().map(|f| f.circuit.n_qubits).collect();
        assert_eq!(widths, vec![1, 2]);
    }

    #[test]
    fn gate_fragments_are_at_least_as_deep_as_wire_fragments() {
        let families = [Family::Qft, Family::Qaoa, Family::Random, Family::Chem, Family::Sim];
        let mut checked = 0;
        for seed in 0..20u64 {
            let fam = families[seed as usize % families.len()];
            let sub = fam.subvariants()[seed as usize % 3];
            let parent = generate(fam, sub, 8 + (seed as usize % 6), seed).unwrap();
            let wire = wire_job(&parent, 4, 2, seed).unwrap();
            let gate = gate_job(&parent, 4, 0.25).unwrap();
            let max_d = |fs: &[Fragment]| fs.iter().map(|f| logical_metrics(&f.circuit).depth).max().unwrap();
            assert!(max_d(&gate) >= max_d(&wire), "seed {seed}");
            checked += 1;
        }
        assert_eq!(checked, 20);
    }
}
