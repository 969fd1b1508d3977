//! SABRE-style SWAP insertion over a front layer with a lookahead window.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{gate_depth, interaction_graph, logical_metrics, GateKind, GateOp, LogicalCircuit};

use super::decompose::BASIS;
use super::layout::{complete, greedy_full, perfect_layout};
use super::topology::CouplingGraph;
use super::RouterError;

/// Number of pending 2Q gates scored beyond the front layer.
pub const LOOKAHEAD_WINDOW: usize = 20;
const LOOKAHEAD_WEIGHT: f64 = 0.5;
const DECAY_STEP: f64 = 0.001;
const DECAY_RESET: usize = 5;
const LAYOUT_PASSES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledCircuit {
    pub n_phys: usize,
    /// Basis ops on physical qubits; inserted SWAPs appear as 3 CX.
    pub gates: Vec<GateOp>,
    /// `layout[logical] = physical` before the first op.
    pub layout: Vec<usize>,
    /// `final_layout[logical] = physical` after the last op.
    pub final_layout: Vec<usize>,
    pub compiled_depth: usize,
    pub compiled_2q: usize,
    pub active_width: usize,
    pub swap_count: usize,
    /// Physical pairs swapped, in insertion order.
    pub swaps: Vec<(usize, usize)>,
}

impl CompiledCircuit {
    /// One op per line: kind, qubits, params.
    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        for g in &self.gates {
            let qs: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
            let ps: Vec<String> = g.params.iter().map(|p| format!("{p:.6}")).collect();
            s.push_str(&format!("{} {} {}\n", g.kind.name(), qs.join(","), ps.join(",")));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingOverhead {
    pub extra_2q: i64,
    pub depth_ratio: f64,
}

struct Dag {
    succ: Vec<Vec<usize>>,
    indeg: Vec<usize>,
}

fn build_dag(n_qubits: usize, gates: &[GateOp]) -> Dag {
    let mut last: Vec<Option<usize>> = vec![None; n_qubits];
    let mut succ = vec![Vec::new(); gates.len()];
    let mut indeg = vec![0; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        let mut preds: Vec<usize> = g.qubits.iter().filter_map(|&q| last[q]).collect();
        preds.sort_unstable();
        preds.dedup();
        for p in preds {
            succ[p].push(i);
            indeg[i] += 1;
        }
        for &q in &g.qubits {
            last[q] = Some(i);
        }
    }
    Dag { succ, indeg }
}

struct State<'a> {
    graph: &'a CouplingGraph,
    l2p: Vec<usize>,
    p2l: Vec<Option<usize>>,
    out: Vec<GateOp>,
    touched: BTreeSet<usize>,
    swaps: Vec<(usize, usize)>,
}

impl State<'_> {
    fn apply_swap(&mut self, a: usize, b: usize) {
        self.out.push(GateOp { kind: GateKind::Cx, params: vec![], qubits: vec![a, b] });
        self.out.push(GateOp { kind: GateKind::Cx, params: vec![], qubits: vec![b, a] });
        self.out.push(GateOp { kind: GateKind::Cx, params: vec![], qubits: vec![a, b] });
        self.touched.insert(a);
        self.touched.insert(b);
        self.swaps.push((a.min(b), a.max(b)));
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l[a] = lb;
        self.p2l[b] = la;
        if let Some(l) = la {
            self.l2p[l] = b;
        }
        if let Some(l) = lb {
            self.l2p[l] = a;
        }
    }

    fn dist(&self, g: &GateOp) -> f64 {
        self.graph.distance(self.l2p[g.qubits[0]], self.l2p[g.qubits[1]]) as f64
    }
}

/// Routes a basis-decomposed circuit. A perfect embedding is used when one
/// exists; otherwise the greedy layout is improved by forward-backward passes
/// and the cheapest forward run is kept. Deterministic: ties go to the swap
/// with the smallest physical indices.
pub fn route(circuit: &LogicalCircuit, graph: &CouplingGraph) -> Result<CompiledCircuit, RouterError> {
    if !graph.is_connected() {
        return Err(RouterError::InvalidTopology("coupling graph is disconnected".into()));
    }
    if circuit.n_qubits > graph.n_phys {
        return Err(RouterError::TooWide { need: circuit.n_qubits, have: graph.n_phys });
    }
    if let Some(g) = circuit.gates.iter().find(|g| !BASIS.contains(&g.kind) && g.kind != GateKind::Marker) {
        return Err(RouterError::NotBasis(g.kind));
    }
    let ig = interaction_graph(circuit);
    if let Some(p) = perfect_layout(&ig, graph) {
        return route_with_layout(circuit, graph, complete(p, graph.n_phys));
    }
    // forward-backward passes: the final layout of a reversed run seeds the next forward run
    let mut reversed = circuit.empty_like(circuit.n_qubits);
    reversed.gates = circuit.gates.iter().rev().cloned().collect();
    let mut best = route_with_layout(circuit, graph, greedy_full(&ig, graph))?;
    let mut seed_layout = best.final_layout.clone();
    for _ in 0..LAYOUT_PASSES {
        let back = route_with_layout(&reversed, graph, seed_layout)?;
        let fwd = route_with_layout(circuit, graph, back.final_layout)?;
        seed_layout = fwd.final_layout.clone();
        if (fwd.compiled_2q, fwd.compiled_depth) < (best.compiled_2q, best.compiled_depth) {
            best = fwd;
        }
    }
    Ok(best)
}

/// Routes from a caller-supplied `layout[logical] = physical`.
pub fn route_with_layout(
    circuit: &LogicalCircuit,
    graph: &CouplingGraph,
    layout: Vec<usize>,
) -> Result<CompiledCircuit, RouterError> {
    if !graph.is_connected() {
        return Err(RouterError::InvalidTopology("coupling graph is disconnected".into()));
    }
    if layout.len() != circuit.n_qubits || layout.iter().any(|&p| p >= graph.n_phys) {
        return Err(RouterError::InvalidSize("layout does not cover the circuit".into()));
    }
    if let Some(g) = circuit.gates.iter().find(|g| !BASIS.contains(&g.kind) && g.kind != GateKind::Marker) {
        return Err(RouterError::NotBasis(g.kind));
    }
    let gates = &circuit.gates;
    let mut p2l = vec![None; graph.n_phys];
    for (l, &p) in layout.iter().enumerate() {
        p2l[p] = Some(l);
    }
    let mut st = State {
        graph,
        l2p: layout.clone(),
        p2l,
        out: Vec::with_capacity(gates.len()),
        touched: BTreeSet::new(),
        swaps: Vec::new(),
    };

    let Dag { succ, mut indeg } = build_dag(circuit.n_qubits, gates);
    let mut front: Vec<usize> = (0..gates.len()).filter(|&i| indeg[i] == 0).collect();
    let mut decay = vec![1.0f64; graph.n_phys];
    let mut swaps_since_exec = 0usize;
    let release_after = 4 * graph.n_phys + 10;

    while !front.is_empty() {
        // execute everything that is ready
        let mut progressed = true;
        while progressed {
            progressed = false;
            let mut next_front = Vec::with_capacity(front.len());
            for &i in &front {
                let g = &gates[i];
                let ready = !g.is_multi_qubit() || graph.is_edge(st.l2p[g.qubits[0]], st.l2p[g.qubits[1]]);
                if ready {
                    let phys: Vec<usize> = g.qubits.iter().map(|&q| st.l2p[q]).collect();
                    st.touched.extend(phys.iter().copied());
                    if g.kind != GateKind::Marker {
                        st.out.push(GateOp { kind: g.kind, params: g.params.clone(), qubits: phys });
                    }
                    for &s in &succ[i] {
                        indeg[s] -= 1;
                        if indeg[s] == 0 {
                            next_front.push(s);
                        }
                    }
                    progressed = true;
                } else {
                    next_front.push(i);
                }
            }
            next_front.sort_unstable();
            front = next_front;
            if progressed {
                swaps_since_exec = 0;
                decay.iter_mut().for_each(|d| *d = 1.0);
            }
        }
        if front.is_empty() {
            break;
        }

        // every remaining front op is a blocked 2Q gate
        if swaps_since_exec >= release_after {
            let g = &gates[front[0]];
            let path = graph.shortest_path(st.l2p[g.qubits[0]], st.l2p[g.qubits[1]]);
            for w in path.windows(2).take(path.len().saturating_sub(2)) {
                st.apply_swap(w[0], w[1]);
            }
            swaps_since_exec = 0;
            continue;
        }

        let extended = lookahead(&front, &succ, &indeg, gates);
        let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &i in &front {
            for &q in &gates[i].qubits {
                let p = st.l2p[q];
                for &nb in graph.neighbours(p) {
                    candidates.insert((p.min(nb), p.max(nb)));
                }
            }
        }
        let mut best: Option<((usize, usize), f64)> = None;
        for &(a, b) in &candidates {
            st.apply_swap_silent(a, b);
            let f: f64 = front.iter().map(|&i| st.dist(&gates[i])).sum::<f64>() / front.len() as f64;
            let e: f64 = if extended.is_empty() {
                0.0
            } else {
                extended.iter().map(|&i| st.dist(&gates[i])).sum::<f64>() / extended.len() as f64
            };
            st.apply_swap_silent(a, b);
            let score = decay[a].max(decay[b]) * (f + LOOKAHEAD_WEIGHT * e);
            // strict comparison keeps the lexicographically smallest pair on ties
            if best.is_none_or(|(_, s)| score < s - 1e-12) {
                best = Some(((a, b), score));
            }
        }
        let ((a, b), _) = best.expect("front gates always have neighbours");
        st.apply_swap(a, b);
        decay[a] += DECAY_STEP;
        decay[b] += DECAY_STEP;
        swaps_since_exec += 1;
        if swaps_since_exec % DECAY_RESET == 0 {
            decay.iter_mut().for_each(|d| *d = 1.0);
        }
    }

    let compiled_2q = st.out.iter().filter(|g| g.is_multi_qubit()).count();
    let compiled_depth = gate_depth(graph.n_phys, &st.out);
    Ok(CompiledCircuit {
        n_phys: graph.n_phys,
        layout,
        final_layout: st.l2p,
        compiled_depth,
        compiled_2q,
        active_width: st.touched.len(),
        swap_count: st.swaps.len(),
        swaps: st.swaps,
        gates: st.out,
    })
}

impl State<'_> {
    /// Layout-only exchange used while scoring.
    fn apply_swap_silent(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l[a] = lb;
        self.p2l[b] = la;
        if let Some(l) = la {
            self.l2p[l] = b;
        }
        if let Some(l) = lb {
            self.l2p[l] = a;
        }
    }
}

/// Next `LOOKAHEAD_WINDOW` 2Q gates past the front, in topological order.
fn lookahead(front: &[usize], succ: &[Vec<usize>], indeg: &[usize], gates: &[GateOp]) -> Vec<usize> {
    let mut remaining: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut queue: std::collections::VecDeque<usize> = front.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(i) = queue.pop_front() {
        for &s in &succ[i] {
            let r = remaining.entry(s).or_insert(indeg[s]);
            *r -= 1;
            if *r == 0 {
                if gates[s].is_multi_qubit() {
                    out.push(s);
                    if out.len() >= LOOKAHEAD_WINDOW {
                        return out;
                    }
                }
                queue.push_back(s);
            }
        }
    }
    out
}

/// `logical` is the basis-decomposed input that was routed.
pub fn routing_overhead(logical: &LogicalCircuit, compiled: &CompiledCircuit) -> Result<RoutingOverhead, RouterError> {
    let m = logical_metrics(logical);
    if m.depth == 0 {
        return Err(RouterError::UndefinedRatio);
    }
    Ok(RoutingOverhead {
        extra_2q: compiled.compiled_2q as i64 - m.twoq_count as i64,
        depth_ratio: compiled.compiled_depth as f64 / m.depth as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, Family, Subvariant};
    use crate::router::{build_topology, decompose_to_basis, TopologyKind};

    fn bare(n: usize, gates: Vec<GateOp>) -> LogicalCircuit {
        let mut c = generate(Family::Hea, Subvariant::Linear, 4, 0).unwrap();
        c.n_qubits = n;
        c.gates = gates;
        c
    }

    fn cx(a: usize, b: usize) -> GateOp {
        GateOp::new(GateKind::Cx, vec![], vec![a, b]).unwrap()
    }

    #[test]
    fn distance_two_cx_on_a_line_needs_one_swap() {
        let g = build_topology(TopologyKind::Linear, 3).unwrap();
        // a triangle cannot embed in a line, so one pair ends up at distance 2
        let c = bare(3, vec![cx(0, 1), cx(1, 2), cx(0, 2)]);
        let r = route(&c, &g).unwrap();
        assert_eq!(r.swap_count, 1);
        assert_eq!(r.compiled_2q, 3 + 3);
    }

    #[test]
    fn identity_layout_cx_0_2_takes_one_swap() {
        let g = build_topology(TopologyKind::Linear, 3).unwrap();
        let r = route_with_layout(&bare(3, vec![cx(0, 2)]), &g, vec![0, 1, 2]).unwrap();
        assert_eq!(r.swap_count, 1);
        assert_eq!(r.compiled_2q, 4);
        assert!(r.gates.iter().all(|op| g.is_edge(op.qubits[0], op.qubits[1])));
    }

    #[test]
    fn lone_distance_two_cx_embeds_without_swaps() {
        // with a free layout a single CX is always placeable on an edge
        let g = build_topology(TopologyKind::Linear, 3).unwrap();
        let r = route(&bare(3, vec![cx(0, 2)]), &g).unwrap();
        assert_eq!(r.swap_count, 0);
        assert_eq!(r.compiled_2q, 1);
    }

    #[test]
    fn all_to_all_never_swaps() {
        for fam in Family::ALL {
            for sub in fam.subvariants() {
                let c = decompose_to_basis(&generate(fam, sub, 9, 3).unwrap()).unwrap();
                let g = build_topology(TopologyKind::AllToAll, 13).unwrap();
                let r = route(&c, &g).unwrap();
                assert_eq!(r.swap_count, 0);
                let o = routing_overhead(&c, &r).unwrap();
                assert_eq!(o.extra_2q, 0);
                assert!((o.depth_ratio - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_depth_ratio_is_an_error() {
        let c = bare(2, vec![]);
        let g = build_topology(TopologyKind::Linear, 2).unwrap();
        let r = route(&c, &g).unwrap();
        assert_eq!(routing_overhead(&c, &r), Err(RouterError::UndefinedRatio));
    }

    #[test]
    fn rejects_non_basis_input() {
        let c = bare(2, vec![GateOp::new(GateKind::H, vec![], vec![0]).unwrap()]);
        let g = build_topology(TopologyKind::Linear, 2).unwrap();
        assert_eq!(route(&c, &g), Err(RouterError::NotBasis(GateKind::H)));
    }

    #[test]
    fn too_wide_is_an_error() {
        let c = bare(5, vec![cx(0, 4)]);
        let g = build_topology(TopologyKind::Linear, 3).unwrap();
        assert!(matches!(route(&c, &g), Err(RouterError::TooWide { need: 5, have: 3 })));
    }

    #[test]
    fn dump_has_one_line_per_gate() {
        let g = build_topology(TopologyKind::Linear, 3).unwrap();
        let r = route(&bare(3, vec![cx(0, 1), cx(1, 2), cx(0, 2)]), &g).unwrap();
        assert_eq!(r.debug_dump().lines().count(), r.gates.len());
    }
}
