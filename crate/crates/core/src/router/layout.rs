//! Initial placement of logical qubits on physical qubits.
//!
//! First a bounded backtracking search for a perfect embedding of the
//! interaction graph (every interacting pair lands on a coupling edge). When
//! none is found within budget, a greedy densest-first placement refined by
//! one sweep of pairwise swaps.

use crate::circuit::InteractionGraph;

use super::topology::CouplingGraph;

const SEARCH_BUDGET: usize = 50_000;

/// Tries to embed the interaction graph into the coupling graph.
/// Returns `layout[logical] = physical` for active logical qubits.
pub fn perfect_layout(ig: &InteractionGraph, graph: &CouplingGraph) -> Option<Vec<Option<usize>>> {
    let adj = ig.neighbours();
    let active: Vec<usize> = (0..ig.n_nodes).filter(|&q| !adj[q].is_empty()).collect();
    if active.len() > graph.n_phys {
        return None;
    }
    for q in &active {
        if adj[*q].len() > graph.max_degree() {
            return None;
        }
    }
    // BFS order per component, components by descending degree root
    let mut order = Vec::with_capacity(active.len());
    let mut seen = vec![false; ig.n_nodes];
    let mut roots = active.clone();
    roots.sort_by_key(|&q| (std::cmp::Reverse(adj[q].len()), q));
    for r in roots {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let start = order.len();
        order.push(r);
        let mut i = start;
        while i < order.len() {
            let u = order[i];
            let mut nb = adj[u].clone();
            nb.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
            for v in nb {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
            i += 1;
        }
    }
    let mut phys_by_degree: Vec<usize> = (0..graph.n_phys).collect();
    phys_by_degree.sort_by_key(|&p| (std::cmp::Reverse(graph.degree(p)), p));

    let mut layout = vec![None; ig.n_nodes];
    let mut used = vec![false; graph.n_phys];
    let mut budget = SEARCH_BUDGET;
    if search(0, &order, &adj, graph, &phys_by_degree, &mut layout, &mut used, &mut budget) {
        Some(layout)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    depth: usize,
    order: &[usize],
    adj: &[Vec<usize>],
    graph: &CouplingGraph,
    phys_by_degree: &[usize],
    layout: &mut [Option<usize>],
    used: &mut [bool],
    budget: &mut usize,
) -> bool {
    if depth == order.len() {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let q = order[depth];
    let anchor = adj[q].iter().find_map(|&v| layout[v]);
    let candidates: Vec<usize> = match anchor {
        Some(p) => graph.neighbours(p).to_vec(),
        None => phys_by_degree.to_vec(),
    };
    for p in candidates {
        if used[p] || graph.degree(p) < adj[q].len() {
            continue;
        }
        let ok = adj[q].iter().all(|&v| layout[v].is_none_or(|pv| graph.is_edge(p, pv)));
        if !ok {
            continue;
        }
        layout[q] = Some(p);
        used[p] = true;
        if search(depth + 1, order, adj, graph, phys_by_degree, layout, used, budget) {
            return true;
        }
        layout[q] = None;
        used[p] = false;
        if *budget == 0 {
            return false;
        }
    }
    false
}

fn weighted_cost(ig: &InteractionGraph, graph: &CouplingGraph, layout: &[usize]) -> u64 {
    ig.edges
        .iter()
        .map(|(&(a, b), &w)| w as u64 * graph.distance(layout[a], layout[b]) as u64)
        .sum()
}

/// Full layout for all `ig.n_nodes` logical qubits.
pub fn initial_layout(ig: &InteractionGraph, graph: &CouplingGraph) -> Vec<usize> {
    match perfect_layout(ig, graph) {
        Some(p) => complete(p, graph.n_phys),
        None => greedy_full(ig, graph),
    }
}

/// Greedy placement plus refinement, ignoring any perfect embedding.
pub(crate) fn greedy_full(ig: &InteractionGraph, graph: &CouplingGraph) -> Vec<usize> {
    let layout = complete(greedy_layout(ig, graph), graph.n_phys);
    if ig.edges.is_empty() {
        return layout;
    }
    refine(ig, graph, layout)
}

/// Puts unplaced logical qubits on the lowest free physical qubits.
pub(crate) fn complete(partial: Vec<Option<usize>>, n_phys: usize) -> Vec<usize> {
    assert!(partial.len() <= n_phys, "caller checks the width");
    let mut used = vec![false; n_phys];
    for p in partial.iter().flatten() {
        used[*p] = true;
    }
    let mut free = (0..n_phys).filter(|&p| !used[p]);
    partial
        .into_iter()
        .map(|p| p.unwrap_or_else(|| free.next().expect("enough physical qubits")))
        .collect()
}

fn greedy_layout(ig: &InteractionGraph, graph: &CouplingGraph) -> Vec<Option<usize>> {
    let n = ig.n_nodes;
    let adj = ig.neighbours();
    let wdeg: Vec<usize> = (0..n).map(|q| adj[q].iter().map(|&v| ig.weight(q, v)).sum()).collect();
    let mut layout: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; graph.n_phys];
    let active: Vec<usize> = (0..n).filter(|&q| wdeg[q] > 0).collect();
    let centre = (0..graph.n_phys)
        .min_by_key(|&p| {
            let far: u64 = (0..graph.n_phys).map(|o| graph.distance(p, o) as u64).sum();
            (std::cmp::Reverse(graph.degree(p)), far, p)
        })
        .unwrap();
    let mut placed: Vec<usize> = Vec::new();
    while placed.len() < active.len() {
        // most strongly attached unplaced qubit; first pick is the heaviest
        let next = *active
            .iter()
            .filter(|&&q| layout[q].is_none())
            .max_by_key(|&&q| {
                let attach: usize = placed.iter().map(|&v| ig.weight(q, v)).sum();
                (attach, wdeg[q], std::cmp::Reverse(q))
            })
            .unwrap();
        let target = if placed.is_empty() {
            centre
        } else {
            (0..graph.n_phys)
                .filter(|&p| !used[p])
                .min_by_key(|&p| {
                    let cost: u64 = placed
                        .iter()
                        .map(|&v| ig.weight(next, v) as u64 * graph.distance(p, layout[v].unwrap()) as u64)
                        .sum();
                    (cost, std::cmp::Reverse(graph.degree(p)), p)
                })
                .unwrap()
        };
        layout[next] = Some(target);
        used[target] = true;
        placed.push(next);
    }
    layout
}

/// One sweep of pairwise exchanges (including moves onto free qubits) that
/// strictly reduce the total weighted distance.
fn refine(ig: &InteractionGraph, graph: &CouplingGraph, mut layout: Vec<usize>) -> Vec<usize> {
    let n = ig.n_nodes;
    let mut owner: Vec<Option<usize>> = vec![None; graph.n_phys];
    for (q, &p) in layout.iter().enumerate() {
        owner[p] = Some(q);
    }
    let mut cost = weighted_cost(ig, graph, &layout);
    for q in 0..n {
        for p in 0..graph.n_phys {
            let cur = layout[q];
            if p == cur {
                continue;
            }
            let other = owner[p];
            layout[q] = p;
            if let Some(o) = other {
                layout[o] = cur;
            }
            let c = weighted_cost(ig, graph, &layout);
            if c < cost {
                cost = c;
                owner[p] = Some(q);
                owner[cur] = other;
            } else {
                layout[q] = cur;
                if let Some(o) = other {
                    layout[o] = p;
                }
            }
        }
    }
    layout
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, interaction_graph, Family, Subvariant};
    use crate::router::{build_topology, TopologyKind};

    #[test]
    fn chain_embeds_perfectly_everywhere() {
        let c = generate(Family::Qaoa, Subvariant::P2, 12, 0).unwrap();
        let ig = interaction_graph(&c);
        for kind in TopologyKind::ALL {
            let g = build_topology(kind, 20).unwrap();
            let l = initial_layout(&ig, &g);
            for &(a, b) in ig.edges.keys() {
                assert!(g.is_edge(l[a], l[b]), "{kind}");
            }
        }
    }

    #[test]
    fn layout_is_injective() {
        let c = generate(Family::Qft, Subvariant::Standard, 10, 0).unwrap();
        let ig = interaction_graph(&c);
        let g = build_topology(TopologyKind::HeavyHex, 20).unwrap();
        let mut l = initial_layout(&ig, &g);
        l.sort();
        l.dedup();
        assert_eq!(l.len(), 10);
    }
}
