use std::collections::BTreeMap;

use cutleak_core::circuit::{generate, Family, GateKind, GateOp, LogicalCircuit};
use cutleak_core::router::{build_topology, decompose_to_basis, route, routing_overhead, TopologyKind};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

/// Applies one basis op to a state over `n` qubits, qubit `k` being bit `k`.
fn apply(state: &mut [C], g: &GateOp, slot: impl Fn(usize) -> usize) {
    match g.kind {
        GateKind::Cx => {
            let (c, t) = (1 << slot(g.qubits[0]), 1 << slot(g.qubits[1]));
            for i in 0..state.len() {
                if i & c != 0 && i & t == 0 {
                    state.swap(i, i | t);
                }
            }
        }
        GateKind::Id | GateKind::Marker => {}
        kind => {
            let m = match kind {
                GateKind::X => [[C::new(0.0, 0.0), C::new(1.0, 0.0)], [C::new(1.0, 0.0), C::new(0.0, 0.0)]],
                GateKind::Sx => [[C::new(0.5, 0.5), C::new(0.5, -0.5)], [C::new(0.5, -0.5), C::new(0.5, 0.5)]],
                GateKind::Rz => {
                    let h = g.params[0] / 2.0;
                    [[C::from_polar(1.0, -h), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::from_polar(1.0, h)]]
                }
                other => panic!("not a basis op: {other:?}"),
            };
            let b = 1 << slot(g.qubits[0]);
            for i in 0..state.len() {
                if i & b == 0 {
                    let (a0, a1) = (state[i], state[i | b]);
                    state[i] = m[0][0] * a0 + m[0][1] * a1;
                    state[i | b] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        }
    }
}

fn random_state(n: usize, seed: u64) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C> = (0..1 << n).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

/// Moves logical qubit `l` to bit `place[l]` of a `width`-qubit register.
fn embed(logical: &[C], place: &[usize], width: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); 1 << width];
    for (i, a) in logical.iter().enumerate() {
        let j: usize = place.iter().enumerate().filter(|(l, _)| i >> l & 1 == 1).map(|(_, &p)| 1 << p).sum();
        out[j] = *a;
    }
    out
}

fn case(family: Family, sub: usize, n: usize, seed: u64) -> LogicalCircuit {
    generate(family, family.subvariants()[sub], n, seed).unwrap()
}

fn check_equivalent(logical: &LogicalCircuit, kind: TopologyKind) {
    let basis = decompose_to_basis(logical).unwrap();
    let graph = build_topology(kind, (basis.n_qubits + 4).max(12)).unwrap();
    let compiled = route(&basis, &graph).unwrap();

    for g in compiled.gates.iter().filter(|g| g.kind == GateKind::Cx) {
        assert!(graph.is_edge(g.qubits[0], g.qubits[1]), "{kind:?}: CX off the coupling graph");
    }
    let logical_cx = basis.gates.iter().filter(|g| g.kind == GateKind::Cx).count();
    assert_eq!(compiled.compiled_2q, logical_cx + 3 * compiled.swap_count);
    let ov = routing_overhead(&basis, &compiled).unwrap();
    assert_eq!(ov.extra_2q, 3 * compiled.swap_count as i64);

    // replaying the recorded swaps reproduces the final layout
    let mut l2p = compiled.layout.clone();
    for &(a, b) in &compiled.swaps {
        for p in l2p.iter_mut() {
            if *p == a {
                *p = b;
            } else if *p == b {
                *p = a;
            }
        }
    }
    assert_eq!(l2p[..basis.n_qubits], compiled.final_layout[..basis.n_qubits]);

    // compact the touched physical qubits into a small register
    let mut slots: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in compiled.layout[..basis.n_qubits].iter().chain(compiled.gates.iter().flat_map(|g| &g.qubits)) {
        let next = slots.len();
        slots.entry(p).or_insert(next);
    }
    let width = slots.len();
    assert!(width <= 16, "too many touched qubits to simulate: {width}");

    let psi = random_state(basis.n_qubits, logical.seed);
    let mut want = psi.clone();
    for g in &basis.gates {
        apply(&mut want, g, |q| q);
    }
    let start: Vec<usize> = compiled.layout[..basis.n_qubits].iter().map(|p| slots[p]).collect();
    let mut got = embed(&psi, &start, width);
    for g in &compiled.gates {
        apply(&mut got, g, |p| slots[&p]);
    }
    let end: Vec<usize> = compiled.final_layout[..basis.n_qubits].iter().map(|p| slots[p]).collect();
    let want = embed(&want, &end, width);
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-9, "{kind:?} {:?}/{:?} n={}: max amplitude error {err}", logical.family, logical.subvariant, logical.n_qubits);
}

#[test]
fn qft_routes_equivalently_everywhere() {
    for kind in TopologyKind::ALL {
        check_equivalent(&case(Family::Qft, 0, 6, 1), kind);
    }
}

#[test]
fn routing_is_deterministic() {
    let basis = decompose_to_basis(&case(Family::Random, 2, 9, 4)).unwrap();
    let graph = build_topology(TopologyKind::HeavyHex, 13).unwrap();
    assert_eq!(route(&basis, &graph).unwrap(), route(&basis, &graph).unwrap());
}

#[test]
fn chains_embed_without_swaps() {
    for kind in TopologyKind::ALL {
        let basis = decompose_to_basis(&case(Family::Qaoa, 1, 8, 2)).unwrap();
        let graph = build_topology(kind, 12).unwrap();
        assert_eq!(route(&basis, &graph).unwrap().swap_count, 0, "{kind:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn routed_circuits_are_legal_and_equivalent(fam in 0usize..8, sub in 0usize..3, n in 4usize..=7, seed in any::<u64>(), topo in 0usize..3) {
        check_equivalent(&case(Family::ALL[fam], sub, n, seed), TopologyKind::ALL[topo]);
    }
}
