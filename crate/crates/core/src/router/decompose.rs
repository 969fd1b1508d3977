use std::f64::consts::PI;

use crate::circuit::{ccx_template, GateKind, GateOp, LogicalCircuit};

use super::RouterError;

/// Target basis `{cx, id, rz, sx, x}`.
pub const BASIS: [GateKind; 5] = [GateKind::Cx, GateKind::Id, GateKind::Rz, GateKind::Sx, GateKind::X];

fn op(kind: GateKind, params: &[f64], qubits: &[usize]) -> GateOp {
    GateOp {
        kind,
        params: params.to_vec(),
        qubits: qubits.to_vec(),
    }
}

/// `U(theta, phi, lambda)` as `RZ(phi + pi) SX RZ(theta + pi) SX RZ(lambda)`
/// in circuit order (right-most first).
fn u3(theta: f64, phi: f64, lambda: f64, q: usize, out: &mut Vec<GateOp>) {
    out.push(op(GateKind::Rz, &[lambda], &[q]));
    out.push(op(GateKind::Sx, &[], &[q]));
    out.push(op(GateKind::Rz, &[theta + PI], &[q]));
    out.push(op(GateKind::Sx, &[], &[q]));
    out.push(op(GateKind::Rz, &[phi + PI], &[q]));
}

fn expand(g: &GateOp, out: &mut Vec<GateOp>) -> Result<(), RouterError> {
    use GateKind::*;
    let q = &g.qubits;
    match g.kind {
        Cx | Id | Rz | Sx | X | Marker => out.push(g.clone()),
        H => {
            out.push(op(Rz, &[PI / 2.0], &[q[0]]));
            out.push(op(Sx, &[], &[q[0]]));
            out.push(op(Rz, &[PI / 2.0], &[q[0]]));
        }
        Ry => u3(g.params[0], 0.0, 0.0, q[0], out),
        Cp => {
            let t = g.params[0];
            out.push(op(Rz, &[t / 2.0], &[q[0]]));
            out.push(op(Cx, &[], &[q[0], q[1]]));
            out.push(op(Rz, &[-t / 2.0], &[q[1]]));
            out.push(op(Cx, &[], &[q[0], q[1]]));
            out.push(op(Rz, &[t / 2.0], &[q[1]]));
        }
        Crz => {
            let t = g.params[0];
            out.push(op(Rz, &[t / 2.0], &[q[1]]));
            out.push(op(Cx, &[], &[q[0], q[1]]));
            out.push(op(Rz, &[-t / 2.0], &[q[1]]));
            out.push(op(Cx, &[], &[q[0], q[1]]));
        }
        Swap => {
            out.push(op(Cx, &[], &[q[0], q[1]]));
            out.push(op(Cx, &[], &[q[1], q[0]]));
            out.push(op(Cx, &[], &[q[0], q[1]]));
        }
        Rzz => {
            out.push(op(Cx, &[], &[q[0], q[1]]));
            out.push(op(Rz, &[g.params[0]], &[q[1]]));
            out.push(op(Cx, &[], &[q[0], q[1]]));
        }
        Ccx => {
            for inner in ccx_template(q[0], q[1], q[2]) {
                expand(&inner, out)?;
            }
        }
    }
    Ok(())
}

/// Translates to the basis with fixed templates; single-qubit runs are not
/// re-synthesised. Markers pass through untouched.
pub fn decompose_to_basis(circuit: &LogicalCircuit) -> Result<LogicalCircuit, RouterError> {
    let mut gates = Vec::with_capacity(circuit.gates.len() * 3);
    for g in &circuit.gates {
        expand(g, &mut gates)?;
    }
    let mut out = circuit.empty_like(circuit.n_qubits);
    out.gates = gates;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, logical_metrics, Family, Subvariant};

    type C = (f64, f64);
    type M = [[C; 4]; 4];

    fn mul(a: C, b: C) -> C {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn matmul(a: &M, b: &M) -> M {
        let mut r = [[(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let p = mul(a[i][k], b[k][j]);
                    r[i][j].0 += p.0;
                    r[i][j].1 += p.1;
                }
            }
        }
        r
    }

    /// Two-qubit unitary of a basis op; qubit 0 is the high bit.
    fn unitary(g: &GateOp) -> M {
        let mut m = [[(0.0, 0.0); 4]; 4];
        match g.kind {
            GateKind::Rz => {
                let t = g.params[0];
                for s in 0..4 {
                    let bit = if g.qubits[0] == 0 { s >> 1 } else { s & 1 };
                    let ph = if bit == 1 { t / 2.0 } else { -t / 2.0 };
                    m[s][s] = (ph.cos(), ph.sin());
                }
            }
            GateKind::Cx => {
                let (c, t) = (g.qubits[0], g.qubits[1]);
                for s in 0..4 {
                    let bit = |q: usize| if q == 0 { (s >> 1) & 1 } else { s & 1 };
                    let flipped = if bit(c) == 1 { s ^ if t == 0 { 2 } else { 1 } } else { s };
                    m[flipped][s] = (1.0, 0.0);
                }
            }
            k => panic!("no matrix for {k:?}"),
        }
        m
    }

    fn equal_up_to_phase(a: &M, b: &M) -> bool {
        let (mut pi, mut pj) = (0, 0);
        for i in 0..4 {
            for j in 0..4 {
                if a[i][j].0.hypot(a[i][j].1) > 0.5 {
                    (pi, pj) = (i, j);
                }
            }
        }
        let (x, y) = (a[pi][pj], b[pi][pj]);
        let den = y.0 * y.0 + y.1 * y.1;
        if den < 1e-12 {
            return false;
        }
        // phase = x / y
        let phase = ((x.0 * y.0 + x.1 * y.1) / den, (x.1 * y.0 - x.0 * y.1) / den);
        (0..4).all(|i| {
            (0..4).all(|j| {
                let p = mul(phase, b[i][j]);
                (p.0 - a[i][j].0).abs() < 1e-9 && (p.1 - a[i][j].1).abs() < 1e-9
            })
        })
    }

    fn circuit_of(gates: Vec<GateOp>) -> LogicalCircuit {
        let mut c = generate(Family::Hea, Subvariant::Linear, 4, 0).unwrap();
        c.n_qubits = 2;
        c.gates = gates;
        c
    }

    #[test]
    fn swap_is_three_cx() {
        let c = decompose_to_basis(&circuit_of(vec![op(GateKind::Swap, &[], &[0, 1])])).unwrap();
        assert_eq!(c.gates.len(), 3);
        assert!(c.gates.iter().all(|g| g.kind == GateKind::Cx));
    }

    #[test]
    fn cp_template_matches_controlled_phase() {
        for &theta in &[0.3, PI / 2.0, 2.1, -1.7] {
            let c = decompose_to_basis(&circuit_of(vec![op(GateKind::Cp, &[theta], &[0, 1])])).unwrap();
            assert_eq!(c.gates.iter().filter(|g| g.kind == GateKind::Cx).count(), 2);
            assert_eq!(c.gates.iter().filter(|g| g.kind == GateKind::Rz).count(), 3);
            let mut u: M = [[(0.0, 0.0); 4]; 4];
            for (i, row) in u.iter_mut().enumerate() {
                row[i] = (1.0, 0.0);
            }
            for g in &c.gates {
                u = matmul(&unitary(g), &u);
            }
            let mut cp: M = [[(0.0, 0.0); 4]; 4];
            for (i, row) in cp.iter_mut().enumerate() {
                row[i] = (1.0, 0.0);
            }
            cp[3][3] = (theta.cos(), theta.sin());
            assert!(equal_up_to_phase(&cp, &u), "theta={theta}");
        }
    }

    #[test]
    fn qft_n5_has_26_cx() {
        let c = generate(Family::Qft, Subvariant::Standard, 5, 0).unwrap();
        let d = decompose_to_basis(&c).unwrap();
        assert_eq!(d.gates.iter().filter(|g| g.kind == GateKind::Cx).count(), 26);
        assert!(d.gates.iter().all(|g| BASIS.contains(&g.kind)));
        assert_eq!(logical_metrics(&d).twoq_count, 26);
    }

    #[test]
    fn every_family_lands_in_basis() {
        for fam in Family::ALL {
            for sub in fam.subvariants() {
                let c = generate(fam, sub, 7, 11).unwrap();
                let d = decompose_to_basis(&c).unwrap();
                assert!(d.gates.iter().all(|g| BASIS.contains(&g.kind) || g.kind == GateKind::Marker));
            }
        }
    }
}
