//! Relativistic Toda lattice.
//!
//! Chart (a_1..a_{N-1}, b_1..b_N) with the boundary convention
//! a_0 = a_N = 0. Brackets pi_1 (linear), pi_2 (quadratic), pi_3 (cubic) as
//! printed tables, pi_4 = L_{X_2} pi_2 generated for N = 3; master
//! symmetries X_1 (any N) and X_2 (N = 3); lower-Hessenberg Lax pair with
//! Ldot = [L, B]. The equations of motion carry the opposite orientation
//! from pi_2 grad H_1 (the flow equals pi_2 grad(-H_1)); see the tests.

use crate::checks::{IdentityReport, SamplerConfig};
use crate::exact::{rat, Rat};
use crate::geom::{
    hamiltonian_vf, lie_derivative_bivector, Bivector, Chart, ChartRef, GeomError, Predicate,
    ScalarField, VectorField,
};
use crate::poly::{pm_adjugate, pm_det, pm_mul, pm_trace, Poly, PolyMat, RatFn};
use crate::scalar::FloatScalar;
use num::Zero;

pub fn rel_chart(n: usize) -> ChartRef {
    assert!(n >= 2);
    let mut labels = Vec::new();
    for i in 1..n {
        labels.push(format!("a{i}"));
    }
    for i in 1..=n {
        labels.push(format!("b{i}"));
    }
    Chart::new(format!("rel-{n}"), labels)
}

pub fn dim(n: usize) -> usize {
    2 * n - 1
}

fn a_idx(i: usize) -> usize {
    i - 1
}

fn b_idx(n: usize, i: usize) -> usize {
    (n - 1) + (i - 1)
}

/// a_i as polynomial; the convention a_0 = a_N = 0 yields zero polynomials
/// outside 1..N-1.
fn va(nv: usize, n: usize, i: usize) -> Poly {
    if i == 0 || i >= n {
        Poly::zero(nv)
    } else {
        Poly::var(nv, a_idx(i))
    }
}

fn vb(nv: usize, n: usize, i: usize) -> Poly {
    Poly::var(nv, b_idx(n, i))
}

/// Equations of motion (the printed flow):
/// a_j' = a_j (b_j - b_{j+1} + a_{j-1} - a_{j+1}), b_j' = b_j (a_{j-1} - a_j).
pub fn rel_equations(n: usize) -> VectorField {
    let ch = rel_chart(n);
    let nv = dim(n);
    let mut comps = vec![RatFn::zero(nv); nv];
    for j in 1..n {
        let t = va(nv, n, j).mul(
            &vb(nv, n, j)
                .sub(&vb(nv, n, j + 1))
                .add(&va(nv, n, j - 1))
                .sub(&va(nv, n, j + 1)),
        );
        comps[a_idx(j)] = RatFn::from_poly(t);
    }
    for j in 1..=n {
        let t = vb(nv, n, j).mul(&va(nv, n, j - 1).sub(&va(nv, n, j)));
        comps[b_idx(n, j)] = RatFn::from_poly(t);
    }
    VectorField::new(&ch, "rel-flow", comps)
}

/// Lower-Hessenberg Lax pair: row i < N carries a_i + b_i in columns 1..i and
/// a_i at i+1; row N is b_N everywhere. B is upper bidiagonal. Ldot = [L, B].
pub fn rel_lax(n: usize) -> (PolyMat, PolyMat) {
    let nv = dim(n);
    let mut l = vec![vec![Poly::zero(nv); n]; n];
    let mut b = vec![vec![Poly::zero(nv); n]; n];
    for i in 1..=n {
        let diag = va(nv, n, i).add(&vb(nv, n, i)); // a_N = 0 makes row N pure b_N
        for j in 1..=i {
            l[i - 1][j - 1] = diag.clone();
        }
        if i < n {
            l[i - 1][i] = va(nv, n, i);
        }
    }
    for i in 1..=n {
        if i >= 2 {
            b[i - 1][i - 1] = va(nv, n, i - 1).neg();
        }
        if i < n {
            b[i - 1][i] = va(nv, n, i);
        }
    }
    (l, b)
}

/// H_k = (1/k) tr L^k, exact polynomial.
pub fn invariant(n: usize, k: u32) -> ScalarField {
    assert!(k >= 1);
    let ch = rel_chart(n);
    let (l, _) = rel_lax(n);
    let mut p = l.clone();
    for _ in 1..k {
        p = pm_mul(&p, &l);
    }
    let h = pm_trace(&p).scale(&(Rat::from_integer(1.into()) / rat(k as i64)));
    ScalarField::new(&ch, format!("H{k}"), RatFn::from_poly(h))
}

/// det L = prod b_i (Casimir of pi_2).
pub fn det_l(n: usize) -> ScalarField {
    let ch = rel_chart(n);
    let nv = dim(n);
    let mut p = Poly::one(nv);
    for i in 1..=n {
        p = p.mul(&vb(nv, n, i));
    }
    ScalarField::new(&ch, "detL", RatFn::from_poly(p))
}

/// tr L^{-1} on det L != 0 (Casimir of pi_3).
pub fn trace_l_inverse(n: usize) -> ScalarField {
    let ch = rel_chart(n);
    let (l, _) = rel_lax(n);
    let det = pm_det(&l);
    let adj = pm_adjugate(&l);
    let f = RatFn::new(pm_trace(&adj), det.clone());
    ScalarField::new(&ch, "trL^-1", f)
        .with_predicates(vec![Predicate::new("det L != 0", RatFn::from_poly(det))])
}

/// Printed tables pi_1 (Eq 128), pi_2 (Eq 127), pi_3 (Eq 131); pi_4 generated
/// as L_{X_2} pi_2 (N = 3 only).
pub fn bracket(n: usize, idx: u32) -> Result<Bivector, GeomError> {
    let ch = rel_chart(n);
    let nv = dim(n);
    let mut pi = Bivector::new(&ch, format!("pi{idx}")).with_meta("relativistic", idx as i64);
    match idx {
        1 => {
            for i in 1..n {
                let a = va(nv, n, i);
                pi.set_poly(a_idx(i), b_idx(n, i), a.neg());
                pi.set_poly(a_idx(i), b_idx(n, i + 1), a.clone());
                pi.set_poly(b_idx(n, i), b_idx(n, i + 1), a.neg());
            }
        }
        2 => {
            for i in 1..n {
                let a = va(nv, n, i);
                if i + 1 < n {
                    pi.set_poly(a_idx(i), a_idx(i + 1), a.mul(&va(nv, n, i + 1)));
                }
                pi.set_poly(a_idx(i), b_idx(n, i), a.mul(&vb(nv, n, i)).neg());
                pi.set_poly(a_idx(i), b_idx(n, i + 1), a.mul(&vb(nv, n, i + 1)));
            }
        }
        3 => {
            for i in 1..n {
                let a = va(nv, n, i);
                let a1 = va(nv, n, i + 1);
                let bi = vb(nv, n, i);
                let bi1 = vb(nv, n, i + 1);
                if i + 1 < n {
                    // {a_i, a_{i+1}} = a_i^2 a_{i+1} + a_i a_{i+1}^2 + 2 a_i a_{i+1} b_{i+1}
                    let t = a
                        .pow(2)
                        .mul(&a1)
                        .add(&a.mul(&a1.pow(2)))
                        .add(&a.mul(&a1).mul(&bi1).scale(&rat(2)));
                    pi.set_poly(a_idx(i), a_idx(i + 1), t);
                }
                if i + 2 < n {
                    pi.set_poly(a_idx(i), a_idx(i + 2), a.mul(&a1).mul(&va(nv, n, i + 2)));
                }
                pi.set_poly(a_idx(i), b_idx(n, i), a.mul(&bi).mul(&a.add(&bi)).neg());
                pi.set_poly(a_idx(i), b_idx(n, i + 1), a.mul(&bi1).mul(&a.add(&bi1)));
                if i + 2 <= n {
                    let t = a.mul(&a1).mul(&vb(nv, n, i + 2));
                    if !t.is_zero() {
                        pi.set_poly(a_idx(i), b_idx(n, i + 2), t);
                    }
                }
                if i >= 2 {
                    pi.set_poly(
                        a_idx(i),
                        b_idx(n, i - 1),
                        va(nv, n, i - 1).mul(&a).mul(&vb(nv, n, i - 1)).neg(),
                    );
                }
                pi.set_poly(b_idx(n, i), b_idx(n, i + 1), a.mul(&bi).mul(&bi1));
            }
        }
        4 => {
            if n != 3 {
                return Err(GeomError::Domain(
                    "relativistic pi_4 = L_{X_2} pi_2 is available for N = 3 only".into(),
                ));
            }
            let x2 = master_field(n, 2)?;
            let mut l = lie_derivative_bivector(&x2, &bracket(n, 2)?)?;
            l.name = "pi4".into();
            l.system = "relativistic".into();
            l.ladder_index = 4;
            pi = l;
        }
        _ => {
            return Err(GeomError::Domain(format!(
                "relativistic bracket index {idx} out of range 1..=4"
            )))
        }
    }
    Ok(pi)
}

/// Master symmetries: X_1 (Eqs 129-130, any N), X_2 (Eqs 132-133, N = 3).
pub fn master_field(n: usize, idx: u32) -> Result<VectorField, GeomError> {
    let ch = rel_chart(n);
    let nv = dim(n);
    match idx {
        1 => {
            let mut comps = vec![RatFn::zero(nv); nv];
            for i in 1..n {
                let ii = i as i64;
                let a = va(nv, n, i);
                // r_i = a_i^2 + (i+2) a_i b_{i+1} + (1-i) a_i b_i
                //     + (i+2) a_i a_{i+1} + (1-i) a_{i-1} a_i
                let t = a
                    .pow(2)
                    .add(&a.mul(&vb(nv, n, i + 1)).scale(&rat(ii + 2)))
                    .add(&a.mul(&vb(nv, n, i)).scale(&rat(1 - ii)))
                    .add(&a.mul(&va(nv, n, i + 1)).scale(&rat(ii + 2)))
                    .add(&va(nv, n, i - 1).mul(&a).scale(&rat(1 - ii)));
                comps[a_idx(i)] = RatFn::from_poly(t);
            }
            for i in 1..=n {
                let ii = i as i64;
                let b = vb(nv, n, i);
                // s_i = b_i^2 + (i+1) a_i b_i + (1-i) a_{i-1} b_i
                let t = b
                    .pow(2)
                    .add(&va(nv, n, i).mul(&b).scale(&rat(ii + 1)))
                    .add(&va(nv, n, i - 1).mul(&b).scale(&rat(1 - ii)));
                comps[b_idx(n, i)] = RatFn::from_poly(t);
            }
            Ok(VectorField::new(&ch, "X1", comps))
        }
        2 => {
            if n != 3 {
                return Err(GeomError::Domain(
                    "relativistic X_2 has closed form for N = 3 only".into(),
                ));
            }
            let v = |k: usize| Poly::var(nv, k);
            let (a1, a2, b1, b2, b3) = (v(0), v(1), v(2), v(3), v(4));
            let lin = |terms: &[(i64, Poly)]| -> Poly {
                terms
                    .iter()
                    .fold(Poly::zero(nv), |acc, (c, p)| acc.add(&p.scale(&rat(*c))))
            };
            let r1 = a1.mul(&lin(&[
                (1, a1.pow(2)),
                (5, a1.mul(&b1)),
                (-1, a2.pow(2)),
                (2, a2.mul(&b1)),
                (-2, a2.mul(&b2)),
                (-1, a2.mul(&b3)),
                (4, b1.pow(2)),
                (2, b1.mul(&b2)),
                (-1, b2.pow(2)),
            ]));
            let r2 = a2.mul(&lin(&[
                (3, a1.pow(2)),
                (4, a1.mul(&a2)),
                (3, a1.mul(&b1)),
                (6, a1.mul(&b2)),
                (2, a1.mul(&b3)),
                (1, a2.pow(2)),
                (4, a2.mul(&b2)),
                (1, a2.mul(&b3)),
                (-2, b1.mul(&b2)),
                (2, b1.mul(&b3)),
                (3, b2.pow(2)),
                (2, b2.mul(&b3)),
            ]));
            let s1 = b1.mul(&lin(&[
                (-2, a1.pow(2)),
                (-2, a1.mul(&a2)),
                (-1, a1.mul(&b1)),
                (-2, a1.mul(&b2)),
                (1, b1.pow(2)),
            ]));
            let s2 = b2.mul(&lin(&[
                (3, a1.pow(2)),
                (2, a1.mul(&a2)),
                (3, a1.mul(&b1)),
                (4, a1.mul(&b2)),
                (-1, a2.pow(2)),
                (2, a2.mul(&b1)),
                (-1, a2.mul(&b3)),
                (1, b2.pow(2)),
            ]));
            let s3 = b3.mul(&lin(&[
                (2, a2.pow(2)),
                (2, a1.mul(&a2)),
                (-2, a2.mul(&b1)),
                (2, a2.mul(&b2)),
                (3, a2.mul(&b3)),
                (1, b3.pow(2)),
            ]));
            Ok(VectorField::new(
                &ch,
                "X2",
                vec![r1, r2, s1, s2, s3]
                    .into_iter()
                    .map(RatFn::from_poly)
                    .collect(),
            ))
        }
        _ => Err(GeomError::Domain(
            "closed-form relativistic master fields are X_1 and X_2".into(),
        )),
    }
}

/// Canonical relativistic Hamiltonian (Eq 120) with f(x) = sqrt(1 + g^2 e^x)
/// and the boundary f == 1. Float mode.
pub fn rel_hamiltonian<F: FloatScalar>(n: usize, x: &[F], g: f64) -> F {
    assert!(g > 0.0, "coupling constant must be positive");
    let g2 = F::from_f64(g * g);
    let f = |u: F| -> F { F::one().add(&g2.mul(&u.exp())).sqrt() };
    let mut h = F::zero();
    for j in 0..n {
        let left = if j == 0 {
            F::one()
        } else {
            f(x[j - 1].sub(&x[j]))
        };
        let right = if j + 1 == n {
            F::one()
        } else {
            f(x[j].sub(&x[j + 1]))
        };
        h = h.add(&x[n + j].exp().mul(&left).mul(&right));
    }
    h
}

/// Newtonian relativistic equations (Eq 121) as a first-order system on
/// (q, qdot), float mode, for the nonrelativistic limit check.
pub fn newtonian_rhs(n: usize, g: f64, state: &[f64]) -> Vec<f64> {
    let q = &state[..n];
    let v = &state[n..];
    let mut out = Vec::with_capacity(2 * n);
    out.extend_from_slice(v);
    let g2 = g * g;
    for j in 0..n {
        let left = if j == 0 {
            0.0
        } else {
            let e = (q[j - 1] - q[j]).exp();
            v[j - 1] * e / (1.0 + g2 * e)
        };
        let right = if j + 1 == n {
            0.0
        } else {
            let e = (q[j] - q[j + 1]).exp();
            v[j + 1] * e / (1.0 + g2 * e)
        };
        out.push(g2 * v[j] * (left - right));
    }
    out
}

/// Classical Toda in Newtonian form (Eq 122), same state layout.
pub fn classical_newtonian_rhs(n: usize, state: &[f64]) -> Vec<f64> {
    let q = &state[..n];
    let v = &state[n..];
    let mut out = Vec::with_capacity(2 * n);
    out.extend_from_slice(v);
    for j in 0..n {
        let left = if j == 0 { 0.0 } else { (q[j - 1] - q[j]).exp() };
        let right = if j + 1 == n { 0.0 } else { (q[j] - q[j + 1]).exp() };
        out.push(left - right);
    }
    out
}

/// Sup-deviation between the relativistic trajectory (shifted by qdot = c)
/// and the classical limit trajectory, over t in [0, t_end].
pub fn nonrelativistic_limit_deviation(
    n: usize,
    q0: &[f64],
    v0: &[f64],
    c: f64,
    t_end: f64,
    step: f64,
) -> f64 {
    let g = 1.0 / c;
    let mut rel_state: Vec<f64> = q0.to_vec();
    rel_state.extend(v0.iter().map(|v| v + c));
    let rel_traj = crate::laxode::rk4(
        |s| newtonian_rhs(n, g, s),
        vec![String::new(); 2 * n],
        &rel_state,
        t_end,
        step,
    )
    .expect("relativistic trajectory stays finite");
    let mut cl_state: Vec<f64> = q0.to_vec();
    cl_state.extend_from_slice(v0);
    let cl_traj = crate::laxode::rk4(
        |s| classical_newtonian_rhs(n, s),
        vec![String::new(); 2 * n],
        &cl_state,
        t_end,
        step,
    )
    .expect("classical trajectory stays finite");
    let mut dev = 0.0f64;
    for ((t, rs), cs) in rel_traj
        .times
        .iter()
        .zip(&rel_traj.states)
        .zip(&cl_traj.states)
    {
        for j in 0..n {
            // Q_j(t) = q_j(t) - c t
            dev = dev.max(((rs[j] - c * t) - cs[j]).abs());
        }
    }
    dev
}

/// JSON structure dump, mirroring the classical format.
pub fn bracket_table_json(
    n: usize,
    idx: u32,
    point: Option<&[Rat]>,
) -> Result<serde_json::Value, GeomError> {
    let pi = bracket(n, idx)?;
    let labels = &pi.chart.labels;
    if idx <= 3 {
        let entries: Vec<serde_json::Value> = pi
            .upper_entries()
            .map(|(&(i, j), f)| {
                serde_json::json!({
                    "i": labels[i], "j": labels[j], "poly": f.to_string_with(labels),
                })
            })
            .collect();
        Ok(serde_json::json!({ "system": "relativistic", "bracket": idx, "entries": entries }))
    } else {
        let pt = point.ok_or_else(|| {
            GeomError::Domain("generated brackets require a sample point for dumping".into())
        })?;
        let m = pi
            .eval(pt)
            .ok_or_else(|| GeomError::Domain("point hits a singular locus".into()))?;
        let nd = dim(n);
        let mut entries = Vec::new();
        for i in 0..nd {
            for j in (i + 1)..nd {
                if !m[i][j].is_zero() {
                    entries.push(serde_json::json!({
                        "i": labels[i], "j": labels[j], "value": m[i][j].to_string(),
                    }));
                }
            }
        }
        Ok(serde_json::json!({
            "system": "relativistic", "bracket": idx,
            "point": pt.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "entries": entries,
        }))
    }
}

/// L_{X_1} pi_3 = 0 (the hierarchy terminates), as a sampled identity.
pub fn check_hierarchy_terminates(n: usize, cfg: &SamplerConfig) -> IdentityReport {
    let x1 = master_field(n, 1).unwrap();
    let l = lie_derivative_bivector(&x1, &bracket(n, 3).unwrap()).unwrap();
    let zero = Bivector::new(&rel_chart(n), "0");
    crate::checks::check_bivectors_equal(format!("L_X1_pi3=0[N={n}]"), &l, &zero, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{
        check_casimir, check_compatibility, check_fields_equal, check_involution, check_jacobi,
        check_trivial_bracket,
    };
    use crate::exact::ratq;
    use crate::geom::vf_commutator;
    use num::Zero;

    fn cfg(seed: u64, s: usize) -> SamplerConfig {
        SamplerConfig::new(seed).with_samples(s)
    }

    #[test]
    fn lax_printed_n2() {
        // N=2, a=(1), b=(2,3): L = [[3,1],[3,3]], B = [[0,1],[0,-1]]
        let (l, b) = rel_lax(2);
        let pt = vec![rat(1), rat(2), rat(3)];
        let lv: Vec<Vec<Rat>> = l.iter().map(|r| r.iter().map(|p| p.eval(&pt)).collect()).collect();
        assert_eq!(lv, vec![vec![rat(3), rat(1)], vec![rat(3), rat(3)]]);
        let bv: Vec<Vec<Rat>> = b.iter().map(|r| r.iter().map(|p| p.eval(&pt)).collect()).collect();
        assert_eq!(bv, vec![vec![rat(0), rat(1)], vec![rat(0), rat(-1)]]);
    }

    #[test]
    fn trace_is_h1() {
        // tr L = sum(a_i + b_i) with a_N = 0
        let h1 = invariant(3, 1);
        let pt = vec![rat(2), rat(-1), rat(5), ratq(1, 2), rat(3)];
        assert_eq!(
            h1.f.eval(&pt).unwrap(),
            rat(2) + rat(-1) + rat(5) + ratq(1, 2) + rat(3)
        );
    }

    #[test]
    fn lax_equation_matches_flow() {
        // Ldot = [L, B] reproduces Eq (124), exact at sampled points
        let n = 3;
        let (l, b) = rel_lax(n);
        let comm = crate::poly::pm_commutator(&l, &b); // [L, B]
        let flow = rel_equations(n);
        let pts = cfg(3, 50).sample(dim(n), &[]);
        for pt in &pts {
            let fv = flow.eval(pt).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let mut ldot = rat(0);
                    for (k, f) in fv.iter().enumerate() {
                        let d = l[i][j].derivative(k);
                        if !d.is_zero() {
                            ldot += d.eval(pt) * f;
                        }
                    }
                    assert_eq!(ldot, comm[i][j].eval(pt), "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn flow_is_minus_pi2_grad_h1() {
        // printed system (124) = hamiltonian_vf(pi_2, -H_1); see ledger
        let n = 3;
        let flow = rel_equations(n);
        let hv = hamiltonian_vf(&bracket(n, 2).unwrap(), &invariant(n, 1)).unwrap();
        let rep = check_fields_equal("flow-vs-pi2", &flow, &hv.scale(&rat(-1)), &cfg(5, 30));
        assert!(rep.verdict);
    }

    #[test]
    fn stationary_when_a_vanishes() {
        let flow = rel_equations(3);
        let v = flow.eval(&[rat(0), rat(0), rat(1), rat(2), rat(3)]).unwrap();
        assert!(v.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn jacobi_all_brackets() {
        for n in 2..=4 {
            for idx in 1..=3 {
                let rep = check_jacobi(&bracket(n, idx).unwrap(), &cfg(idx as u64, 25));
                assert!(rep.verdict, "rel pi{idx} N={n}");
            }
        }
        let rep = check_jacobi(&bracket(3, 4).unwrap(), &cfg(9, 20));
        assert!(rep.verdict, "rel pi4");
    }

    #[test]
    fn compatibility_pairs() {
        let n = 3;
        for (i, j) in [(1u32, 2u32), (1, 3), (2, 3), (2, 4)] {
            let rep = check_compatibility(
                &bracket(n, i).unwrap(),
                &bracket(n, j).unwrap(),
                &cfg(7, 20),
            );
            assert!(rep.verdict, "rel compat pi{i},pi{j}");
        }
    }

    #[test]
    fn involution_families() {
        let n = 3;
        let fam: Vec<ScalarField> = (1..=3).map(|k| invariant(n, k)).collect();
        for idx in 1..=4u32 {
            let rep = check_involution(&bracket(n, idx).unwrap(), &fam, &cfg(13, 20));
            assert!(rep.verdict, "rel involution under pi{idx}");
        }
    }

    #[test]
    fn lenard_chains() {
        let n = 4;
        for l in 1..=3u32 {
            let lhs = hamiltonian_vf(&bracket(n, 2).unwrap(), &invariant(n, l)).unwrap();
            let rhs = hamiltonian_vf(&bracket(n, 1).unwrap(), &invariant(n, l + 1)).unwrap();
            assert!(check_fields_equal("rel-lenard2", &lhs, &rhs, &cfg(3, 20)).verdict);
            let lhs = hamiltonian_vf(&bracket(n, 3).unwrap(), &invariant(n, l)).unwrap();
            let rhs = hamiltonian_vf(&bracket(n, 2).unwrap(), &invariant(n, l + 1)).unwrap();
            assert!(check_fields_equal("rel-lenard3", &lhs, &rhs, &cfg(3, 20)).verdict);
        }
    }

    #[test]
    fn casimirs() {
        let n = 3;
        assert!(check_casimir(&bracket(n, 1).unwrap(), &invariant(n, 1), &cfg(2, 25)).verdict);
        assert!(check_casimir(&bracket(n, 2).unwrap(), &det_l(n), &cfg(2, 25)).verdict);
        assert!(check_casimir(&bracket(n, 3).unwrap(), &trace_l_inverse(n), &cfg(2, 20)).verdict);
    }

    #[test]
    fn master_actions() {
        // X1(H_m) = (m+1) H_{m+1}; X2(H_m) = (m+2) H_{m+2} (N=3)
        let n = 3;
        let x1 = master_field(n, 1).unwrap();
        for m in 1..=3u32 {
            let lhs = x1.apply(&invariant(n, m));
            let rhs = invariant(n, m + 1).f.scale(&rat(m as i64 + 1));
            let d = lhs.f.sub(&rhs);
            let pts = cfg(4, 15).sample(dim(n), &[]);
            assert!(
                pts.iter().all(|p| d.eval(p).unwrap().is_zero()),
                "X1(H{m})"
            );
        }
        let x2 = master_field(n, 2).unwrap();
        for m in 1..=2u32 {
            let lhs = x2.apply(&invariant(n, m));
            let rhs = invariant(n, m + 2).f.scale(&rat(m as i64 + 2));
            let d = lhs.f.sub(&rhs);
            let pts = cfg(4, 15).sample(dim(n), &[]);
            assert!(
                pts.iter().all(|p| d.eval(p).unwrap().is_zero()),
                "X2(H{m})"
            );
        }
        assert!(master_field(4, 2).is_err());
        assert!(bracket(4, 4).is_err());
    }

    #[test]
    fn x3_commutator_action() {
        // X3 = [X1, X2], X3(H1) = 4 H4 (N=3)
        let n = 3;
        let x3 = vf_commutator(&master_field(n, 1).unwrap(), &master_field(n, 2).unwrap()).unwrap();
        let lhs = x3.apply(&invariant(n, 1));
        let rhs = invariant(n, 4).f.scale(&rat(4));
        let d = lhs.f.sub(&rhs);
        let pts = cfg(6, 15).sample(dim(n), &[]);
        assert!(pts.iter().all(|p| d.eval(p).unwrap().is_zero()));
    }

    #[test]
    fn hierarchy_terminates_and_pi4_saturates() {
        assert!(check_hierarchy_terminates(3, &cfg(8, 20)).verdict);
        assert!(check_hierarchy_terminates(4, &cfg(8, 15)).verdict);
        // L_{X_2} pi_4 is trivial against H_1..H_3
        let n = 3;
        let x2 = master_field(n, 2).unwrap();
        let l = lie_derivative_bivector(&x2, &bracket(n, 4).unwrap()).unwrap();
        let fam: Vec<ScalarField> = (1..=3).map(|k| invariant(n, k)).collect();
        assert!(check_trivial_bracket(&l, &fam, &cfg(10, 15)).verdict);
    }

    #[test]
    fn canonical_hamiltonian_values() {
        // N=1: H = e^{p1}; N=2 at origin with g=1: 2 sqrt(2)
        let h = rel_hamiltonian(1, &[0.0, 0.7], 1.0);
        assert!((h - 0.7f64.exp()).abs() < 1e-14);
        let h2 = rel_hamiltonian(2, &[0.0, 0.0, 0.0, 0.0], 1.0);
        assert!((h2 - 2.0 * 2.0f64.sqrt()).abs() < 1e-14);
        // g -> 0 limit: sum e^{p_j}
        let h3 = rel_hamiltonian(2, &[0.3, -0.2, 0.1, 0.4], 1e-8);
        assert!((h3 - (0.1f64.exp() + 0.4f64.exp())).abs() < 1e-10);
    }

    #[test]
    fn nonrelativistic_limit_monotone() {
        let q0 = [0.3, 0.0, -0.4];
        let v0 = [0.1, -0.2, 0.05];
        let devs: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&c| nonrelativistic_limit_deviation(3, &q0, &v0, c, 2.0, 1e-3))
            .collect();
        assert!(
            devs[0] > devs[1] && devs[1] > devs[2],
            "deviations not monotone: {devs:?}"
        );
    }
}
