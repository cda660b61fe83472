//! Classical finite nonperiodic Toda lattice (A-chain).
//!
//! Flaschka chart (a_1..a_{N-1}, b_1..b_N) in exact mode: Lax pair,
//! invariants H_k = tr L^k / k, brackets pi_1..pi_3 as printed tables and
//! pi_4, pi_5 generated from the reduced conformal-symmetry ladder, master
//! symmetries, Lenard/shift/symmetry checks. The canonical (q,p) side
//! (recursion operator, J-ladder) lives in `floatcanon`; this module adds
//! the exact reduction of that ladder and the float cross-checks.

use crate::checks::{
    check_bivectors_equal, sample_points, IdentityReport, SamplerConfig,
};
use crate::dual::Dual;
use crate::exact::{abs, rat, ratq, Rat};
use crate::floatcanon;
use crate::geom::{
    hamiltonian_vf, lie_derivative_bivector, vf_commutator, Bivector, Chart, ChartRef,
    GeomError, Predicate, ScalarField, VectorField,
};
use crate::laxode::{sym_eigen, Mat};
use crate::poly::{pm_adjugate, pm_det, pm_mul, pm_trace, Poly, PolyMat, RatFn};
use crate::scalar::{FloatScalar, Scalar};

/// Flaschka chart for N particles: coordinates a_1..a_{N-1}, b_1..b_N.
pub fn flaschka_chart(n: usize) -> ChartRef {
    assert!(n >= 2);
    let mut labels = Vec::with_capacity(2 * n - 1);
    for i in 1..n {
        labels.push(format!("a{i}"));
    }
    for i in 1..=n {
        labels.push(format!("b{i}"));
    }
    Chart::new(format!("flaschka-{n}"), labels)
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

fn va(nv: usize, n: usize, i: usize) -> Poly {
    let _ = n;
    Poly::var(nv, a_idx(i))
}

fn vb(nv: usize, n: usize, i: usize) -> Poly {
    Poly::var(nv, b_idx(n, i))
}

/// Tridiagonal Jacobi matrix L and skew companion B.
pub fn lax_pair(n: usize) -> (PolyMat, PolyMat) {
    let nv = dim(n);
    let mut l = vec![vec![Poly::zero(nv); n]; n];
    let mut b = vec![vec![Poly::zero(nv); n]; n];
    for i in 1..=n {
        l[i - 1][i - 1] = vb(nv, n, i);
    }
    for i in 1..n {
        let a = va(nv, n, i);
        l[i - 1][i] = a.clone();
        l[i][i - 1] = a.clone();
        b[i - 1][i] = a.clone();
        b[i][i - 1] = a.neg();
    }
    (l, b)
}

/// H_k = (1/k) tr L^k as an exact polynomial scalar field.
pub fn invariant(n: usize, k: u32) -> ScalarField {
    assert!(k >= 1);
    let ch = flaschka_chart(n);
    let (l, _) = lax_pair(n);
    let mut p = l.clone();
    for _ in 1..k {
        p = pm_mul(&p, &l);
    }
    let h = pm_trace(&p).scale(&(Rat::from_integer(1.into()) / rat(k as i64)));
    ScalarField::new(&ch, format!("H{k}"), RatFn::from_poly(h))
}

/// det L (Casimir of pi_2).
pub fn det_l(n: usize) -> ScalarField {
    let ch = flaschka_chart(n);
    let (l, _) = lax_pair(n);
    ScalarField::new(&ch, "detL", RatFn::from_poly(pm_det(&l)))
}

/// tr L^{2-m} for m >= 3, defined on det L != 0 (Casimir of pi_m).
pub fn trace_l_negative(n: usize, m: u32) -> ScalarField {
    assert!(m >= 3);
    let k = m - 2; // tr L^{-k}
    let ch = flaschka_chart(n);
    let (l, _) = lax_pair(n);
    let det = pm_det(&l);
    let adj = pm_adjugate(&l);
    let mut p = adj.clone();
    for _ in 1..k {
        p = pm_mul(&p, &adj);
    }
    let f = RatFn::new(pm_trace(&p), det.clone().pow(k));
    ScalarField::new(&ch, format!("trL^{}", 2i64 - m as i64), f).with_predicates(vec![
        Predicate::new("det L != 0", RatFn::from_poly(det)),
    ])
}

/// Printed tables pi_1 (Eq 67), pi_2 (Eq 70), pi_3 (Eq 74); pi_4, pi_5
/// generated from the reduced ladder.
pub fn bracket(n: usize, idx: u32) -> Bivector {
    assert!(idx >= 1, "bracket index starts at 1");
    let ch = flaschka_chart(n);
    let nv = dim(n);
    let mut pi = Bivector::new(&ch, format!("pi{idx}")).with_meta("classical", idx as i64);
    match idx {
        1 => {
            for i in 1..n {
                let a = va(nv, n, i);
                pi.set_poly(a_idx(i), b_idx(n, i), a.neg());
                pi.set_poly(a_idx(i), b_idx(n, i + 1), a);
            }
        }
        2 => {
            for i in 1..n.saturating_sub(1) {
                pi.set_poly(
                    a_idx(i),
                    a_idx(i + 1),
                    va(nv, n, i).mul(&va(nv, n, i + 1)).scale(&ratq(1, 2)),
                );
            }
            for i in 1..n {
                let a = va(nv, n, i);
                pi.set_poly(a_idx(i), b_idx(n, i), a.mul(&vb(nv, n, i)).neg());
                pi.set_poly(a_idx(i), b_idx(n, i + 1), a.mul(&vb(nv, n, i + 1)));
                pi.set_poly(b_idx(n, i), b_idx(n, i + 1), a.pow(2).scale(&rat(2)));
            }
        }
        3 => {
            for i in 1..n {
                let a = va(nv, n, i);
                let bi = vb(nv, n, i);
                let bi1 = vb(nv, n, i + 1);
                if i + 1 < n {
                    pi.set_poly(
                        a_idx(i),
                        a_idx(i + 1),
                        a.mul(&va(nv, n, i + 1)).mul(&bi1),
                    );
                }
                pi.set_poly(a_idx(i), b_idx(n, i), a.mul(&bi.pow(2)).add(&a.pow(3)).neg());
                pi.set_poly(a_idx(i), b_idx(n, i + 1), a.mul(&bi1.pow(2)).add(&a.pow(3)));
                if i + 2 <= n {
                    if i + 1 < n {
                        pi.set_poly(a_idx(i), b_idx(n, i + 2), a.mul(&va(nv, n, i + 1).pow(2)));
                    }
                }
                if i >= 2 {
                    pi.set_poly(
                        a_idx(i),
                        b_idx(n, i - 1),
                        va(nv, n, i - 1).pow(2).mul(&a).neg(),
                    );
                }
                pi.set_poly(
                    b_idx(n, i),
                    b_idx(n, i + 1),
                    a.pow(2).scale(&rat(2)).mul(&bi.add(&bi1)),
                );
            }
        }
        4 => {
            // pi_4 = -1/2 L_{X~2} pi_2 (Theorem 6 iv with the exact reduced ladder)
            let x2 = master_field(n, 2);
            let l = lie_derivative_bivector(&x2, &bracket(n, 2)).expect("same chart");
            pi = l.scale(&ratq(-1, 2));
            pi.name = "pi4".into();
            pi.system = "classical".into();
            pi.ladder_index = 4;
        }
        5 => {
            // pi_5 = -L_{X~2} pi_3; cross-checked against L_{X~1} pi_4 in tests
            let x2 = master_field(n, 2);
            let l = lie_derivative_bivector(&x2, &bracket(n, 3)).expect("same chart");
            pi = l.scale(&rat(-1));
            pi.name = "pi5".into();
            pi.system = "classical".into();
            pi.ladder_index = 5;
        }
        _ => panic!("classical bracket generated only up to pi_5"),
    }
    pi
}

/// Closed-form master symmetries X_{-1}, X_0, X_1; reduced-ladder fields
/// (normalized by 2^n) for n >= 2.
pub fn master_field(n: usize, idx: i64) -> VectorField {
    let ch = flaschka_chart(n);
    let nv = dim(n);
    match idx {
        -1 => {
            let mut comps = vec![RatFn::zero(nv); nv];
            for i in 1..=n {
                comps[b_idx(n, i)] = RatFn::from_poly(Poly::one(nv));
            }
            VectorField::new(&ch, "X-1", comps)
        }
        0 => {
            let comps = (0..nv)
                .map(|k| RatFn::from_poly(Poly::var(nv, k)))
                .collect();
            VectorField::new(&ch, "X0", comps)
        }
        1 => {
            // a_i' = -i a_i b_i + (i+2) a_i b_{i+1}
            // b_i' = (2i+3) a_i^2 + (1-2i) a_{i-1}^2 + b_i^2
            let mut comps = vec![RatFn::zero(nv); nv];
            for i in 1..n {
                let a = va(nv, n, i);
                let t = a
                    .mul(&vb(nv, n, i))
                    .scale(&rat(-(i as i64)))
                    .add(&a.mul(&vb(nv, n, i + 1)).scale(&rat(i as i64 + 2)));
                comps[a_idx(i)] = RatFn::from_poly(t);
            }
            for i in 1..=n {
                let mut t = vb(nv, n, i).pow(2);
                if i < n {
                    t = t.add(&va(nv, n, i).pow(2).scale(&rat(2 * i as i64 + 3)));
                }
                if i >= 2 {
                    t = t.add(&va(nv, n, i - 1).pow(2).scale(&rat(1 - 2 * i as i64)));
                }
                comps[b_idx(n, i)] = RatFn::from_poly(t);
            }
            VectorField::new(&ch, "X1", comps)
        }
        m if m >= 2 => {
            let raw = reduced_z_raw(n, m as u32);
            let scale = Rat::from_integer(1.into()) / rat(1i64 << m);
            let mut v = raw.scale(&scale);
            v.name = format!("X{m}");
            v
        }
        _ => panic!("master field index must be >= -1"),
    }
}

/// Exact pushforward of Z_i = R^i Z_0 through the Flaschka map.
///
/// Canonical-chart objects only involve p_i and E_i = e^{q_i - q_{i+1}}, so
/// the ladder is computed in the polynomial ring Q[p_1..p_N, E_1..E_{N-1}]
/// and pushed by the substitution p_i -> -2 b_i, E_i -> 4 a_i^2; the a-row of
/// DF contributes a_i (Z^{q_i} - Z^{q_{i+1}}) / 2. Fiber-independence is
/// structural here and cross-checked against the float pushforward in
/// `check_reduction`.
pub fn reduced_z_raw(n: usize, i: u32) -> VectorField {
    let ch = flaschka_chart(n);
    let nv = dim(n); // also the intermediate ring size: p_1..p_N, E_1..E_{N-1}
    let p = |k: usize| Poly::var(nv, k - 1); // p_k, 1-based
    let e = |k: usize| Poly::var(nv, n + k - 1); // E_k, 1-based
    let m = 2 * n;
    // canonical matrices over the intermediate ring, coordinates (q_1..q_n, p_1..p_n)
    let mut j1 = vec![vec![Poly::zero(nv); m]; m];
    for r in 0..n {
        for c in (r + 1)..n {
            j1[r][c] = Poly::one(nv);
            j1[c][r] = Poly::int(nv, -1);
        }
    }
    for r in 0..n {
        j1[n + r][r] = p(r + 1);
        j1[r][n + r] = p(r + 1).neg();
    }
    for r in 0..(n - 1) {
        j1[n + r][n + r + 1] = e(r + 1);
        j1[n + r + 1][n + r] = e(r + 1).neg();
    }
    let mut z: Vec<Poly> = Vec::with_capacity(m);
    for r in 1..=n {
        z.push(Poly::int(nv, n as i64 + 1 - 2 * r as i64));
    }
    for r in 1..=n {
        z.push(p(r));
    }
    for _ in 0..i {
        // w = J0^{-1} z : w_q = -z_p, w_p = z_q
        let mut w = vec![Poly::zero(nv); m];
        for r in 0..n {
            w[r] = z[n + r].neg();
            w[n + r] = z[r].clone();
        }
        // z = J1 w
        let mut nz = vec![Poly::zero(nv); m];
        for (r, nzr) in nz.iter_mut().enumerate() {
            let mut acc = Poly::zero(nv);
            for c in 0..m {
                if j1[r][c].is_zero() || w[c].is_zero() {
                    continue;
                }
                acc = acc.add(&j1[r][c].mul(&w[c]));
            }
            *nzr = acc;
        }
        z = nz;
    }
    // substitution images: p_k -> -2 b_k, E_k -> 4 a_k^2 (in Flaschka vars)
    let mut images = Vec::with_capacity(nv);
    for k in 1..=n {
        images.push(vb(nv, n, k).scale(&rat(-2)));
    }
    for k in 1..n {
        images.push(va(nv, n, k).pow(2).scale(&rat(4)));
    }
    let subst = |q: &Poly| q.substitute(&images);
    let mut comps = vec![RatFn::zero(nv); nv];
    for k in 1..n {
        let diff = z[k - 1].sub(&z[k]);
        let t = subst(&diff).mul(&va(nv, n, k)).scale(&ratq(1, 2));
        comps[a_idx(k)] = RatFn::from_poly(t);
    }
    for k in 1..=n {
        comps[b_idx(n, k)] = RatFn::from_poly(subst(&z[n + k - 1]).scale(&ratq(-1, 2)));
    }
    VectorField::new(&ch, format!("Zred{i}"), comps)
}

// ---------------- canonical-side float helpers ----------------

/// Flaschka map a_i = e^{(q_i - q_{i+1})/2}/2, b_i = -p_i/2, generic over
/// float scalars so it can be differentiated by dual numbers.
pub fn flaschka_map<F: FloatScalar>(n: usize, x: &[F]) -> Vec<F> {
    let half = F::from_f64(0.5);
    let mut out = Vec::with_capacity(dim(n));
    for i in 0..(n - 1) {
        let u = x[i].sub(&x[i + 1]).mul(&half);
        out.push(u.exp().mul(&half));
    }
    for i in 0..n {
        out.push(x[n + i].mul(&half).neg());
    }
    out
}

/// Pushforward of the canonical ladder member J_j under the Flaschka map,
/// compared against `scale * target` at sampled float points.
pub fn check_flaschka_pushforward(
    n: usize,
    j: u32,
    target: &Bivector,
    scale: f64,
    cfg: &SamplerConfig,
    tol: f64,
) -> IdentityReport {
    let points = cfg.sample_f64(2 * n);
    let nd = dim(n);
    let residuals: Vec<f64> = points
        .iter()
        .map(|pt| {
            let seeds = Dual::seed_point(pt);
            let fa = flaschka_map(n, &seeds);
            let jj = floatcanon::j_ladder::<f64>(j, n, pt);
            let img: Vec<f64> = fa.iter().map(|d| d.val).collect();
            let tv = target
                .eval(&img)
                .expect("polynomial target bracket evaluates everywhere");
            let mut worst = 0.0f64;
            for a in 0..nd {
                for b in (a + 1)..nd {
                    let mut push = 0.0;
                    for i in 0..2 * n {
                        for k in 0..2 * n {
                            if jj[i][k] == 0.0 {
                                continue;
                            }
                            push += fa[a].partial(i) * jj[i][k] * fa[b].partial(k);
                        }
                    }
                    worst = worst.max((push - scale * tv[a][b]).abs());
                }
            }
            worst
        })
        .collect();
    IdentityReport::from_float(
        format!("flaschka-pushforward[J{j}->{}]", target.name),
        cfg,
        &points,
        residuals,
        tol,
    )
}

/// Reduced ladder field vs float pushforward of R^i Z0, including a
/// fiber-independence probe (two preimages of the same Flaschka point).
pub fn check_reduction(n: usize, i: u32, cfg: &SamplerConfig, tol: f64) -> IdentityReport {
    let reduced = reduced_z_raw(n, i);
    let points = cfg.sample_f64(2 * n);
    let residuals: Vec<f64> = points
        .iter()
        .map(|pt| {
            let mut worst = 0.0f64;
            for shift in [0.0, 0.7] {
                // translate the fiber coordinate: q -> q + c leaves F(x) fixed
                let mut xs = pt.clone();
                for q in xs.iter_mut().take(n) {
                    *q += shift;
                }
                let seeds = Dual::seed_point(&xs);
                let fa = flaschka_map(n, &seeds);
                let z = floatcanon::z_ladder::<f64>(i, n, &xs);
                let img: Vec<f64> = fa.iter().map(|d| d.val).collect();
                let red = reduced
                    .eval(&img)
                    .expect("reduced ladder field is polynomial");
                for (a, ra) in red.iter().enumerate() {
                    let mut push = 0.0;
                    for k in 0..2 * n {
                        push += fa[a].partial(k) * z[k];
                    }
                    worst = worst.max((push - ra).abs());
                }
            }
            worst
        })
        .collect();
    IdentityReport::from_float(format!("z-reduction[{i}]"), cfg, &points, residuals, tol)
}

// ---------------- spec'd check operations ----------------

/// Lenard relation pi_n grad H_l = pi_{n-1} grad H_{l+1}, exact.
pub fn lenard_check(
    n: usize,
    bracket_idx: u32,
    l: u32,
    cfg: &SamplerConfig,
) -> Result<IdentityReport, GeomError> {
    if bracket_idx < 2 {
        return Err(GeomError::Domain(
            "lenard_check requires bracket index >= 2 (pi_0 is undefined)".into(),
        ));
    }
    let lhs = hamiltonian_vf(&bracket(n, bracket_idx), &invariant(n, l))?;
    let rhs = hamiltonian_vf(&bracket(n, bracket_idx - 1), &invariant(n, l + 1))?;
    Ok(crate::checks::check_fields_equal(
        format!("lenard[pi{bracket_idx} H{l} = pi{} H{}]", bracket_idx - 1, l + 1),
        &lhs,
        &rhs,
        cfg,
    ))
}

/// Gradient of a simple eigenvalue of L at a Flaschka point:
/// (2 v_1 v_2, ..., 2 v_{N-1} v_N, v_1^2, ..., v_N^2).
pub fn eigen_gradient(n: usize, coords: &[f64], which: usize) -> Result<Vec<f64>, GeomError> {
    let (l, _) = lax_pair(n);
    let lm: Mat = l
        .iter()
        .map(|row| row.iter().map(|p| p.eval(coords)).collect())
        .collect();
    let (vals, vecs) = sym_eigen(&lm);
    if which >= n {
        return Err(GeomError::Domain(format!("eigen index {which} out of range")));
    }
    let gap = (0..n)
        .filter(|&k| k != which)
        .map(|k| (vals[k] - vals[which]).abs())
        .fold(f64::INFINITY, f64::min);
    if gap <= 1e-8 {
        return Err(GeomError::Domain(format!(
            "near-degenerate spectrum: gap {gap:.3e} <= 1e-8"
        )));
    }
    let v: Vec<f64> = (0..n).map(|r| vecs[r][which]).collect();
    let mut grad = Vec::with_capacity(dim(n));
    for i in 0..(n - 1) {
        grad.push(2.0 * v[i] * v[i + 1]);
    }
    for vi in &v {
        grad.push(vi * vi);
    }
    Ok(grad)
}

/// Prop 4 / Eq (96): pi_n(a, b+1) = sum_j C(n-1, j) pi_{n-j}(a, b), exact.
pub fn shift_isomorphism_check(n: usize, idx: u32, cfg: &SamplerConfig) -> IdentityReport {
    let nv = dim(n);
    let mut offsets = vec![rat(0); nv];
    for i in 1..=n {
        offsets[b_idx(n, i)] = rat(1);
    }
    let shifted = bracket(n, idx).shifted(&offsets);
    let mut sum = Bivector::new(&flaschka_chart(n), "binom-sum");
    let mut coef = rat(1);
    for j in 0..idx {
        sum = sum.add(&bracket(n, idx - j).scale(&coef));
        // C(idx-1, j+1)
        coef = coef * rat((idx - 1 - j) as i64) / rat((j + 1) as i64);
    }
    check_bivectors_equal(
        format!("shift-isomorphism[pi{idx}]"),
        &shifted,
        &sum,
        cfg,
    )
}

/// Theorem 7 residual dY/dt + [chi_2, Y] for Y = X_n + t chi_{n+2},
/// evaluated exactly at sampled (x, t).
pub fn symmetry_residual(n: usize, idx: i64, cfg: &SamplerConfig) -> IdentityReport {
    let x_n = master_field(n, idx);
    symmetry_residual_for(n, &x_n, idx, cfg)
}

/// Same residual with an explicit candidate X_n (negative controls flip a sign).
pub fn symmetry_residual_for(
    n: usize,
    x_n: &VectorField,
    idx: i64,
    cfg: &SamplerConfig,
) -> IdentityReport {
    let pi1 = bracket(n, 1);
    let chi2 = hamiltonian_vf(&pi1, &invariant(n, 2)).unwrap();
    let chi_n2 = if idx + 2 >= 1 {
        hamiltonian_vf(&pi1, &invariant(n, (idx + 2) as u32)).unwrap()
    } else {
        VectorField::zero(&pi1.chart, "chi0")
    };
    // residual(x, t) = c1(x) + t c2(x) with c1 = chi_{n+2} + [chi2, X_n],
    // c2 = [chi2, chi_{n+2}] (vanishes when the flows commute)
    let c1 = {
        let comm = vf_commutator(&chi2, x_n).unwrap();
        VectorField::new(
            &pi1.chart,
            "c1",
            comm.comps
                .iter()
                .zip(&chi_n2.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    };
    let c2 = vf_commutator(&chi2, &chi_n2).unwrap();
    let points = sample_points(&pi1.chart, &[], cfg);
    // t samples drawn from the same deterministic stream shape
    let tcfg = SamplerConfig { seed: cfg.seed ^ 0x5eed, ..cfg.clone() };
    let tvals = tcfg.sample(1, &[]);
    let mut residuals = Vec::with_capacity(points.len());
    let mut pts = Vec::with_capacity(points.len());
    for (p, tv) in points.iter().zip(tvals.iter().cycle()) {
        let t = &tv[0];
        let v1 = c1.eval(&p.coords).unwrap();
        let v2 = c2.eval(&p.coords).unwrap();
        let mut worst = rat(0);
        for (a, b) in v1.iter().zip(&v2) {
            worst = crate::exact::max_rat(worst, abs(&(a + &(t * b))));
        }
        residuals.push(worst);
        pts.push(p.coords.clone());
    }
    IdentityReport::from_exact(format!("symmetry[Y{idx}]"), cfg, &pts, residuals)
}

/// d/dt L = [B, L] along the Flaschka flow (Eq 59), as a symbolic identity
/// evaluated at sampled points.
pub fn check_lax_consistency(n: usize, cfg: &SamplerConfig) -> IdentityReport {
    let (l, b) = lax_pair(n);
    let flow = hamiltonian_vf(&bracket(n, 1), &invariant(n, 2)).unwrap();
    let nv = dim(n);
    // dL/dt entry-wise: sum_k dL/dx_k * flow^k
    let comm = crate::poly::pm_commutator(&b, &l);
    let points = cfg.sample(nv, &[]);
    let residuals: Vec<Rat> = points
        .iter()
        .map(|pt| {
            let fv: Vec<Rat> = flow.eval(pt).unwrap();
            let mut worst = rat(0);
            for i in 0..n {
                for j in 0..n {
                    let mut ldot = rat(0);
                    for (k, f) in fv.iter().enumerate() {
                        let d = l[i][j].derivative(k);
                        if !d.is_zero() {
                            ldot += d.eval(pt) * f;
                        }
                    }
                    let c = comm[i][j].eval(pt);
                    worst = crate::exact::max_rat(worst, abs(&(ldot - c)));
                }
            }
            worst
        })
        .collect();
    IdentityReport::from_exact(format!("lax[Ldot=[B,L], N={n}]"), cfg, &points, residuals)
}

/// JSON structure dump: closed-form polynomial table for idx <= 3, numeric
/// sample table (at `point`) for generated brackets.
pub fn bracket_table_json(
    n: usize,
    idx: u32,
    point: Option<&[Rat]>,
) -> Result<serde_json::Value, GeomError> {
    let pi = bracket(n, idx);
    let labels = &pi.chart.labels;
    if idx <= 3 {
        let entries: Vec<serde_json::Value> = pi
            .upper_entries()
            .map(|(&(i, j), f)| {
                serde_json::json!({
                    "i": labels[i],
                    "j": labels[j],
                    "poly": f.to_string_with(labels),
                })
            })
            .collect();
        Ok(serde_json::json!({ "system": "classical", "bracket": idx, "entries": entries }))
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
            "system": "classical",
            "bracket": idx,
            "point": pt.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "entries": entries,
        }))
    }
}

/// Flaschka-chart flow field (Eq 59) = hamiltonian_vf(pi_1, H_2).
pub fn flow_field(n: usize) -> VectorField {
    hamiltonian_vf(&bracket(n, 1), &invariant(n, 2)).unwrap()
}

/// Canonical Toda Hamiltonian H(q, p), float mode.
pub fn canonical_hamiltonian(n: usize, x: &[f64]) -> f64 {
    floatcanon::h1(n, x)
}

/// The deliberately broken bivector from the negative-control examples.
pub fn broken_bivector() -> Bivector {
    let ch = flaschka_chart(2);
    let mut t = Bivector::new(&ch, "tau-broken");
    t.set_poly(0, 1, Poly::var(3, 1)); // {a1,b1} = b1
    t.set_poly(0, 2, Poly::var(3, 0)); // {a1,b2} = a1
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{check_casimir, check_jacobi};
    use crate::geom::{eval_bivector, poisson_bracket, PhasePoint};

    fn cfg(seed: u64, s: usize) -> SamplerConfig {
        SamplerConfig::new(seed).with_samples(s)
    }

    #[test]
    fn pi1_matrix_matches_printed_example() {
        // N=2, (a1,b1,b2) = (1,2,3): only {a1,b1} = -1, {a1,b2} = 1
        let ch = flaschka_chart(2);
        let x = PhasePoint::new(&ch, vec![rat(1), rat(2), rat(3)]).unwrap();
        let m = eval_bivector(&bracket(2, 1), &x).unwrap();
        assert_eq!(m[0][1], rat(-1));
        assert_eq!(m[0][2], rat(1));
        assert_eq!(m[1][2], rat(0));
    }

    #[test]
    fn pi1_vanishes_at_a_zero() {
        let ch = flaschka_chart(2);
        let x = PhasePoint::new(&ch, vec![rat(0), rat(2), rat(3)]).unwrap();
        let m = eval_bivector(&bracket(2, 1), &x).unwrap();
        assert!(m.iter().flatten().all(|v| v.is_zero()));
    }

    #[test]
    fn pi2_matrix_matches_printed_example() {
        let ch = flaschka_chart(2);
        let x = PhasePoint::new(&ch, vec![rat(1), rat(2), rat(3)]).unwrap();
        let m = eval_bivector(&bracket(2, 2), &x).unwrap();
        assert_eq!(m[0][1], rat(-2)); // {a1,b1} = -a1 b1
        assert_eq!(m[0][2], rat(3)); // {a1,b2} = a1 b2
        assert_eq!(m[1][2], rat(2)); // {b1,b2} = 2 a1^2
    }

    #[test]
    fn pi2_n3_printed_point() {
        // (a1,a2,b1,b2,b3) = 1: {a1,a2} = 1/2, {a1,b1} = -1, {b1,b2} = 2
        let ch = flaschka_chart(3);
        let x = PhasePoint::new(&ch, vec![rat(1); 5]).unwrap();
        let m = eval_bivector(&bracket(3, 2), &x).unwrap();
        assert_eq!(m[0][1], ratq(1, 2));
        assert_eq!(m[0][2], rat(-1));
        assert_eq!(m[2][3], rat(2));
    }

    #[test]
    fn pi3_cubic_bracket_value() {
        // {a1, b1}_pi3 at (1,1,1) = -a1 b1^2 - a1^3 = -2
        let ch = flaschka_chart(2);
        let f = ScalarField::new(&ch, "a1", RatFn::from_poly(Poly::var(3, 0)));
        let g = ScalarField::new(&ch, "b1", RatFn::from_poly(Poly::var(3, 1)));
        let x = PhasePoint::new(&ch, vec![rat(1), rat(1), rat(1)]).unwrap();
        let v = poisson_bracket(&bracket(2, 3), &f, &g, &x).unwrap();
        assert_eq!(v, rat(-2));
    }

    #[test]
    fn pi3_vanishes_at_a_zero() {
        let ch = flaschka_chart(3);
        let x = PhasePoint::new(&ch, vec![rat(0), rat(0), rat(2), rat(5), rat(-1)]).unwrap();
        let m = eval_bivector(&bracket(3, 3), &x).unwrap();
        assert!(m.iter().flatten().all(|v| v.is_zero()));
    }

    #[test]
    fn flow_is_flaschka_equations() {
        // a_i' = a_i(b_{i+1} - b_i), b_i' = 2(a_i^2 - a_{i-1}^2)
        let f = flow_field(3);
        let pt = vec![rat(2), rat(-1), rat(1), rat(3), ratq(1, 2)];
        let v = f.eval(&pt).unwrap();
        assert_eq!(v[0], &pt[0] * (&pt[3] - &pt[2]));
        assert_eq!(v[1], &pt[1] * (&pt[4] - &pt[3]));
        assert_eq!(v[2], rat(2) * &pt[0] * &pt[0]);
        assert_eq!(v[3], rat(2) * (&pt[1] * &pt[1] - &pt[0] * &pt[0]));
        assert_eq!(v[4], rat(-2) * &pt[1] * &pt[1]);
    }

    #[test]
    fn h1_is_casimir_of_pi1() {
        let vf = hamiltonian_vf(&bracket(4, 1), &invariant(4, 1)).unwrap();
        assert!(vf.comps.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn h2_value_example() {
        // H2(a=(1), b=(0,0)) = 1
        let h2 = invariant(2, 2);
        let ch = flaschka_chart(2);
        let x = PhasePoint::new(&ch, vec![rat(1), rat(0), rat(0)]).unwrap();
        assert_eq!(h2.eval(&x).unwrap(), rat(1));
    }

    #[test]
    fn hk_of_diagonal_l() {
        // a = 0: H_k = (1/k) sum b_i^k
        let h3 = invariant(3, 3);
        let ch = flaschka_chart(3);
        let x = PhasePoint::new(&ch, vec![rat(0), rat(0), rat(2), rat(-1), rat(3)]).unwrap();
        assert_eq!(h3.eval(&x).unwrap(), ratq(8 - 1 + 27, 3));
    }

    #[test]
    fn lax_pair_printed_n2() {
        let (l, b) = lax_pair(2);
        let pt = vec![rat(1), rat(2), rat(3)];
        assert_eq!(l[0][0].eval(&pt), rat(2));
        assert_eq!(l[0][1].eval(&pt), rat(1));
        assert_eq!(l[1][1].eval(&pt), rat(3));
        assert_eq!(b[0][1].eval(&pt), rat(1));
        assert_eq!(b[1][0].eval(&pt), rat(-1));
    }

    #[test]
    fn lax_consistency_exact() {
        let rep = check_lax_consistency(3, &cfg(21, 50));
        assert!(rep.verdict);
    }

    #[test]
    fn jacobi_pi123() {
        for idx in 1..=3 {
            let rep = check_jacobi(&bracket(3, idx), &cfg(7 + idx as u64, 30));
            assert!(rep.verdict, "pi{idx} failed Jacobi");
        }
    }

    #[test]
    fn generated_pi4_pi5_jacobi_and_routes() {
        let p4 = bracket(3, 4);
        let p5 = bracket(3, 5);
        assert!(check_jacobi(&p4, &cfg(3, 20)).verdict);
        assert!(check_jacobi(&p5, &cfg(4, 15)).verdict);
        // route agreement: pi5 == L_{X~1} pi4 with X~1 = Zred1 / 2
        let x1t = reduced_z_raw(3, 1).scale(&ratq(1, 2));
        let alt = lie_derivative_bivector(&x1t, &p4).unwrap();
        let rep = check_bivectors_equal("pi5-routes", &alt, &p5, &cfg(5, 20));
        assert!(rep.verdict);
    }

    #[test]
    fn lenard_chain() {
        for (bidx, l) in [(2, 1), (3, 2), (4, 1), (5, 2)] {
            let rep = lenard_check(4, bidx, l, &cfg(11, 25)).unwrap();
            assert!(rep.verdict, "lenard pi{bidx} H{l}");
        }
        assert!(lenard_check(4, 1, 1, &cfg(1, 5)).is_err());
    }

    #[test]
    fn casimirs() {
        assert!(check_casimir(&bracket(3, 2), &det_l(3), &cfg(2, 25)).verdict);
        for m in 3..=5 {
            let rep = check_casimir(&bracket(3, m), &trace_l_negative(3, m), &cfg(2, 15));
            assert!(rep.verdict, "trL^{} not a Casimir of pi{}", 2 - m as i64, m);
        }
    }

    #[test]
    fn master_actions_exact() {
        // X_n(H_m) = (n+m) H_{n+m}
        let n = 4;
        for (idx, ms) in [(-1i64, vec![2u32, 3, 4]), (0, vec![1, 2, 3, 4]), (1, vec![1, 2, 3]), (2, vec![1, 2])] {
            let x = master_field(n, idx);
            for m in ms {
                let lhs = x.apply(&invariant(n, m));
                let target = invariant(n, (idx + m as i64) as u32)
                    .f
                    .scale(&rat(idx + m as i64));
                let d = lhs.f.sub(&target);
                assert!(
                    d.is_zero() || {
                        let pts = cfg(9, 10).sample(dim(n), &[]);
                        pts.iter().all(|p| d.eval(p).unwrap().is_zero())
                    },
                    "X{idx}(H{m}) != ({}) H{}",
                    idx + m as i64,
                    idx + m as i64
                );
            }
        }
    }

    #[test]
    fn x1_printed_component() {
        // N=3, all-ones point: a1' = -1*1*1 + 3*1*1 = 2
        let x1 = master_field(3, 1);
        let v = x1.eval(&vec![rat(1); 5]).unwrap();
        assert_eq!(v[0], rat(2));
    }

    #[test]
    fn commutator_ladder_ends() {
        let x0 = master_field(3, 0);
        let xm1 = master_field(3, -1);
        let c = vf_commutator(&x0, &xm1).unwrap();
        for (a, b) in c.comps.iter().zip(&xm1.comps) {
            assert!(a.add(b).is_zero()); // [X0, X-1] = -X-1
        }
    }

    #[test]
    fn theorem6_v_commutators() {
        // [X1, chi_l] = (l-1) chi_{l+1}
        let n = 4;
        let x1 = master_field(n, 1);
        let pi1 = bracket(n, 1);
        for l in 2..=3u32 {
            let chi_l = hamiltonian_vf(&pi1, &invariant(n, l)).unwrap();
            let chi_l1 = hamiltonian_vf(&pi1, &invariant(n, l + 1)).unwrap();
            let c = vf_commutator(&x1, &chi_l).unwrap();
            let rep = crate::checks::check_fields_equal(
                "thm6v",
                &c,
                &chi_l1.scale(&rat(l as i64 - 1)),
                &cfg(17, 20),
            );
            assert!(rep.verdict, "[X1, chi{l}] != ({}) chi{}", l - 1, l + 1);
        }
    }

    #[test]
    fn shift_isomorphism() {
        for idx in 1..=3u32 {
            let rep = shift_isomorphism_check(3, idx, &cfg(23, 20));
            assert!(rep.verdict, "shift pi{idx}");
        }
    }

    #[test]
    fn symmetry_residuals_zero_and_negative_control() {
        for idx in [-1i64, 0, 1] {
            let rep = symmetry_residual(3, idx, &cfg(31, 20));
            assert!(rep.verdict, "Y{idx} residual nonzero");
        }
        // sign-flipped X1 fails
        let mut bad = master_field(3, 1);
        bad.comps[0] = bad.comps[0].neg();
        let rep = symmetry_residual_for(3, &bad, 1, &cfg(31, 20));
        assert!(!rep.verdict);
    }

    #[test]
    fn eigen_gradient_analytic_2x2() {
        // N=2, a=1/2, b=0: lambda = 1/2 has v = (1,1)/sqrt(2), grad = (1, 1/2, 1/2)
        let g = eigen_gradient(2, &[0.5, 0.0, 0.0], 1).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[1] - 0.5).abs() < 1e-12);
        assert!((g[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eigen_gradient_generalized_eigenproblem() {
        // M U = lambda N U with M = pi2(x), N = pi1(x); and
        // pi_n grad lambda = lambda pi_{n-1} grad lambda for n = 2, 3.
        let n = 3;
        let coords = [0.4f64, 0.7, -0.3, 0.2, 0.9];
        let rc: Vec<Rat> = coords
            .iter()
            .map(|v| {
                // exact binary fractions so float and exact evaluation agree
                crate::exact::ratq((v * 10.0).round() as i64, 10)
            })
            .collect();
        let cf: Vec<f64> = rc.iter().map(crate::exact::to_f64).collect();
        for which in 0..n {
            let g = eigen_gradient(n, &cf, which).unwrap();
            let (l, _) = lax_pair(n);
            let lm: Mat = l
                .iter()
                .map(|row| row.iter().map(|p| p.eval(&cf)).collect())
                .collect();
            let lambda = crate::laxode::sym_eigenvalues(&lm)[which];
            for bi in 2..=3u32 {
                let p_hi = bracket(n, bi).eval(&cf).unwrap();
                let p_lo = bracket(n, bi - 1).eval(&cf).unwrap();
                for i in 0..dim(n) {
                    let mut lhs = 0.0;
                    let mut rhs = 0.0;
                    for j in 0..dim(n) {
                        lhs += p_hi[i][j] * g[j];
                        rhs += p_lo[i][j] * g[j];
                    }
                    assert!(
                        (lhs - lambda * rhs).abs() < 1e-8,
                        "pi{bi} grad lambda != lambda pi{} grad lambda",
                        bi - 1
                    );
                }
            }
        }
    }

    #[test]
    fn table_json_forms() {
        let j = bracket_table_json(3, 2, None).unwrap();
        let entries = j["entries"].as_array().unwrap();
        assert!(entries
            .iter()
            .any(|e| e["i"] == "a1" && e["j"] == "b1" && e["poly"] == "-a1*b1"));
        let pt = vec![rat(1), rat(1), rat(1), rat(1), rat(1)];
        let j4 = bracket_table_json(3, 4, Some(&pt)).unwrap();
        assert!(j4["entries"].as_array().is_some());
        assert!(bracket_table_json(3, 4, None).is_err());
    }
}
