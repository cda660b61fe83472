//! Canonical (q,p)-chart machinery in float mode.
//!
//! Exponentials make these charts non-polynomial, so the recursion-operator
//! ladder (J_j = R^j J_0, Z_i = R^i Z_0, chi_j = R^{j-1} chi_1) is evaluated
//! numerically with dual-number derivatives where the calculus needs them.
//! Everything here is generic over `FloatScalar`, so a single definition
//! serves plain f64 evaluation and first/second-derivative passes.

use crate::checks::{IdentityReport, SamplerConfig};
use crate::dual::Dual;
use crate::scalar::FloatScalar;

pub type FloatMat = Vec<Vec<f64>>;

/// n pairs (q_1..q_n, p_1..p_n); coordinates indexed q_i = i, p_i = n + i.
#[derive(Clone, Copy, Debug)]
pub struct CanonicalDim(pub usize);

impl CanonicalDim {
    pub fn dim(&self) -> usize {
        2 * self.0
    }
}

fn zeros<F: FloatScalar>(n: usize) -> Vec<Vec<F>> {
    vec![vec![F::zero(); n]; n]
}

/// Standard symplectic J0: {q_i, p_i} = 1.
pub fn j0_matrix<F: FloatScalar>(n: usize) -> Vec<Vec<F>> {
    let mut m = zeros(2 * n);
    for i in 0..n {
        m[i][n + i] = F::one();
        m[n + i][i] = F::one().neg();
    }
    m
}

/// Constant symplectic inverse of J0.
pub fn j0_inverse<F: FloatScalar>(n: usize) -> Vec<Vec<F>> {
    let mut m = zeros(2 * n);
    for i in 0..n {
        m[i][n + i] = F::one().neg();
        m[n + i][i] = F::one();
    }
    m
}

/// Second canonical bracket J1:
/// {q_i,q_j} = 1 (i<j), {p_i,q_i} = p_i, {p_i,p_{i+1}} = e^{q_i-q_{i+1}}.
pub fn j1_matrix<F: FloatScalar>(n: usize, x: &[F]) -> Vec<Vec<F>> {
    let mut m = zeros(2 * n);
    for i in 0..n {
        for j in (i + 1)..n {
            m[i][j] = F::one();
            m[j][i] = F::one().neg();
        }
    }
    for i in 0..n {
        let p = x[n + i].clone();
        m[n + i][i] = p.clone();
        m[i][n + i] = p.neg();
    }
    for i in 0..(n - 1) {
        let e = x[i].sub(&x[i + 1]).exp();
        m[n + i][n + i + 1] = e.clone();
        m[n + i + 1][n + i] = e.neg();
    }
    m
}

/// Conformal symmetry Z0 = sum (N+1-2i) d/dq_i + sum p_i d/dp_i.
/// (Doubled q-coefficients relative to the printed form; see ledger.)
pub fn z0_field<F: FloatScalar>(n: usize, x: &[F]) -> Vec<F> {
    let mut v = Vec::with_capacity(2 * n);
    for i in 1..=n {
        v.push(F::from_f64((n as i64 + 1 - 2 * i as i64) as f64));
    }
    for i in 0..n {
        v.push(x[n + i].clone());
    }
    v
}

/// h0 = sum p_i, h1 = sum p_i^2/2 + sum e^{q_i - q_{i+1}} (Toda Hamiltonian).
pub fn h0<F: FloatScalar>(n: usize, x: &[F]) -> F {
    let mut s = F::zero();
    for i in 0..n {
        s = s.add(&x[n + i]);
    }
    s
}

pub fn h1<F: FloatScalar>(n: usize, x: &[F]) -> F {
    let half = F::from_f64(0.5);
    let mut s = F::zero();
    for i in 0..n {
        s = s.add(&half.mul(&x[n + i]).mul(&x[n + i]));
    }
    for i in 0..(n - 1) {
        s = s.add(&x[i].sub(&x[i + 1]).exp());
    }
    s
}

fn mat_vec<F: FloatScalar>(m: &[Vec<F>], v: &[F]) -> Vec<F> {
    m.iter()
        .map(|row| {
            let mut acc = F::zero();
            for (a, b) in row.iter().zip(v) {
                if !a.is_zero() {
                    acc = acc.add(&a.mul(b));
                }
            }
            acc
        })
        .collect()
}

fn mat_mul<F: FloatScalar>(a: &[Vec<F>], b: &[Vec<F>]) -> Vec<Vec<F>> {
    let n = a.len();
    let mut out: Vec<Vec<F>> = zeros(n);
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j]));
            }
        }
    }
    out
}

/// Recursion operator R = J1 J0^{-1} at a point.
pub fn recursion_matrix<F: FloatScalar>(n: usize, x: &[F]) -> Vec<Vec<F>> {
    mat_mul(&j1_matrix(n, x), &j0_inverse(n))
}

/// J_j = R^j J0.
pub fn j_ladder<F: FloatScalar>(j: u32, n: usize, x: &[F]) -> Vec<Vec<F>> {
    let mut m = j0_matrix(n);
    let r = recursion_matrix(n, x);
    for _ in 0..j {
        m = mat_mul(&r, &m);
    }
    m
}

/// Z_i = R^i Z0.
pub fn z_ladder<F: FloatScalar>(i: u32, n: usize, x: &[F]) -> Vec<F> {
    let mut v = z0_field(n, x);
    let r = recursion_matrix(n, x);
    for _ in 0..i {
        v = mat_vec(&r, &v);
    }
    v
}

fn grad_of<F: FloatScalar>(f: impl Fn(&[Dual<F>]) -> Dual<F>, x: &[F]) -> Vec<F> {
    let seeds = Dual::seed_point(x);
    let v = f(&seeds);
    v.gradient(x.len())
}

/// chi_j = R^{j-1} (J0 grad h1); chi_1 is the Toda flow.
pub fn chi_ladder<F: FloatScalar>(j: u32, n: usize, x: &[F]) -> Vec<F> {
    assert!(j >= 1);
    let g = grad_of(|xd| h1(n, xd), x);
    let mut v = mat_vec(&j0_matrix::<F>(n), &g);
    let r = recursion_matrix(n, x);
    for _ in 1..j {
        v = mat_vec(&r, &v);
    }
    v
}

// ---------------- numeric calculus on closures ----------------

pub type FieldFn<'a> = &'a dyn Fn(&[Dual<f64>]) -> Vec<Dual<f64>>;
pub type MatFn<'a> = &'a dyn Fn(&[Dual<f64>]) -> Vec<Vec<Dual<f64>>>;

/// (L_X P)^{ij} at a float point, derivatives by dual numbers.
pub fn lie_bivector_at(x_field: FieldFn, p_field: MatFn, x: &[f64]) -> FloatMat {
    let n = x.len();
    let seeds = Dual::seed_point(x);
    let xv = x_field(&seeds);
    let pv = p_field(&seeds);
    let mut out = vec![vec![0.0; n]; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += xv[k].val * pv[i][j].partial(k);
                s -= pv[k][j].val * xv[i].partial(k);
                s -= pv[i][k].val * xv[j].partial(k);
            }
            out[i][j] = s;
        }
    }
    out
}

/// [X,Y]^i at a float point.
pub fn commutator_at(x_field: FieldFn, y_field: FieldFn, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let seeds = Dual::seed_point(x);
    let xv = x_field(&seeds);
    let yv = y_field(&seeds);
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for k in 0..n {
                s += xv[k].val * yv[i].partial(k) - yv[k].val * xv[i].partial(k);
            }
            s
        })
        .collect()
}

/// Independent Schouten components of [P,Q] at a float point.
pub fn schouten_at(p_field: MatFn, q_field: MatFn, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let seeds = Dual::seed_point(x);
    let pv = p_field(&seeds);
    let qv = q_field(&seeds);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let mut s = 0.0;
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for l in 0..n {
                        s += pv[a][l].val * qv[b][c].partial(l);
                        s += qv[a][l].val * pv[b][c].partial(l);
                    }
                }
                out.push(s);
            }
        }
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_abs_mat(m: &FloatMat) -> f64 {
    m.iter().map(|r| max_abs(r)).fold(0.0, f64::max)
}

/// Float-mode Jacobi check for a closure-defined bivector on R^dim.
pub fn float_check_jacobi(
    name: impl Into<String>,
    dim: usize,
    field: MatFn,
    cfg: &SamplerConfig,
    tol: f64,
) -> IdentityReport {
    let points = cfg.sample_f64(dim);
    let residuals: Vec<f64> = points
        .iter()
        .map(|pt| max_abs(&schouten_at(field, field, pt)))
        .collect();
    IdentityReport::from_float(name, cfg, &points, residuals, tol)
}

/// Eq (118) ladder relations on the canonical chart:
///   L_{Z_i} J_j = (j-i-1) J_{i+j},  [Z_i,Z_j] = (j-i) Z_{i+j},
///   [Z_i, chi_j] = j chi_{i+j}.
pub fn float_check_oevel_ladder(
    n: usize,
    max_i: u32,
    cfg: &SamplerConfig,
    tol: f64,
) -> IdentityReport {
    let points = cfg.sample_f64(2 * n);
    let mut residuals = Vec::with_capacity(points.len());
    for pt in &points {
        let mut worst: f64 = 0.0;
        // L_{Z_i} J_j = (j - i - 1) J_{i+j} for i+j <= max_i + 1
        for i in 0..=max_i {
            for j in 0..=max_i {
                if i + j > max_i + 1 {
                    continue;
                }
                let zi = move |x: &[Dual<f64>]| z_ladder(i, n, x);
                let jj = move |x: &[Dual<f64>]| j_ladder(j, n, x);
                let lhs = lie_bivector_at(&zi, &jj, pt);
                let target = j_ladder::<f64>(i + j, n, pt);
                let coef = j as f64 - i as f64 - 1.0;
                let mut diff = 0.0f64;
                for (ri, row) in lhs.iter().enumerate() {
                    for (ci, v) in row.iter().enumerate() {
                        diff = diff.max((v - coef * target[ri][ci]).abs());
                    }
                }
                worst = worst.max(diff);
            }
        }
        // [Z_i, Z_j] = (j-i) Z_{i+j}
        for i in 0..=max_i {
            for j in 0..=max_i {
                let zi = move |x: &[Dual<f64>]| z_ladder(i, n, x);
                let zj = move |x: &[Dual<f64>]| z_ladder(j, n, x);
                let lhs = commutator_at(&zi, &zj, pt);
                let target = z_ladder::<f64>(i + j, n, pt);
                let coef = j as f64 - i as f64;
                let diff = lhs
                    .iter()
                    .zip(&target)
                    .map(|(a, b)| (a - coef * b).abs())
                    .fold(0.0f64, f64::max);
                worst = worst.max(diff);
            }
        }
        // [Z_i, chi_j] = j chi_{i+j}
        for i in 0..=max_i {
            for j in 1..=max_i {
                let zi = move |x: &[Dual<f64>]| z_ladder(i, n, x);
                let cj = move |x: &[Dual<f64>]| chi_ladder(j, n, x);
                let lhs = commutator_at(&zi, &cj, pt);
                let target = chi_ladder::<f64>(i + j, n, pt);
                let diff = lhs
                    .iter()
                    .zip(&target)
                    .map(|(a, b)| (a - j as f64 * b).abs())
                    .fold(0.0f64, f64::max);
                worst = worst.max(diff);
            }
        }
        residuals.push(worst);
    }
    IdentityReport::from_float(format!("oevel-ladder[n={n}]"), cfg, &points, residuals, tol)
}

/// Conformal constants: L_{Z0}J0 = -J0, L_{Z0}J1 = 0, Z0(h0) = h0.
pub fn float_check_conformal(n: usize, cfg: &SamplerConfig, tol: f64) -> IdentityReport {
    let points = cfg.sample_f64(2 * n);
    let residuals: Vec<f64> = points
        .iter()
        .map(|pt| {
            let z0 = move |x: &[Dual<f64>]| z0_field(n, x);
            let j0f = move |_x: &[Dual<f64>]| j0_matrix(n);
            let j1f = move |x: &[Dual<f64>]| j1_matrix(n, x);
            let l0 = lie_bivector_at(&z0, &j0f, pt);
            let j0v = j0_matrix::<f64>(n);
            let mut worst = 0.0f64;
            for i in 0..2 * n {
                for j in 0..2 * n {
                    worst = worst.max((l0[i][j] + j0v[i][j]).abs());
                }
            }
            let l1 = lie_bivector_at(&z0, &j1f, pt);
            worst = worst.max(max_abs_mat(&l1));
            // Z0(h0) = h0
            let seeds = Dual::seed_point(pt);
            let h = h0(n, &seeds);
            let zv = z0_field::<f64>(n, pt);
            let mut zh = 0.0;
            for k in 0..2 * n {
                zh += zv[k] * h.partial(k);
            }
            worst = worst.max((zh - h.val).abs());
            worst
        })
        .collect();
    IdentityReport::from_float(format!("conformal-z0[n={n}]"), cfg, &points, residuals, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j1_passes_float_jacobi() {
        let n = 3;
        let cfg = SamplerConfig::new(7).with_samples(20).float_heights();
        let f = move |x: &[Dual<f64>]| j1_matrix(n, x);
        let rep = float_check_jacobi("jacobi[J1]", 2 * n, &f, &cfg, 1e-10);
        assert!(rep.verdict, "{:?}", rep.max_residual);
    }

    #[test]
    fn conformal_constants_hold() {
        let rep = float_check_conformal(3, &SamplerConfig::new(5).with_samples(15).float_heights(), 1e-9);
        assert!(rep.verdict, "{:?}", rep.max_residual);
    }

    #[test]
    fn oevel_ladder_low_indices() {
        let rep = float_check_oevel_ladder(3, 2, &SamplerConfig::new(13).with_samples(10).float_heights(), 1e-9);
        assert!(rep.verdict, "{:?}", rep.max_residual);
    }
}
