//! Lax-pair flows in float mode: fixed-step RK4, QR-factorization solution,
//! symmetric eigenvalues, and conservation-drift reporting.

use crate::geom::{ChartRef, VectorField};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LaxError {
    #[error("non-finite state at t = {t}")]
    BlowUp { t: f64 },
    #[error("invalid step: {0}")]
    BadStep(String),
    #[error("matrix exponential overflow (t*||L|| too large; fails past ~700*ln2)")]
    ExpOverflow,
    #[error("{0}")]
    Domain(String),
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub step: f64,
}

impl Trajectory {
    /// CSV with header `t,coord1,...,coordD`; floats print in shortest
    /// round-trip form.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push('t');
        for l in &self.labels {
            s.push(',');
            s.push_str(l);
        }
        s.push('\n');
        for (t, row) in self.times.iter().zip(&self.states) {
            s.push_str(&format!("{t}"));
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn max_drift(&self) -> f64 {
        self.entries.iter().map(|e| e.max_drift).fold(0.0, f64::max)
    }
}

/// Classical fixed-step RK4 for dx/dt = f(x).
pub fn rk4<F: Fn(&[f64]) -> Vec<f64>>(
    f: F,
    labels: Vec<String>,
    x0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory, LaxError> {
    if step <= 0.0 || !step.is_finite() {
        return Err(LaxError::BadStep(format!("step = {step}")));
    }
    if t_end < 0.0 {
        return Err(LaxError::BadStep(format!("t_end = {t_end}")));
    }
    let nsteps = (t_end / step).round() as usize;
    let mut times = Vec::with_capacity(nsteps + 1);
    let mut states = Vec::with_capacity(nsteps + 1);
    let mut x = x0.to_vec();
    times.push(0.0);
    states.push(x.clone());
    for s in 0..nsteps {
        let t = s as f64 * step;
        let k1 = f(&x);
        let k2 = f(&axpy(&x, &k1, step / 2.0));
        let k3 = f(&axpy(&x, &k2, step / 2.0));
        let k4 = f(&axpy(&x, &k3, step));
        for i in 0..x.len() {
            x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LaxError::BlowUp { t: t + step });
        }
        times.push(t + step);
        states.push(x.clone());
    }
    Ok(Trajectory { labels, times, states, step })
}

fn axpy(x: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Integrate a rational-table vector field (exact chart) in float mode.
pub fn integrate_flow(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory, LaxError> {
    let labels = field.chart.labels.clone();
    let f = |x: &[f64]| -> Vec<f64> {
        field
            .eval(x)
            .unwrap_or_else(|| vec![f64::NAN; x.len()])
    };
    rk4(f, labels, x0, t_end, step)
}

/// Run twice (step and step/2) and report both max drifts; RK4 order implies
/// roughly a 16x reduction on smooth problems.
pub fn richardson_drift(
    field: &VectorField,
    invariants: &[(String, Box<dyn Fn(&[f64]) -> f64 + Sync>)],
    x0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<(f64, f64), LaxError> {
    let t1 = integrate_flow(field, x0, t_end, step)?;
    let t2 = integrate_flow(field, x0, t_end, step / 2.0)?;
    Ok((
        drift_report_fns(&t1, invariants).max_drift(),
        drift_report_fns(&t2, invariants).max_drift(),
    ))
}

/// Per-invariant max |f(x(t)) - f(x(0))| over the grid.
pub fn drift_report_fns(
    traj: &Trajectory,
    invariants: &[(String, Box<dyn Fn(&[f64]) -> f64 + Sync>)],
) -> DriftReport {
    let entries = invariants
        .iter()
        .map(|(name, f)| {
            let f0 = f(&traj.states[0]);
            let max_drift = traj
                .states
                .iter()
                .map(|s| (f(s) - f0).abs())
                .fold(0.0, f64::max);
            DriftEntry { name: name.clone(), initial: f0, max_drift }
        })
        .collect();
    DriftReport { entries }
}

/// Drift of exact scalar fields along a float trajectory.
pub fn drift_report(traj: &Trajectory, invariants: &[crate::geom::ScalarField]) -> DriftReport {
    let entries = invariants
        .iter()
        .map(|f| {
            let ev = |x: &[f64]| f.f.eval(x).unwrap_or(f64::NAN);
            let f0 = ev(&traj.states[0]);
            let max_drift = traj
                .states
                .iter()
                .map(|s| (ev(s) - f0).abs())
                .fold(0.0, f64::max);
            DriftEntry { name: f.name.clone(), initial: f0, max_drift }
        })
        .collect();
    DriftReport { entries }
}

pub fn chart_labels(chart: &ChartRef) -> Vec<String> {
    chart.labels.clone()
}

// ---------------- dense float linear algebra (small n) ----------------

pub type Mat = Vec<Vec<f64>>;

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * bk[j];
            }
        }
    }
    out
}

pub fn mat_transpose(a: &Mat) -> Mat {
    let n = a.len();
    let m = a[0].len();
    let mut out = vec![vec![0.0; n]; m];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in 0..m {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn mat_identity(n: usize) -> Mat {
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn mat_scale(a: &Mat, s: f64) -> Mat {
    a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

fn mat_add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

fn frob_norm(a: &Mat) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Matrix exponential by scaling-and-squaring with a Taylor core.
/// Documented failure mode: overflows for t*||L|| past ~700*ln2.
pub fn expm(a: &Mat) -> Result<Mat, LaxError> {
    let norm = frob_norm(a);
    if !norm.is_finite() {
        return Err(LaxError::ExpOverflow);
    }
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = mat_scale(a, 0.5f64.powi(s));
    // Taylor on the scaled matrix: converges fast for norm <= 1/2
    let n = a.len();
    let mut term = mat_identity(n);
    let mut sum = mat_identity(n);
    for k in 1..=24 {
        term = mat_scale(&mat_mul(&term, &scaled), 1.0 / k as f64);
        sum = mat_add(&sum, &term);
        if frob_norm(&term) < 1e-18 * frob_norm(&sum) {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..s {
        out = mat_mul(&out, &out);
        if out.iter().flat_map(|r| r.iter()).any(|v| !v.is_finite()) {
            return Err(LaxError::ExpOverflow);
        }
    }
    Ok(out)
}

/// Householder QR with the triangular factor forced to a positive diagonal,
/// so the factorization matches the Gram-Schmidt one and is unique.
pub fn qr_positive(a: &Mat) -> (Mat, Mat) {
    let n = a.len();
    let mut r = a.clone();
    let mut q = mat_identity(n);
    for k in 0..n {
        // Householder vector for column k
        let mut x = vec![0.0; n - k];
        for i in k..n {
            x[i - k] = r[i][k];
        }
        let normx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if normx == 0.0 {
            continue;
        }
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = x;
        v[0] += sign * normx;
        let vtv: f64 = v.iter().map(|a| a * a).sum();
        if vtv == 0.0 {
            continue;
        }
        let beta = 2.0 / vtv;
        // r = H r
        for j in 0..n {
            let mut proj = 0.0;
            for i in 0..v.len() {
                proj += v[i] * r[k + i][j];
            }
            proj *= beta;
            for i in 0..v.len() {
                r[k + i][j] -= proj * v[i];
            }
        }
        // q = q H
        for row in q.iter_mut() {
            let mut proj = 0.0;
            for i in 0..v.len() {
                proj += row[k + i] * v[i];
            }
            proj *= beta;
            for i in 0..v.len() {
                row[k + i] -= proj * v[i];
            }
        }
    }
    // enforce positive diagonal of R
    for k in 0..n {
        if r[k][k] < 0.0 {
            for j in 0..n {
                r[k][j] = -r[k][j];
            }
            for row in q.iter_mut() {
                row[k] = -row[k];
            }
        }
    }
    (q, r)
}

/// Isospectral QR solution: exp(t L0) = k(t) b(t), L(t) = k^T L0 k.
pub fn qr_solve(l0: &Mat, t: f64) -> Result<Mat, LaxError> {
    for (i, row) in l0.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if (v - l0[j][i]).abs() > 1e-12 * (1.0 + v.abs()) {
                return Err(LaxError::Domain(format!(
                    "qr_solve requires a symmetric matrix (entry {i},{j})"
                )));
            }
        }
    }
    let e = expm(&mat_scale(l0, t))?;
    let (k, _b) = qr_positive(&e);
    let kt = mat_transpose(&k);
    Ok(mat_mul(&mat_mul(&kt, l0), &k))
}

/// Ascending eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + frob_norm(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Eigen-decomposition (values ascending, orthonormal columns) for the
/// eigenvector-gradient computation. Jacobi rotations accumulate V.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = mat_identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + frob_norm(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    idx.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
    let mut vecs = vec![vec![0.0; n]; n];
    for (new, &old) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[k][new] = v[k][old];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_returns_initial() {
        let f = |_: &[f64]| vec![1.0];
        let tr = rk4(f, vec!["x".into()], &[2.0], 0.0, 0.1).unwrap();
        assert_eq!(tr.times, vec![0.0]);
        assert_eq!(tr.states, vec![vec![2.0]]);
    }

    #[test]
    fn rk4_harmonic_oscillator_order() {
        let f = |x: &[f64]| vec![x[1], -x[0]];
        let run = |h: f64| {
            let tr = rk4(f, vec!["q".into(), "p".into()], &[1.0, 0.0], 2.0, h).unwrap();
            let last = tr.states.last().unwrap();
            let e = 0.5 * (last[0] * last[0] + last[1] * last[1]);
            (e - 0.5).abs()
        };
        let e1 = run(0.02);
        let e2 = run(0.01);
        assert!(e1 / e2 >= 8.0, "RK4 order check failed: {e1} / {e2}");
    }

    #[test]
    fn blowup_reports_first_bad_time() {
        let f = |x: &[f64]| vec![x[0] * x[0]];
        let err = rk4(f, vec!["x".into()], &[10.0], 10.0, 0.05).unwrap_err();
        match err {
            LaxError::BlowUp { t } => assert!(t > 0.0),
            other => panic!("expected blow-up, got {other}"),
        }
    }

    #[test]
    fn qr_solve_identity_at_t0() {
        let l0 = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let l = qr_solve(&l0, 0.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((l[i][j] - l0[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigenvalues_diag() {
        let m = vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        let ev = sym_eigenvalues(&m);
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigenvalues_2x2_toda() {
        // L(a=1/2, b=0): eigenvalues -1/2, 1/2
        let m = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        let ev = sym_eigenvalues(&m);
        assert!((ev[0] + 0.5).abs() < 1e-14 && (ev[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn qr_isospectral() {
        let l0 = vec![vec![0.5, 0.3, 0.0], vec![0.3, -0.2, 0.4], vec![0.0, 0.4, 0.1]];
        let e0 = sym_eigenvalues(&l0);
        let lt = qr_solve(&l0, 5.0).unwrap();
        let e1 = sym_eigenvalues(&lt);
        for (a, b) in e0.iter().zip(&e1) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn csv_roundtrip_precision() {
        let tr = Trajectory {
            labels: vec!["x".into()],
            times: vec![0.0, 0.1],
            states: vec![vec![0.1 + 0.2], vec![1.0 / 3.0]],
            step: 0.1,
        };
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,x");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.1 + 0.2);
    }
}
