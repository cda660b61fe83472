//! Seeded identity-check suites over sampled rational points.
//!
//! Exact mode treats any nonzero residual as failure; float mode compares
//! against a tolerance. Reports are deterministic for a fixed seed: sample
//! points are drawn sequentially from a ChaCha stream, evaluation may then
//! fan out across threads, and aggregation is order-independent (max over
//! residuals, witness = first failing point by sample index).

use crate::exact::{abs, rat, to_f64, Rat};
use crate::geom::{
    hamiltonian_vf, Bivector, GeomError, PhasePoint, PolyMap, Predicate, ScalarField,
    SchoutenPlan, VectorField,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: usize,
    /// numerators drawn uniformly from [-num_height, num_height]
    pub num_height: i64,
    /// denominators drawn uniformly from this set
    pub denominators: Vec<i64>,
    /// resampling attempts per point before giving up
    pub max_rejects: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        SamplerConfig {
            seed,
            samples: 100,
            num_height: 9,
            denominators: vec![1, 2, 3],
            max_rejects: 5000,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    /// Smaller heights for float-chart checks (see ledger: e^q growth).
    pub fn float_heights(mut self) -> Self {
        self.num_height = 2;
        self
    }

    fn draw_rat(&self, rng: &mut ChaCha8Rng) -> Rat {
        let n = rng.gen_range(-self.num_height..=self.num_height);
        let d = self.denominators[rng.gen_range(0..self.denominators.len())];
        crate::exact::ratq(n, d)
    }

    /// Sample `samples` points of dimension `dim`, rejecting points that
    /// violate any predicate (or that zero a guarded denominator).
    pub fn sample(&self, dim: usize, predicates: &[Predicate]) -> Vec<Vec<Rat>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.samples);
        'outer: for _ in 0..self.samples {
            for _ in 0..self.max_rejects {
                let pt: Vec<Rat> = (0..dim).map(|_| self.draw_rat(&mut rng)).collect();
                if predicates.iter().all(|p| p.holds(&pt)) {
                    out.push(pt);
                    continue 'outer;
                }
            }
            panic!(
                "sampler exhausted {} attempts against predicates {:?}",
                self.max_rejects,
                predicates.iter().map(|p| &p.name).collect::<Vec<_>>()
            );
        }
        out
    }

    pub fn sample_f64(&self, dim: usize) -> Vec<Vec<f64>> {
        self.sample(dim, &[])
            .into_iter()
            .map(|p| p.iter().map(to_f64).collect())
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "mode", content = "value")]
pub enum Residual {
    /// exact-rational residual, serialized as a fraction string
    #[serde(rename = "exact")]
    Exact(String),
    #[serde(rename = "float")]
    Float(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub samples: usize,
    pub seed: u64,
    /// "exact" or the float tolerance
    pub mode: String,
    pub max_residual: Residual,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

impl IdentityReport {
    /// Aggregate per-point exact residuals.
    pub fn from_exact(
        name: impl Into<String>,
        cfg: &SamplerConfig,
        points: &[Vec<Rat>],
        residuals: Vec<Rat>,
    ) -> Self {
        let mut max = rat(0);
        let mut witness = None;
        for (idx, r) in residuals.iter().enumerate() {
            let a = abs(r);
            if a > max {
                max = a;
            }
            if witness.is_none() && !crate::exact::is_zero(r) {
                witness = Some(points[idx].iter().map(|c| c.to_string()).collect());
            }
        }
        let verdict = witness.is_none();
        IdentityReport {
            name: name.into(),
            samples: points.len(),
            seed: cfg.seed,
            mode: "exact".into(),
            max_residual: Residual::Exact(max.to_string()),
            verdict,
            witness,
        }
    }

    pub fn from_float(
        name: impl Into<String>,
        cfg: &SamplerConfig,
        points: &[Vec<f64>],
        residuals: Vec<f64>,
        tol: f64,
    ) -> Self {
        let mut max = 0.0f64;
        let mut witness = None;
        for (idx, r) in residuals.iter().enumerate() {
            if *r > max {
                max = *r;
            }
            if witness.is_none() && *r > tol {
                witness = Some(points[idx].iter().map(|c| c.to_string()).collect());
            }
        }
        IdentityReport {
            name: name.into(),
            samples: points.len(),
            seed: cfg.seed,
            mode: format!("float<=${tol:e}").replace('$', ""),
            max_residual: Residual::Float(max),
            verdict: witness.is_none(),
            witness,
        }
    }
}

fn merged_preds(lists: &[&[Predicate]]) -> Vec<Predicate> {
    let mut out: Vec<Predicate> = Vec::new();
    for l in lists {
        for p in *l {
            if !out.iter().any(|q| q.name == p.name) {
                out.push(p.clone());
            }
        }
    }
    out
}

/// Predicates that keep every denominator of the bivector nonzero.
fn denominator_preds(pi: &Bivector) -> Vec<Predicate> {
    let mut out = Vec::new();
    for (&(i, j), f) in pi.upper_entries() {
        if !f.is_polynomial() {
            out.push(Predicate::new(
                format!("den({},{},{})", pi.name, i, j),
                crate::poly::RatFn::from_poly(f.den.clone()),
            ));
        }
    }
    out
}

/// Max |component| of [pi, pi] at each sampled point must be exactly zero.
pub fn check_jacobi(pi: &Bivector, cfg: &SamplerConfig) -> IdentityReport {
    check_compatibility_named(format!("jacobi[{}]", pi.name), pi, pi, cfg)
}

/// [pi, rho] = 0 at all samples.
pub fn check_compatibility(pi: &Bivector, rho: &Bivector, cfg: &SamplerConfig) -> IdentityReport {
    check_compatibility_named(
        format!("compat[{},{}]", pi.name, rho.name),
        pi,
        rho,
        cfg,
    )
}

fn check_compatibility_named(
    name: String,
    pi: &Bivector,
    rho: &Bivector,
    cfg: &SamplerConfig,
) -> IdentityReport {
    let plan = SchoutenPlan::new(pi, rho).expect("chart mismatch in compatibility check");
    let preds = merged_preds(&[
        &pi.predicates,
        &rho.predicates,
        &denominator_preds(pi),
        &denominator_preds(rho),
    ]);
    let points = cfg.sample(pi.chart.dim(), &preds);
    let residuals: Vec<Rat> = points
        .par_iter()
        .map(|pt| {
            plan.eval(pt)
                .map(|comps| {
                    comps
                        .into_iter()
                        .map(|(_, v)| abs(&v))
                        .max()
                        .unwrap_or_else(|| rat(0))
                })
                .unwrap_or_else(|| rat(1)) // denominator hit: count as failure
        })
        .collect();
    IdentityReport::from_exact(name, cfg, &points, residuals)
}

/// pi(x) grad f(x) = 0 at all samples (restricted away from f's loci).
pub fn check_casimir(pi: &Bivector, f: &ScalarField, cfg: &SamplerConfig) -> IdentityReport {
    let name = format!("casimir[{};{}]", pi.name, f.name);
    let vf = hamiltonian_vf(pi, f).expect("chart mismatch in casimir check");
    let mut preds = merged_preds(&[&pi.predicates, &f.predicates, &denominator_preds(pi)]);
    if !f.f.is_polynomial() {
        preds.push(Predicate::new(
            format!("den({})", f.name),
            crate::poly::RatFn::from_poly(f.f.den.clone()),
        ));
    }
    let points = cfg.sample(pi.chart.dim(), &preds);
    let residuals: Vec<Rat> = points
        .par_iter()
        .map(|pt| {
            vf.eval(pt)
                .map(|cs| cs.iter().map(abs).max().unwrap_or_else(|| rat(0)))
                .unwrap_or_else(|| rat(1))
        })
        .collect();
    IdentityReport::from_exact(name, cfg, &points, residuals)
}

/// {f_i, f_j} = 0 for all pairs at all samples.
pub fn check_involution(
    pi: &Bivector,
    family: &[ScalarField],
    cfg: &SamplerConfig,
) -> IdentityReport {
    let name = format!(
        "involution[{};{}]",
        pi.name,
        family.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join(",")
    );
    let mut preds = merged_preds(&[&pi.predicates, &denominator_preds(pi)]);
    for f in family {
        preds.extend(f.predicates.iter().cloned());
        if !f.f.is_polynomial() {
            preds.push(Predicate::new(
                format!("den({})", f.name),
                crate::poly::RatFn::from_poly(f.f.den.clone()),
            ));
        }
    }
    let preds = merged_preds(&[&preds]);
    let points = cfg.sample(pi.chart.dim(), &preds);
    let chart = pi.chart.clone();
    let residuals: Vec<Rat> = points
        .par_iter()
        .map(|pt| {
            let x = PhasePoint::new(&chart, pt.clone()).unwrap();
            let mut worst = rat(0);
            for i in 0..family.len() {
                for j in (i + 1)..family.len() {
                    match crate::geom::poisson_bracket(pi, &family[i], &family[j], &x) {
                        Ok(v) => worst = crate::exact::max_rat(worst, abs(&v)),
                        Err(_) => worst = crate::exact::max_rat(worst, rat(1)),
                    }
                }
            }
            worst
        })
        .collect();
    IdentityReport::from_exact(name, cfg, &points, residuals)
}

/// Every family member is a Casimir of pi at all samples.
pub fn check_trivial_bracket(
    pi: &Bivector,
    family: &[ScalarField],
    cfg: &SamplerConfig,
) -> IdentityReport {
    let name = format!("trivial[{}]", pi.name);
    let fields: Vec<VectorField> = family
        .iter()
        .map(|f| hamiltonian_vf(pi, f).expect("chart mismatch in trivial-bracket check"))
        .collect();
    let mut preds = merged_preds(&[&pi.predicates, &denominator_preds(pi)]);
    for f in family {
        preds.extend(f.predicates.iter().cloned());
        if !f.f.is_polynomial() {
            preds.push(Predicate::new(
                format!("den({})", f.name),
                crate::poly::RatFn::from_poly(f.f.den.clone()),
            ));
        }
    }
    let preds = merged_preds(&[&preds]);
    let points = cfg.sample(pi.chart.dim(), &preds);
    let residuals: Vec<Rat> = points
        .par_iter()
        .map(|pt| {
            let mut worst = rat(0);
            for vf in &fields {
                match vf.eval(pt) {
                    Some(cs) => {
                        for c in cs {
                            worst = crate::exact::max_rat(worst, abs(&c));
                        }
                    }
                    None => worst = crate::exact::max_rat(worst, rat(1)),
                }
            }
            worst
        })
        .collect();
    IdentityReport::from_exact(name, cfg, &points, residuals)
}

/// DF . pi_src . DF^T = pi_dst o F at all samples (exact polynomial maps).
pub fn check_poisson_map(
    map: &PolyMap,
    pi_src: &Bivector,
    pi_dst: &Bivector,
    cfg: &SamplerConfig,
) -> IdentityReport {
    let name = format!("poisson-map[{}->{}]", pi_src.name, pi_dst.name);
    let preds = merged_preds(&[&pi_src.predicates, &denominator_preds(pi_src)]);
    let points = cfg.sample(map.src.dim(), &preds);
    let nd = map.dst.dim();
    let residuals: Vec<Rat> = points
        .par_iter()
        .map(|pt| {
            let (jac, src, img) = match (
                map.jacobian_at(pt),
                pi_src.eval(pt),
                map.apply(pt).and_then(|y| pi_dst.eval(&y)),
            ) {
                (Some(j), Some(s), Some(i)) => (j, s, i),
                _ => return rat(1),
            };
            let ns = map.src.dim();
            let mut worst = rat(0);
            for a in 0..nd {
                for b in (a + 1)..nd {
                    let mut push = rat(0);
                    for i in 0..ns {
                        for j in 0..ns {
                            if crate::exact::is_zero(&src[i][j]) {
                                continue;
                            }
                            push += &jac[a][i] * &src[i][j] * &jac[b][j];
                        }
                    }
                    worst = crate::exact::max_rat(worst, abs(&(push - &img[a][b])));
                }
            }
            worst
        })
        .collect();
    IdentityReport::from_exact(name, cfg, &points, residuals)
}

/// Exact equality of two vector fields at sampled points.
pub fn check_fields_equal(
    name: impl Into<String>,
    a: &VectorField,
    b: &VectorField,
    cfg: &SamplerConfig,
) -> IdentityReport {
    let preds = merged_preds(&[&a.predicates, &b.predicates]);
    let points = cfg.sample(a.chart.dim(), &preds);
    let residuals: Vec<Rat> = points
        .par_iter()
        .map(|pt| match (a.eval(pt), b.eval(pt)) {
            (Some(va), Some(vb)) => va
                .iter()
                .zip(&vb)
                .map(|(x, y)| abs(&(x - y)))
                .max()
                .unwrap_or_else(|| rat(0)),
            _ => rat(1),
        })
        .collect();
    IdentityReport::from_exact(name, cfg, &points, residuals)
}

/// Exact entrywise equality of two bivectors at sampled points.
pub fn check_bivectors_equal(
    name: impl Into<String>,
    a: &Bivector,
    b: &Bivector,
    cfg: &SamplerConfig,
) -> IdentityReport {
    let preds = merged_preds(&[
        &a.predicates,
        &b.predicates,
        &denominator_preds(a),
        &denominator_preds(b),
    ]);
    let points = cfg.sample(a.chart.dim(), &preds);
    let n = a.chart.dim();
    let residuals: Vec<Rat> = points
        .par_iter()
        .map(|pt| match (a.eval(pt), b.eval(pt)) {
            (Some(ma), Some(mb)) => {
                let mut worst = rat(0);
                for i in 0..n {
                    for j in (i + 1)..n {
                        worst = crate::exact::max_rat(worst, abs(&(&ma[i][j] - &mb[i][j])));
                    }
                }
                worst
            }
            _ => rat(1),
        })
        .collect();
    IdentityReport::from_exact(name, cfg, &points, residuals)
}

/// Helper: deterministic sampled phase points for ad-hoc tests.
pub fn sample_points(
    chart: &crate::geom::ChartRef,
    preds: &[Predicate],
    cfg: &SamplerConfig,
) -> Vec<PhasePoint> {
    cfg.sample(chart.dim(), preds)
        .into_iter()
        .map(|c| PhasePoint::new(chart, c).unwrap())
        .collect()
}

/// Result alias used by system constructors that can fail on geometry errors.
pub type GeomResult<T> = Result<T, GeomError>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Chart;
    use crate::poly::{Poly, RatFn};

    fn broken_tensor() -> (crate::geom::ChartRef, Bivector) {
        // N=2 Flaschka-like chart; {a1,b1} = b1, {a1,b2} = a1 — deliberately
        // not Poisson.
        let ch = Chart::new("broken", vec!["a1".into(), "b1".into(), "b2".into()]);
        let mut t = Bivector::new(&ch, "tau");
        t.set_poly(0, 1, Poly::var(3, 1));
        t.set_poly(0, 2, Poly::var(3, 0));
        (ch, t)
    }

    #[test]
    fn broken_tensor_fails_jacobi_with_witness() {
        let (_, t) = broken_tensor();
        let cfg = SamplerConfig::new(11).with_samples(40);
        let rep = check_jacobi(&t, &cfg);
        assert!(!rep.verdict);
        assert!(rep.witness.is_some());
        match rep.max_residual {
            Residual::Exact(ref s) => assert_ne!(s, "0"),
            _ => panic!("expected exact residual"),
        }
    }

    #[test]
    fn zero_bivector_passes_jacobi() {
        let ch = Chart::new("z", vec!["x".into(), "y".into(), "w".into()]);
        let z = Bivector::new(&ch, "0");
        let rep = check_jacobi(&z, &SamplerConfig::new(3).with_samples(10));
        assert!(rep.verdict);
    }

    #[test]
    fn dimension_one_chart_trivially_poisson() {
        let ch = Chart::new("line", vec!["x".into()]);
        let z = Bivector::new(&ch, "0");
        let rep = check_jacobi(&z, &SamplerConfig::new(3).with_samples(5));
        assert!(rep.verdict);
    }

    #[test]
    fn constant_is_casimir_of_anything() {
        let (ch, t) = broken_tensor();
        let c = crate::geom::ScalarField::new(&ch, "c", RatFn::from_poly(Poly::int(3, 7)));
        let rep = check_casimir(&t, &c, &SamplerConfig::new(5).with_samples(10));
        assert!(rep.verdict);
    }

    #[test]
    fn same_seed_same_report() {
        let (_, t) = broken_tensor();
        let cfg = SamplerConfig::new(42).with_samples(25);
        let r1 = check_jacobi(&t, &cfg);
        let r2 = check_jacobi(&t, &cfg);
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
    }

    #[test]
    fn identity_map_is_poisson() {
        let (ch, t) = broken_tensor();
        let map = PolyMap::new(
            &ch,
            &ch,
            (0..3).map(|k| RatFn::from_poly(Poly::var(3, k))).collect(),
        );
        let rep = check_poisson_map(&map, &t, &t, &SamplerConfig::new(9).with_samples(15));
        assert!(rep.verdict);
    }
}
