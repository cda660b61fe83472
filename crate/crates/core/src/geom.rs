//! Chart-agnostic Poisson-geometry kernel over exact rational tables.
//!
//! Fields are stored as rational-function component tables on a named chart.
//! Because tables are closed under symbolic differentiation, the Lie
//! derivative of a table is a table again; generated hierarchy members
//! (classical pi_4, pi_5, Kostant pi_2, pi_3, ...) are materialized once and
//! then evaluate like any hand-written bracket.

use crate::exact::Rat;
use crate::poly::{Poly, RatFn};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("chart mismatch: expected `{expected}`, got `{got}`")]
    ChartMismatch { expected: String, got: String },
    #[error("point violates singular-locus predicate `{predicate}`")]
    SingularLocus { predicate: String },
    #[error("dimension mismatch: chart `{chart}` has dimension {dim}, point has {got}")]
    DimensionMismatch { chart: String, dim: usize, got: usize },
    #[error("{0}")]
    Domain(String),
}

/// A scalar function that must be nonzero at sampled points.
#[derive(Clone, Debug)]
pub struct Predicate {
    pub name: String,
    pub f: RatFn,
}

impl Predicate {
    pub fn new(name: impl Into<String>, f: RatFn) -> Self {
        Predicate { name: name.into(), f }
    }

    /// True when the point is admissible (predicate nonzero and defined).
    pub fn holds(&self, coords: &[Rat]) -> bool {
        match self.f.eval(coords) {
            Some(v) => !v.is_zero(),
            None => false,
        }
    }
}

#[derive(Debug)]
pub struct Chart {
    pub name: String,
    pub labels: Vec<String>,
}

impl Chart {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Arc<Chart> {
        let name = name.into();
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            assert!(seen.insert(l.clone()), "duplicate coordinate label `{l}`");
        }
        Arc::new(Chart { name, labels })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub type ChartRef = Arc<Chart>;

fn same_chart(a: &ChartRef, b: &ChartRef) -> Result<(), GeomError> {
    if Arc::ptr_eq(a, b) || (a.name == b.name && a.labels == b.labels) {
        Ok(())
    } else {
        Err(GeomError::ChartMismatch { expected: a.name.clone(), got: b.name.clone() })
    }
}

#[derive(Clone, Debug)]
pub struct PhasePoint {
    pub chart: ChartRef,
    pub coords: Vec<Rat>,
}

impl PhasePoint {
    pub fn new(chart: &ChartRef, coords: Vec<Rat>) -> Result<Self, GeomError> {
        if coords.len() != chart.dim() {
            return Err(GeomError::DimensionMismatch {
                chart: chart.name.clone(),
                dim: chart.dim(),
                got: coords.len(),
            });
        }
        Ok(PhasePoint { chart: chart.clone(), coords })
    }
}

/// Scalar function on a chart, with a lazily cached symbolic gradient.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub chart: ChartRef,
    pub name: String,
    pub f: RatFn,
    pub predicates: Vec<Predicate>,
    gradient: std::sync::OnceLock<Vec<RatFn>>,
}

impl ScalarField {
    pub fn new(chart: &ChartRef, name: impl Into<String>, f: RatFn) -> Self {
        assert_eq!(f.nvars(), chart.dim());
        ScalarField {
            chart: chart.clone(),
            name: name.into(),
            f,
            predicates: Vec::new(),
            gradient: std::sync::OnceLock::new(),
        }
    }

    pub fn with_predicates(mut self, preds: Vec<Predicate>) -> Self {
        self.predicates = preds;
        self
    }

    pub fn gradient(&self) -> &[RatFn] {
        self.gradient
            .get_or_init(|| (0..self.chart.dim()).map(|k| self.f.derivative(k)).collect())
    }

    pub fn eval(&self, x: &PhasePoint) -> Result<Rat, GeomError> {
        same_chart(&self.chart, &x.chart)?;
        self.guard(&x.coords)?;
        self.f
            .eval(&x.coords)
            .ok_or_else(|| GeomError::SingularLocus { predicate: format!("denominator of {}", self.name) })
    }

    pub fn guard(&self, coords: &[Rat]) -> Result<(), GeomError> {
        for p in &self.predicates {
            if !p.holds(coords) {
                return Err(GeomError::SingularLocus { predicate: p.name.clone() });
            }
        }
        Ok(())
    }
}

/// Vector field as a component table.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub chart: ChartRef,
    pub name: String,
    pub comps: Vec<RatFn>,
    pub predicates: Vec<Predicate>,
}

impl VectorField {
    pub fn new(chart: &ChartRef, name: impl Into<String>, comps: Vec<RatFn>) -> Self {
        assert_eq!(comps.len(), chart.dim());
        VectorField { chart: chart.clone(), name: name.into(), comps, predicates: Vec::new() }
    }

    pub fn zero(chart: &ChartRef, name: impl Into<String>) -> Self {
        let comps = vec![RatFn::zero(chart.dim()); chart.dim()];
        VectorField::new(chart, name, comps)
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Option<Vec<S>> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_point(&self, x: &PhasePoint) -> Result<Vec<Rat>, GeomError> {
        same_chart(&self.chart, &x.chart)?;
        self.eval(&x.coords)
            .ok_or_else(|| GeomError::SingularLocus { predicate: format!("denominator of {}", self.name) })
    }

    /// Apply as a derivation to a scalar field: X(f) = sum X^k d_k f.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        let mut acc = RatFn::zero(self.chart.dim());
        for (k, xk) in self.comps.iter().enumerate() {
            if xk.is_zero() {
                continue;
            }
            acc = acc.add(&xk.mul(&f.f.derivative(k)));
        }
        ScalarField::new(&self.chart, format!("{}({})", self.name, f.name), acc)
    }

    pub fn scale(&self, c: &Rat) -> VectorField {
        VectorField::new(
            &self.chart,
            format!("{}*{}", c, self.name),
            self.comps.iter().map(|f| f.scale(c)).collect(),
        )
    }
}

/// Antisymmetric bivector field. Only the strict upper triangle is stored;
/// the lower triangle is derived, so evaluated matrices are antisymmetric by
/// construction.
#[derive(Clone, Debug)]
pub struct Bivector {
    pub chart: ChartRef,
    pub name: String,
    pub system: String,
    pub ladder_index: i64,
    upper: BTreeMap<(usize, usize), RatFn>,
    pub predicates: Vec<Predicate>,
}

impl Bivector {
    pub fn new(chart: &ChartRef, name: impl Into<String>) -> Self {
        Bivector {
            chart: chart.clone(),
            name: name.into(),
            system: String::new(),
            ladder_index: 0,
            upper: BTreeMap::new(),
            predicates: Vec::new(),
        }
    }

    pub fn with_meta(mut self, system: impl Into<String>, ladder_index: i64) -> Self {
        self.system = system.into();
        self.ladder_index = ladder_index;
        self
    }

    pub fn with_predicates(mut self, preds: Vec<Predicate>) -> Self {
        self.predicates = preds;
        self
    }

    /// Set entry {x_i, x_j} for i < j.
    pub fn set(&mut self, i: usize, j: usize, f: RatFn) {
        assert!(i < j, "only the strict upper triangle is stored");
        assert!(j < self.chart.dim());
        if f.is_zero() {
            self.upper.remove(&(i, j));
        } else {
            self.upper.insert((i, j), f);
        }
    }

    pub fn set_poly(&mut self, i: usize, j: usize, p: Poly) {
        self.set(i, j, RatFn::from_poly(p));
    }

    /// Entry as a rational function, any (i, j).
    pub fn entry(&self, i: usize, j: usize) -> RatFn {
        let n = self.chart.dim();
        if i < j {
            self.upper.get(&(i, j)).cloned().unwrap_or_else(|| RatFn::zero(n))
        } else if j < i {
            self.upper.get(&(j, i)).map(|f| f.neg()).unwrap_or_else(|| RatFn::zero(n))
        } else {
            RatFn::zero(n)
        }
    }

    pub fn upper_entries(&self) -> impl Iterator<Item = (&(usize, usize), &RatFn)> {
        self.upper.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.upper.is_empty()
    }

    /// Evaluate the full antisymmetric matrix at a typed point.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Option<Vec<Vec<S>>> {
        let n = self.chart.dim();
        let mut m = vec![vec![S::zero(); n]; n];
        for (&(i, j), f) in &self.upper {
            let v = f.eval(x)?;
            m[j][i] = v.neg();
            m[i][j] = v;
        }
        Some(m)
    }

    pub fn guard(&self, coords: &[Rat]) -> Result<(), GeomError> {
        for p in &self.predicates {
            if !p.holds(coords) {
                return Err(GeomError::SingularLocus { predicate: p.name.clone() });
            }
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rat) -> Bivector {
        let mut out = Bivector::new(&self.chart, format!("{}*{}", c, self.name));
        out.system = self.system.clone();
        out.ladder_index = self.ladder_index;
        out.predicates = self.predicates.clone();
        for (&(i, j), f) in &self.upper {
            out.set(i, j, f.scale(c));
        }
        out
    }

    pub fn add(&self, o: &Bivector) -> Bivector {
        let mut out = Bivector::new(&self.chart, format!("{}+{}", self.name, o.name));
        let n = self.chart.dim();
        for i in 0..n {
            for j in (i + 1)..n {
                let s = self.entry(i, j).add(&o.entry(i, j));
                if !s.is_zero() {
                    out.set(i, j, s);
                }
            }
        }
        out
    }

    /// Shift every coordinate by the given offsets (used by the b -> b+1
    /// isomorphism checks): returns the table x |-> pi(x + offset).
    pub fn shifted(&self, offsets: &[Rat]) -> Bivector {
        let mut out = Bivector::new(&self.chart, format!("{}@shift", self.name));
        for (&(i, j), f) in &self.upper {
            out.set(i, j, f.shift(offsets));
        }
        out
    }
}

/// eval_bivector with the spec's error contract.
pub fn eval_bivector(pi: &Bivector, x: &PhasePoint) -> Result<Vec<Vec<Rat>>, GeomError> {
    same_chart(&pi.chart, &x.chart)?;
    pi.guard(&x.coords)?;
    pi.eval(&x.coords)
        .ok_or_else(|| GeomError::SingularLocus { predicate: format!("denominator of {}", pi.name) })
}

/// Hamiltonian vector field components chi^i = sum_j pi^{ij} d_j H, as a table.
pub fn hamiltonian_vf(pi: &Bivector, h: &ScalarField) -> Result<VectorField, GeomError> {
    same_chart(&pi.chart, &h.chart)?;
    let n = pi.chart.dim();
    let grad = h.gradient();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = RatFn::zero(n);
        for j in 0..n {
            let e = pi.entry(i, j);
            if e.is_zero() || grad[j].is_zero() {
                continue;
            }
            acc = acc.add(&e.mul(&grad[j]));
        }
        comps.push(acc);
    }
    let mut vf = VectorField::new(&pi.chart, format!("X_{{{},{}}}", pi.name, h.name), comps);
    vf.predicates = pi
        .predicates
        .iter()
        .chain(h.predicates.iter())
        .cloned()
        .collect();
    Ok(vf)
}

/// Poisson bracket {f,g} = grad f . pi . grad g evaluated at a point.
pub fn poisson_bracket(
    pi: &Bivector,
    f: &ScalarField,
    g: &ScalarField,
    x: &PhasePoint,
) -> Result<Rat, GeomError> {
    same_chart(&pi.chart, &f.chart)?;
    same_chart(&pi.chart, &g.chart)?;
    same_chart(&pi.chart, &x.chart)?;
    pi.guard(&x.coords)?;
    f.guard(&x.coords)?;
    g.guard(&x.coords)?;
    let sing = |name: &str| GeomError::SingularLocus { predicate: format!("denominator of {name}") };
    let gf: Vec<Rat> = f
        .gradient()
        .iter()
        .map(|d| d.eval(&x.coords))
        .collect::<Option<_>>()
        .ok_or_else(|| sing(&f.name))?;
    let gg: Vec<Rat> = g
        .gradient()
        .iter()
        .map(|d| d.eval(&x.coords))
        .collect::<Option<_>>()
        .ok_or_else(|| sing(&g.name))?;
    let mut acc = Rat::from_integer(0.into());
    for (&(i, j), e) in pi.upper_entries() {
        if gf[i].is_zero() && gf[j].is_zero() {
            continue;
        }
        let v = e.eval(&x.coords).ok_or_else(|| sing(&pi.name))?;
        // antisymmetric pair (i,j) and (j,i)
        acc += &v * (&gf[i] * &gg[j] - &gf[j] * &gg[i]);
    }
    Ok(acc)
}

/// Lie derivative of a bivector along a vector field, fully symbolic:
/// (L_X pi)^{ij} = X^k d_k pi^{ij} - pi^{kj} d_k X^i - pi^{ik} d_k X^j.
pub fn lie_derivative_bivector(x: &VectorField, pi: &Bivector) -> Result<Bivector, GeomError> {
    same_chart(&x.chart, &pi.chart)?;
    let n = pi.chart.dim();
    let mut out = Bivector::new(&pi.chart, format!("L_{{{}}}{}", x.name, pi.name));
    out.predicates = pi
        .predicates
        .iter()
        .chain(x.predicates.iter())
        .cloned()
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = RatFn::zero(n);
            let pij = pi.entry(i, j);
            for k in 0..n {
                if !x.comps[k].is_zero() && !pij.is_zero() {
                    acc = acc.add(&x.comps[k].mul(&pij.derivative(k)));
                }
                let pkj = pi.entry(k, j);
                if !pkj.is_zero() {
                    acc = acc.sub(&pkj.mul(&x.comps[i].derivative(k)));
                }
                let pik = pi.entry(i, k);
                if !pik.is_zero() {
                    acc = acc.sub(&pik.mul(&x.comps[j].derivative(k)));
                }
            }
            if !acc.is_zero() {
                out.set(i, j, acc);
            }
        }
    }
    Ok(out)
}

/// Commutator of vector fields [X,Y]^i = X^k d_k Y^i - Y^k d_k X^i.
pub fn vf_commutator(x: &VectorField, y: &VectorField) -> Result<VectorField, GeomError> {
    same_chart(&x.chart, &y.chart)?;
    let n = x.chart.dim();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = RatFn::zero(n);
        for k in 0..n {
            if !x.comps[k].is_zero() {
                acc = acc.add(&x.comps[k].mul(&y.comps[i].derivative(k)));
            }
            if !y.comps[k].is_zero() {
                acc = acc.sub(&y.comps[k].mul(&x.comps[i].derivative(k)));
            }
        }
        comps.push(acc);
    }
    Ok(VectorField::new(&x.chart, format!("[{},{}]", x.name, y.name), comps))
}

/// Precomputed Schouten bracket plan: symbolic partials of both tensors,
/// evaluated pointwise. The (2,2) Schouten bracket component is
/// [P,Q]^{ijk} = sum_l ( P^{il} d_l Q^{jk} + Q^{il} d_l P^{jk} + cyclic ).
pub struct SchoutenPlan {
    chart: ChartRef,
    p: Vec<Vec<RatFn>>,
    q: Vec<Vec<RatFn>>,
    dp: Vec<Vec<Vec<RatFn>>>,
    dq: Vec<Vec<Vec<RatFn>>>,
}

impl SchoutenPlan {
    pub fn new(p: &Bivector, q: &Bivector) -> Result<Self, GeomError> {
        same_chart(&p.chart, &q.chart)?;
        let n = p.chart.dim();
        let full = |b: &Bivector| -> Vec<Vec<RatFn>> {
            (0..n).map(|i| (0..n).map(|j| b.entry(i, j)).collect()).collect()
        };
        let pf = full(p);
        let qf = full(q);
        let deriv = |m: &Vec<Vec<RatFn>>| -> Vec<Vec<Vec<RatFn>>> {
            m.iter()
                .map(|row| {
                    row.iter()
                        .map(|f| (0..n).map(|l| f.derivative(l)).collect())
                        .collect()
                })
                .collect()
        };
        let dp = deriv(&pf);
        let dq = deriv(&qf);
        Ok(SchoutenPlan { chart: p.chart.clone(), p: pf, q: qf, dp, dq })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Evaluate all independent components (i<j<k). `None` on a denominator
    /// zero (singular point).
    pub fn eval(&self, coords: &[Rat]) -> Option<Vec<((usize, usize, usize), Rat)>> {
        let n = self.dim();
        let ev = |m: &Vec<Vec<RatFn>>| -> Option<Vec<Vec<Rat>>> {
            m.iter()
                .map(|row| row.iter().map(|f| f.eval(coords)).collect())
                .collect()
        };
        let evd = |m: &Vec<Vec<Vec<RatFn>>>| -> Option<Vec<Vec<Vec<Rat>>>> {
            m.iter()
                .map(|row| {
                    row.iter()
                        .map(|fs| fs.iter().map(|f| f.eval(coords)).collect())
                        .collect()
                })
                .collect()
        };
        let pv = ev(&self.p)?;
        let qv = ev(&self.q)?;
        let dpv = evd(&self.dp)?;
        let dqv = evd(&self.dq)?;
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let mut s = Rat::from_integer(0.into());
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        for l in 0..n {
                            s += &pv[a][l] * &dqv[b][c][l];
                            s += &qv[a][l] * &dpv[b][c][l];
                        }
                    }
                    out.push(((i, j, k), s));
                }
            }
        }
        Some(out)
    }
}

/// Spec op `schouten_22`: one-off evaluation at a point, returned as the
/// independent components of the totally antisymmetric 3-tensor.
pub fn schouten_22(
    p: &Bivector,
    q: &Bivector,
    x: &PhasePoint,
) -> Result<Vec<((usize, usize, usize), Rat)>, GeomError> {
    same_chart(&p.chart, &x.chart)?;
    p.guard(&x.coords)?;
    q.guard(&x.coords)?;
    let plan = SchoutenPlan::new(p, q)?;
    plan.eval(&x.coords)
        .ok_or_else(|| GeomError::SingularLocus { predicate: "denominator in Schouten evaluation".into() })
}

/// A polynomial map between charts, used for pushforward (Poisson-map) checks.
pub struct PolyMap {
    pub src: ChartRef,
    pub dst: ChartRef,
    pub comps: Vec<RatFn>, // dst coords as functions of src coords
}

impl PolyMap {
    pub fn new(src: &ChartRef, dst: &ChartRef, comps: Vec<RatFn>) -> Self {
        assert_eq!(comps.len(), dst.dim());
        for c in &comps {
            assert_eq!(c.nvars(), src.dim());
        }
        PolyMap { src: src.clone(), dst: dst.clone(), comps }
    }

    pub fn apply(&self, x: &[Rat]) -> Option<Vec<Rat>> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }

    /// Jacobian evaluated at a point.
    pub fn jacobian_at(&self, x: &[Rat]) -> Option<Vec<Vec<Rat>>> {
        self.comps
            .iter()
            .map(|c| (0..self.src.dim()).map(|k| c.derivative(k).eval(x)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratq};

    fn chart2() -> ChartRef {
        Chart::new("toy", vec!["u".into(), "v".into(), "w".into()])
    }

    #[test]
    fn eval_antisymmetric_structurally() {
        let ch = chart2();
        let mut b = Bivector::new(&ch, "b");
        b.set_poly(0, 1, Poly::var(3, 2)); // {u,v} = w
        let x = PhasePoint::new(&ch, vec![rat(1), rat(2), ratq(5, 3)]).unwrap();
        let m = eval_bivector(&b, &x).unwrap();
        assert_eq!(m[0][1], ratq(5, 3));
        assert_eq!(m[1][0], ratq(-5, 3));
        assert!(m[2][2].is_zero());
    }

    #[test]
    fn chart_mismatch_rejected() {
        let ch = chart2();
        let other = Chart::new("other", vec!["x".into(), "y".into(), "z".into()]);
        let b = Bivector::new(&ch, "b");
        let x = PhasePoint::new(&other, vec![rat(0); 3]).unwrap();
        assert!(matches!(eval_bivector(&b, &x), Err(GeomError::ChartMismatch { .. })));
    }

    #[test]
    fn singular_locus_named() {
        let ch = chart2();
        let b = Bivector::new(&ch, "b").with_predicates(vec![Predicate::new(
            "u != 0",
            RatFn::from_poly(Poly::var(3, 0)),
        )]);
        let x = PhasePoint::new(&ch, vec![rat(0), rat(1), rat(1)]).unwrap();
        match eval_bivector(&b, &x) {
            Err(GeomError::SingularLocus { predicate }) => assert_eq!(predicate, "u != 0"),
            other => panic!("expected singular locus error, got {other:?}"),
        }
    }

    #[test]
    fn commutator_of_field_with_itself_vanishes() {
        let ch = chart2();
        let comps = vec![
            RatFn::from_poly(Poly::var(3, 0).mul(&Poly::var(3, 1))),
            RatFn::from_poly(Poly::var(3, 2).pow(2)),
            RatFn::from_poly(Poly::int(3, 4)),
        ];
        let x = VectorField::new(&ch, "X", comps);
        let c = vf_commutator(&x, &x).unwrap();
        assert!(c.comps.iter().all(|f| f.is_zero()));
    }

    #[test]
    fn lie_derivative_of_zero_is_zero() {
        let ch = chart2();
        let x = VectorField::new(
            &ch,
            "X",
            vec![
                RatFn::from_poly(Poly::var(3, 1)),
                RatFn::from_poly(Poly::var(3, 0)),
                RatFn::zero(3),
            ],
        );
        let z = Bivector::new(&ch, "0");
        let l = lie_derivative_bivector(&x, &z).unwrap();
        assert!(l.is_zero());
    }
}
