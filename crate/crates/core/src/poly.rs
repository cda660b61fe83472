//! Sparse multivariate polynomials and rational functions over `Rat`.
//!
//! Every exact-chart object (bracket entry, invariant, vector-field
//! component) is stored in this form. Symbolic differentiation keeps
//! Lie-derivative-generated tensors closed under the calculus, so a
//! generated bracket is again a table that evaluates at any scalar type.

use crate::exact::{rat, Rat};
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// exponent vector (one entry per chart coordinate) -> coefficient
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rat::one())
    }

    pub fn int(nvars: usize, c: i64) -> Self {
        Poly::constant(nvars, rat(c))
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        assert!(k < nvars);
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(e, Rat::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    fn insert(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert(e.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, mut n: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Symbolic partial derivative with respect to coordinate `k`.
    pub fn derivative(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            out.insert(e2, c * rat(e[k] as i64));
        }
        out
    }

    /// Evaluate at a point of any scalar type (rationals, floats, duals).
    pub fn eval<S: crate::scalar::Scalar>(&self, x: &[S]) -> S {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = S::from_rat(c);
            for (k, &ek) in e.iter().enumerate() {
                for _ in 0..ek {
                    t = t.mul(&x[k]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Substitute coordinate `k` -> coordinate `k` + offset_k for every k.
    pub fn shift(&self, offsets: &[Rat]) -> Poly {
        debug_assert_eq!(offsets.len(), self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            // expand prod (x_k + o_k)^{e_k} term by term
            let mut partial: Vec<(Vec<u32>, Rat)> = vec![(vec![0; self.nvars], c.clone())];
            for (k, &ek) in e.iter().enumerate() {
                if ek == 0 {
                    continue;
                }
                if offsets[k].is_zero() {
                    for p in partial.iter_mut() {
                        p.0[k] += ek;
                    }
                    continue;
                }
                let mut next = Vec::new();
                for (pe, pc) in &partial {
                    // binomial expansion of (x_k + o)^{ek}
                    let mut binom = Rat::one();
                    for j in 0..=ek {
                        // coefficient C(ek, j) * o^{ek-j}, monomial x_k^j
                        let mut e2 = pe.clone();
                        e2[k] += j;
                        let opow = num::pow::pow(offsets[k].clone(), (ek - j) as usize);
                        next.push((e2, pc * &binom * opow));
                        if j < ek {
                            binom = binom * rat((ek - j) as i64) / rat((j + 1) as i64);
                        }
                    }
                }
                partial = next;
            }
            for (e2, c2) in partial {
                out.insert(e2, c2);
            }
        }
        out
    }

    /// Substitute every variable by a polynomial (possibly in a different
    /// ring). All images must share one variable count.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars);
        let out_vars = images
            .first()
            .map(|p| p.nvars)
            .unwrap_or(self.nvars);
        let mut out = Poly::zero(out_vars);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(out_vars, c.clone());
            for (k, &ek) in e.iter().enumerate() {
                if ek > 0 {
                    t = t.mul(&images[k].pow(ek));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Divide by the gcd of all coefficients' numerators/denominators.
    /// Returns (content, primitive part); zero polynomial yields content 1.
    pub fn content_and_primitive(&self) -> (Rat, Poly) {
        use num::bigint::BigInt;
        if self.is_zero() {
            return (Rat::one(), self.clone());
        }
        let mut gnum = BigInt::zero();
        let mut glcm = BigInt::one();
        for c in self.terms.values() {
            gnum = num::integer::gcd(gnum, c.numer().abs());
            glcm = num::integer::lcm(glcm, c.denom().clone());
        }
        let content = Rat::new(gnum, glcm);
        let inv = Rat::one() / &content;
        (content.clone(), self.scale(&inv))
    }

    /// Pretty form like `-a1*b1^2 + 1/2*a2`, using the supplied labels.
    pub fn to_string_with(&self, labels: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        // stable order: graded by total degree then lexicographic exponents
        let mut terms: Vec<(&Vec<u32>, &Rat)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            da.cmp(&db).then(a.0.cmp(b.0)).reverse()
        });
        let mut s = String::new();
        for (idx, (e, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else if neg {
                s.push_str(" - ");
            } else {
                s.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || e.iter().all(|&x| x == 0) {
                factors.push(mag.to_string());
            }
            for (k, &ek) in e.iter().enumerate() {
                if ek == 1 {
                    factors.push(labels[k].clone());
                } else if ek > 1 {
                    let mut f = labels[k].clone();
                    let _ = write!(f, "^{}", ek);
                    factors.push(f);
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

/// Quotient of polynomials. The denominator is only reduced by rational
/// content; no multivariate gcd is attempted (equality checks are pointwise).
#[derive(Clone, Debug)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    pub fn from_poly(p: Poly) -> Self {
        let den = Poly::one(p.nvars);
        RatFn { num: p, den }
    }

    pub fn zero(nvars: usize) -> Self {
        RatFn::from_poly(Poly::zero(nvars))
    }

    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFn { num, den };
        r.normalize();
        r
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one(self.num.nvars);
            return;
        }
        let (cn, pn) = self.num.content_and_primitive();
        let (cd, pd) = self.den.content_and_primitive();
        self.num = pn.scale(&(cn / &cd));
        self.den = pd;
        // keep polynomial-over-constant in plain form
        if self.den.is_constant() {
            let c = self.den.terms.values().next().unwrap().clone();
            self.num = self.num.scale(&(Rat::one() / c));
            self.den = Poly::one(self.num.nvars);
        }
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num), self.den.clone());
        }
        RatFn::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.num.sub(&o.num), self.den.clone());
        }
        RatFn::new(
            self.num.mul(&o.den).sub(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        RatFn::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &RatFn) -> RatFn {
        assert!(!o.num.is_zero(), "division by zero rational function");
        RatFn::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, c: &Rat) -> RatFn {
        RatFn::new(self.num.scale(c), self.den.clone())
    }

    /// Quotient rule, symbolic.
    pub fn derivative(&self, k: usize) -> RatFn {
        if self.is_polynomial() {
            return RatFn::from_poly(self.num.derivative(k));
        }
        let num = self
            .num
            .derivative(k)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(k)));
        RatFn::new(num, self.den.mul(&self.den))
    }

    /// `None` when the denominator vanishes at `x`.
    pub fn eval<S: crate::scalar::Scalar>(&self, x: &[S]) -> Option<S> {
        let d = self.den.eval(x);
        self.num.eval(x).div(&d)
    }

    pub fn shift(&self, offsets: &[Rat]) -> RatFn {
        RatFn::new(self.num.shift(offsets), self.den.shift(offsets))
    }

    pub fn to_string_with(&self, labels: &[String]) -> String {
        if self.is_polynomial() {
            self.num.to_string_with(labels)
        } else {
            format!(
                "({})/({})",
                self.num.to_string_with(labels),
                self.den.to_string_with(labels)
            )
        }
    }
}

// ---------- small symbolic matrices ----------

pub type PolyMat = Vec<Vec<Poly>>;
pub type RatMat = Vec<Vec<RatFn>>;

pub fn pm_zero(n: usize, nvars: usize) -> PolyMat {
    vec![vec![Poly::zero(nvars); n]; n]
}

pub fn pm_mul(a: &PolyMat, b: &PolyMat) -> PolyMat {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let nvars = a[0][0].nvars;
    let mut out = vec![vec![Poly::zero(nvars); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Poly::zero(nvars);
            for k in 0..inner {
                if a[i][k].is_zero() || b[k][j].is_zero() {
                    continue;
                }
                acc = acc.add(&a[i][k].mul(&b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn pm_trace(a: &PolyMat) -> Poly {
    let nvars = a[0][0].nvars;
    let mut t = Poly::zero(nvars);
    for i in 0..a.len() {
        t = t.add(&a[i][i]);
    }
    t
}

pub fn pm_sub(a: &PolyMat, b: &PolyMat) -> PolyMat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.sub(y)).collect())
        .collect()
}

pub fn pm_commutator(a: &PolyMat, b: &PolyMat) -> PolyMat {
    pm_sub(&pm_mul(a, b), &pm_mul(b, a))
}

/// Determinant by cofactor expansion along the sparsest row. Fine for the
/// small (<= 7x7) matrices this crate handles.
pub fn pm_det(a: &PolyMat) -> Poly {
    let n = a.len();
    let nvars = a[0][0].nvars;
    if n == 0 {
        return Poly::one(nvars);
    }
    if n == 1 {
        return a[0][0].clone();
    }
    // pick row with most zeros
    let (row, _) = (0..n)
        .map(|i| (i, a[i].iter().filter(|p| p.is_zero()).count()))
        .max_by_key(|&(_, z)| z)
        .unwrap();
    let mut det = Poly::zero(nvars);
    for col in 0..n {
        if a[row][col].is_zero() {
            continue;
        }
        let minor: PolyMat = (0..n)
            .filter(|&i| i != row)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != col)
                    .map(|j| a[i][j].clone())
                    .collect()
            })
            .collect();
        let c = a[row][col].mul(&pm_det(&minor));
        if (row + col) % 2 == 0 {
            det = det.add(&c);
        } else {
            det = det.sub(&c);
        }
    }
    det
}

/// Adjugate matrix: adj(A)_{ij} = (-1)^{i+j} det(minor_{ji}).
pub fn pm_adjugate(a: &PolyMat) -> PolyMat {
    let n = a.len();
    let nvars = a[0][0].nvars;
    let mut adj = vec![vec![Poly::zero(nvars); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: PolyMat = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| a[r][c].clone())
                        .collect()
                })
                .collect();
            let d = pm_det(&minor);
            adj[i][j] = if (i + j) % 2 == 0 { d } else { d.neg() };
        }
    }
    adj
}

pub fn rm_from_pm(a: &PolyMat) -> RatMat {
    a.iter()
        .map(|r| r.iter().map(|p| RatFn::from_poly(p.clone())).collect())
        .collect()
}

pub fn rm_mul(a: &RatMat, b: &RatMat) -> RatMat {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let nvars = a[0][0].nvars();
    let mut out = vec![vec![RatFn::zero(nvars); m]; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in 0..m {
            let mut acc = RatFn::zero(nvars);
            for k in 0..inner {
                if a[i][k].is_zero() || b[k][j].is_zero() {
                    continue;
                }
                acc = acc.add(&a[i][k].mul(&b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Inverse via adjugate/determinant over rational functions.
/// Panics when the symbolic determinant is identically zero.
pub fn rm_inverse_of_pm(a: &PolyMat) -> RatMat {
    let det = pm_det(a);
    assert!(!det.is_zero(), "matrix is singular as a rational-function matrix");
    let adj = pm_adjugate(a);
    adj.iter()
        .map(|row| {
            row.iter()
                .map(|p| RatFn::new(p.clone(), det.clone()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratq;

    fn labels3() -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    #[test]
    fn arithmetic_and_derivative() {
        let n = 3;
        let x = Poly::var(n, 0);
        let y = Poly::var(n, 1);
        // p = x^2 y - 2 y
        let p = x.pow(2).mul(&y).sub(&y.scale(&rat(2)));
        assert_eq!(p.derivative(0), x.mul(&y).scale(&rat(2)));
        assert_eq!(p.derivative(1), x.pow(2).sub(&Poly::int(n, 2)));
        let v = p.eval(&[ratq(1, 2), rat(4), rat(0)]);
        assert_eq!(v, rat(-7)); // 1/4*4 - 8
    }

    #[test]
    fn shift_binomial() {
        let n = 1;
        let x = Poly::var(n, 0);
        let p = x.pow(3);
        let q = p.shift(&[rat(1)]); // (x+1)^3
        assert_eq!(
            q,
            x.pow(3)
                .add(&x.pow(2).scale(&rat(3)))
                .add(&x.scale(&rat(3)))
                .add(&Poly::one(n))
        );
    }

    #[test]
    fn ratfn_quotient_rule() {
        let n = 2;
        let x = Poly::var(n, 0);
        let y = Poly::var(n, 1);
        // f = x / y; df/dy = -x / y^2
        let f = RatFn::new(x.clone(), y.clone());
        let d = f.derivative(1);
        let expect = RatFn::new(x.neg(), y.pow(2));
        let pt = [rat(3), rat(2)];
        assert_eq!(d.eval(&pt), expect.eval(&pt));
        assert_eq!(f.eval(&[rat(1), rat(0)]), None);
    }

    #[test]
    fn det_and_adjugate() {
        let n = 1;
        let x = Poly::var(n, 0);
        // [[x, 1],[2, x]] -> det = x^2 - 2
        let m = vec![
            vec![x.clone(), Poly::one(n)],
            vec![Poly::int(n, 2), x.clone()],
        ];
        assert_eq!(pm_det(&m), x.pow(2).sub(&Poly::int(n, 2)));
        let adj = pm_adjugate(&m);
        // A * adj(A) = det * I
        let prod = pm_mul(&m, &adj);
        assert_eq!(prod[0][0], pm_det(&m));
        assert!(prod[0][1].is_zero());
    }

    #[test]
    fn display_form() {
        let n = 3;
        let x = Poly::var(n, 0);
        let y = Poly::var(n, 1);
        let p = x.mul(&y).neg();
        assert_eq!(p.to_string_with(&labels3()), "-x*y");
        let q = x.pow(2).scale(&ratq(1, 2)).add(&Poly::int(n, 3));
        assert_eq!(q.to_string_with(&labels3()), "1/2*x^2 + 3");
    }
}
