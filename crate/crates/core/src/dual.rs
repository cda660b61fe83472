//! Forward-mode dual numbers with a dynamic partials vector.
//!
//! `Dual<S>` carries a value and one partial per chart coordinate. An empty
//! partials vector means "all partials zero", so constants need no width
//! context. Nesting (`Dual<Dual<S>>`) yields second derivatives; this is how
//! the `L_{[X,Y]}` property and Hessian-free checks are computed.

use crate::exact::Rat;
use crate::scalar::{FloatScalar, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S: Scalar> {
    pub val: S,
    pub eps: Vec<S>,
}

impl<S: Scalar> Dual<S> {
    pub fn constant(val: S) -> Self {
        Dual { val, eps: Vec::new() }
    }

    /// Seed for coordinate `k` of a `dim`-dimensional chart.
    pub fn variable(val: S, k: usize, dim: usize) -> Self {
        let mut eps = vec![S::zero(); dim];
        eps[k] = S::one();
        Dual { val, eps }
    }

    /// Lift a point to dual coordinates, each seeded against its own index.
    pub fn seed_point(coords: &[S]) -> Vec<Self> {
        let d = coords.len();
        coords
            .iter()
            .enumerate()
            .map(|(k, c)| Dual::variable(c.clone(), k, d))
            .collect()
    }

    pub fn partial(&self, k: usize) -> S {
        self.eps.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn gradient(&self, dim: usize) -> Vec<S> {
        (0..dim).map(|k| self.partial(k)).collect()
    }

    fn zip_eps(a: &[S], b: &[S], f: impl Fn(&S, &S) -> S) -> Vec<S> {
        let n = a.len().max(b.len());
        let z = S::zero();
        (0..n)
            .map(|k| f(a.get(k).unwrap_or(&z), b.get(k).unwrap_or(&z)))
            .collect()
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn zero() -> Self {
        Dual::constant(S::zero())
    }
    fn one() -> Self {
        Dual::constant(S::one())
    }
    fn from_rat(r: &Rat) -> Self {
        Dual::constant(S::from_rat(r))
    }
    fn add(&self, o: &Self) -> Self {
        Dual {
            val: self.val.add(&o.val),
            eps: Self::zip_eps(&self.eps, &o.eps, |a, b| a.add(b)),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual {
            val: self.val.sub(&o.val),
            eps: Self::zip_eps(&self.eps, &o.eps, |a, b| a.sub(b)),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        // (u v)' = u' v + u v'
        let n = self.eps.len().max(o.eps.len());
        let z = S::zero();
        let eps = (0..n)
            .map(|k| {
                let du = self.eps.get(k).unwrap_or(&z);
                let dv = o.eps.get(k).unwrap_or(&z);
                du.mul(&o.val).add(&self.val.mul(dv))
            })
            .collect();
        Dual { val: self.val.mul(&o.val), eps }
    }
    fn div(&self, o: &Self) -> Option<Self> {
        // (u/v)' = (u' v - u v') / v^2
        let val = self.val.div(&o.val)?;
        let v2 = o.val.mul(&o.val);
        let n = self.eps.len().max(o.eps.len());
        let z = S::zero();
        let mut eps = Vec::with_capacity(n);
        for k in 0..n {
            let du = self.eps.get(k).unwrap_or(&z);
            let dv = o.eps.get(k).unwrap_or(&z);
            let num = du.mul(&o.val).sub(&self.val.mul(dv));
            eps.push(num.div(&v2)?);
        }
        Some(Dual { val, eps })
    }
    fn neg(&self) -> Self {
        Dual {
            val: self.val.neg(),
            eps: self.eps.iter().map(|e| e.neg()).collect(),
        }
    }
    fn is_zero(&self) -> bool {
        self.val.is_zero() && self.eps.iter().all(|e| e.is_zero())
    }
}

impl<F: FloatScalar> FloatScalar for Dual<F> {
    fn from_f64(x: f64) -> Self {
        Dual::constant(F::from_f64(x))
    }
    fn exp(&self) -> Self {
        let e = self.val.exp();
        Dual {
            val: e.clone(),
            eps: self.eps.iter().map(|d| d.mul(&e)).collect(),
        }
    }
    fn sqrt(&self) -> Self {
        let s = self.val.sqrt();
        // d sqrt(u) = u' / (2 sqrt(u))
        let two_s = s.add(&s);
        Dual {
            val: s.clone(),
            eps: self
                .eps
                .iter()
                .map(|d| d.div(&two_s).unwrap_or_else(F::zero))
                .collect(),
        }
    }
    fn re(&self) -> f64 {
        self.val.re()
    }
}

pub type Dual1 = Dual<f64>;
pub type Dual2 = Dual<Dual<f64>>;

/// Central finite difference of a scalar function, for AD cross-checks.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[k] += h;
    xm[k] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratq;

    #[test]
    fn product_rule_exact() {
        // f(x,y) = x^2 y + y at (3/2, -2)
        let x = Dual::<Rat>::variable(ratq(3, 2), 0, 2);
        let y = Dual::<Rat>::variable(ratq(-2, 1), 1, 2);
        let f = x.mul(&x).mul(&y).add(&y);
        assert_eq!(f.val, ratq(-13, 2)); // 9/4 * -2 + -2
        assert_eq!(f.partial(0), ratq(-6, 1)); // 2xy
        assert_eq!(f.partial(1), ratq(13, 4)); // x^2 + 1
    }

    #[test]
    fn nested_second_derivative() {
        // f(x) = x^3, f''(2) = 12 via Dual<Dual<Rat>>
        let inner = Dual::<Rat>::variable(ratq(2, 1), 0, 1);
        let x = Dual::<Dual<Rat>>::variable(inner, 0, 1);
        let f = x.mul(&x).mul(&x);
        assert_eq!(f.partial(0).partial(0), ratq(12, 1));
    }

    #[test]
    fn exp_chain_rule() {
        let x = Dual::<f64>::variable(0.3, 0, 1);
        let f = x.mul(&x).exp(); // d/dx e^{x^2} = 2x e^{x^2}
        let expect = 2.0 * 0.3 * (0.3f64 * 0.3).exp();
        assert!((f.partial(0) - expect).abs() < 1e-14);
    }

    #[test]
    fn ad_matches_central_difference() {
        let g = |x: &[f64]| (x[0] * x[1]).exp() + x[0] * x[0] * x[1];
        let pt = [0.7, -0.4];
        let seeds = Dual::<f64>::seed_point(&pt);
        let v = seeds[0]
            .mul(&seeds[1])
            .exp()
            .add(&seeds[0].mul(&seeds[0]).mul(&seeds[1]));
        for k in 0..2 {
            let fd = central_diff(g, &pt, k, 1e-6);
            assert!((v.partial(k) - fd).abs() / fd.abs().max(1.0) < 1e-8);
        }
    }
}
