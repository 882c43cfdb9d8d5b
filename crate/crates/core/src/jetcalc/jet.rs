//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] carries the value of a function together with all of its partial
//! derivatives up to a fixed order (at most three) with respect to `nvars`
//! independent variables. Coefficients are stored as derivatives, not as
//! Taylor coefficients: the Hessian block of `u*u` at `u = 3` is `2`, not `1`.
//!
//! Symmetric blocks are stored packed (one entry per sorted multi-index).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: u8 = 3;

/// Largest number of independent variables supported by the index tables.
pub const MAX_VARS: usize = 24;

#[doc(hidden)]
pub struct Tables {
    n: usize,
    pairs: Vec<(usize, usize)>,
    pair_idx: Vec<usize>,
    triples: Vec<(usize, usize, usize)>,
    triple_idx: Vec<usize>,
}

impl Tables {
    fn build(n: usize) -> Self {
        let mut pairs = Vec::new();
        let mut pair_idx = vec![0; n * n];
        for i in 0..n {
            for j in i..n {
                pair_idx[i * n + j] = pairs.len();
                pair_idx[j * n + i] = pairs.len();
                pairs.push((i, j));
            }
        }
        let mut triples = Vec::new();
        let mut triple_idx = vec![0; n * n * n];
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let idx = triples.len();
                    for (a, b, c) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        triple_idx[(a * n + b) * n + c] = idx;
                    }
                    triples.push((i, j, k));
                }
            }
        }
        Tables {
            n,
            pairs,
            pair_idx,
            triples,
            triple_idx,
        }
    }

    fn get(n: usize) -> &'static Tables {
        static CACHE: [OnceLock<Tables>; MAX_VARS + 1] = [const { OnceLock::new() }; MAX_VARS + 1];
        assert!(
            n <= MAX_VARS,
            "jet supports at most {MAX_VARS} variables, got {n}"
        );
        CACHE[n].get_or_init(|| Tables::build(n))
    }

    #[inline]
    fn p2(&self, i: usize, j: usize) -> usize {
        self.pair_idx[i * self.n + j]
    }

    #[inline]
    fn p3(&self, i: usize, j: usize, k: usize) -> usize {
        self.triple_idx[(i * self.n + j) * self.n + k]
    }
}

/// Value and partial derivatives up to `order` of a scalar function of `nvars` variables.
#[derive(Clone)]
pub struct Jet {
    order: u8,
    tab: &'static Tables,
    c: Vec<f64>,
}

fn block_len(n: usize, order: u8) -> usize {
    let mut len = 1;
    if order >= 1 {
        len += n;
    }
    if order >= 2 {
        len += n * (n + 1) / 2;
    }
    if order >= 3 {
        len += n * (n + 1) * (n + 2) / 6;
    }
    len
}

impl Jet {
    /// A jet whose derivatives all vanish.
    pub fn constant(value: f64, nvars: usize, order: u8) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let tab = Tables::get(nvars);
        let mut c = vec![0.0; block_len(nvars, order)];
        c[0] = value;
        Jet { order, tab, c }
    }

    /// The jet of the coordinate function `u_idx` evaluated at `value`.
    pub fn variable(value: f64, idx: usize, nvars: usize, order: u8) -> Self {
        assert!(
            idx < nvars,
            "variable index {idx} out of range for {nvars} variables"
        );
        let mut jet = Jet::constant(value, nvars, order);
        if order >= 1 {
            jet.c[1 + idx] = 1.0;
        }
        jet
    }

    /// Lifts every component of `point` as an independent variable.
    pub fn variables(point: &[f64], order: u8) -> Vec<Jet> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, n, order))
            .collect()
    }

    /// Order-zero jets, i.e. plain values carried through jet arithmetic.
    pub fn values(point: &[f64]) -> Vec<Jet> {
        point.iter().map(|&v| Jet::constant(v, 0, 0)).collect()
    }

    /// A constant with the same shape as `self`.
    pub fn constant_like(&self, value: f64) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        c[0] = value;
        Jet {
            order: self.order,
            tab: self.tab,
            c,
        }
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    pub fn nvars(&self) -> usize {
        self.tab.n
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn grad(&self, i: usize) -> f64 {
        debug_assert!(self.order >= 1);
        self.c[1 + i]
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.order >= 2);
        self.c[self.h_off() + self.tab.p2(i, j)]
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        debug_assert!(self.order >= 3);
        self.c[self.t_off() + self.tab.p3(i, j, k)]
    }

    /// Partial derivative for an arbitrary multi-index of length at most `order`.
    pub fn derivative(&self, multi_index: &[usize]) -> f64 {
        assert!(
            multi_index.len() <= self.order as usize,
            "derivative of order {} requested from a jet of order {}",
            multi_index.len(),
            self.order
        );
        match *multi_index {
            [] => self.value(),
            [i] => self.grad(i),
            [i, j] => self.hess(i, j),
            [i, j, k] => self.third(i, j, k),
            _ => unreachable!(),
        }
    }

    /// Raw coefficient storage: value, gradient, then packed Hessian and third-order blocks.
    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    #[inline]
    fn h_off(&self) -> usize {
        1 + self.tab.n
    }

    #[inline]
    fn t_off(&self) -> usize {
        1 + self.tab.n + self.tab.pairs.len()
    }

    /// Jet of the partial derivative with respect to variable `i`, one order lower.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.tab.n;
        let mut out = Jet::constant(self.grad(i), n, self.order - 1);
        if self.order >= 2 {
            for j in 0..n {
                out.c[1 + j] = self.hess(i, j);
            }
        }
        if self.order >= 3 {
            let h = out.h_off();
            for (idx, &(j, k)) in self.tab.pairs.iter().enumerate() {
                out.c[h + idx] = self.third(i, j, k);
            }
        }
        out
    }

    fn check_shape(&self, other: &Jet) {
        assert!(
            self.tab.n == other.tab.n && self.order == other.order,
            "jet shape mismatch: ({}, order {}) vs ({}, order {})",
            self.tab.n,
            self.order,
            other.tab.n,
            other.order
        );
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.check_shape(other);
        Jet {
            order: self.order,
            tab: self.tab,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    fn scale(&self, s: f64) -> Jet {
        Jet {
            order: self.order,
            tab: self.tab,
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    fn mul_jet(&self, b: &Jet) -> Jet {
        self.check_shape(b);
        let a = self;
        let n = a.tab.n;
        let mut c = vec![0.0; a.c.len()];
        let (a0, b0) = (a.c[0], b.c[0]);
        c[0] = a0 * b0;
        if a.order >= 1 {
            for i in 0..n {
                c[1 + i] = a.c[1 + i] * b0 + a0 * b.c[1 + i];
            }
        }
        if a.order >= 2 {
            let h = a.h_off();
            for (idx, &(i, j)) in a.tab.pairs.iter().enumerate() {
                c[h + idx] = a.c[h + idx] * b0
                    + a.c[1 + i] * b.c[1 + j]
                    + a.c[1 + j] * b.c[1 + i]
                    + a0 * b.c[h + idx];
            }
        }
        if a.order >= 3 {
            let h = a.h_off();
            let t = a.t_off();
            let p2 = |i, j| h + a.tab.p2(i, j);
            for (idx, &(i, j, k)) in a.tab.triples.iter().enumerate() {
                let (ij, ik, jk) = (p2(i, j), p2(i, k), p2(j, k));
                c[t + idx] = a.c[t + idx] * b0
                    + a.c[ij] * b.c[1 + k]
                    + a.c[ik] * b.c[1 + j]
                    + a.c[jk] * b.c[1 + i]
                    + a.c[1 + i] * b.c[jk]
                    + a.c[1 + j] * b.c[ik]
                    + a.c[1 + k] * b.c[ij]
                    + a0 * b.c[t + idx];
            }
        }
        Jet {
            order: a.order,
            tab: a.tab,
            c,
        }
    }

    /// Composes a univariate function with this jet, given its value and first three derivatives
    /// at `self.value()`.
    pub fn compose(&self, f: f64, d1: f64, d2: f64, d3: f64) -> Jet {
        let a = self;
        let n = a.tab.n;
        let mut c = vec![0.0; a.c.len()];
        c[0] = f;
        if a.order >= 1 {
            for i in 0..n {
                c[1 + i] = d1 * a.c[1 + i];
            }
        }
        if a.order >= 2 {
            let h = a.h_off();
            for (idx, &(i, j)) in a.tab.pairs.iter().enumerate() {
                c[h + idx] = d2 * a.c[1 + i] * a.c[1 + j] + d1 * a.c[h + idx];
            }
        }
        if a.order >= 3 {
            let h = a.h_off();
            let t = a.t_off();
            let p2 = |i, j| h + a.tab.p2(i, j);
            for (idx, &(i, j, k)) in a.tab.triples.iter().enumerate() {
                let (gi, gj, gk) = (a.c[1 + i], a.c[1 + j], a.c[1 + k]);
                c[t + idx] = d3 * gi * gj * gk
                    + d2 * (a.c[p2(i, j)] * gk + a.c[p2(i, k)] * gj + a.c[p2(j, k)] * gi)
                    + d1 * a.c[t + idx];
            }
        }
        Jet {
            order: a.order,
            tab: a.tab,
            c,
        }
    }

    pub fn recip(&self) -> Jet {
        let u = self.value();
        let r = 1.0 / u;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }

    /// Square root; non-finite coefficients result when the value is not positive.
    pub fn sqrt(&self) -> Jet {
        let u = self.value();
        let s = u.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * u), 0.375 / (s * u * u))
    }

    pub fn powf(&self, p: f64) -> Jet {
        let u = self.value();
        self.compose(
            u.powf(p),
            p * u.powf(p - 1.0),
            p * (p - 1.0) * u.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * u.powf(p - 3.0),
        )
    }

    pub fn powi(&self, p: i32) -> Jet {
        match p {
            0 => self.constant_like(1.0),
            1 => self.clone(),
            2 => self * self,
            _ => {
                let u = self.value();
                let pf = p as f64;
                self.compose(
                    u.powi(p),
                    pf * u.powi(p - 1),
                    pf * (pf - 1.0) * u.powi(p - 2),
                    pf * (pf - 1.0) * (pf - 2.0) * u.powi(p - 3),
                )
            }
        }
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let u = self.value();
        self.compose(u.ln(), 1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(s, c, -s, -c)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(c, -s, -c, s)
    }

    pub fn square(&self) -> Jet {
        self * self
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.tab.n)
            .field("order", &self.order)
            .field("coefficients", &self.c)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.tab.n == other.tab.n && self.order == other.order && self.c == other.c
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.mul_jet(b));
jet_binop!(Div, div, |a, b| {
    let mut q = a.mul_jet(&b.recip());
    q.c[0] = a.c[0] / b.c[0];
    q
});

macro_rules! jet_scalar_op {
    ($trait:ident, $method:ident, $jet_scalar:expr, $scalar_jet:expr) => {
        impl $trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                let f: fn(&Jet, f64) -> Jet = $jet_scalar;
                f(self, rhs)
            }
        }
        impl $trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(f64, &Jet) -> Jet = $scalar_jet;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_scalar_op!(
    Add,
    add,
    |a, s| {
        let mut out = a.clone();
        out.c[0] += s;
        out
    },
    |s, a| a + s
);
jet_scalar_op!(
    Sub,
    sub,
    |a, s| {
        let mut out = a.clone();
        out.c[0] -= s;
        out
    },
    |s, a| -a + s
);
jet_scalar_op!(Mul, mul, |a, s| a.scale(s), |s, a| a.scale(s));
jet_scalar_op!(
    Div,
    div,
    |a, s| Jet {
        order: a.order,
        tab: a.tab,
        c: a.c.iter().map(|v| v / s).collect(),
    },
    |s, a| {
        let mut q = a.recip().scale(s);
        q.c[0] = s / a.c[0];
        q
    }
);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Sum of jets; `None` for an empty iterator.
pub fn sum<'a>(terms: impl IntoIterator<Item = &'a Jet>) -> Option<Jet> {
    let mut it = terms.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, t| acc + t))
}

/// Euclidean dot product of two equal-length jet vectors.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    let mut acc = &a[0] * &b[0];
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc + x * y;
    }
    acc
}

/// `yᵀ A y` for a constant symmetric matrix given row-major.
pub fn quadratic_form(a: &[f64], y: &[Jet]) -> Jet {
    let n = y.len();
    assert_eq!(a.len(), n * n);
    let mut acc = y[0].zero_like();
    for i in 0..n {
        let mut row = y[0].zero_like();
        for j in 0..n {
            let aij = a[i * n + j];
            if aij != 0.0 {
                row = row + &y[j] * aij;
            }
        }
        acc = acc + &y[i] * &row;
    }
    acc
}

/// `b · y` for a constant covector.
pub fn linear_form(b: &[f64], y: &[Jet]) -> Jet {
    assert_eq!(b.len(), y.len());
    let mut acc = y[0].zero_like();
    for (bi, yi) in b.iter().zip(y) {
        if *bi != 0.0 {
            acc = acc + yi * *bi;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn square_at_three() {
        let u = Jet::variable(3.0, 0, 1, 2);
        let f = &u * &u;
        assert_eq!(f.value(), 9.0);
        assert_eq!(f.grad(0), 6.0);
        assert_eq!(f.hess(0, 0), 2.0);
    }

    #[test]
    fn cubic_third_derivative_is_six() {
        let u = Jet::variable(1.7, 0, 1, 3);
        let f = u.powi(3);
        assert_relative_eq!(f.third(0, 0, 0), 6.0, epsilon = 1e-12);
        assert_relative_eq!(f.hess(0, 0), 6.0 * 1.7, epsilon = 1e-12);
    }

    #[test]
    fn constant_arithmetic_matches_scalars() {
        let a = Jet::constant(2.5, 3, 3);
        let b = Jet::constant(-0.75, 3, 3);
        assert_eq!((&a * &b).value(), 2.5 * -0.75);
        assert_eq!((&a / &b).value(), 2.5 / -0.75);
        assert_eq!((&a - &b).value(), 2.5 + 0.75);
        assert_eq!(a.sqrt().value(), 2.5f64.sqrt());
        for v in &(&a * &b).c[1..] {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn mixed_third_derivative_of_monomial() {
        // f = x^2 y z ; f_xyz = 2x, f_xxy = 2z, f_xxz = 2y
        let v = Jet::variables(&[1.5, -2.0, 0.5], 3);
        let f = &v[0] * &v[0] * &v[1] * &v[2];
        assert_relative_eq!(f.third(0, 1, 2), 3.0, epsilon = 1e-14);
        assert_relative_eq!(f.third(2, 0, 1), 3.0, epsilon = 1e-14);
        assert_relative_eq!(f.third(0, 0, 1), 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.third(0, 2, 0), -4.0, epsilon = 1e-14);
        assert_eq!(f.third(1, 1, 1), 0.0);
    }

    #[test]
    fn partial_lowers_order() {
        let v = Jet::variables(&[0.3, 0.7], 3);
        let f = (&v[0] * &v[1]).sin();
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        // d/dx sin(xy) = y cos(xy)
        assert_relative_eq!(fx.value(), 0.7 * (0.21f64).cos(), epsilon = 1e-14);
        assert_relative_eq!(fx.grad(1), f.hess(0, 1), epsilon = 1e-14);
        assert_relative_eq!(fx.hess(0, 1), f.third(0, 0, 1), epsilon = 1e-14);
    }

    #[test]
    fn elementary_functions_chain_rule() {
        let x = Jet::variable(0.4, 0, 1, 3);
        let e = x.exp();
        assert_relative_eq!(e.third(0, 0, 0), 0.4f64.exp(), epsilon = 1e-14);
        let l = x.ln();
        assert_relative_eq!(l.third(0, 0, 0), 2.0 / 0.4f64.powi(3), epsilon = 1e-12);
        let p = x.powf(2.5);
        assert_relative_eq!(
            p.third(0, 0, 0),
            2.5 * 1.5 * 0.5 * 0.4f64.powf(-0.5),
            epsilon = 1e-12
        );
        let s = x.sqrt();
        assert_relative_eq!(s.hess(0, 0), -0.25 * 0.4f64.powf(-1.5), epsilon = 1e-12);
        let c = x.cos();
        assert_relative_eq!(c.third(0, 0, 0), 0.4f64.sin(), epsilon = 1e-14);
    }

    #[test]
    fn sqrt_at_zero_is_not_finite() {
        let x = Jet::variable(0.0, 0, 1, 2);
        assert!(!x.sqrt().is_finite());
    }

    #[test]
    #[should_panic(expected = "shape mismatch")]
    fn mixing_shapes_panics() {
        let _ = Jet::constant(1.0, 2, 2) + Jet::constant(1.0, 3, 2);
    }
}
