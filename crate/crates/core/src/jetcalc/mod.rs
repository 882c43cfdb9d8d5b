//! Exact low-order derivatives by jet arithmetic, plus a finite-difference oracle.

mod fd;
mod jet;

pub use fd::{default_step, fd_derivative, FD_DEFAULT_STEP};
pub use jet::{dot, linear_form, quadratic_form, sum, Jet, MAX_ORDER, MAX_VARS};

use crate::error::{FinslerError, Result};

/// A scalar function that can be evaluated on jets.
///
/// Plain closures `Fn(&[Jet]) -> Jet` implement this with an everywhere-smooth domain.
pub trait JetFn {
    fn eval(&self, vars: &[Jet]) -> Jet;

    /// Whether the function is smooth at `point`. Lifting outside this set is a domain error.
    fn in_domain(&self, _point: &[f64]) -> bool {
        true
    }
}

impl<F> JetFn for F
where
    F: Fn(&[Jet]) -> Jet,
{
    fn eval(&self, vars: &[Jet]) -> Jet {
        self(vars)
    }
}

/// Wraps a closure together with an explicit smoothness predicate.
pub struct WithDomain<F, D> {
    pub f: F,
    pub domain: D,
}

impl<F, D> JetFn for WithDomain<F, D>
where
    F: Fn(&[Jet]) -> Jet,
    D: Fn(&[f64]) -> bool,
{
    fn eval(&self, vars: &[Jet]) -> Jet {
        (self.f)(vars)
    }

    fn in_domain(&self, point: &[f64]) -> bool {
        (self.domain)(point)
    }
}

/// Taylor data of `f` at `point` up to `order`, every component of `point` an independent variable.
pub fn jet_lift<F: JetFn + ?Sized>(f: &F, point: &[f64], order: u8) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(FinslerError::InvalidInput(format!(
            "jet order {order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if !f.in_domain(point) {
        return Err(FinslerError::Domain(format!(
            "function is not smooth at {point:?}"
        )));
    }
    let jet = f.eval(&Jet::variables(point, order));
    if !jet.is_finite() {
        return Err(FinslerError::Domain(format!(
            "non-finite derivatives at {point:?}"
        )));
    }
    Ok(jet)
}

/// Plain function value through order-zero jets.
pub fn eval_value<F: JetFn + ?Sized>(f: &F, point: &[f64]) -> Result<f64> {
    if !f.in_domain(point) {
        return Err(FinslerError::Domain(format!(
            "function is not smooth at {point:?}"
        )));
    }
    let v = f.eval(&Jet::values(point)).value();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FinslerError::Domain(format!(
            "non-finite value at {point:?}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn randers_half_square(b: [f64; 2]) -> impl Fn(&[Jet]) -> Jet {
        move |y: &[Jet]| {
            let alpha = (&y[0] * &y[0] + &y[1] * &y[1]).sqrt();
            let f = alpha + &y[0] * b[0] + &y[1] * b[1];
            f.square() * 0.5
        }
    }

    #[test]
    fn euclidean_norm_gradient_is_unit_vector() {
        let f = |y: &[Jet]| (&y[0] * &y[0] + &y[1] * &y[1]).sqrt();
        let j = jet_lift(&f, &[1.0, 0.0], 1).unwrap();
        assert_eq!(j.grad(0), 1.0);
        assert_eq!(j.grad(1), 0.0);
    }

    #[test]
    fn lift_at_nonsmooth_point_is_domain_error() {
        let f = WithDomain {
            f: |y: &[Jet]| (&y[0] * &y[0] + &y[1] * &y[1]).sqrt(),
            domain: |y: &[f64]| y.iter().any(|v| *v != 0.0),
        };
        assert!(matches!(
            jet_lift(&f, &[0.0, 0.0], 2),
            Err(FinslerError::Domain(_))
        ));
        // without a declared domain, the non-finite coefficients are still caught
        let g = |y: &[Jet]| (&y[0] * &y[0] + &y[1] * &y[1]).sqrt();
        assert!(matches!(
            jet_lift(&g, &[0.0, 0.0], 2),
            Err(FinslerError::Domain(_))
        ));
    }

    #[test]
    fn randers_third_derivatives_match_finite_differences() {
        let f = randers_half_square([0.3, 0.0]);
        let p = [1.0, 1.0];
        let j = jet_lift(&f, &p, 3).unwrap();
        for idx in [[0, 0, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1]] {
            let fd = fd_derivative(&f, &p, &idx, default_step(3)).unwrap();
            assert!(
                (j.derivative(&idx) - fd).abs() <= 1e-6,
                "{idx:?}: jet {} fd {fd}",
                j.derivative(&idx)
            );
        }
    }

    #[test]
    fn cubic_polynomial_exact() {
        // p(u,v) = 2u^3 - u v^2 + 3v + 1
        let f = |x: &[Jet]| &x[0].powi(3) * 2.0 - &x[0] * &x[1] * &x[1] + &x[1] * 3.0 + 1.0;
        let (u, v) = (0.7, -1.3);
        let j = jet_lift(&f, &[u, v], 3).unwrap();
        assert_relative_eq!(
            j.value(),
            2.0 * u * u * u - u * v * v + 3.0 * v + 1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(j.grad(0), 6.0 * u * u - v * v, epsilon = 1e-15);
        assert_relative_eq!(j.grad(1), -2.0 * u * v + 3.0, epsilon = 1e-15);
        assert_relative_eq!(j.hess(0, 0), 12.0 * u, epsilon = 1e-15);
        assert_relative_eq!(j.hess(0, 1), -2.0 * v, epsilon = 1e-15);
        assert_relative_eq!(j.hess(1, 1), -2.0 * u, epsilon = 1e-15);
        assert_eq!(j.third(0, 0, 0), 12.0);
        assert_eq!(j.third(0, 1, 1), -2.0);
        assert_eq!(j.third(0, 0, 1), 0.0);
        assert_eq!(j.third(1, 1, 1), 0.0);
    }

    proptest! {
        #[test]
        fn product_rule_is_exact(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.1f64..2.0) {
            let f = |x: &[Jet]| (&x[0] * &x[1]).sin() + &x[2];
            let g = |x: &[Jet]| x[2].sqrt() * &x[0] - x[1].exp();
            let p = [a, b, c];
            let fg = |x: &[Jet]| f(x) * g(x);
            let lhs = jet_lift(&fg, &p, 3).unwrap();
            let rhs = jet_lift(&f, &p, 3).unwrap() * jet_lift(&g, &p, 3).unwrap();
            for (l, r) in lhs.coefficients().iter().zip(rhs.coefficients()) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + l.abs()));
            }
        }

        #[test]
        fn chain_rule_is_exact(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            // exp(sin(x) * y) composed two ways
            let direct = |x: &[Jet]| (x[0].sin() * &x[1]).exp();
            let p = [a, b];
            let inner = jet_lift(&|x: &[Jet]| x[0].sin() * &x[1], &p, 3).unwrap();
            let composed = inner.exp();
            let lifted = jet_lift(&direct, &p, 3).unwrap();
            for (l, r) in lifted.coefficients().iter().zip(composed.coefficients()) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + l.abs()));
            }
        }
    }
}
