//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries a value together with its full gradient and Hessian with
//! respect to a set of seed variables, and propagates both through arithmetic
//! and elementary functions. Evaluating a metric with jets seeded at a point
//! therefore yields the exact first and second partials of every component in
//! one pass, which is what curvature assembly needs.
//!
//! [`Jet1`] is the first-order truncation. It is used for quantities that are
//! themselves derivatives of jet-computed data (Christoffel symbols, frame
//! derivatives): their value and gradient are exact, but no Hessian is
//! available without third derivatives of the underlying data.
//!
//! Dimensions are dynamic and small (the charts in this crate have dimension
//! at most 8). A jet of dimension 0 degenerates to a plain value, so the same
//! evaluator closures serve both automatic differentiation and value-only
//! evaluation (e.g. for the finite-difference cross-check mode).

/// Value, gradient and Hessian of a scalar quantity at a point.
///
/// The Hessian is stored dense row-major (`dim * dim`) and is kept exactly
/// symmetric by construction: every rule writes `h[i][j]` and `h[j][i]` from
/// the same expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub val: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

/// First-order jet: value and gradient only.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    pub val: f64,
    pub grad: Vec<f64>,
}

impl Jet {
    pub fn constant(val: f64, dim: usize) -> Self {
        Jet {
            val,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// Seed variable `index` of a `dim`-dimensional evaluation.
    pub fn var(val: f64, index: usize, dim: usize) -> Self {
        let mut j = Jet::constant(val, dim);
        j.grad[index] = 1.0;
        j
    }

    /// Constant with the same seed dimension as `self`.
    pub fn lift(&self, c: f64) -> Self {
        Jet::constant(c, self.dim())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// First-order jet of the partial derivative `∂_i self`.
    ///
    /// Exact to the order carried: the value is `grad[i]` and the gradient is
    /// row `i` of the Hessian.
    pub fn partial(&self, i: usize) -> Jet1 {
        let d = self.dim();
        Jet1 {
            val: self.grad[i],
            grad: self.hess[i * d..(i + 1) * d].to_vec(),
        }
    }

    /// Truncate to first order.
    pub fn lower(&self) -> Jet1 {
        Jet1 {
            val: self.val,
            grad: self.grad.clone(),
        }
    }

    /// Chain rule for a scalar function with derivatives `fp = f'(val)`,
    /// `fpp = f''(val)`.
    fn chain(&self, f: f64, fp: f64, fpp: f64) -> Self {
        let d = self.dim();
        let mut out = Jet {
            val: f,
            grad: vec![0.0; d],
            hess: vec![0.0; d * d],
        };
        for i in 0..d {
            out.grad[i] = fp * self.grad[i];
        }
        // Fill the upper triangle and mirror, so symmetry is exact.
        for i in 0..d {
            for j in i..d {
                let v = fp * self.hess[i * d + j] + fpp * self.grad[i] * self.grad[j];
                out.hess[i * d + j] = v;
                out.hess[j * d + i] = v;
            }
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        let s = self.val.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.val))
    }

    pub fn exp(&self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Self {
        self.chain(self.val.ln(), 1.0 / self.val, -1.0 / (self.val * self.val))
    }

    pub fn sin(&self) -> Self {
        self.chain(self.val.sin(), self.val.cos(), -self.val.sin())
    }

    pub fn cos(&self) -> Self {
        self.chain(self.val.cos(), -self.val.sin(), -self.val.cos())
    }

    pub fn sinh(&self) -> Self {
        self.chain(self.val.sinh(), self.val.cosh(), self.val.sinh())
    }

    pub fn cosh(&self) -> Self {
        self.chain(self.val.cosh(), self.val.sinh(), self.val.cosh())
    }

    pub fn recip(&self) -> Self {
        let v = self.val;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn powi(&self, k: i32) -> Self {
        let v = self.val;
        self.chain(
            v.powi(k),
            f64::from(k) * v.powi(k - 1),
            f64::from(k) * f64::from(k - 1) * v.powi(k - 2),
        )
    }

    pub fn powf(&self, a: f64) -> Self {
        let v = self.val;
        self.chain(v.powf(a), a * v.powf(a - 1.0), a * (a - 1.0) * v.powf(a - 2.0))
    }

    /// Largest absolute Hessian asymmetry; zero up to rounding by construction.
    pub fn hess_asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.hess[i * d + j] - self.hess[j * d + i]).abs());
            }
        }
        worst
    }
}

impl Jet1 {
    pub fn constant(val: f64, dim: usize) -> Self {
        Jet1 {
            val,
            grad: vec![0.0; dim],
        }
    }

    pub fn lift(&self, c: f64) -> Self {
        Jet1::constant(c, self.dim())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn chain(&self, f: f64, fp: f64) -> Self {
        Jet1 {
            val: f,
            grad: self.grad.iter().map(|g| fp * g).collect(),
        }
    }

    pub fn sqrt(&self) -> Self {
        let s = self.val.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn recip(&self) -> Self {
        self.chain(1.0 / self.val, -1.0 / (self.val * self.val))
    }
}

/// Jets for the coordinates of `p`, seeded as independent variables.
pub fn seed_point(p: &[f64]) -> Vec<Jet> {
    let d = p.len();
    p.iter().enumerate().map(|(i, &x)| Jet::var(x, i, d)).collect()
}

/// Coordinate jets with no seeded directions: value-only evaluation.
pub fn seed_values(p: &[f64]) -> Vec<Jet> {
    p.iter().map(|&x| Jet::constant(x, 0)).collect()
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$method(self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::$method(self, &rhs)
            }
        }
        impl std::ops::$trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                Jet::$method(self, &self.lift(rhs))
            }
        }
        impl std::ops::$trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                Jet::$method(&self, &self.lift(rhs))
            }
        }
        impl std::ops::$trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$method(&rhs.lift(self), rhs)
            }
        }
        impl std::ops::$trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::$method(&rhs.lift(self), &rhs)
            }
        }
    };
}

impl Jet {
    fn add(a: &Jet, b: &Jet) -> Jet {
        debug_assert_eq!(a.dim(), b.dim());
        Jet {
            val: a.val + b.val,
            grad: a.grad.iter().zip(&b.grad).map(|(x, y)| x + y).collect(),
            hess: a.hess.iter().zip(&b.hess).map(|(x, y)| x + y).collect(),
        }
    }

    fn sub(a: &Jet, b: &Jet) -> Jet {
        debug_assert_eq!(a.dim(), b.dim());
        Jet {
            val: a.val - b.val,
            grad: a.grad.iter().zip(&b.grad).map(|(x, y)| x - y).collect(),
            hess: a.hess.iter().zip(&b.hess).map(|(x, y)| x - y).collect(),
        }
    }

    fn mul(a: &Jet, b: &Jet) -> Jet {
        debug_assert_eq!(a.dim(), b.dim());
        let d = a.dim();
        let mut out = Jet {
            val: a.val * b.val,
            grad: vec![0.0; d],
            hess: vec![0.0; d * d],
        };
        for i in 0..d {
            out.grad[i] = a.val * b.grad[i] + b.val * a.grad[i];
        }
        for i in 0..d {
            for j in i..d {
                let v = a.val * b.hess[i * d + j]
                    + b.val * a.hess[i * d + j]
                    + (a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i]);
                out.hess[i * d + j] = v;
                out.hess[j * d + i] = v;
            }
        }
        out
    }

    fn div(a: &Jet, b: &Jet) -> Jet {
        Jet::mul(a, &b.recip())
    }
}

jet_binop!(Add, add);
jet_binop!(Sub, sub);
jet_binop!(Mul, mul);
jet_binop!(Div, div);

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            val: -self.val,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

macro_rules! jet1_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<&Jet1> for &Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: &Jet1) -> Jet1 {
                Jet1::$method(self, rhs)
            }
        }
        impl std::ops::$trait<Jet1> for Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: Jet1) -> Jet1 {
                Jet1::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet1> for Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: &Jet1) -> Jet1 {
                Jet1::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet1> for &Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: Jet1) -> Jet1 {
                Jet1::$method(self, &rhs)
            }
        }
        impl std::ops::$trait<f64> for &Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: f64) -> Jet1 {
                Jet1::$method(self, &self.lift(rhs))
            }
        }
        impl std::ops::$trait<f64> for Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: f64) -> Jet1 {
                Jet1::$method(&self, &self.lift(rhs))
            }
        }
    };
}

impl Jet1 {
    fn add(a: &Jet1, b: &Jet1) -> Jet1 {
        debug_assert_eq!(a.dim(), b.dim());
        Jet1 {
            val: a.val + b.val,
            grad: a.grad.iter().zip(&b.grad).map(|(x, y)| x + y).collect(),
        }
    }

    fn sub(a: &Jet1, b: &Jet1) -> Jet1 {
        debug_assert_eq!(a.dim(), b.dim());
        Jet1 {
            val: a.val - b.val,
            grad: a.grad.iter().zip(&b.grad).map(|(x, y)| x - y).collect(),
        }
    }

    fn mul(a: &Jet1, b: &Jet1) -> Jet1 {
        debug_assert_eq!(a.dim(), b.dim());
        Jet1 {
            val: a.val * b.val,
            grad: a
                .grad
                .iter()
                .zip(&b.grad)
                .map(|(x, y)| a.val * y + b.val * x)
                .collect(),
        }
    }

    fn div(a: &Jet1, b: &Jet1) -> Jet1 {
        Jet1::mul(a, &b.recip())
    }
}

jet1_binop!(Add, add);
jet1_binop!(Sub, sub);
jet1_binop!(Mul, mul);
jet1_binop!(Div, div);

impl std::ops::Neg for &Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 {
            val: -self.val,
            grad: self.grad.iter().map(|g| -g).collect(),
        }
    }
}

impl std::ops::Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn poly(x: &[Jet]) -> Jet {
        // f(x,y,z) = x^2 y + sin(z) * y + 3
        &x[0] * &x[0] * &x[1] + x[2].sin() * &x[1] + x[0].lift(3.0)
    }

    #[test]
    fn gradient_and_hessian_of_polynomial() {
        let p = [1.2, -0.7, 0.4];
        let jets = seed_point(&p);
        let f = poly(&jets);
        let (x, y, z) = (p[0], p[1], p[2]);
        assert_abs_diff_eq!(f.val, x * x * y + z.sin() * y + 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.grad[0], 2.0 * x * y, epsilon = 1e-14);
        assert_abs_diff_eq!(f.grad[1], x * x + z.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.grad[2], z.cos() * y, epsilon = 1e-14);
        assert_abs_diff_eq!(f.hess_at(0, 0), 2.0 * y, epsilon = 1e-14);
        assert_abs_diff_eq!(f.hess_at(0, 1), 2.0 * x, epsilon = 1e-14);
        assert_abs_diff_eq!(f.hess_at(1, 2), z.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.hess_at(2, 2), -z.sin() * y, epsilon = 1e-14);
    }

    #[test]
    fn affine_function_has_exactly_zero_hessian() {
        let jets = seed_point(&[0.3, -2.0, 5.5]);
        let f = &jets[0] * 2.0 + &jets[1] * (-7.0) + &jets[2] + 11.0;
        assert!(f.hess.iter().all(|&h| h == 0.0));
        assert_eq!(f.grad, vec![2.0, -7.0, 1.0]);
    }

    #[test]
    fn partial_extracts_first_order_jet() {
        let jets = seed_point(&[1.2, -0.7, 0.4]);
        let f = poly(&jets);
        let d0 = f.partial(0);
        assert_eq!(d0.val, f.grad[0]);
        for j in 0..3 {
            assert_eq!(d0.grad[j], f.hess_at(0, j));
        }
    }

    #[test]
    fn zero_dim_jets_evaluate_values_only() {
        let jets = seed_values(&[1.2, -0.7, 0.4]);
        let f = poly(&jets);
        assert_eq!(f.dim(), 0);
        assert_abs_diff_eq!(
            f.val,
            1.2 * 1.2 * -0.7 + 0.4f64.sin() * -0.7 + 3.0,
            epsilon = 1e-14
        );
    }

    fn fd_grad(f: impl Fn(&[f64]) -> f64, p: &[f64], i: usize) -> f64 {
        let h = 1e-5;
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[i] += h;
        b[i] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    }

    proptest! {
        #[test]
        fn elementary_functions_match_finite_differences(
            x in 0.3f64..2.0, y in -1.5f64..1.5
        ) {
            let expr = |p: &[f64]| {
                (p[0].sqrt() * p[1].sinh() + (p[0] * p[1]).cos()).exp() / (p[0] + 2.0)
            };
            let jets = seed_point(&[x, y]);
            let f = (jets[0].sqrt() * jets[1].sinh() + (&jets[0] * &jets[1]).cos()).exp()
                / (&jets[0] + 2.0);
            for i in 0..2 {
                let fd = fd_grad(expr, &[x, y], i);
                prop_assert!((f.grad[i] - fd).abs() < 1e-6 * (1.0 + fd.abs()));
            }
            prop_assert!(f.hess_asymmetry() == 0.0);
        }

        #[test]
        fn product_rule_hessian_is_symmetric(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.1f64..2.0
        ) {
            let jets = seed_point(&[a, b, c]);
            let f = (&jets[0] * &jets[1] + jets[2].ln()) * jets[0].exp() * &jets[2];
            prop_assert!(f.hess_asymmetry() == 0.0);
        }
    }
}
