//! First-order jets: values carried together with their gradient along a
//! fixed set of seed directions.
//!
//! An empty gradient stands for the zero gradient, so constants never need to
//! know how many directions are in play.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::jordan::{i_trace_commutator, AlgebraElement};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
}

fn zip_grad(a: &[f64], b: &[f64], fa: f64, fb: f64) -> Vec<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => a.iter().map(|x| fa * x).collect(),
        (true, false) => b.iter().map(|x| fb * x).collect(),
        (false, false) => {
            assert_eq!(a.len(), b.len(), "jet direction count mismatch");
            a.iter().zip(b).map(|(x, y)| fa * x + fb * y).collect()
        }
    }
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: Vec::new(),
        }
    }

    /// The `i`-th seed variable among `dirs` directions.
    pub fn variable(value: f64, dirs: usize, i: usize) -> Self {
        let mut grad = vec![0.0; dirs];
        grad[i] = 1.0;
        Self { value, grad }
    }

    /// Gradient component `i`, zero for constants.
    pub fn d(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    /// Gradient padded to `dirs` entries.
    pub fn gradient(&self, dirs: usize) -> Vec<f64> {
        if self.grad.is_empty() {
            vec![0.0; dirs]
        } else {
            self.grad.clone()
        }
    }

    /// Chain rule for a scalar function with value `f` and derivative `df`.
    pub fn map(&self, f: f64, df: f64) -> Jet {
        Jet {
            value: f,
            grad: self.grad.iter().map(|g| df * g).collect(),
        }
    }

    pub fn recip(&self) -> Jet {
        let inv = 1.0 / self.value;
        self.map(inv, -inv * inv)
    }

    pub fn powi(&self, k: i32) -> Jet {
        self.map(self.value.powi(k), k as f64 * self.value.powi(k - 1))
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        self.map(s, 0.5 / s)
    }

    pub fn scale(&self, s: f64) -> Jet {
        self.map(self.value * s, s)
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet {
            value: self.value + rhs.value,
            grad: zip_grad(&self.grad, &rhs.grad, 1.0, 1.0),
        }
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet {
            value: self.value - rhs.value,
            grad: zip_grad(&self.grad, &rhs.grad, 1.0, -1.0),
        }
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        Jet {
            value: self.value * rhs.value,
            grad: zip_grad(&self.grad, &rhs.grad, rhs.value, self.value),
        }
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet {
            value: self.value + c,
            grad: self.grad.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { (&self).$m(&rhs) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet { (&self).$m(rhs) }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::constant(0.0), |a, b| a + b)
    }
}

/// Algebra-valued jet.
#[derive(Clone, Debug, PartialEq)]
pub struct JetElement {
    pub value: AlgebraElement,
    pub grad: Vec<AlgebraElement>,
}

impl JetElement {
    pub fn constant(value: AlgebraElement) -> Self {
        Self {
            value,
            grad: Vec::new(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.grad.is_empty()
    }

    fn bilinear<T>(
        a: &JetElement,
        b: &JetElement,
        f: impl Fn(&AlgebraElement, &AlgebraElement) -> T,
        add: impl Fn(T, T) -> T,
    ) -> (T, Vec<T>) {
        let value = f(&a.value, &b.value);
        let dirs = a.grad.len().max(b.grad.len());
        let grad = (0..dirs)
            .map(|i| match (a.grad.get(i), b.grad.get(i)) {
                (Some(da), Some(db)) => add(f(da, &b.value), f(&a.value, db)),
                (Some(da), None) => f(da, &b.value),
                (None, Some(db)) => f(&a.value, db),
                (None, None) => unreachable!(),
            })
            .collect();
        (value, grad)
    }

    /// Jordan product.
    pub fn jmul(&self, other: &JetElement) -> JetElement {
        let (value, grad) = Self::bilinear(self, other, |a, b| a.jm(b), |a, b| &a + &b);
        JetElement { value, grad }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &JetElement) -> Jet {
        let (value, grad) = Self::bilinear(self, other, |a, b| a.ip(b), |a, b| a + b);
        Jet { value, grad }
    }

    pub fn trace(&self) -> Jet {
        Jet {
            value: self.value.trace(),
            grad: self.grad.iter().map(|g| g.trace()).collect(),
        }
    }

    pub fn add(&self, other: &JetElement) -> JetElement {
        let (value, grad) = Self::bilinear_linear(self, other, |a, b| a + b);
        JetElement { value, grad }
    }

    pub fn sub(&self, other: &JetElement) -> JetElement {
        let (value, grad) = Self::bilinear_linear(self, other, |a, b| a - b);
        JetElement { value, grad }
    }

    fn bilinear_linear(
        a: &JetElement,
        b: &JetElement,
        f: impl Fn(&AlgebraElement, &AlgebraElement) -> AlgebraElement,
    ) -> (AlgebraElement, Vec<AlgebraElement>) {
        let value = f(&a.value, &b.value);
        let dirs = a.grad.len().max(b.grad.len());
        let zero = a.value.scale(0.0);
        let grad = (0..dirs)
            .map(|i| {
                f(
                    a.grad.get(i).unwrap_or(&zero),
                    b.grad.get(i).unwrap_or(&zero),
                )
            })
            .collect();
        (value, grad)
    }

    pub fn scale(&self, s: f64) -> JetElement {
        JetElement {
            value: self.value.scale(s),
            grad: self.grad.iter().map(|g| g.scale(s)).collect(),
        }
    }

    /// Product with a scalar jet.
    pub fn scale_jet(&self, s: &Jet) -> JetElement {
        let dirs = self.grad.len().max(s.grad.len());
        let grad = (0..dirs)
            .map(|i| {
                let mut g = self.value.scale(s.d(i));
                if let Some(dg) = self.grad.get(i) {
                    g = g.axpy(s.value, dg);
                }
                g
            })
            .collect();
        JetElement {
            value: self.value.scale(s.value),
            grad,
        }
    }

    /// Triple product `{u v w}`.
    pub fn triple(u: &JetElement, v: &JetElement, w: &JetElement) -> JetElement {
        let value = AlgebraElement::triple(&u.value, &v.value, &w.value);
        let dirs = u.grad.len().max(v.grad.len()).max(w.grad.len());
        let grad = (0..dirs)
            .map(|i| {
                let mut acc: Option<AlgebraElement> = None;
                let mut push = |t: AlgebraElement| {
                    acc = Some(match acc.take() {
                        Some(a) => &a + &t,
                        None => t,
                    })
                };
                if let Some(du) = u.grad.get(i) {
                    push(AlgebraElement::triple(du, &v.value, &w.value));
                }
                if let Some(dv) = v.grad.get(i) {
                    push(AlgebraElement::triple(&u.value, dv, &w.value));
                }
                if let Some(dw) = w.grad.get(i) {
                    push(AlgebraElement::triple(&u.value, &v.value, dw));
                }
                acc.unwrap_or_else(|| value.scale(0.0))
            })
            .collect();
        JetElement { value, grad }
    }

    /// `i·tr(x[a, b])` (real for hermitian arguments).
    pub fn i_trace_commutator(x: &JetElement, a: &JetElement, b: &JetElement) -> Jet {
        let f = |x: &AlgebraElement, a: &AlgebraElement, b: &AlgebraElement| {
            i_trace_commutator(x, a, b)
                .expect("i·tr(x[a,b]) needs H_n(C) operands")
                .0
        };
        let value = f(&x.value, &a.value, &b.value);
        let dirs = x.grad.len().max(a.grad.len()).max(b.grad.len());
        let grad = (0..dirs)
            .map(|i| {
                let mut g = 0.0;
                if let Some(dx) = x.grad.get(i) {
                    g += f(dx, &a.value, &b.value);
                }
                if let Some(da) = a.grad.get(i) {
                    g += f(&x.value, da, &b.value);
                }
                if let Some(db) = b.grad.get(i) {
                    g += f(&x.value, &a.value, db);
                }
                g
            })
            .collect();
        Jet { value, grad }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Jet::variable(2.0, 2, 0);
        let y = Jet::variable(3.0, 2, 1);
        let f = &(&x * &y) / &(&x + 1.0);
        // f = xy/(x+1): ∂x = y/(x+1)², ∂y = x/(x+1)
        assert!((f.value - 2.0).abs() < 1e-15);
        assert!((f.grad[0] - 3.0 / 9.0).abs() < 1e-15);
        assert!((f.grad[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constants_have_zero_gradient() {
        let c = Jet::constant(4.0);
        let x = Jet::variable(1.0, 3, 2);
        let s = &c * &x;
        assert_eq!(s.grad, vec![0.0, 0.0, 4.0]);
        assert_eq!(c.gradient(3), vec![0.0; 3]);
        assert!((&c * &c).grad.is_empty());
    }

    #[test]
    fn powers_and_roots() {
        let x = Jet::variable(4.0, 1, 0);
        assert_eq!(x.sqrt().grad[0], 0.25);
        assert_eq!(x.powi(-2).grad[0], -2.0 / 64.0);
    }
}
