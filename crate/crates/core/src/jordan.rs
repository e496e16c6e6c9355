//! Euclidean Jordan algebras `H_n(C)` (complex hermitian matrices) and the
//! spin factor `Γ(3) = R ⊕ R³`.
//!
//! Conventions:
//!
//! * Jordan product `uv = (u·v + v·u)/2` on `H_n(C)`; on `Γ(3)` the identity is
//!   `e₀` and `eᵢeⱼ = δᵢⱼ e₀`.
//! * Inner product `⟨u|v⟩ = tr(uv)/ρ` with `ρ` the rank, so the identity is a
//!   unit vector.
//! * Triple product `{uvw} = S_{uv}(w) = u(vw) − v(uw) + (uv)w`.
//!
//! Fallible entry points (`jmul`, `inner`, `smap`, ...) check that the operands
//! live in the same algebra. The arithmetic operators and the crate-internal
//! shorthand (`jm`, `ip`, `triple`) assume this and panic otherwise.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance used when accepting matrices from the outside world.
pub const HERMITIAN_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense complex square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(n: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != n * n || im.len() != n * n {
            return Err(Error::Usage(format!(
                "expected {} real and imaginary entries, got {} and {}",
                n * n,
                re.len(),
                im.len()
            )));
        }
        Ok(Self::from_fn(n, |i, j| {
            Complex64::new(re[i * n + j], im[i * n + j])
        }))
    }

    /// Outer product `v w†`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        assert_eq!(v.len(), w.len());
        Self::from_fn(v.len(), |i, j| v[i] * w[j].conj())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.n + j] = z;
    }

    pub fn re_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn im_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.im).collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "matrix order mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.n, other.n, "matrix order mismatch");
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from hermiticity, `max |mᵢⱼ − conj(mⱼᵢ)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }

    fn zip(&self, other: &CMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> CMatrix {
        assert_eq!(self.n, other.n, "matrix order mismatch");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, s: f64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }
}

/// Matrix commutator `[a, b] = a·b − b·a`.
pub fn matrix_commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &a.matmul(b) - &b.matmul(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Hn,
    Gamma3,
}

/// Which Jordan algebra, and its order for `H_n(C)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub kind: AlgebraKind,
    /// Matrix order; `2` for `Γ(3)`.
    pub n: usize,
}

impl AlgebraDescriptor {
    pub fn hn(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("matrix order must be positive".into()));
        }
        Ok(Self {
            kind: AlgebraKind::Hn,
            n,
        })
    }

    pub const fn gamma3() -> Self {
        Self {
            kind: AlgebraKind::Gamma3,
            n: 2,
        }
    }

    pub fn rank(&self) -> usize {
        match self.kind {
            AlgebraKind::Hn => self.n,
            AlgebraKind::Gamma3 => 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            AlgebraKind::Hn => self.n * self.n,
            AlgebraKind::Gamma3 => 4,
        }
    }

    /// Dimension of the rank-one cone `C₁`.
    pub fn cone_dim(&self) -> usize {
        match self.kind {
            AlgebraKind::Hn => 2 * self.n - 1,
            AlgebraKind::Gamma3 => 3,
        }
    }

    pub fn identity(&self) -> AlgebraElement {
        match self.kind {
            AlgebraKind::Hn => AlgebraElement::Hn(CMatrix::identity(self.n)),
            AlgebraKind::Gamma3 => AlgebraElement::Gamma3 {
                x0: 1.0,
                vec: [0.0; 3],
            },
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        match self.kind {
            AlgebraKind::Hn => AlgebraElement::Hn(CMatrix::zeros(self.n)),
            AlgebraKind::Gamma3 => AlgebraElement::Gamma3 {
                x0: 0.0,
                vec: [0.0; 3],
            },
        }
    }
}

impl fmt::Display for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AlgebraKind::Hn => write!(f, "H_{}(C)", self.n),
            AlgebraKind::Gamma3 => write!(f, "Gamma(3)"),
        }
    }
}

/// An element of `H_n(C)` or of `Γ(3)`.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraElement {
    /// Hermitian matrix; constructors keep it exactly hermitian.
    Hn(CMatrix),
    Gamma3 {
        x0: f64,
        vec: [f64; 3],
    },
}

impl AlgebraElement {
    /// Accepts a matrix that is hermitian to [`HERMITIAN_TOL`] and
    /// symmetrizes it.
    pub fn hermitian(m: CMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        let scale = 1.0 + m.frobenius_norm();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::Domain(format!(
                "matrix is not hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self::Hn(m.hermitian_part()))
    }

    /// Hermitian part of an arbitrary matrix.
    pub fn from_matrix_symmetrized(m: &CMatrix) -> Self {
        Self::Hn(m.hermitian_part())
    }

    pub fn gamma3(x0: f64, vec: [f64; 3]) -> Self {
        Self::Gamma3 { x0, vec }
    }

    /// Real diagonal matrix.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::Hn(CMatrix::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        match self {
            Self::Hn(m) => AlgebraDescriptor {
                kind: AlgebraKind::Hn,
                n: m.n(),
            },
            Self::Gamma3 { .. } => AlgebraDescriptor::gamma3(),
        }
    }

    pub fn as_matrix(&self) -> Result<&CMatrix> {
        match self {
            Self::Hn(m) => Ok(m),
            Self::Gamma3 { .. } => Err(Error::Unsupported(
                "matrix product is only defined on H_n(C)".into(),
            )),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        let (a, b) = (self.descriptor(), other.descriptor());
        if a == b {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch { left: a, right: b })
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Self::Hn(m) => m.trace().re,
            Self::Gamma3 { x0, .. } => 2.0 * x0,
        }
    }

    /// Jordan product.
    pub fn jmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.jm(other))
    }

    /// `L_u w`, identical to [`Self::jmul`].
    pub fn lmul(&self, w: &Self) -> Result<Self> {
        self.jmul(w)
    }

    /// Normalized trace form `⟨u|v⟩ = tr(uv)/ρ`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.ip(other))
    }

    /// Triple product `{u v w} = ([L_u, L_v] + L_{uv}) w`.
    pub fn smap(u: &Self, v: &Self, w: &Self) -> Result<Self> {
        u.check_same(v)?;
        u.check_same(w)?;
        Ok(Self::triple(u, v, w))
    }

    /// Associative matrix product (`H_n(C)` only).
    pub fn matmul(&self, other: &Self) -> Result<CMatrix> {
        self.check_same(other)?;
        Ok(self.as_matrix()?.matmul(other.as_matrix()?))
    }

    /// Anti-hermitian commutator `[u, v]` (`H_n(C)` only).
    pub fn commutator(&self, other: &Self) -> Result<CMatrix> {
        self.check_same(other)?;
        Ok(matrix_commutator(self.as_matrix()?, other.as_matrix()?))
    }

    /// The hermitian element `i[u, v]`.
    pub fn i_commutator(&self, other: &Self) -> Result<Self> {
        let c = self.commutator(other)?;
        Ok(Self::from_matrix_symmetrized(&c.scale(I)))
    }

    pub fn norm(&self) -> f64 {
        self.ip(self).max(0.0).sqrt()
    }

    /// Largest absolute coefficient, used for residual reporting.
    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Hn(m) => m.data.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Self::Gamma3 { x0, vec } => vec.iter().fold(x0.abs(), |a, b| a.max(b.abs())),
        }
    }

    pub(crate) fn jm(&self, other: &Self) -> Self {
        match (self, other) {
            (Self::Hn(a), Self::Hn(b)) => {
                let ab = a.matmul(b);
                // ba = (ab)† for hermitian a, b
                let n = ab.n();
                Self::Hn(CMatrix::from_fn(n, |i, j| {
                    (ab.get(i, j) + ab.get(j, i).conj()) * 0.5
                }))
            }
            (Self::Gamma3 { x0: a0, vec: a }, Self::Gamma3 { x0: b0, vec: b }) => Self::Gamma3 {
                x0: a0 * b0 + a[0] * b[0] + a[1] * b[1] + a[2] * b[2],
                vec: [
                    a0 * b[0] + b0 * a[0],
                    a0 * b[1] + b0 * a[1],
                    a0 * b[2] + b0 * a[2],
                ],
            },
            _ => panic!("algebra mismatch in Jordan product"),
        }
    }

    pub(crate) fn ip(&self, other: &Self) -> f64 {
        match (self, other) {
            (Self::Hn(a), Self::Hn(b)) => a.trace_of_product(b).re / a.n() as f64,
            (Self::Gamma3 { x0: a0, vec: a }, Self::Gamma3 { x0: b0, vec: b }) => {
                a0 * b0 + a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
            }
            _ => panic!("algebra mismatch in inner product"),
        }
    }

    pub(crate) fn triple(u: &Self, v: &Self, w: &Self) -> Self {
        &(&u.jm(&v.jm(w)) - &v.jm(&u.jm(w))) + &u.jm(v).jm(w)
    }

    fn zip(
        &self,
        other: &Self,
        f: impl Fn(f64, f64) -> f64,
        fc: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Self {
        match (self, other) {
            (Self::Hn(a), Self::Hn(b)) => Self::Hn(a.zip(b, fc)),
            (Self::Gamma3 { x0: a0, vec: a }, Self::Gamma3 { x0: b0, vec: b }) => Self::Gamma3 {
                x0: f(*a0, *b0),
                vec: [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2])],
            },
            _ => panic!("algebra mismatch in elementwise operation"),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        match self {
            Self::Hn(m) => Self::Hn(m * s),
            Self::Gamma3 { x0, vec } => Self::Gamma3 {
                x0: x0 * s,
                vec: [vec[0] * s, vec[1] * s, vec[2] * s],
            },
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip(other, |a, b| a + s * b, |a, b| a + b * s)
    }
}

impl Add<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip(rhs, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip(rhs, |a, b| a - b, |a, b| a - b)
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, s: f64) -> AlgebraElement {
        self.scale(s)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(-1.0)
    }
}

/// `Re(i·tr(x[a, b]))` together with the discarded imaginary part.
///
/// For hermitian `x, a, b` the trace `tr(x[a,b])` is purely imaginary, so the
/// second component is round-off only.
pub fn i_trace_commutator(
    x: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
) -> Result<(f64, f64)> {
    x.check_same(a)?;
    x.check_same(b)?;
    let (xm, am, bm) = (x.as_matrix()?, a.as_matrix()?, b.as_matrix()?);
    let t = xm.trace_of_product(&matrix_commutator(am, bm));
    let it = t * I;
    Ok((it.re, it.im))
}

/// Orthonormal basis of the algebra (`⟨e_α|e_β⟩ = δ_αβ`).
///
/// For `H_n(C)` this is the generalized Gell-Mann family scaled so that
/// `tr(e_α e_β) = n δ_αβ`, ordered as: identity, traceless diagonals,
/// then the symmetric and antisymmetric off-diagonal pairs.
pub fn onb(desc: &AlgebraDescriptor) -> Vec<AlgebraElement> {
    match desc.kind {
        AlgebraKind::Gamma3 => vec![
            AlgebraElement::gamma3(1.0, [0.0; 3]),
            AlgebraElement::gamma3(0.0, [1.0, 0.0, 0.0]),
            AlgebraElement::gamma3(0.0, [0.0, 1.0, 0.0]),
            AlgebraElement::gamma3(0.0, [0.0, 0.0, 1.0]),
        ],
        AlgebraKind::Hn => {
            let n = desc.n;
            let nf = n as f64;
            let mut out = Vec::with_capacity(n * n);
            out.push(desc.identity());
            for l in 1..n {
                let c = (nf / (l * (l + 1)) as f64).sqrt();
                let mut d = vec![0.0; n];
                d[..l].iter_mut().for_each(|x| *x = c);
                d[l] = -(l as f64) * c;
                out.push(AlgebraElement::diag(&d));
            }
            let c = (nf / 2.0).sqrt();
            for j in 0..n {
                for k in (j + 1)..n {
                    let mut s = CMatrix::zeros(n);
                    s.set(j, k, Complex64::new(c, 0.0));
                    s.set(k, j, Complex64::new(c, 0.0));
                    out.push(AlgebraElement::Hn(s));
                    let mut a = CMatrix::zeros(n);
                    a.set(j, k, Complex64::new(0.0, -c));
                    a.set(k, j, Complex64::new(0.0, c));
                    out.push(AlgebraElement::Hn(a));
                }
            }
            out
        }
    }
}

fn pauli(i: usize) -> CMatrix {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let m = match i {
        0 => [o, one, one, o],
        1 => [o, -I, I, o],
        _ => [one, o, o, -one],
    };
    CMatrix {
        n: 2,
        data: m.to_vec(),
    }
}

/// Jordan isomorphism `Γ(3) → H₂(C)`: `e₀ ↦ I₂`, `eᵢ ↦ σᵢ`.
pub fn gamma3_to_h2(u: &AlgebraElement) -> Result<AlgebraElement> {
    match u {
        AlgebraElement::Gamma3 { x0, vec } => {
            let mut m = CMatrix::identity(2).scale(Complex64::new(*x0, 0.0));
            for (i, c) in vec.iter().enumerate() {
                m = &m + &(&pauli(i) * *c);
            }
            Ok(AlgebraElement::Hn(m))
        }
        _ => Err(Error::Usage("expected a Gamma(3) element".into())),
    }
}

/// Inverse of [`gamma3_to_h2`].
pub fn h2_to_gamma3(u: &AlgebraElement) -> Result<AlgebraElement> {
    match u {
        AlgebraElement::Hn(m) if m.n() == 2 => {
            let (a, d, b) = (m.get(0, 0).re, m.get(1, 1).re, m.get(0, 1));
            Ok(AlgebraElement::gamma3(
                (a + d) / 2.0,
                [b.re, -b.im, (a - d) / 2.0],
            ))
        }
        _ => Err(Error::Usage("expected an H_2(C) element".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_el(i: usize) -> AlgebraElement {
        AlgebraElement::Hn(pauli(i))
    }

    #[test]
    fn anticommuting_paulis_have_zero_jordan_product() {
        let p = pauli_el(0).jmul(&pauli_el(2)).unwrap();
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn identity_is_neutral() {
        for desc in [
            AlgebraDescriptor::hn(3).unwrap(),
            AlgebraDescriptor::gamma3(),
        ] {
            for b in onb(&desc) {
                let u = b.scale(1.7);
                assert_eq!(desc.identity().jmul(&u).unwrap(), u);
            }
        }
    }

    #[test]
    fn gamma3_basis_squares_to_identity() {
        let e1 = AlgebraElement::gamma3(0.0, [1.0, 0.0, 0.0]);
        assert_eq!(e1.jmul(&e1).unwrap(), AlgebraElement::gamma3(1.0, [0.0; 3]));
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = AlgebraDescriptor::hn(2).unwrap().identity();
        let b = AlgebraDescriptor::gamma3().identity();
        assert!(matches!(a.jmul(&b), Err(Error::AlgebraMismatch { .. })));
        let c3 = AlgebraDescriptor::hn(3).unwrap().identity();
        assert!(matches!(a.inner(&c3), Err(Error::AlgebraMismatch { .. })));
    }

    #[test]
    fn pauli_commutator() {
        // [σx, σy] = 2i σz
        let got = pauli_el(0).commutator(&pauli_el(1)).unwrap();
        let want = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(0.0, 2.0),
            (1, 1) => c(0.0, -2.0),
            _ => c(0.0, 0.0),
        });
        assert!((&got - &want).frobenius_norm() < 1e-15);
        assert_eq!(
            pauli_el(0)
                .commutator(&pauli_el(0))
                .unwrap()
                .frobenius_norm(),
            0.0
        );
    }

    #[test]
    fn commutator_unsupported_on_gamma3() {
        let e = AlgebraDescriptor::gamma3().identity();
        assert!(matches!(e.commutator(&e), Err(Error::Unsupported(_))));
    }

    #[test]
    fn inner_normalization() {
        let desc = AlgebraDescriptor::hn(2).unwrap();
        assert_eq!(desc.identity().inner(&desc.identity()).unwrap(), 1.0);
        let u = AlgebraElement::diag(&[1.0, 0.0]);
        assert_eq!(u.inner(&u).unwrap(), 0.5);
        assert_eq!(AlgebraDescriptor::hn(5).unwrap().identity().trace(), 5.0);
        assert_eq!(AlgebraDescriptor::gamma3().identity().trace(), 2.0);
    }

    #[test]
    fn triple_product_with_identity_slot() {
        let desc = AlgebraDescriptor::hn(2).unwrap();
        let e = desc.identity();
        let u = AlgebraElement::hermitian(CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(0.3, 0.0),
            (0, 1) => c(1.0, -2.0),
            (1, 0) => c(1.0, 2.0),
            _ => c(-0.7, 0.0),
        }))
        .unwrap();
        let w = pauli_el(1).axpy(0.5, &pauli_el(2));
        let uw = u.jmul(&w).unwrap();
        let a = AlgebraElement::smap(&u, &e, &w).unwrap();
        let b = AlgebraElement::smap(&e, &u, &w).unwrap();
        assert!((&a - &uw).max_abs() < 1e-15);
        assert!((&b - &uw).max_abs() < 1e-15);
        let eew = AlgebraElement::smap(&e, &e, &w).unwrap();
        assert!((&eew - &w).max_abs() < 1e-15);
    }

    #[test]
    fn onb_sizes_and_square_sum() {
        for n in 2..6 {
            let desc = AlgebraDescriptor::hn(n).unwrap();
            let basis = onb(&desc);
            assert_eq!(basis.len(), n * n);
            let sum = basis
                .iter()
                .fold(desc.zero(), |acc, b| &acc + &b.jmul(b).unwrap());
            let want = desc.identity().scale((n * n) as f64);
            assert!((&sum - &want).max_abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn isomorphism_maps_identity_and_round_trips() {
        let e0 = AlgebraDescriptor::gamma3().identity();
        assert_eq!(
            gamma3_to_h2(&e0).unwrap(),
            AlgebraDescriptor::hn(2).unwrap().identity()
        );
        let u = AlgebraElement::gamma3(0.3, [-1.0, 2.5, 0.25]);
        let back = h2_to_gamma3(&gamma3_to_h2(&u).unwrap()).unwrap();
        assert!((&back - &u).max_abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_fn(2, |i, j| {
            if i == 0 && j == 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(matches!(
            AlgebraElement::hermitian(m),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn i_trace_commutator_is_real() {
        let x = AlgebraElement::diag(&[1.0, 0.0]);
        let (re, im) = i_trace_commutator(&x, &pauli_el(0), &pauli_el(1)).unwrap();
        // tr(x · 2iσz) = 2i, times i = −2
        assert!((re + 2.0).abs() < 1e-15);
        assert_eq!(im, 0.0);
    }
}
