//! The magnetized Poisson bracket on `T C₁`.
//!
//! In chart coordinates
//!
//! ```text
//! {f, g} = Σ_i (∂f/∂q^i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q^i) + Σ_ij F_ij ∂f/∂p_i ∂g/∂p_j
//! ```
//!
//! with `F` the magnetic term from [`crate::cone::curvature`]. Gradients come
//! from forward-mode jets threaded through the embedding and frame, so single
//! brackets are exact up to round-off. Nested brackets use Richardson
//! extrapolated central differences of single-bracket values.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::cone::{self, curvature_from_frame, FrameData, PhasePoint};
use crate::error::Result;
use crate::jet::{Jet, JetElement};
use crate::jordan::{i_trace_commutator, AlgebraElement, AlgebraKind};

/// Phase-space evaluation context: `x`, `π`, `q`, `p` as jets seeded along
/// all `2·dim C₁` chart directions (q first, then p).
#[derive(Clone, Debug)]
pub struct PhaseJet {
    pub phase: PhasePoint,
    pub mu: f64,
    /// Number of seeded directions; zero for value-only contexts.
    pub dirs: usize,
    pub x: JetElement,
    pub pi: JetElement,
    pub trace_x: Jet,
    pub q: Vec<Jet>,
    pub p: Vec<Jet>,
    pub frame: FrameData,
    /// `{p_i, p_j}`.
    pub curvature: DMatrix<f64>,
}

/// Seeds `2·dim C₁` independent directions at a phase point.
pub fn jet_context(phase: &PhasePoint, mu: f64) -> Result<PhaseJet> {
    PhaseJet::new(phase, mu)
}

impl PhaseJet {
    pub fn new(phase: &PhasePoint, mu: f64) -> Result<Self> {
        let frame = cone::frame_with_second(&phase.point)?;
        let curvature = curvature_from_frame(&phase.x, &frame, mu)?;
        let d = phase.dim();
        let dirs = 2 * d;
        let zero = phase.x.scale(0.0);
        let second = frame.second();

        let mut x_grad = frame.partials.clone();
        x_grad.extend(std::iter::repeat_n(zero.clone(), d));

        // π = a^l ∂_l x with a^l = p_i g^{il}
        let a: Vec<f64> = (0..d)
            .map(|l| (0..d).map(|i| phase.p[i] * frame.ginv[(i, l)]).sum())
            .collect();
        let mut pi_grad = Vec::with_capacity(dirs);
        for j in 0..d {
            // ∂_j g_{mn}
            let dg = DMatrix::from_fn(d, d, |m, n| {
                second[j][m].ip(&frame.partials[n]) + frame.partials[m].ip(&second[j][n])
            });
            // ∂_j a^l = −a^m (∂_j g_{mn}) g^{nl}
            let tmp: Vec<f64> = (0..d)
                .map(|n| (0..d).map(|m| a[m] * dg[(m, n)]).sum())
                .collect();
            let mut acc = zero.clone();
            for l in 0..d {
                let da: f64 = -(0..d).map(|n| tmp[n] * frame.ginv[(n, l)]).sum::<f64>();
                acc = acc.axpy(da, &frame.partials[l]).axpy(a[l], &second[j][l]);
            }
            pi_grad.push(acc);
        }
        pi_grad.extend(frame.duals.iter().cloned());

        let x = JetElement {
            value: phase.x.clone(),
            grad: x_grad,
        };
        let trace_x = x.trace();
        Ok(Self {
            q: (0..d)
                .map(|i| Jet::variable(phase.point.q[i], dirs, i))
                .collect(),
            p: (0..d)
                .map(|i| Jet::variable(phase.p[i], dirs, d + i))
                .collect(),
            x,
            pi: JetElement {
                value: phase.pi.clone(),
                grad: pi_grad,
            },
            trace_x,
            phase: phase.clone(),
            mu,
            dirs,
            frame,
            curvature,
        })
    }

    /// Context without gradients, for plain evaluation.
    pub fn values(phase: &PhasePoint, mu: f64) -> Result<Self> {
        let frame = cone::frame(&phase.point)?;
        let curvature = curvature_from_frame(&phase.x, &frame, mu)?;
        Ok(Self {
            q: phase.point.q.iter().map(|v| Jet::constant(*v)).collect(),
            p: phase.p.iter().map(|v| Jet::constant(*v)).collect(),
            x: JetElement::constant(phase.x.clone()),
            pi: JetElement::constant(phase.pi.clone()),
            trace_x: Jet::constant(phase.x.trace()),
            phase: phase.clone(),
            mu,
            dirs: 0,
            frame,
            curvature,
        })
    }

    pub fn dim(&self) -> usize {
        self.phase.dim()
    }

    pub fn n(&self) -> usize {
        self.phase.algebra().n
    }

    pub fn constant(&self, u: &AlgebraElement) -> JetElement {
        JetElement::constant(u.clone())
    }

    /// Bracket of two observables already evaluated in this context.
    pub fn bracket(&self, f: &Jet, g: &Jet) -> f64 {
        assert!(self.dirs > 0, "bracket needs a differentiating context");
        bracket_grads(
            &f.gradient(self.dirs),
            &g.gradient(self.dirs),
            &self.curvature,
        )
    }
}

/// Bracket from full chart gradients `(∂/∂q, ∂/∂p)`.
pub fn bracket_grads(df: &[f64], dg: &[f64], curvature: &DMatrix<f64>) -> f64 {
    let d = curvature.nrows();
    debug_assert_eq!(df.len(), 2 * d);
    let mut acc = 0.0;
    for i in 0..d {
        acc += df[i] * dg[d + i] - df[d + i] * dg[i];
    }
    for i in 0..d {
        if df[d + i] == 0.0 {
            continue;
        }
        for j in 0..d {
            acc += curvature[(i, j)] * df[d + i] * dg[d + j];
        }
    }
    acc
}

type EvalFn = dyn Fn(&PhaseJet) -> Jet + Send + Sync;

/// A scalar function on phase space, evaluated on jets.
#[derive(Clone)]
pub struct Observable {
    label: String,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("label", &self.label)
            .finish()
    }
}

impl Observable {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(&PhaseJet) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, ctx: &PhaseJet) -> Jet {
        (self.eval)(ctx)
    }

    pub fn value(&self, phase: &PhasePoint, mu: f64) -> Result<f64> {
        Ok(self.eval(&PhaseJet::values(phase, mu)?).value)
    }

    pub fn q(i: usize) -> Self {
        Self::new(format!("q^{}", i + 1), move |c| c.q[i].clone())
    }

    pub fn p(i: usize) -> Self {
        Self::new(format!("p_{}", i + 1), move |c| c.p[i].clone())
    }

    pub fn constant(v: f64) -> Self {
        Self::new(format!("{v}"), move |_| Jet::constant(v))
    }

    /// `⟨u|x⟩`
    pub fn inner_x(u: &AlgebraElement) -> Self {
        let u = JetElement::constant(u.clone());
        Self::new("<u|x>", move |c| u.inner(&c.x))
    }

    /// `⟨u|π⟩`
    pub fn inner_pi(u: &AlgebraElement) -> Self {
        let u = JetElement::constant(u.clone());
        Self::new("<u|pi>", move |c| u.inner(&c.pi))
    }

    pub fn product(&self, other: &Observable) -> Observable {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({})*({})", a.label, b.label), move |c| {
            a.eval(c) * b.eval(c)
        })
    }

    pub fn sum(&self, other: &Observable) -> Observable {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({})+({})", a.label, b.label), move |c| {
            a.eval(c) + b.eval(c)
        })
    }

    pub fn scaled(&self, s: f64) -> Observable {
        let a = self.clone();
        Self::new(format!("{s}*({})", a.label), move |c| a.eval(c) * s)
    }
}

/// `{f, g}` at a phase point.
pub fn bracket(f: &Observable, g: &Observable, phase: &PhasePoint, mu: f64) -> Result<f64> {
    let ctx = PhaseJet::new(phase, mu)?;
    Ok(ctx.bracket(&f.eval(&ctx), &g.eval(&ctx)))
}

/// Outcome of comparing the π–π contraction of `{⟨ũ|π⟩, ⟨ṽ|π⟩}` against its
/// closed form `−2μ·i·tr(x[ũ, ṽ])/(tr x)³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Projects `u`, `v` to tangent fields `ũ = ū`, `ṽ = v̄` at the point and
/// checks the π–π contraction of their momenta. The contraction freezes
/// `ũ, ṽ`, so it is the full bracket of `⟨a|π⟩, ⟨b|π⟩` with constants
/// `a = ũ(x)`, `b = ṽ(x)`.
pub fn bracket_pp_check(
    u: &AlgebraElement,
    v: &AlgebraElement,
    phase: &PhasePoint,
    mu: f64,
) -> Result<PpCheck> {
    let a = cone::project_bar(&phase.x, u)?;
    let b = cone::project_bar(&phase.x, v)?;
    let ctx = PhaseJet::new(phase, mu)?;
    let fa = JetElement::constant(a.clone()).inner(&ctx.pi);
    let fb = JetElement::constant(b.clone()).inner(&ctx.pi);
    let lhs = ctx.bracket(&fa, &fb);
    let rhs = match phase.algebra().kind {
        AlgebraKind::Hn => {
            let (itr, _) = i_trace_commutator(&phase.x, &a, &b)?;
            -2.0 * mu * itr / phase.x.trace().powi(3)
        }
        AlgebraKind::Gamma3 => 0.0,
    };
    Ok(PpCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// Frame expression for `{⟨u|π⟩, ⟨v|π⟩}`:
///
/// ```text
/// p_i g^{il} ⟨ū̄|∂²x/∂q^j∂q^l⟩ ⟨v|E^j⟩ − (u ↔ v)  +  ⟨u|E^i⟩⟨v|E^j⟩ F_ij
/// ```
///
/// where `ū̄ = u − ū`. Evaluated from frame data only, without jets.
pub fn pi_pi_bracket_formula(
    u: &AlgebraElement,
    v: &AlgebraElement,
    phase: &PhasePoint,
    mu: f64,
) -> Result<f64> {
    let frame = cone::frame_with_second(&phase.point)?;
    let f = curvature_from_frame(&phase.x, &frame, mu)?;
    let d = frame.dim();
    let second = frame.second();
    let a: Vec<f64> = (0..d)
        .map(|l| (0..d).map(|i| phase.p[i] * frame.ginv[(i, l)]).sum())
        .collect();
    let half = |u: &AlgebraElement, v: &AlgebraElement| -> Result<f64> {
        let uu = u - &cone::project_bar(&phase.x, u)?;
        let ve: Vec<f64> = frame.duals.iter().map(|e| v.ip(e)).collect();
        let mut acc = 0.0;
        for l in 0..d {
            for j in 0..d {
                acc += a[l] * uu.ip(&second[j][l]) * ve[j];
            }
        }
        Ok(acc)
    };
    let ue: Vec<f64> = frame.duals.iter().map(|e| u.ip(e)).collect();
    let ve: Vec<f64> = frame.duals.iter().map(|e| v.ip(e)).collect();
    let mut magnetic = 0.0;
    for i in 0..d {
        for j in 0..d {
            magnetic += ue[i] * ve[j] * f[(i, j)];
        }
    }
    Ok(half(u, v)? - half(v, u)? + magnetic)
}

/// Gradient of `f` in chart coordinates `(q, p)` by Richardson-extrapolated
/// central differences with base step `step`.
pub fn fd_gradient(
    phase: &PhasePoint,
    step: f64,
    f: &dyn Fn(&PhasePoint) -> Result<f64>,
) -> Result<Vec<f64>> {
    let d = phase.dim();
    let mut out = Vec::with_capacity(2 * d);
    for k in 0..2 * d {
        let eval = |h: f64| -> Result<f64> {
            let mut q = phase.point.q.clone();
            let mut p = phase.p.clone();
            if k < d {
                q[k] += h;
            } else {
                p[k - d] += h;
            }
            let pt = cone::ChartPoint::new(phase.point.algebra, phase.point.chart, q)?;
            f(&cone::lift(&pt, &p)?)
        };
        let central = |h: f64| -> Result<f64> { Ok((eval(h)? - eval(-h)?) / (2.0 * h)) };
        let coarse = central(step)?;
        let fine = central(step / 2.0)?;
        out.push((4.0 * fine - coarse) / 3.0);
    }
    Ok(out)
}

const NESTED_STEP: f64 = 1e-3;

/// `{f, {g, h}}` with the inner bracket differentiated numerically.
pub fn nested_bracket(
    f: &Observable,
    g: &Observable,
    h: &Observable,
    phase: &PhasePoint,
    mu: f64,
) -> Result<f64> {
    let ctx = PhaseJet::new(phase, mu)?;
    let df = f.eval(&ctx).gradient(ctx.dirs);
    let inner = |pp: &PhasePoint| bracket(g, h, pp, mu);
    let dgh = fd_gradient(phase, NESTED_STEP, &inner)?;
    Ok(bracket_grads(&df, &dgh, &ctx.curvature))
}

/// Jacobi residual `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`.
pub fn jacobi_check(
    f: &Observable,
    g: &Observable,
    h: &Observable,
    phase: &PhasePoint,
    mu: f64,
) -> Result<f64> {
    let a = nested_bracket(f, g, h, phase, mu)?;
    let b = nested_bracket(g, h, f, phase, mu)?;
    let c = nested_bracket(h, f, g, phase, mu)?;
    Ok((a + b + c).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{lift, Chart, ChartPoint};
    use crate::jordan::AlgebraDescriptor;

    fn point() -> PhasePoint {
        let pt = ChartPoint::new(
            AlgebraDescriptor::hn(3).unwrap(),
            Chart::Pivot(0),
            vec![1.2, 0.3, -0.4, 0.1, 0.6],
        )
        .unwrap();
        lift(&pt, &[0.5, -0.2, 0.7, 0.1, -0.3]).unwrap()
    }

    #[test]
    fn coordinate_seeds() {
        let ph = point();
        let ctx = PhaseJet::new(&ph, 0.0).unwrap();
        let q1 = Observable::q(0).eval(&ctx);
        assert_eq!(q1.gradient(10)[0], 1.0);
        assert_eq!(q1.gradient(10).iter().sum::<f64>(), 1.0);
        let p1 = Observable::p(0).eval(&ctx);
        assert_eq!(p1.gradient(10)[5], 1.0);
        assert!(Observable::constant(3.0)
            .eval(&ctx)
            .gradient(10)
            .iter()
            .all(|g| *g == 0.0));
    }

    #[test]
    fn canonical_relations() {
        let ph = point();
        let mu = 0.7;
        let f = cone::curvature(&ph.point, mu).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let qq = bracket(&Observable::q(i), &Observable::q(j), &ph, mu).unwrap();
                let qp = bracket(&Observable::q(i), &Observable::p(j), &ph, mu).unwrap();
                let pp = bracket(&Observable::p(i), &Observable::p(j), &ph, mu).unwrap();
                assert_eq!(qq, 0.0);
                assert_eq!(qp, if i == j { 1.0 } else { 0.0 });
                assert_eq!(pp, f[(i, j)]);
            }
        }
    }

    #[test]
    fn momentum_jet_matches_finite_differences() {
        let ph = point();
        let ctx = PhaseJet::new(&ph, 0.0).unwrap();
        let u = crate::jordan::onb(&ph.algebra())[4].clone();
        let obs = Observable::inner_pi(&u);
        let jet = obs.eval(&ctx).gradient(10);
        let fd = fd_gradient(&ph, 1e-4, &|pp| obs.value(pp, 0.0)).unwrap();
        for k in 0..10 {
            assert!(
                (jet[k] - fd[k]).abs() < 1e-9,
                "{k}: {} vs {}",
                jet[k],
                fd[k]
            );
        }
    }

    #[test]
    fn equal_tangent_fields_give_zero() {
        let ph = point();
        let u = crate::jordan::onb(&ph.algebra())[2].clone();
        let c = bracket_pp_check(&u, &u, &ph, 0.9).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert!(c.lhs.abs() < 1e-14);
    }

    #[test]
    fn jacobi_on_coordinates() {
        let ph = point();
        let r = jacobi_check(
            &Observable::q(0),
            &Observable::q(1),
            &Observable::p(2),
            &ph,
            0.5,
        )
        .unwrap();
        assert!(r < 1e-12);
    }
}
