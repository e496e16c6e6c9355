//! Generators of the `su(n,n)` realization on `(T C₁, ω_μ)` and the derived
//! Kepler observables.
//!
//! ```text
//! X_u   = ⟨x|{πuπ}⟩ + nμ² tr(xu)/(tr x)² − μ i tr(x[u,π])/tr x
//! Y_v   = ⟨v|x⟩
//! S_uv  = ⟨S_uv(x)|π⟩ − μ i tr(x[u,v])/(2 tr x)
//! L_u   = ⟨ux|π⟩
//! L_u,v = ⟨L_u,v x|π⟩ − μ i tr(x[u,v])/(2 tr x),   L_u,v = [L_u, L_v]
//! H     = X_e/(2 Y_e) − 1/Y_e
//! A_u   = (X_u − Y_u X_e/Y_e)/2 + Y_u/Y_e
//! ```
//!
//! At `μ = 0` the magnetic terms are skipped, which is also what makes the
//! same code valid on `Γ(3)`.

use serde::{Deserialize, Serialize};

use crate::cone::PhasePoint;
use crate::error::{Error, Result};
use crate::jet::{Jet, JetElement};
use crate::jordan::{onb, AlgebraDescriptor, AlgebraElement, AlgebraKind};
use crate::poisson::{Observable, PhaseJet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    X,
    Y,
    S,
    L,
    Luv,
    Ham,
    #[serde(rename = "LRL")]
    Lrl,
    L2,
    A2,
}

/// A realization generator together with its algebra parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    X(AlgebraElement),
    Y(AlgebraElement),
    S(AlgebraElement, AlgebraElement),
    L(AlgebraElement),
    Luv(AlgebraElement, AlgebraElement),
    Ham,
    Lrl(AlgebraElement),
    L2,
    A2,
}

impl GeneratorSpec {
    /// Builds a spec from a kind tag and optional parameters, checking the
    /// parameter count.
    pub fn from_parts(
        kind: GeneratorKind,
        u: Option<AlgebraElement>,
        v: Option<AlgebraElement>,
    ) -> Result<Self> {
        let need = |e: Option<AlgebraElement>, name: &str| {
            e.ok_or_else(|| Error::Usage(format!("generator {kind:?} needs parameter `{name}`")))
        };
        let extra = match kind {
            GeneratorKind::Ham | GeneratorKind::L2 | GeneratorKind::A2 => {
                u.is_some() || v.is_some()
            }
            GeneratorKind::S | GeneratorKind::Luv => false,
            _ => v.is_some(),
        };
        if extra {
            return Err(Error::Usage(format!(
                "too many parameters for generator {kind:?}"
            )));
        }
        Ok(match kind {
            GeneratorKind::X => Self::X(need(u, "u")?),
            GeneratorKind::Y => Self::Y(need(u, "u")?),
            GeneratorKind::L => Self::L(need(u, "u")?),
            GeneratorKind::Lrl => Self::Lrl(need(u, "u")?),
            GeneratorKind::S => Self::S(need(u, "u")?, need(v, "v")?),
            GeneratorKind::Luv => Self::Luv(need(u, "u")?, need(v, "v")?),
            GeneratorKind::Ham => Self::Ham,
            GeneratorKind::L2 => Self::L2,
            GeneratorKind::A2 => Self::A2,
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        match self {
            Self::X(_) => GeneratorKind::X,
            Self::Y(_) => GeneratorKind::Y,
            Self::S(..) => GeneratorKind::S,
            Self::L(_) => GeneratorKind::L,
            Self::Luv(..) => GeneratorKind::Luv,
            Self::Ham => GeneratorKind::Ham,
            Self::Lrl(_) => GeneratorKind::Lrl,
            Self::L2 => GeneratorKind::L2,
            Self::A2 => GeneratorKind::A2,
        }
    }

    pub fn params(&self) -> Vec<&AlgebraElement> {
        match self {
            Self::X(u) | Self::Y(u) | Self::L(u) | Self::Lrl(u) => vec![u],
            Self::S(u, v) | Self::Luv(u, v) => vec![u, v],
            Self::Ham | Self::L2 | Self::A2 => vec![],
        }
    }
}

/// Deliberate defects used as negative controls for the verification suites.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corruption {
    #[default]
    None,
    /// Flip the sign of the magnetic term of `S_uv`.
    FlipSMuTerm,
    /// Drop the `nμ² tr(xu)/(tr x)²` term of `X_u`.
    DropXMuSquared,
}

/// The realization at magnetic charge `μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Realization {
    pub mu: f64,
    pub corruption: Corruption,
}

impl Realization {
    pub fn new(mu: f64) -> Self {
        Self {
            mu,
            corruption: Corruption::None,
        }
    }

    pub fn with_corruption(mut self, corruption: Corruption) -> Self {
        self.corruption = corruption;
        self
    }

    fn c(u: &AlgebraElement) -> JetElement {
        JetElement::constant(u.clone())
    }

    /// `−μ i tr(x[u,v]) / (2 tr x)`
    fn structure_mu_term(&self, ctx: &PhaseJet, u: &AlgebraElement, v: &AlgebraElement) -> Jet {
        let itr = JetElement::i_trace_commutator(&ctx.x, &Self::c(u), &Self::c(v));
        &itr / &ctx.trace_x * (-0.5 * self.mu)
    }

    pub fn x(&self, ctx: &PhaseJet, u: &AlgebraElement) -> Jet {
        let uj = Self::c(u);
        let mut acc = ctx.x.inner(&JetElement::triple(&ctx.pi, &uj, &ctx.pi));
        if self.mu != 0.0 {
            let n = ctx.n() as f64;
            if self.corruption != Corruption::DropXMuSquared {
                let trxu = ctx.x.jmul(&uj).trace();
                acc = acc + &trxu / &ctx.trace_x.powi(2) * (n * self.mu * self.mu);
            }
            let itr = JetElement::i_trace_commutator(&ctx.x, &uj, &ctx.pi);
            acc = acc - &itr / &ctx.trace_x * self.mu;
        }
        acc
    }

    pub fn y(&self, ctx: &PhaseJet, v: &AlgebraElement) -> Jet {
        Self::c(v).inner(&ctx.x)
    }

    pub fn s(&self, ctx: &PhaseJet, u: &AlgebraElement, v: &AlgebraElement) -> Jet {
        let sx = JetElement::triple(&Self::c(u), &Self::c(v), &ctx.x);
        let mut acc = sx.inner(&ctx.pi);
        if self.mu != 0.0 {
            let term = self.structure_mu_term(ctx, u, v);
            acc = match self.corruption {
                Corruption::FlipSMuTerm => acc - term,
                _ => acc + term,
            };
        }
        acc
    }

    pub fn l(&self, ctx: &PhaseJet, u: &AlgebraElement) -> Jet {
        Self::c(u).jmul(&ctx.x).inner(&ctx.pi)
    }

    pub fn luv(&self, ctx: &PhaseJet, u: &AlgebraElement, v: &AlgebraElement) -> Jet {
        let (uj, vj) = (Self::c(u), Self::c(v));
        let luv_x = uj.jmul(&vj.jmul(&ctx.x)).sub(&vj.jmul(&uj.jmul(&ctx.x)));
        let mut acc = luv_x.inner(&ctx.pi);
        if self.mu != 0.0 {
            acc = acc + self.structure_mu_term(ctx, u, v);
        }
        acc
    }

    fn identity(ctx: &PhaseJet) -> AlgebraElement {
        ctx.phase.algebra().identity()
    }

    pub fn hamiltonian(&self, ctx: &PhaseJet) -> Jet {
        let e = Self::identity(ctx);
        let xe = self.x(ctx, &e);
        let ye = self.y(ctx, &e);
        Self::hamiltonian_from(&xe, &ye)
    }

    fn hamiltonian_from(xe: &Jet, ye: &Jet) -> Jet {
        let inv = ye.recip();
        &(xe * &inv) * 0.5 - inv
    }

    pub fn lrl(&self, ctx: &PhaseJet, u: &AlgebraElement) -> Jet {
        let e = Self::identity(ctx);
        let (xe, ye) = (self.x(ctx, &e), self.y(ctx, &e));
        Self::lrl_from(&self.x(ctx, u), &self.y(ctx, u), &xe, &ye)
    }

    fn lrl_from(xu: &Jet, yu: &Jet, xe: &Jet, ye: &Jet) -> Jet {
        let ratio = xe / ye;
        (xu - &(yu * &ratio)) * 0.5 + yu / ye
    }

    /// `L² = ½ Σ_{α,β} L_{e_α,e_β}²`.
    pub fn casimir_l2(&self, ctx: &PhaseJet) -> Jet {
        let basis = onb(&ctx.phase.algebra());
        let mut acc = Jet::constant(0.0);
        for a in 0..basis.len() {
            for b in (a + 1)..basis.len() {
                let l = self.luv(ctx, &basis[a], &basis[b]);
                acc = acc + &l * &l;
            }
        }
        acc
    }

    /// `A² = −1 + Σ_α A_{e_α}²`.
    pub fn casimir_a2(&self, ctx: &PhaseJet) -> Jet {
        let e = Self::identity(ctx);
        let (xe, ye) = (self.x(ctx, &e), self.y(ctx, &e));
        onb(&ctx.phase.algebra())
            .iter()
            .map(|b| {
                let a = Self::lrl_from(&self.x(ctx, b), &self.y(ctx, b), &xe, &ye);
                &a * &a
            })
            .fold(Jet::constant(-1.0), |acc, t| acc + t)
    }

    pub fn eval(&self, ctx: &PhaseJet, spec: &GeneratorSpec) -> Jet {
        match spec {
            GeneratorSpec::X(u) => self.x(ctx, u),
            GeneratorSpec::Y(u) => self.y(ctx, u),
            GeneratorSpec::S(u, v) => self.s(ctx, u, v),
            GeneratorSpec::L(u) => self.l(ctx, u),
            GeneratorSpec::Luv(u, v) => self.luv(ctx, u, v),
            GeneratorSpec::Ham => self.hamiltonian(ctx),
            GeneratorSpec::Lrl(u) => self.lrl(ctx, u),
            GeneratorSpec::L2 => self.casimir_l2(ctx),
            GeneratorSpec::A2 => self.casimir_a2(ctx),
        }
    }

    /// Turns a spec into an observable.
    pub fn compile(&self, spec: &GeneratorSpec) -> Result<Observable> {
        let params = spec.params();
        if let Some(first) = params.first() {
            for p in &params[1..] {
                if p.descriptor() != first.descriptor() {
                    return Err(Error::AlgebraMismatch {
                        left: first.descriptor(),
                        right: p.descriptor(),
                    });
                }
            }
            if first.descriptor().kind == AlgebraKind::Gamma3 && self.mu != 0.0 {
                return Err(Error::Unsupported(
                    "magnetic charge must be zero on Gamma(3)".into(),
                ));
            }
        }
        let (me, spec) = (*self, spec.clone());
        Ok(Observable::new(format!("{:?}", spec.kind()), move |ctx| {
            me.eval(ctx, &spec)
        }))
    }

    /// Values of the basis-indexed generators at a phase point.
    pub fn basis_values(&self, phase: &PhasePoint) -> Result<BasisValues> {
        let ctx = PhaseJet::values(phase, self.mu)?;
        let desc = phase.algebra();
        let basis = onb(&desc);
        let e = desc.identity();
        let xe = self.x(&ctx, &e).value;
        let ye = self.y(&ctx, &e).value;
        let le = self.l(&ctx, &e).value;
        let x: Vec<f64> = basis.iter().map(|b| self.x(&ctx, b).value).collect();
        let y: Vec<f64> = basis.iter().map(|b| self.y(&ctx, b).value).collect();
        let l: Vec<f64> = basis.iter().map(|b| self.l(&ctx, b).value).collect();
        let m = basis.len();
        let mut luv = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in (a + 1)..m {
                let v = self.luv(&ctx, &basis[a], &basis[b]).value;
                luv[a][b] = v;
                luv[b][a] = -v;
            }
        }
        let h = 0.5 * xe / ye - 1.0 / ye;
        let lrl: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(xu, yu)| 0.5 * (xu - yu * xe / ye) + yu / ye)
            .collect();
        let l2 = luv
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row[a + 1..].iter())
            .map(|v| v * v)
            .sum();
        let a2 = -1.0 + lrl.iter().map(|a| a * a).sum::<f64>();
        Ok(BasisValues {
            algebra: desc,
            mu: self.mu,
            xe,
            ye,
            le,
            x,
            y,
            l,
            luv,
            lrl,
            h,
            l2,
            a2,
        })
    }
}

/// Generator values on the deterministic orthonormal basis `e_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisValues {
    pub algebra: AlgebraDescriptor,
    pub mu: f64,
    pub xe: f64,
    pub ye: f64,
    pub le: f64,
    /// `X_{e_α}`
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub l: Vec<f64>,
    /// `L_{e_α,e_β}` (antisymmetric).
    pub luv: Vec<Vec<f64>>,
    /// `A_{e_α}`
    pub lrl: Vec<f64>,
    pub h: f64,
    pub l2: f64,
    pub a2: f64,
}

impl BasisValues {
    /// The two sides of `−2H(L² − n²(n−1)μ²/4) = (n/2)²(n−1−A²)`.
    pub fn hla_sides(&self) -> (f64, f64) {
        let n = self.algebra.n as f64;
        let mu2 = self.mu * self.mu;
        let lhs = -2.0 * self.h * (self.l2 - n * n * (n - 1.0) * mu2 / 4.0);
        let rhs = (n / 2.0).powi(2) * (n - 1.0 - self.a2);
        (lhs, rhs)
    }
}

pub fn compile(spec: &GeneratorSpec, mu: f64) -> Result<Observable> {
    Realization::new(mu).compile(spec)
}

pub fn hamiltonian(mu: f64) -> Observable {
    let r = Realization::new(mu);
    Observable::new("H", move |ctx| r.hamiltonian(ctx))
}

pub fn lrl(u: &AlgebraElement, mu: f64) -> Observable {
    let (r, u) = (Realization::new(mu), u.clone());
    Observable::new("A_u", move |ctx| r.lrl(ctx, &u))
}

pub fn casimir_l2(mu: f64) -> Observable {
    let r = Realization::new(mu);
    Observable::new("L2", move |ctx| r.casimir_l2(ctx))
}

pub fn casimir_a2(mu: f64) -> Observable {
    let r = Realization::new(mu);
    Observable::new("A2", move |ctx| r.casimir_a2(ctx))
}
