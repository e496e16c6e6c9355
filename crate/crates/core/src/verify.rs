//! Randomized identity-verification suites.
//!
//! Every suite draws its inputs from per-trial ChaCha streams derived from
//! `(seed, trial index)`, evaluates trials in parallel and reduces them in
//! trial order, so a report is a pure function of its configuration.
//!
//! Scalar residuals are relative, `|L − R| / (1 + |L| + |R|)`; element
//! residuals use the norm in place of the absolute value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{lift, project_bar, unlift, Chart, ChartPoint, PhasePoint};
use crate::dynamics::{self, integrate, rk4_step, FlowConfig};
use crate::error::{Error, Result};
use crate::generators::{Corruption, GeneratorSpec, Realization};
use crate::jet::JetElement;
use crate::jordan::{
    gamma3_to_h2, h2_to_gamma3, onb, AlgebraDescriptor, AlgebraElement, AlgebraKind, CMatrix,
};
use crate::poisson::{bracket_pp_check, fd_gradient, pi_pi_bracket_formula, PhaseJet};
use crate::sample::{
    random_cone_element, random_element, random_phase_point, trial_rng, SampleRng,
};

pub const MU_GRID: [f64; 4] = [0.0, 0.5, -1.3, 2.7];

pub const TOL_MATRIX: f64 = 1e-12;
pub const TOL_AXIOMS: f64 = 1e-12;
pub const TOL_LEMMA: f64 = 1e-9;
pub const TOL_REALIZATION: f64 = 1e-8;
pub const TOL_QUADRATIC: f64 = 1e-10;
pub const TOL_HAND_POINT: f64 = 1e-13;
pub const TOL_KEPLER_POINTWISE: f64 = 1e-10;
pub const TOL_KEPLER_TRAJECTORY: f64 = 1e-6;
pub const TOL_KEPLER_PERIOD: f64 = 1e-6;
pub const TOL_KEPLER_LRL: f64 = 1e-7;
pub const TOL_DIFFERENTIATION: f64 = 1e-7;

/// Base step of the Richardson-extrapolated differences in the
/// differentiation suite.
pub const FD_STEP: f64 = 1e-5;

pub fn rel(l: f64, r: f64) -> f64 {
    let v = (l - r).abs() / (1.0 + l.abs() + r.abs());
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn rel_el(l: &AlgebraElement, r: &AlgebraElement) -> f64 {
    let v = (l - r).norm() / (1.0 + l.norm() + r.norm());
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn rel_mat(l: &CMatrix, r: &CMatrix) -> f64 {
    let v = (l - r).frobenius_norm() / (1.0 + l.frobenius_norm() + r.frobenius_norm());
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub max_residual: f64,
    pub argmax_trial: usize,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub algebra: AlgebraKind,
    pub n_list: Vec<usize>,
    pub mu_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Headline tolerance; individual identities may carry their own.
    pub tolerance: f64,
    pub max_residual: f64,
    pub identities: Vec<IdentityResult>,
    pub corruption: Corruption,
    pub pass: bool,
}

impl SuiteReport {
    pub fn identity(&self, name: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|i| i.name == name)
    }
}

/// Knobs shared by all suites.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Replaces the default tolerance of every identity in the suite.
    pub tolerance: Option<f64>,
    /// Negative control: evaluate generators with a deliberate defect.
    pub corruption: Corruption,
}

type Sample = (&'static str, f64, f64);

struct Tally(Vec<IdentityResult>);

impl Tally {
    fn add(&mut self, name: &str, residual: f64, trial: usize, tol: f64) {
        let residual = if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        };
        match self.0.iter_mut().find(|e| e.name == name) {
            Some(e) => {
                if residual > e.max_residual {
                    e.max_residual = residual;
                    e.argmax_trial = trial;
                }
            }
            None => self.0.push(IdentityResult {
                name: name.to_string(),
                max_residual: residual,
                argmax_trial: trial,
                tolerance: tol,
                pass: false,
            }),
        }
    }
}

struct Frame<'a> {
    name: &'a str,
    algebra: AlgebraKind,
    n_list: Vec<usize>,
    mu_list: Vec<f64>,
    trials: usize,
    seed: u64,
    tolerance: f64,
    opts: SuiteOptions,
}

impl Frame<'_> {
    /// Runs `trial(desc, μ, rng)` for every `(n, μ, trial)` and reduces the
    /// samples in trial order.
    fn run<F>(&self, trial: F) -> Result<SuiteReport>
    where
        F: Fn(&AlgebraDescriptor, f64, &mut SampleRng, usize) -> Result<Vec<Sample>> + Sync,
    {
        let mut configs = Vec::new();
        for &n in &self.n_list {
            let desc = match self.algebra {
                AlgebraKind::Hn => AlgebraDescriptor::hn(n)?,
                AlgebraKind::Gamma3 => AlgebraDescriptor::gamma3(),
            };
            for &mu in &self.mu_list {
                configs.push((desc, mu));
            }
        }
        let total = configs.len() * self.trials;
        let results: Vec<Result<Vec<Sample>>> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let (desc, mu) = configs[idx / self.trials];
                let mut r = trial_rng(self.seed, idx as u64);
                trial(&desc, mu, &mut r, idx % self.trials)
            })
            .collect();
        let mut tally = Tally(Vec::new());
        for (idx, res) in results.into_iter().enumerate() {
            for (name, residual, tol) in res? {
                tally.add(name, residual, idx, tol);
            }
        }
        Ok(self.finish(tally))
    }

    fn finish(&self, mut tally: Tally) -> SuiteReport {
        for e in &mut tally.0 {
            if let Some(t) = self.opts.tolerance {
                e.tolerance = t;
            }
            e.pass = e.max_residual <= e.tolerance;
        }
        let max_residual = tally.0.iter().map(|e| e.max_residual).fold(0.0, f64::max);
        SuiteReport {
            suite: self.name.to_string(),
            algebra: self.algebra,
            n_list: self.n_list.clone(),
            mu_list: self.mu_list.clone(),
            trials: self.trials,
            seed: self.seed,
            tolerance: self.opts.tolerance.unwrap_or(self.tolerance),
            max_residual,
            pass: !tally.0.is_empty() && tally.0.iter().all(|e| e.pass),
            identities: tally.0,
            corruption: self.opts.corruption,
        }
    }
}

fn check_grid(algebra: AlgebraKind, n_list: &[usize], mu_list: &[f64]) -> Result<()> {
    if mu_list.is_empty() || n_list.is_empty() {
        return Err(Error::Usage("empty n or mu list".into()));
    }
    if mu_list.iter().any(|m| !m.is_finite()) {
        return Err(Error::Usage("mu must be finite".into()));
    }
    match algebra {
        AlgebraKind::Hn => {
            if let Some(n) = n_list.iter().find(|&&n| n < 2) {
                return Err(Error::Usage(format!("n must be at least 2, got {n}")));
            }
        }
        AlgebraKind::Gamma3 => {
            if mu_list.iter().any(|&m| m != 0.0) {
                return Err(Error::Unsupported(
                    "magnetic charge must be zero on Gamma(3)".into(),
                ));
            }
        }
    }
    Ok(())
}

fn mat(u: &AlgebraElement) -> &CMatrix {
    u.as_matrix().expect("H_n(C) element")
}

/// Matrix identities on the rank-one cone: `x² = tr x·x`, `x·u·x = tr(xu)x`,
/// `L_{u,v}x = ¼[[u,v],x]`, `½[x,[x,u]] = (tr x)xu − tr(xu)x` and the two
/// consequences of `x² = tr x·x`. Trial 0 uses `u = e`, every tenth trial
/// scales `x` by `10³`.
pub fn suite_matrix_identities(
    n_list: &[usize],
    trials: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    check_grid(AlgebraKind::Hn, n_list, &[0.0])?;
    let frame = Frame {
        name: "matrix",
        algebra: AlgebraKind::Hn,
        n_list: n_list.to_vec(),
        mu_list: vec![0.0],
        trials,
        seed,
        tolerance: TOL_MATRIX,
        opts: *opts,
    };
    frame.run(|desc, _, r, t| {
        let mut x = random_cone_element(desc, r);
        if t % 10 == 1 {
            x = x.scale(1e3);
        }
        let u = if t == 0 {
            desc.identity()
        } else {
            random_element(desc, r)
        };
        let v = random_element(desc, r);
        let (xm, um, vm) = (mat(&x), mat(&u), mat(&v));
        let trx = x.trace();
        let trxu = xm.trace_of_product(um).re;
        let comm = crate::jordan::matrix_commutator;
        let luv_x = &u.jm(&v.jm(&x)) - &v.jm(&u.jm(&x));
        let lhs_key = &comm(xm, &comm(xm, um)) * 0.5;
        let rhs_key = &(mat(&x.jm(&u)) * trx) - &(xm * trxu);
        let ux = u.jm(&x);
        let (itr_uxv, _) = crate::jordan::i_trace_commutator(&x, &ux, &v)?;
        let (itr_uv, _) = crate::jordan::i_trace_commutator(&x, &u, &v)?;
        let tangent = u.i_commutator(&x)?;
        Ok(vec![
            (
                "x_squared",
                rel_mat(&xm.matmul(xm), &(xm * trx)),
                TOL_MATRIX,
            ),
            (
                "xux",
                rel_mat(&xm.matmul(um).matmul(xm), &(xm * trxu)),
                TOL_MATRIX,
            ),
            (
                "luv_commutator",
                rel_mat(mat(&luv_x), &(&comm(&comm(um, vm), xm) * 0.25)),
                TOL_MATRIX,
            ),
            ("key_identity", rel_mat(&lhs_key, &rhs_key), TOL_MATRIX),
            (
                "x_ux_commutator",
                rel_mat(&comm(xm, mat(&ux)), &(&comm(xm, um) * (trx / 2.0))),
                TOL_MATRIX,
            ),
            ("trace_x_ux_v", rel(itr_uxv, 0.5 * trx * itr_uv), TOL_MATRIX),
            (
                "i_commutator_tangent",
                rel_el(&tangent, &project_bar(&x, &tangent)?),
                TOL_MATRIX,
            ),
        ])
    })
}

/// Jordan and structure-algebra axioms on random elements.
pub fn suite_jordan_axioms(
    algebra: AlgebraKind,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    check_grid(algebra, n_list, &[0.0])?;
    let frame = Frame {
        name: "jordan-axioms",
        algebra,
        n_list: if algebra == AlgebraKind::Gamma3 {
            vec![2]
        } else {
            n_list.to_vec()
        },
        mu_list: vec![0.0],
        trials,
        seed,
        tolerance: TOL_AXIOMS,
        opts: *opts,
    };
    frame.run(|desc, _, r, _| {
        let [u, v, z, w, y] = [0; 5].map(|_| random_element(desc, r));
        let t = AlgebraElement::triple;
        let u2 = u.jm(&u);
        let s = |a: &AlgebraElement, b: &AlgebraElement, y: &AlgebraElement| t(a, b, y);
        let lhs_str = &s(&u, &v, &s(&z, &w, &y)) - &s(&z, &w, &s(&u, &v, &y));
        let rhs_str = &s(&t(&u, &v, &z), &w, &y) - &s(&z, &t(&v, &u, &w), &y);
        let e = desc.identity();
        let mut out = vec![
            ("commutativity", rel_el(&u.jm(&v), &v.jm(&u)), TOL_AXIOMS),
            (
                "jordan_identity",
                rel_el(&u.jm(&u2.jm(&v)), &u2.jm(&u.jm(&v))),
                TOL_AXIOMS,
            ),
            (
                "multiplication_self_adjoint",
                rel(u.jm(&v).ip(&w), v.ip(&u.jm(&w))),
                TOL_AXIOMS,
            ),
            (
                "structure_unit",
                rel_el(&t(&u, &e, &w), &u.jm(&w)),
                TOL_AXIOMS,
            ),
            ("structure_bracket", rel_el(&lhs_str, &rhs_str), TOL_AXIOMS),
            ("inner_normalization", rel(e.ip(&e), 1.0), TOL_AXIOMS),
        ];
        if desc.kind == AlgebraKind::Hn {
            let nf = desc.n as f64;
            let basis = onb(desc);
            let lhs = basis
                .iter()
                .fold(desc.zero(), |acc, b| &acc + &b.jm(&b.jm(&w)));
            let rhs = (&w + &e.scale(w.ip(&e))).scale(nf * nf / 2.0);
            out.push(("basis_square_sum", rel_el(&lhs, &rhs), TOL_AXIOMS));
        }
        Ok(out)
    })
}

/// Bracket relations of the tangent-bundle lemma and its magnetized form:
/// `{⟨u|x⟩,⟨v|x⟩} = 0`, `{⟨u|x⟩,⟨v|π⟩} = ⟨u|v̄⟩`, the second-partials
/// expression for `{⟨u|π⟩,⟨v|π⟩}`, and the π–π contraction for tangent
/// fields.
pub fn suite_bracket_lemma(
    algebra: AlgebraKind,
    n_list: &[usize],
    mu_list: &[f64],
    trials: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    check_grid(algebra, n_list, mu_list)?;
    let frame = Frame {
        name: "lemma",
        algebra,
        n_list: if algebra == AlgebraKind::Gamma3 {
            vec![2]
        } else {
            n_list.to_vec()
        },
        mu_list: mu_list.to_vec(),
        trials,
        seed,
        tolerance: TOL_LEMMA,
        opts: *opts,
    };
    frame.run(|desc, mu, r, _| {
        let ph = random_phase_point(desc, r)?;
        let u = random_element(desc, r);
        let v = random_element(desc, r);
        let ctx = PhaseJet::new(&ph, mu)?;
        let (uc, vc) = (
            JetElement::constant(u.clone()),
            JetElement::constant(v.clone()),
        );
        let ux = uc.inner(&ctx.x);
        let vx = vc.inner(&ctx.x);
        let upi = uc.inner(&ctx.pi);
        let vpi = vc.inner(&ctx.pi);
        let pp = bracket_pp_check(&u, &v, &ph, mu)?;
        Ok(vec![
            ("x_x", rel(ctx.bracket(&ux, &vx), 0.0), TOL_LEMMA),
            (
                "x_pi",
                rel(ctx.bracket(&ux, &vpi), u.ip(&project_bar(&ph.x, &v)?)),
                TOL_LEMMA,
            ),
            (
                "pi_pi_second_partials",
                rel(
                    ctx.bracket(&upi, &vpi),
                    pi_pi_bracket_formula(&u, &v, &ph, mu)?,
                ),
                TOL_LEMMA,
            ),
            ("pi_pi_tangent_contraction", rel(pp.lhs, pp.rhs), TOL_LEMMA),
        ])
    })
}

/// All bracket families of the realization plus the angular-momentum
/// building blocks, on fresh random `u, v, z, w` per trial.
pub fn suite_realization(
    algebra: AlgebraKind,
    n_list: &[usize],
    mu_list: &[f64],
    trials: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    check_grid(algebra, n_list, mu_list)?;
    let frame = Frame {
        name: "realization",
        algebra,
        n_list: if algebra == AlgebraKind::Gamma3 {
            vec![2]
        } else {
            n_list.to_vec()
        },
        mu_list: mu_list.to_vec(),
        trials,
        seed,
        tolerance: TOL_REALIZATION,
        opts: *opts,
    };
    let corruption = opts.corruption;
    frame.run(move |desc, mu, r, _| {
        let ph = random_phase_point(desc, r)?;
        let [u, v, z, w] = [0; 4].map(|_| random_element(desc, r));
        let re = Realization::new(mu).with_corruption(corruption);
        let ctx = PhaseJet::new(&ph, mu)?;
        let vals = PhaseJet::values(&ph, mu)?;
        let t = AlgebraElement::triple;
        let br = |a: crate::jet::Jet, b: crate::jet::Jet| ctx.bracket(&a, &b);
        let luv_z = &u.jm(&v.jm(&z)) - &v.jm(&u.jm(&z));
        let tol = TOL_REALIZATION;
        Ok(vec![
            ("x_x", rel(br(re.x(&ctx, &u), re.x(&ctx, &v)), 0.0), tol),
            ("y_y", rel(br(re.y(&ctx, &u), re.y(&ctx, &v)), 0.0), tol),
            (
                "x_y",
                rel(
                    br(re.x(&ctx, &u), re.y(&ctx, &v)),
                    -2.0 * re.s(&vals, &u, &v).value,
                ),
                tol,
            ),
            (
                "s_x",
                rel(
                    br(re.s(&ctx, &u, &v), re.x(&ctx, &z)),
                    re.x(&vals, &t(&u, &v, &z)).value,
                ),
                tol,
            ),
            (
                "s_y",
                rel(
                    br(re.s(&ctx, &u, &v), re.y(&ctx, &z)),
                    -re.y(&vals, &t(&v, &u, &z)).value,
                ),
                tol,
            ),
            (
                "s_s",
                rel(
                    br(re.s(&ctx, &u, &v), re.s(&ctx, &z, &w)),
                    re.s(&vals, &t(&u, &v, &z), &w).value - re.s(&vals, &z, &t(&v, &u, &w)).value,
                ),
                tol,
            ),
            (
                "l_l",
                rel(
                    br(re.l(&ctx, &u), re.l(&ctx, &v)),
                    re.luv(&vals, &u, &v).value,
                ),
                tol,
            ),
            (
                "luv_l",
                rel(
                    br(re.luv(&ctx, &u, &v), re.l(&ctx, &z)),
                    re.l(&vals, &luv_z).value,
                ),
                tol,
            ),
        ])
    })
}

/// Quadratic relations (i)–(vii), the energy/angular-momentum/LRL relation,
/// proof intermediates and the hand-computed point.
pub fn suite_quadratic(
    n_list: &[usize],
    mu_list: &[f64],
    trials: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    check_grid(AlgebraKind::Hn, n_list, mu_list)?;
    let frame = Frame {
        name: "quadratic",
        algebra: AlgebraKind::Hn,
        n_list: n_list.to_vec(),
        mu_list: mu_list.to_vec(),
        trials,
        seed,
        tolerance: TOL_QUADRATIC,
        opts: *opts,
    };
    let corruption = opts.corruption;
    let mut report = frame.run(move |desc, mu, r, _| {
        let ph = random_phase_point(desc, r)?;
        let u = random_element(desc, r);
        let re = Realization::new(mu).with_corruption(corruption);
        quadratic_samples(&re, &ph, &u)
    })?;
    // hand point: n = 2, x = π = diag(1, 0)
    let mut tally = Tally(std::mem::take(&mut report.identities));
    for (i, &mu) in mu_list.iter().enumerate() {
        let x = AlgebraElement::diag(&[1.0, 0.0]);
        let (pt, p) = unlift(&x, &x, None)?;
        let ph = lift(&pt, &p)?;
        let re = Realization::new(mu).with_corruption(corruption);
        let b = re.basis_values(&ph)?;
        let sum_l2: f64 = b.l.iter().map(|l| l * l).sum();
        let lhs = sum_l2 - b.le * b.le - b.xe * b.ye;
        let abs = |l: f64, r: f64| (l - r).abs();
        tally.add(
            "hand_point_relation_i",
            abs(lhs, -mu * mu),
            i,
            TOL_HAND_POINT,
        );
        tally.add(
            "hand_point_values",
            abs(b.ye, 0.5)
                .max(abs(b.le, 0.5))
                .max(abs(b.xe, 0.5 + 2.0 * mu * mu)),
            i,
            TOL_HAND_POINT,
        );
        tally.add("hand_point_l_sum", abs(sum_l2, 0.5), i, TOL_HAND_POINT);
    }
    Ok(frame.finish(tally))
}

fn quadratic_samples(re: &Realization, ph: &PhasePoint, u: &AlgebraElement) -> Result<Vec<Sample>> {
    let b = re.basis_values(ph)?;
    let vals = PhaseJet::values(ph, re.mu)?;
    let desc = ph.algebra();
    let basis = onb(&desc);
    let nf = desc.n as f64;
    let mu2 = re.mu * re.mu;
    let (xu, yu, lu) = (
        re.x(&vals, u).value,
        re.y(&vals, u).value,
        re.l(&vals, u).value,
    );
    let lau: Vec<f64> = basis.iter().map(|e| re.luv(&vals, e, u).value).collect();
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(p, q)| p * q).sum::<f64>();
    let sum_l2 = dot(&b.l, &b.l);
    let sum_luv2: f64 = b.luv.iter().flatten().map(|v| v * v).sum();
    let (trx, trpi) = (ph.x.trace(), ph.pi.trace());
    let trpi2 = ph.pi.jm(&ph.pi).trace();
    let (hl, hr) = b.hla_sides();
    let tol = TOL_QUADRATIC;
    Ok(vec![
        (
            "i",
            rel((2.0 / nf) * sum_l2 - b.le * b.le - b.xe * b.ye, -mu2),
            tol,
        ),
        ("ii_x", rel(dot(&b.x, &b.l), nf * b.xe * b.le), tol),
        ("ii_y", rel(dot(&b.y, &b.l), nf * b.ye * b.le), tol),
        (
            "iii",
            rel((4.0 / nf) * dot(&lau, &b.l), -xu * b.ye + b.xe * yu),
            tol,
        ),
        ("iv_x", rel(dot(&b.x, &b.x), nf * b.xe * b.xe), tol),
        ("iv_y", rel(dot(&b.y, &b.y), nf * b.ye * b.ye), tol),
        (
            "v_x",
            rel((2.0 / nf) * dot(&lau, &b.x), -xu * b.le + lu * b.xe),
            tol,
        ),
        (
            "v_y",
            rel((2.0 / nf) * dot(&lau, &b.y), yu * b.le - lu * b.ye),
            tol,
        ),
        ("vi", rel(dot(&b.x, &b.y), nf * (b.le * b.le + mu2)), tol),
        (
            "vii",
            rel(
                4.0 / nf.powi(3) * sum_luv2,
                b.xe * b.ye - b.le * b.le + (nf - 2.0) / nf * mu2,
            ),
            tol,
        ),
        ("hla", rel(hl, hr), tol),
        (
            "l_sum_closed_form",
            rel(
                (2.0 / nf) * sum_l2,
                trx * trx / (2.0 * nf * nf) * (trpi2 + 3.0 * trpi * trpi),
            ),
            tol,
        ),
        ("l_e_closed_form", rel(b.le, trx * trpi / nf), tol),
    ])
}

/// Jet gradients of every generator against Richardson differences, at
/// `points` random phase points cycling through the `(n, μ)` grid.
pub fn suite_differentiation(
    algebra: AlgebraKind,
    n_list: &[usize],
    mu_list: &[f64],
    points: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    check_grid(algebra, n_list, mu_list)?;
    let n_list = if algebra == AlgebraKind::Gamma3 {
        vec![2]
    } else {
        n_list.to_vec()
    };
    let configs = n_list.len() * mu_list.len();
    let frame = Frame {
        name: "differentiation",
        algebra,
        n_list,
        mu_list: mu_list.to_vec(),
        trials: points.div_ceil(configs).max(1),
        seed,
        tolerance: TOL_DIFFERENTIATION,
        opts: *opts,
    };
    let corruption = opts.corruption;
    frame.run(move |desc, mu, r, _| {
        let ph = random_phase_point(desc, r)?;
        let u = random_element(desc, r);
        let v = random_element(desc, r);
        let re = Realization::new(mu).with_corruption(corruption);
        let specs = [
            ("grad_x", GeneratorSpec::X(u.clone())),
            ("grad_y", GeneratorSpec::Y(u.clone())),
            ("grad_s", GeneratorSpec::S(u.clone(), v.clone())),
            ("grad_l", GeneratorSpec::L(u.clone())),
            ("grad_luv", GeneratorSpec::Luv(u.clone(), v.clone())),
            ("grad_h", GeneratorSpec::Ham),
            ("grad_lrl", GeneratorSpec::Lrl(u.clone())),
            ("grad_l2", GeneratorSpec::L2),
            ("grad_a2", GeneratorSpec::A2),
        ];
        let ctx = PhaseJet::new(&ph, mu)?;
        let mut out = Vec::with_capacity(specs.len());
        for (name, spec) in specs {
            let jet = re.eval(&ctx, &spec).gradient(ctx.dirs);
            let f = |pp: &PhasePoint| -> Result<f64> {
                Ok(re.eval(&PhaseJet::values(pp, mu)?, &spec).value)
            };
            let fd = fd_gradient(&ph, FD_STEP, &f)?;
            let scale = 1.0 + jet.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let err = jet
                .iter()
                .zip(&fd)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            out.push((name, err / scale, TOL_DIFFERENTIATION));
        }
        Ok(out)
    })
}

/// Position and momentum in `ℝ³` of an `H₂(C)` (or `Γ(3)`) phase point.
pub fn kepler_r3(phase: &PhasePoint) -> Result<([f64; 3], [f64; 3])> {
    let (xg, pg) = match phase.algebra().kind {
        AlgebraKind::Gamma3 => (phase.x.clone(), phase.pi.clone()),
        AlgebraKind::Hn => (h2_to_gamma3(&phase.x)?, h2_to_gamma3(&phase.pi)?),
    };
    let (pt, p) = unlift(&xg, &pg, None)?;
    Ok(([pt.q[0], pt.q[1], pt.q[2]], [p[0], p[1], p[2]]))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Classical Laplace–Runge–Lenz vector `(r × p) × p + r/|r|`.
pub fn lrl_vector(r: [f64; 3], p: [f64; 3]) -> [f64; 3] {
    let c = cross(cross(r, p), p);
    let rn = norm3(r);
    [c[0] + r[0] / rn, c[1] + r[1] / rn, c[2] + r[2] / rn]
}

/// Classical RK4 step for `ṙ = p`, `ṗ = −r/|r|³`.
pub fn kepler_rk4_step(r: [f64; 3], p: [f64; 3], h: f64) -> ([f64; 3], [f64; 3]) {
    let acc = |r: [f64; 3]| {
        let k = -1.0 / norm3(r).powi(3);
        [k * r[0], k * r[1], k * r[2]]
    };
    let add =
        |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let (k1r, k1p) = (p, acc(r));
    let (k2r, k2p) = (add(p, k1p, h / 2.0), acc(add(r, k1r, h / 2.0)));
    let (k3r, k3p) = (add(p, k2p, h / 2.0), acc(add(r, k2r, h / 2.0)));
    let (k4r, k4p) = (add(p, k3p, h), acc(add(r, k3r, h)));
    let comb = |y: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]| {
        [0, 1, 2].map(|i| y[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
    };
    (comb(r, k1r, k2r, k3r, k4r), comb(p, k1p, k2p, k3p, k4p))
}

/// Period of the unit circular orbit: first return of the orbit to the
/// positive `x` half-axis, located by bisection on the final step.
pub fn circular_period(dt: f64) -> Result<f64> {
    let mut s = dynamics::circular()?;
    let mut t = 0.0;
    let y_of = |ph: &PhasePoint| kepler_r3(ph).map(|(r, _)| r[1]);
    loop {
        let next =
            dynamics::maybe_rechart(rk4_step(&s, 0.0, dt)?, crate::cone::CHART_SWITCH_THRESHOLD)?;
        if t > std::f64::consts::PI && y_of(&s)? < 0.0 && y_of(&next)? >= 0.0 {
            let (mut lo, mut hi) = (0.0, dt);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if y_of(&rk4_step(&s, 0.0, mid)?)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(t + 0.5 * (lo + hi));
        }
        s = next;
        t += dt;
        if t > 100.0 {
            return Err(Error::Numerical("circular orbit did not close".into()));
        }
    }
}

/// Reduction to the classical Kepler problem (`n = 2`, `μ = 0`): pointwise
/// generator values through the `Γ(3)` chart, agreement of `H₂(C)` and
/// `Γ(3)` observables under the isomorphism, an `H₂(C)` trajectory against a
/// directly integrated `ℝ³` one, the circular period and the fixed LRL
/// vector of an elliptic orbit.
pub fn suite_kepler_crosscheck(
    trials: usize,
    seed: u64,
    flow: &FlowConfig,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    flow.validate()?;
    let frame = Frame {
        name: "kepler",
        algebra: AlgebraKind::Gamma3,
        n_list: vec![2],
        mu_list: vec![0.0],
        trials,
        seed,
        tolerance: TOL_KEPLER_POINTWISE,
        opts: *opts,
    };
    let corruption = opts.corruption;
    let report = frame.run(move |desc, _, r, _| {
        let ph = random_phase_point(desc, r)?;
        let [u, v] = [0; 2].map(|_| random_element(desc, r));
        let re = Realization::new(0.0).with_corruption(corruption);
        let b = re.basis_values(&ph)?;
        let (rv, pv) = kepler_r3(&ph)?;
        let rn = norm3(rv);
        let p2 = dot3(pv, pv);
        let rp = dot3(rv, pv);
        let tol = TOL_KEPLER_POINTWISE;
        let mut out = vec![
            ("gamma3_h", rel(b.h, 0.5 * p2 - 1.0 / rn), tol),
            ("gamma3_x_e", rel(b.xe, rn * p2), tol),
            ("gamma3_y_e", rel(b.ye, rn), tol),
            (
                "gamma3_l2",
                rel(b.l2, dot3(cross(rv, pv), cross(rv, pv))),
                tol,
            ),
        ];
        let a = lrl_vector(rv, pv);
        let mut ex: f64 = 0.0;
        let mut ey: f64 = 0.0;
        let mut ea: f64 = 0.0;
        for i in 0..3 {
            ex = ex.max(rel(b.x[i + 1], 2.0 * rp * pv[i] - rv[i] * p2));
            ey = ey.max(rel(b.y[i + 1], rv[i]));
            ea = ea.max(rel(b.lrl[i + 1], a[i]));
        }
        out.push(("gamma3_x_vector", ex, tol));
        out.push(("gamma3_y_vector", ey, tol));
        out.push(("gamma3_lrl_vector", ea, tol));

        // the same point and parameters on H₂(C)
        let h2 = crate::sample::phase_from_embedded(&gamma3_to_h2(&ph.x)?, &gamma3_to_h2(&ph.pi)?)?;
        let (uh, vh) = (gamma3_to_h2(&u)?, gamma3_to_h2(&v)?);
        let (g, h) = (PhaseJet::values(&ph, 0.0)?, PhaseJet::values(&h2, 0.0)?);
        let pairs = [
            (re.x(&g, &u).value, re.x(&h, &uh).value),
            (re.y(&g, &u).value, re.y(&h, &uh).value),
            (re.s(&g, &u, &v).value, re.s(&h, &uh, &vh).value),
            (re.l(&g, &u).value, re.l(&h, &uh).value),
            (re.luv(&g, &u, &v).value, re.luv(&h, &uh, &vh).value),
            (re.hamiltonian(&g).value, re.hamiltonian(&h).value),
            (re.casimir_l2(&g).value, re.casimir_l2(&h).value),
            (re.casimir_a2(&g).value, re.casimir_a2(&h).value),
        ];
        out.push((
            "h2_gamma3_agreement",
            pairs.iter().map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max),
            tol,
        ));
        Ok(out)
    })?;
    let mut tally = Tally(report.identities);

    let (traj, (period, lrl_drift)) = rayon::join(
        || trajectory_agreement(flow),
        || rayon::join(|| circular_period(flow.dt), || lrl_direction_drift(flow)),
    );
    tally.add("trajectory_vs_r3", traj?, 0, TOL_KEPLER_TRAJECTORY);
    tally.add(
        "circular_period",
        (period? - 2.0 * std::f64::consts::PI).abs(),
        0,
        TOL_KEPLER_PERIOD,
    );
    tally.add("elliptic_lrl_fixed", lrl_drift?, 0, TOL_KEPLER_LRL);
    Ok(frame.finish(tally))
}

/// Initial data of the generic bound orbit used by the trajectory check.
pub const KEPLER_ORBIT: ([f64; 3], [f64; 3]) = ([1.0, 0.3, -0.2], [-0.1, 0.9, 0.35]);

/// Largest state difference between the `H₂(C)` flow over `[0, 50]` and the
/// `ℝ³` Kepler flow.
pub fn trajectory_agreement(flow: &FlowConfig) -> Result<f64> {
    let cfg = FlowConfig {
        t_end: 50.0,
        integrator: dynamics::Integrator::Rk4,
        monitor_stride: 10,
        ..flow.clone()
    };
    let (r0, p0) = KEPLER_ORBIT;
    let rec = integrate(&dynamics::from_kepler_r3(r0, p0)?, 0.0, &cfg)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let h = cfg.t_end / steps as f64;
    let (mut r, mut p) = (r0, p0);
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for (t, s) in rec.times.iter().zip(&rec.states) {
        let target = (t / h).round() as usize;
        while k < target {
            (r, p) = kepler_rk4_step(r, p, h);
            k += 1;
        }
        let (rs, ps) = kepler_r3(s)?;
        for i in 0..3 {
            worst = worst.max((rs[i] - r[i]).abs()).max((ps[i] - p[i]).abs());
        }
    }
    Ok(worst)
}

/// Largest deviation of the LRL vector along five periods of the elliptic
/// preset orbit.
pub fn lrl_direction_drift(flow: &FlowConfig) -> Result<f64> {
    let ph = dynamics::elliptic()?;
    let (r0, p0) = kepler_r3(&ph)?;
    let energy = 0.5 * dot3(p0, p0) - 1.0 / norm3(r0);
    let period = 2.0 * std::f64::consts::PI * (-1.0 / (2.0 * energy)).powf(1.5);
    let cfg = FlowConfig {
        t_end: 5.0 * period,
        integrator: dynamics::Integrator::Rk4,
        monitor_stride: 20,
        ..flow.clone()
    };
    let rec = integrate(&ph, 0.0, &cfg).map_err(|e| Error::Numerical(e.to_string()))?;
    let a0 = lrl_vector(r0, p0);
    let mut worst: f64 = 0.0;
    for s in &rec.states {
        let (r, p) = kepler_r3(s)?;
        let a = lrl_vector(r, p);
        for i in 0..3 {
            worst = worst.max((a[i] - a0[i]).abs());
        }
    }
    Ok(worst)
}

/// Every suite applicable to the configuration, in a fixed order.
pub struct AllConfig<'a> {
    pub algebra: AlgebraKind,
    pub n_list: &'a [usize],
    pub mu_list: &'a [f64],
    pub trials: usize,
    pub seed: u64,
    pub flow: FlowConfig,
    pub opts: SuiteOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Matrix,
    Lemma,
    Realization,
    Quadratic,
    Kepler,
    Differentiation,
}

impl SuiteName {
    pub const ALL: [SuiteName; 6] = [
        SuiteName::Matrix,
        SuiteName::Lemma,
        SuiteName::Realization,
        SuiteName::Quadratic,
        SuiteName::Kepler,
        SuiteName::Differentiation,
    ];

    /// Whether the suite has anything to check for this configuration.
    pub fn applies(self, algebra: AlgebraKind, n_list: &[usize], mu_list: &[f64]) -> bool {
        match self {
            SuiteName::Quadratic => algebra == AlgebraKind::Hn,
            SuiteName::Kepler => {
                mu_list.contains(&0.0) && (algebra == AlgebraKind::Gamma3 || n_list.contains(&2))
            }
            _ => true,
        }
    }
}

/// Runs one named suite. `matrix` also covers the Jordan axioms.
pub fn run_suite(name: SuiteName, cfg: &AllConfig) -> Result<Vec<SuiteReport>> {
    let c = cfg;
    match name {
        SuiteName::Matrix => {
            let mut out = Vec::new();
            if c.algebra == AlgebraKind::Hn {
                out.push(suite_matrix_identities(
                    c.n_list, c.trials, c.seed, &c.opts,
                )?);
            }
            out.push(suite_jordan_axioms(
                c.algebra, c.n_list, c.trials, c.seed, &c.opts,
            )?);
            Ok(out)
        }
        SuiteName::Lemma => Ok(vec![suite_bracket_lemma(
            c.algebra, c.n_list, c.mu_list, c.trials, c.seed, &c.opts,
        )?]),
        SuiteName::Realization => Ok(vec![suite_realization(
            c.algebra, c.n_list, c.mu_list, c.trials, c.seed, &c.opts,
        )?]),
        SuiteName::Quadratic => {
            if c.algebra != AlgebraKind::Hn {
                return Err(Error::Unsupported(
                    "quadratic relations are stated on H_n(C)".into(),
                ));
            }
            Ok(vec![suite_quadratic(
                c.n_list, c.mu_list, c.trials, c.seed, &c.opts,
            )?])
        }
        SuiteName::Kepler => {
            if !name.applies(c.algebra, c.n_list, c.mu_list) {
                return Err(Error::Unsupported(
                    "the Kepler cross-check needs n = 2 and mu = 0".into(),
                ));
            }
            Ok(vec![suite_kepler_crosscheck(
                c.trials, c.seed, &c.flow, &c.opts,
            )?])
        }
        SuiteName::Differentiation => Ok(vec![suite_differentiation(
            c.algebra, c.n_list, c.mu_list, c.trials, c.seed, &c.opts,
        )?]),
    }
}

/// Chart point of `Γ(3)` at the given position, for callers that only
/// need a configuration.
pub fn gamma3_point(position: [f64; 3]) -> Result<ChartPoint> {
    ChartPoint::new(
        AlgebraDescriptor::gamma3(),
        Chart::Global,
        position.to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_residual() {
        assert_eq!(rel(1.0, 1.0), 0.0);
        assert_eq!(rel(f64::NAN, 0.0), f64::INFINITY);
        assert!((rel(3.0, 1.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn oracle_kepler_conserves_lrl() {
        let (mut r, mut p) = KEPLER_ORBIT;
        let a0 = lrl_vector(r, p);
        for _ in 0..2000 {
            (r, p) = kepler_rk4_step(r, p, 1e-3);
        }
        let a = lrl_vector(r, p);
        assert!((0..3).all(|i| (a[i] - a0[i]).abs() < 1e-9));
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(
            suite_realization(
                AlgebraKind::Gamma3,
                &[2],
                &[0.5],
                1,
                0,
                &SuiteOptions::default()
            ),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            suite_matrix_identities(&[1], 1, 0, &SuiteOptions::default()),
            Err(Error::Usage(_))
        ));
    }
}
