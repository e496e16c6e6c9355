//! The rank-one cone `C₁` and its tangent bundle.
//!
//! `H_n(C)` charts: for a pivot `k`, a point is `x = r·vv†/|v|²` with `v ∈ Cⁿ`
//! equal to `1` in slot `k` and `ζ` in the remaining slots (in increasing
//! order). Chart coordinates are `q = (r, Re ζ₁, Im ζ₁, Re ζ₂, Im ζ₂, ...)`, so
//! `r = tr x`. First and second partials of the embedding are closed-form.
//!
//! `Γ(3)` uses the single global chart `x(q) = |q| e₀ + q`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jordan::{i_trace_commutator, AlgebraDescriptor, AlgebraElement, AlgebraKind, CMatrix};

/// Default pivot-switch threshold on `max |ζ|`.
pub const CHART_SWITCH_THRESHOLD: f64 = 4.0;

/// Rank-one validation: `‖x² − (tr x)x‖ ≤ RANK_ONE_TOL · (tr x)²`.
pub const RANK_ONE_TOL: f64 = 1e-9;

/// Tangency validation: `‖QπQ‖ ≤ TANGENCY_TOL · (1 + ‖π‖)`.
pub const TANGENCY_TOL: f64 = 1e-9;

const MAX_METRIC_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    /// Affine chart of the column line with the given (0-based) pivot slot.
    Pivot(usize),
    /// The global chart of the light cone in `Γ(3)`.
    Global,
}

/// A configuration point on `C₁` in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub algebra: AlgebraDescriptor,
    pub chart: Chart,
    pub q: Vec<f64>,
}

impl ChartPoint {
    pub fn new(algebra: AlgebraDescriptor, chart: Chart, q: Vec<f64>) -> Result<Self> {
        if q.len() != algebra.cone_dim() {
            return Err(Error::Usage(format!(
                "{algebra} cone has dimension {}, got {} coordinates",
                algebra.cone_dim(),
                q.len()
            )));
        }
        if q.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite chart coordinate".into()));
        }
        match (algebra.kind, chart) {
            (AlgebraKind::Hn, Chart::Pivot(k)) => {
                if k >= algebra.n {
                    return Err(Error::Usage(format!("pivot {} out of range", k + 1)));
                }
                if q[0] <= 0.0 {
                    return Err(Error::Domain(format!(
                        "r = tr x must be positive, got {}",
                        q[0]
                    )));
                }
            }
            (AlgebraKind::Gamma3, Chart::Global) => {
                if q.iter().all(|c| *c == 0.0) {
                    return Err(Error::Domain("the cone vertex q = 0 is excluded".into()));
                }
            }
            _ => {
                return Err(Error::Usage(format!(
                    "chart {chart:?} does not belong to {algebra}"
                )));
            }
        }
        Ok(Self { algebra, chart, q })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Largest `|ζ|` of an `H_n(C)` chart point; zero for `Γ(3)`.
    pub fn max_zeta(&self) -> f64 {
        match self.chart {
            Chart::Pivot(_) => self.q[1..]
                .chunks(2)
                .map(|c| c[0].hypot(c[1]))
                .fold(0.0, f64::max),
            Chart::Global => 0.0,
        }
    }

    /// `tr x` at this point.
    pub fn trace(&self) -> f64 {
        match self.chart {
            Chart::Pivot(_) => self.q[0],
            Chart::Global => 2.0 * norm3(&self.q),
        }
    }
}

fn norm3(q: &[f64]) -> f64 {
    (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt()
}

fn other_slots(n: usize, pivot: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&j| j != pivot)
}

/// Embedding data of an `H_n(C)` chart at a point.
struct HnChart {
    r: f64,
    /// `vv†`
    m: CMatrix,
    s: f64,
    /// Direction vector `w_a = ∂v/∂q^a` for each ζ-coordinate `a ≥ 1`: (slot, value).
    dirs: Vec<(usize, Complex64)>,
    v: Vec<Complex64>,
}

impl HnChart {
    fn new(n: usize, pivot: usize, q: &[f64]) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[pivot] = Complex64::new(1.0, 0.0);
        let mut dirs = Vec::with_capacity(2 * (n - 1));
        for (m, slot) in other_slots(n, pivot).enumerate() {
            v[slot] = Complex64::new(q[1 + 2 * m], q[2 + 2 * m]);
            dirs.push((slot, Complex64::new(1.0, 0.0)));
            dirs.push((slot, Complex64::new(0.0, 1.0)));
        }
        let s = v.iter().map(|z| z.norm_sqr()).sum();
        let m = CMatrix::outer(&v, &v);
        Self {
            r: q[0],
            m,
            s,
            dirs,
            v,
        }
    }

    fn embed(&self) -> AlgebraElement {
        AlgebraElement::from_matrix_symmetrized(&(&self.m * (self.r / self.s)))
    }

    /// `∂M/∂ζ_a = w v† + v w†` and `∂s/∂ζ_a = 2 Re(v† w)`.
    fn dm(&self, a: usize) -> (CMatrix, f64) {
        let (slot, w) = self.dirs[a];
        let n = self.v.len();
        let dm = CMatrix::from_fn(n, |i, j| {
            let mut z = Complex64::new(0.0, 0.0);
            if i == slot {
                z += w * self.v[j].conj();
            }
            if j == slot {
                z += self.v[i] * w.conj();
            }
            z
        });
        let ds = 2.0 * (self.v[slot].conj() * w).re;
        (dm, ds)
    }

    fn first(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(1 + self.dirs.len());
        out.push(AlgebraElement::from_matrix_symmetrized(
            &(&self.m * (1.0 / self.s)),
        ));
        for a in 0..self.dirs.len() {
            let (dm, ds) = self.dm(a);
            let d = &(&dm * (self.r / self.s)) - &(&self.m * (self.r * ds / (self.s * self.s)));
            out.push(AlgebraElement::from_matrix_symmetrized(&d));
        }
        out
    }

    fn second(&self, first: &[AlgebraElement]) -> Vec<Vec<AlgebraElement>> {
        let d = first.len();
        let n = self.v.len();
        let zero = AlgebraElement::Hn(CMatrix::zeros(n));
        let mut out = vec![vec![zero; d]; d];
        for a in 1..d {
            let ra = first[a].scale(1.0 / self.r);
            out[0][a] = ra.clone();
            out[a][0] = ra;
        }
        let (r, s) = (self.r, self.s);
        let firsts: Vec<(CMatrix, f64)> = (0..self.dirs.len()).map(|a| self.dm(a)).collect();
        for a in 0..self.dirs.len() {
            for b in a..self.dirs.len() {
                let (sa, wa) = self.dirs[a];
                let (sb, wb) = self.dirs[b];
                let d2m = CMatrix::from_fn(n, |i, j| {
                    let mut z = Complex64::new(0.0, 0.0);
                    if i == sa && j == sb {
                        z += wa * wb.conj();
                    }
                    if i == sb && j == sa {
                        z += wb * wa.conj();
                    }
                    z
                });
                let d2s = if sa == sb {
                    2.0 * (wa.conj() * wb).re
                } else {
                    0.0
                };
                let (dma, dsa) = &firsts[a];
                let (dmb, dsb) = &firsts[b];
                let s2 = s * s;
                let mut acc = &d2m * (1.0 / s);
                acc = &acc - &(dma * (dsb / s2));
                acc = &acc - &(dmb * (dsa / s2));
                acc = &acc - &(&self.m * (d2s / s2));
                acc = &acc + &(&self.m * (2.0 * dsa * dsb / (s2 * s)));
                let el = AlgebraElement::from_matrix_symmetrized(&(&acc * r));
                out[a + 1][b + 1] = el.clone();
                out[b + 1][a + 1] = el;
            }
        }
        out
    }
}

/// The point `x(q) ∈ C₁`.
pub fn embed(point: &ChartPoint) -> Result<AlgebraElement> {
    match point.chart {
        Chart::Pivot(k) => Ok(HnChart::new(point.algebra.n, k, &point.q).embed()),
        Chart::Global => {
            let r = norm3(&point.q);
            if r == 0.0 {
                return Err(Error::Domain("the cone vertex q = 0 is excluded".into()));
            }
            Ok(AlgebraElement::gamma3(
                r,
                [point.q[0], point.q[1], point.q[2]],
            ))
        }
    }
}

/// `∂x/∂q^i` for every coordinate.
pub fn partials(point: &ChartPoint) -> Vec<AlgebraElement> {
    match point.chart {
        Chart::Pivot(k) => HnChart::new(point.algebra.n, k, &point.q).first(),
        Chart::Global => {
            let r = norm3(&point.q);
            (0..3)
                .map(|i| {
                    let mut vec = [0.0; 3];
                    vec[i] = 1.0;
                    AlgebraElement::gamma3(point.q[i] / r, vec)
                })
                .collect()
        }
    }
}

/// Symmetric table `∂²x/∂q^i∂q^j`.
pub fn second_partials(point: &ChartPoint) -> Vec<Vec<AlgebraElement>> {
    match point.chart {
        Chart::Pivot(k) => {
            let chart = HnChart::new(point.algebra.n, k, &point.q);
            let first = chart.first();
            chart.second(&first)
        }
        Chart::Global => {
            let q = &point.q;
            let r = norm3(q);
            let r3 = r * r * r;
            (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            AlgebraElement::gamma3(delta / r - q[i] * q[j] / r3, [0.0; 3])
                        })
                        .collect()
                })
                .collect()
        }
    }
}

/// Tangent frame data at a chart point.
#[derive(Clone, Debug)]
pub struct FrameData {
    /// `∂x/∂q^i`
    pub partials: Vec<AlgebraElement>,
    /// Induced metric `g_ij = ⟨∂_i x|∂_j x⟩`.
    pub metric: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// Dual frame `E^i = g^{ij} ∂_j x`, so that `⟨E^i|∂_j x⟩ = δ^i_j`.
    pub duals: Vec<AlgebraElement>,
    /// `∂²x/∂q^i∂q^j`, present when requested.
    pub second_partials: Option<Vec<Vec<AlgebraElement>>>,
}

impl FrameData {
    pub fn dim(&self) -> usize {
        self.partials.len()
    }

    pub fn second(&self) -> &[Vec<AlgebraElement>] {
        self.second_partials
            .as_deref()
            .expect("frame was built without second partials")
    }
}

fn build_frame(
    partials: Vec<AlgebraElement>,
    second: Option<Vec<Vec<AlgebraElement>>>,
) -> Result<FrameData> {
    let d = partials.len();
    let metric = DMatrix::from_fn(d, d, |i, j| partials[i].ip(&partials[j]));
    let eig = metric.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(lo > 0.0) || hi / lo > MAX_METRIC_CONDITION {
        return Err(Error::Numerical(format!(
            "induced metric is ill-conditioned (eigenvalues in [{lo:.3e}, {hi:.3e}])"
        )));
    }
    let ginv = metric
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("induced metric is not positive definite".into()))?
        .inverse();
    let duals = (0..d)
        .map(|i| {
            (0..d).fold(partials[0].scale(0.0), |acc, j| {
                acc.axpy(ginv[(i, j)], &partials[j])
            })
        })
        .collect();
    Ok(FrameData {
        partials,
        metric,
        ginv,
        duals,
        second_partials: second,
    })
}

/// Frame without second partials.
pub fn frame(point: &ChartPoint) -> Result<FrameData> {
    build_frame(partials(point), None)
}

/// Frame including the second-partial table.
pub fn frame_with_second(point: &ChartPoint) -> Result<FrameData> {
    match point.chart {
        Chart::Pivot(k) => {
            let chart = HnChart::new(point.algebra.n, k, &point.q);
            let first = chart.first();
            let second = chart.second(&first);
            build_frame(first, Some(second))
        }
        Chart::Global => build_frame(partials(point), Some(second_partials(point))),
    }
}

/// Orthogonal projection of `v` onto the tangent space `Im L_x`:
/// `v̄ = v − QvQ` with `Q = e − x/tr x`.
pub fn project_bar(x: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
    if x.descriptor() != v.descriptor() {
        return Err(Error::AlgebraMismatch {
            left: x.descriptor(),
            right: v.descriptor(),
        });
    }
    match (x, v) {
        (AlgebraElement::Hn(xm), AlgebraElement::Hn(vm)) => {
            let q = &CMatrix::identity(xm.n()) - &(xm * (1.0 / xm.trace().re));
            let qvq = q.matmul(vm).matmul(&q);
            Ok(AlgebraElement::from_matrix_symmetrized(&(vm - &qvq)))
        }
        _ => {
            let xh = crate::jordan::gamma3_to_h2(x)?;
            let vh = crate::jordan::gamma3_to_h2(v)?;
            crate::jordan::h2_to_gamma3(&project_bar(&xh, &vh)?)
        }
    }
}

/// Validates `x² = (tr x)·x`, `tr x > 0` at scale-aware tolerance.
pub fn check_rank_one(x: &AlgebraElement) -> Result<()> {
    let t = x.trace();
    if !(t > 0.0) {
        return Err(Error::Domain(format!("tr x must be positive, got {t}")));
    }
    let defect = (&x.jm(x) - &x.scale(t)).norm() * (x.descriptor().rank() as f64).sqrt();
    if defect > RANK_ONE_TOL * t * t {
        return Err(Error::Domain(format!(
            "not a rank-one semi-positive element (‖x² − tr x·x‖ = {defect:.3e})"
        )));
    }
    Ok(())
}

/// Pivot slot with the largest diagonal entry.
pub fn best_pivot(x: &AlgebraElement) -> Result<usize> {
    let m = x.as_matrix()?;
    Ok((0..m.n())
        .max_by(|&a, &b| m.get(a, a).re.total_cmp(&m.get(b, b).re))
        .unwrap_or(0))
}

/// Chart coordinates of a cone point. The pivot defaults to the largest
/// diagonal entry.
pub fn coords(x: &AlgebraElement, pivot_hint: Option<usize>) -> Result<ChartPoint> {
    check_rank_one(x)?;
    let desc = x.descriptor();
    match x {
        AlgebraElement::Hn(m) => {
            let n = m.n();
            let k = match pivot_hint {
                Some(k) if k >= n => {
                    return Err(Error::Usage(format!("pivot {} out of range", k + 1)))
                }
                Some(k) => k,
                None => best_pivot(x)?,
            };
            let r = m.trace().re;
            let xkk = m.get(k, k).re;
            if xkk <= 1e-12 * r {
                return Err(Error::Domain(format!(
                    "point is outside the chart with pivot {}",
                    k + 1
                )));
            }
            let mut q = Vec::with_capacity(2 * n - 1);
            q.push(r);
            for slot in other_slots(n, k) {
                let z = m.get(slot, k) / xkk;
                q.push(z.re);
                q.push(z.im);
            }
            ChartPoint::new(desc, Chart::Pivot(k), q)
        }
        AlgebraElement::Gamma3 { vec, .. } => ChartPoint::new(desc, Chart::Global, vec.to_vec()),
    }
}

/// Magnetic term `F_ij = −2μ·i·tr(x[∂_i x, ∂_j x])/(tr x)³` of the bracket
/// `{p_i, p_j}`.
pub fn curvature(point: &ChartPoint, mu: f64) -> Result<DMatrix<f64>> {
    let x = embed(point)?;
    let frame = frame(point)?;
    curvature_from_frame(&x, &frame, mu)
}

pub fn curvature_from_frame(
    x: &AlgebraElement,
    frame: &FrameData,
    mu: f64,
) -> Result<DMatrix<f64>> {
    let d = frame.dim();
    let mut f = DMatrix::zeros(d, d);
    if mu == 0.0 {
        return Ok(f);
    }
    if x.descriptor().kind == AlgebraKind::Gamma3 {
        return Err(Error::Unsupported(
            "magnetic charge must be zero on Gamma(3)".into(),
        ));
    }
    let t3 = x.trace().powi(3);
    for i in 0..d {
        for j in (i + 1)..d {
            let (itr, _) = i_trace_commutator(x, &frame.partials[i], &frame.partials[j])?;
            let v = -2.0 * mu * itr / t3;
            f[(i, j)] = v;
            f[(j, i)] = -v;
        }
    }
    Ok(f)
}

/// Tangent vector to `C₁` with its chart description.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub point: ChartPoint,
    pub p: Vec<f64>,
    /// Embedded configuration `x(q)`.
    pub x: AlgebraElement,
    /// Embedded velocity `π = p_i E^i`.
    pub pi: AlgebraElement,
}

impl PhasePoint {
    pub fn algebra(&self) -> AlgebraDescriptor {
        self.point.algebra
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// Re-expresses the same `(x, π)` in the chart with the given pivot.
    pub fn rechart(&self, pivot: Option<usize>) -> Result<PhasePoint> {
        let (point, p) = unlift(&self.x, &self.pi, pivot)?;
        lift(&point, &p)
    }
}

/// `(q, p) ↦ (x, π)` with `π = p_i E^i`.
pub fn lift(point: &ChartPoint, p: &[f64]) -> Result<PhasePoint> {
    if p.len() != point.dim() {
        return Err(Error::Usage(format!(
            "momentum has {} components, chart has {}",
            p.len(),
            point.dim()
        )));
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("non-finite momentum".into()));
    }
    let x = embed(point)?;
    let fr = frame(point)?;
    let pi = fr
        .duals
        .iter()
        .zip(p)
        .fold(x.scale(0.0), |acc, (e, pi)| acc.axpy(*pi, e));
    Ok(PhasePoint {
        point: point.clone(),
        p: p.to_vec(),
        x,
        pi,
    })
}

/// Largest tangency defect `‖π − π̄‖` relative to `1 + ‖π‖`.
pub fn tangency_defect(x: &AlgebraElement, pi: &AlgebraElement) -> Result<f64> {
    let bar = project_bar(x, pi)?;
    Ok((pi - &bar).norm() / (1.0 + pi.norm()))
}

/// `(x, π) ↦ (q, p)` with `p_i = ⟨π|∂_i x⟩`.
pub fn unlift(
    x: &AlgebraElement,
    pi: &AlgebraElement,
    pivot_hint: Option<usize>,
) -> Result<(ChartPoint, Vec<f64>)> {
    let point = coords(x, pivot_hint)?;
    let defect = tangency_defect(x, pi)?;
    if defect > TANGENCY_TOL {
        return Err(Error::Domain(format!(
            "momentum is not tangent to the cone (defect {defect:.3e})"
        )));
    }
    let p = partials(&point).iter().map(|d| pi.ip(d)).collect();
    Ok((point, p))
}
