//! Hamiltonian flow of `H` under the magnetized bracket.
//!
//! Hamilton's equations follow from `ḟ = {f, H}` and the chart form of the
//! bracket:
//!
//! ```text
//! q̇^i = ∂H/∂p_i
//! ṗ_i = −∂H/∂q^i + Σ_j F_ij ∂H/∂p_j
//! ```
//!
//! The state is advanced in chart coordinates. After every accepted step the
//! chart is replaced by the best-conditioned one whenever `max |ζ|` exceeds
//! the switch threshold.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::cone::{lift, project_bar, Chart, ChartPoint, PhasePoint};
use crate::error::{Error, Result};
use crate::generators::{BasisValues, Realization};
use crate::jordan::{gamma3_to_h2, AlgebraDescriptor, AlgebraElement, AlgebraKind};
use crate::poisson::PhaseJet;
use crate::sample::{phase_from_embedded, random_cone_element, random_element, rng};

/// Collision guard: abort once `tr x` falls below this fraction of its
/// initial value.
pub const COLLISION_FRACTION: f64 = 1e-6;

/// A fixed step that changes `H` by more than this (relative) has jumped
/// across a near-collision.
pub const ENERGY_JUMP_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
    Rk45,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub chart_switch_threshold: f64,
    pub monitor_stride: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            integrator: Integrator::Rk4,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            chart_switch_threshold: crate::cone::CHART_SWITCH_THRESHOLD,
            monitor_stride: 1,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Usage(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        pos(self.dt, "dt")?;
        pos(self.t_end, "t_end")?;
        pos(self.rel_tol, "rel_tol")?;
        pos(self.abs_tol, "abs_tol")?;
        pos(self.chart_switch_threshold, "chart_switch_threshold")?;
        if self.monitor_stride == 0 {
            return Err(Error::Usage("monitor_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Conserved-quantity monitors at one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub h: f64,
    /// `L_{e_α,e_β}` for `α < β`, row-major.
    pub luv: Vec<f64>,
    /// `A_{e_α}`
    pub lrl: Vec<f64>,
    pub l2: f64,
    pub a2: f64,
    pub hla_residual: f64,
}

impl Monitors {
    pub fn at(phase: &PhasePoint, mu: f64) -> Result<Self> {
        Ok(Self::from_values(
            &Realization::new(mu).basis_values(phase)?,
        ))
    }

    pub fn from_values(b: &BasisValues) -> Self {
        let (l, r) = b.hla_sides();
        let m = b.luv.len();
        Self {
            h: b.h,
            luv: (0..m)
                .flat_map(|a| ((a + 1)..m).map(move |c| (a, c)))
                .map(|(a, c)| b.luv[a][c])
                .collect(),
            lrl: b.lrl.clone(),
            l2: b.l2,
            a2: b.a2,
            hla_residual: (l - r).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub algebra: AlgebraDescriptor,
    pub mu: f64,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub monitors: Vec<Monitors>,
    /// `(time, chart)` at the start and after every switch.
    pub pivot_history: Vec<(f64, Chart)>,
    pub steps: usize,
}

impl TrajectoryRecord {
    fn new(initial: &PhasePoint, mu: f64) -> Self {
        Self {
            algebra: initial.algebra(),
            mu,
            times: Vec::new(),
            states: Vec::new(),
            monitors: Vec::new(),
            pivot_history: vec![(0.0, initial.point.chart)],
            steps: 0,
        }
    }

    fn record(&mut self, t: f64, phase: &PhasePoint) -> Result<()> {
        self.monitors.push(Monitors::at(phase, self.mu)?);
        self.times.push(t);
        self.states.push(phase.clone());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&PhasePoint> {
        self.states.last()
    }

    /// Largest deviation of each monitored quantity from its initial value:
    /// `(H, max over L_{e_α,e_β}, max over A_{e_α}, L², A²)`.
    pub fn max_drifts(&self) -> Drifts {
        let mut d = Drifts::default();
        let Some(first) = self.monitors.first() else {
            return d;
        };
        let maxdiff = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        for m in &self.monitors {
            d.h = d.h.max((m.h - first.h).abs());
            d.luv = d.luv.max(maxdiff(&m.luv, &first.luv));
            d.lrl = d.lrl.max(maxdiff(&m.lrl, &first.lrl));
            d.l2 = d.l2.max((m.l2 - first.l2).abs());
            d.a2 = d.a2.max((m.a2 - first.a2).abs());
            d.hla_residual = d.hla_residual.max(m.hla_residual);
        }
        d
    }

    /// Trajectory CSV: `t,q_1..q_d,p_1..p_d,H,L2,A2,hla_residual`.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let d = self.algebra.cone_dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("q_{i}")));
        header.extend((1..=d).map(|i| format!("p_{i}")));
        header.extend(["H", "L2", "A2", "hla_residual"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for ((t, s), m) in self.times.iter().zip(&self.states).zip(&self.monitors) {
            let row: Vec<String> = std::iter::once(*t)
                .chain(s.point.q.iter().copied())
                .chain(s.p.iter().copied())
                .chain([m.h, m.l2, m.a2, m.hla_residual])
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Drifts {
    pub h: f64,
    pub luv: f64,
    pub lrl: f64,
    pub l2: f64,
    pub a2: f64,
    pub hla_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlowErrorKind {
    /// `tr x` approached zero.
    Singularity,
    /// Adaptive step size fell below the representable minimum.
    StepUnderflow,
    Other(Error),
}

/// Integration failure with the record accumulated so far.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowError {
    pub kind: FlowErrorKind,
    pub time: f64,
    pub partial: Box<TrajectoryRecord>,
}

impl std::fmt::Display for FlowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            FlowErrorKind::Singularity => write!(f, "collision singularity at t = {:e}", self.time),
            FlowErrorKind::StepUnderflow => write!(f, "step size underflow at t = {:e}", self.time),
            FlowErrorKind::Other(e) => write!(f, "integration failed at t = {:e}: {e}", self.time),
        }
    }
}

impl std::error::Error for FlowError {}

/// `(q̇, ṗ)` at a phase point.
pub fn vector_field(phase: &PhasePoint, mu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let ctx = PhaseJet::new(phase, mu)?;
    let h = Realization::new(mu).hamiltonian(&ctx);
    let d = ctx.dim();
    let g = h.gradient(ctx.dirs);
    let qdot = g[d..].to_vec();
    let pdot = (0..d)
        .map(|i| {
            -g[i]
                + (0..d)
                    .map(|j| ctx.curvature[(i, j)] * g[d + j])
                    .sum::<f64>()
        })
        .collect();
    Ok((qdot, pdot))
}

fn field_flat(phase: &PhasePoint, mu: f64) -> Result<Vec<f64>> {
    let (mut a, b) = vector_field(phase, mu)?;
    a.extend(b);
    Ok(a)
}

fn flat(phase: &PhasePoint) -> Vec<f64> {
    phase.point.q.iter().chain(&phase.p).copied().collect()
}

/// Phase point in the same chart as `like` with flattened state `y`.
fn unflat(like: &PhasePoint, y: &[f64]) -> Result<PhasePoint> {
    let d = like.dim();
    let point = ChartPoint::new(like.algebra(), like.point.chart, y[..d].to_vec())?;
    lift(&point, &y[d..])
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn combo(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    (0..y.len())
        .map(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
        .collect()
}

/// One classical RK4 step of size `h` (negative `h` integrates backwards).
/// The result stays in the chart of `phase`.
pub fn rk4_step(phase: &PhasePoint, mu: f64, h: f64) -> Result<PhasePoint> {
    let y = flat(phase);
    let k1 = field_flat(phase, mu)?;
    let k2 = field_flat(&unflat(phase, &axpy(&y, 0.5 * h, &k1))?, mu)?;
    let k3 = field_flat(&unflat(phase, &axpy(&y, 0.5 * h, &k2))?, mu)?;
    let k4 = field_flat(&unflat(phase, &axpy(&y, h, &k3))?, mu)?;
    let next = combo(
        &y,
        h / 6.0,
        &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
    );
    unflat(phase, &next)
}

// Dormand–Prince 5(4) tableau.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince attempt: the fifth-order result and the scaled error
/// norm (accept when `≤ 1`).
fn dp_attempt(
    phase: &PhasePoint,
    mu: f64,
    h: f64,
    rel: f64,
    abs: f64,
) -> Result<(PhasePoint, f64)> {
    let y = flat(phase);
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(field_flat(phase, mu)?);
    for s in 1..7 {
        let terms: Vec<(f64, &[f64])> = (0..s).map(|j| (DP_A[s][j], k[j].as_slice())).collect();
        let ys = combo(&y, h, &terms);
        k.push(field_flat(&unflat(phase, &ys)?, mu)?);
    }
    let t5: Vec<(f64, &[f64])> = (0..7).map(|j| (DP_B5[j], k[j].as_slice())).collect();
    let t4: Vec<(f64, &[f64])> = (0..7).map(|j| (DP_B4[j], k[j].as_slice())).collect();
    let y5 = combo(&y, h, &t5);
    let y4 = combo(&y, h, &t4);
    let err = y5
        .iter()
        .zip(&y4)
        .zip(&y)
        .map(|((a, b), y0)| {
            let sc = abs + rel * a.abs().max(y0.abs());
            ((a - b) / sc).powi(2)
        })
        .sum::<f64>()
        / y.len() as f64;
    Ok((unflat(phase, &y5)?, err.sqrt()))
}

/// Accepted Dormand–Prince step from time `t`, adapting `h` in place.
/// `None` signals step underflow.
fn adaptive_step(
    state: &PhasePoint,
    mu: f64,
    h: &mut f64,
    t: f64,
    h_min: f64,
    config: &FlowConfig,
) -> Result<Option<(PhasePoint, f64)>> {
    loop {
        let hh = h.min(config.t_end - t);
        if hh < h_min {
            return Ok(None);
        }
        match dp_attempt(state, mu, hh, config.rel_tol, config.abs_tol) {
            Ok((s, err)) if err <= 1.0 => {
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                *h = hh * grow;
                return Ok(Some((s, t + hh)));
            }
            Ok((_, err)) => *h = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.5),
            // a stage left the chart domain
            Err(Error::Domain(_)) => *h = hh * 0.25,
            Err(e) => return Err(e),
        }
    }
}

/// Switches to the best chart when `max |ζ|` exceeds `threshold`.
pub fn maybe_rechart(phase: PhasePoint, threshold: f64) -> Result<PhasePoint> {
    if phase.point.max_zeta() > threshold {
        phase.rechart(None)
    } else {
        Ok(phase)
    }
}

/// Fixed-step RK4 over `steps` steps of size `h` with chart switching.
pub fn propagate(
    initial: &PhasePoint,
    mu: f64,
    h: f64,
    steps: usize,
    threshold: f64,
) -> Result<PhasePoint> {
    let mut s = initial.clone();
    for _ in 0..steps {
        s = maybe_rechart(rk4_step(&s, mu, h)?, threshold)?;
    }
    Ok(s)
}

fn classify(e: Error) -> FlowErrorKind {
    // From a valid state, a stage only leaves the chart domain through
    // tr x ≤ 0 or overflow near the origin.
    match e {
        Error::Domain(_) | Error::Numerical(_) => FlowErrorKind::Singularity,
        other => FlowErrorKind::Other(other),
    }
}

fn energy(phase: &PhasePoint, mu: f64) -> Result<f64> {
    Ok(Realization::new(mu)
        .hamiltonian(&PhaseJet::values(phase, mu)?)
        .value)
}

/// Integrates the flow of `H` from `initial` over `[0, t_end]`.
pub fn integrate(
    initial: &PhasePoint,
    mu: f64,
    config: &FlowConfig,
) -> std::result::Result<TrajectoryRecord, FlowError> {
    let mut rec = TrajectoryRecord::new(initial, mu);
    let fail = |kind, time, rec: TrajectoryRecord| FlowError {
        kind,
        time,
        partial: Box::new(rec),
    };
    if let Err(e) = config.validate() {
        return Err(fail(FlowErrorKind::Other(e), 0.0, rec));
    }
    if let Err(e) = rec.record(0.0, initial) {
        return Err(fail(FlowErrorKind::Other(e), 0.0, rec));
    }
    let tr0 = initial.x.trace();
    let mut h_prev = match energy(initial, mu) {
        Ok(v) => v,
        Err(e) => return Err(fail(FlowErrorKind::Other(e), 0.0, rec)),
    };
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut since_sample = 0usize;
    let mut h = config.dt;
    let h_min = 1e-14 * config.t_end.max(1.0);
    let n_fixed = (config.t_end / config.dt).round().max(1.0) as usize;
    loop {
        let done = match config.integrator {
            Integrator::Rk4 => rec.steps >= n_fixed,
            Integrator::Rk45 => t >= config.t_end * (1.0 - 1e-15),
        };
        if done {
            break;
        }
        let stepped = match config.integrator {
            Integrator::Rk4 => {
                let h = config.t_end / n_fixed as f64;
                rk4_step(&state, mu, h).map(|s| (s, (rec.steps + 1) as f64 * h))
            }
            Integrator::Rk45 => match adaptive_step(&state, mu, &mut h, t, h_min, config) {
                Ok(Some(v)) => Ok(v),
                Ok(None) => return Err(fail(FlowErrorKind::StepUnderflow, t, rec)),
                Err(e) => Err(e),
            },
        };
        let (next, t_next) = match stepped
            .and_then(|(s, tn)| Ok((maybe_rechart(s, config.chart_switch_threshold)?, tn)))
        {
            Ok(v) => v,
            Err(e) => {
                return Err(fail(classify(e), t, rec));
            }
        };
        rec.steps += 1;
        if next.point.chart != state.point.chart {
            rec.pivot_history.push((t_next, next.point.chart));
        }
        state = next;
        t = t_next;
        let h_now = energy(&state, mu).unwrap_or(f64::NAN);
        let jumped = !((h_now - h_prev).abs() <= ENERGY_JUMP_TOL * (1.0 + h_prev.abs()));
        if state.x.trace() < COLLISION_FRACTION * tr0 || jumped {
            let _ = rec.record(t, &state);
            return Err(fail(FlowErrorKind::Singularity, t, rec));
        }
        h_prev = h_now;
        since_sample += 1;
        let last = match config.integrator {
            Integrator::Rk4 => rec.steps >= n_fixed,
            Integrator::Rk45 => t >= config.t_end * (1.0 - 1e-15),
        };
        if since_sample >= config.monitor_stride || last {
            since_sample = 0;
            if let Err(e) = rec.record(t, &state) {
                return Err(fail(FlowErrorKind::Other(e), t, rec));
            }
        }
    }
    Ok(rec)
}

/// `|−2H(L² − n²(n−1)μ²/4) − (n/2)²(n−1−A²)|`.
pub fn hla_residual(phase: &PhasePoint, mu: f64) -> Result<f64> {
    let (l, r) = Realization::new(mu).basis_values(phase)?.hla_sides();
    Ok((l - r).abs())
}

/// Phase point on `H₂(C)` from a `Γ(3)` position and momentum.
pub fn from_kepler_r3(position: [f64; 3], momentum: [f64; 3]) -> Result<PhasePoint> {
    let g = AlgebraDescriptor::gamma3();
    let point = ChartPoint::new(g, Chart::Global, position.to_vec())?;
    let ph = lift(&point, &momentum)?;
    phase_from_embedded(&gamma3_to_h2(&ph.x)?, &gamma3_to_h2(&ph.pi)?)
}

/// Circular Kepler orbit of radius 1 (`H = −1/2`, period `2π`), `n = 2`, `μ = 0`.
pub fn circular() -> Result<PhasePoint> {
    from_kepler_r3([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
}

/// Elliptic Kepler orbit with eccentricity `0.44` (`H = −0.28`), `n = 2`, `μ = 0`.
pub fn elliptic() -> Result<PhasePoint> {
    from_kepler_r3([1.0, 0.0, 0.0], [0.0, 1.2, 0.0])
}

/// Deterministic initial condition with `H = target_h`.
///
/// `x` is placed at `tr x = nμ²` (the minimum of the radial potential, or
/// `tr x = n` when `μ = 0`) and a random tangent `π` is scaled to reach the
/// target energy.
pub fn sample_initial(
    desc: &AlgebraDescriptor,
    mu: f64,
    target_h: f64,
    seed: u64,
) -> Result<PhasePoint> {
    if desc.kind == AlgebraKind::Gamma3 && mu != 0.0 {
        return Err(Error::Unsupported(
            "magnetic charge must be zero on Gamma(3)".into(),
        ));
    }
    let n = desc.n as f64;
    let mut r = rng(seed);
    let t = if mu == 0.0 { n } else { n * mu * mu };
    let x0 = random_cone_element(desc, &mut r);
    let x = x0.scale(t / x0.trace());
    let pi = project_bar(&x, &random_element(desc, &mut r))?;
    let potential = n * n * mu * mu / (2.0 * t * t) - n / t;
    let kinetic = n * x.ip(&pi.jm(&pi)) / (2.0 * t);
    let need = target_h - potential;
    if need < 0.0 || (need > 0.0 && kinetic <= 0.0) {
        return Err(Error::Domain(format!(
            "target energy {target_h} is below the minimum {potential} reachable from this configuration"
        )));
    }
    let s = if need == 0.0 {
        0.0
    } else {
        (need / kinetic).sqrt()
    };
    phase_from_embedded(&x, &pi.scale(s))
}

/// Embedded pair `(x, π)` of a phase point, for comparisons across charts.
pub fn embedded(phase: &PhasePoint) -> (AlgebraElement, AlgebraElement) {
    (phase.x.clone(), phase.pi.clone())
}
