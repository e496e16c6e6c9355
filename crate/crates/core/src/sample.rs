//! Seeded random algebra elements, cone points and phase points.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cone::{best_pivot, coords, lift, project_bar, unlift, PhasePoint};
use crate::error::Result;
use crate::jordan::{AlgebraDescriptor, AlgebraElement, AlgebraKind, CMatrix};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic per-trial stream derived from a suite seed.
pub fn trial_rng(seed: u64, trial: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn cnormal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

/// Element with independent standard normal components (GUE-like for `H_n`).
pub fn random_element(desc: &AlgebraDescriptor, rng: &mut impl Rng) -> AlgebraElement {
    match desc.kind {
        AlgebraKind::Hn => {
            let m = CMatrix::from_fn(desc.n, |_, _| cnormal(rng));
            AlgebraElement::from_matrix_symmetrized(&m)
        }
        AlgebraKind::Gamma3 => {
            AlgebraElement::gamma3(normal(rng), [normal(rng), normal(rng), normal(rng)])
        }
    }
}

/// `x = r·ww†/|w|²` with `r ~ U[0.5, 2]` and `w` complex normal.
pub fn random_cone_element(desc: &AlgebraDescriptor, rng: &mut impl Rng) -> AlgebraElement {
    let r = rng.gen_range(0.5..2.0);
    match desc.kind {
        AlgebraKind::Hn => {
            let w: Vec<Complex64> = (0..desc.n).map(|_| cnormal(rng)).collect();
            let norm2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            AlgebraElement::from_matrix_symmetrized(&(&CMatrix::outer(&w, &w) * (r / norm2)))
        }
        AlgebraKind::Gamma3 => {
            let v = [normal(rng), normal(rng), normal(rng)];
            let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            let half = r / 2.0;
            AlgebraElement::gamma3(half, v.map(|c| half * c / len))
        }
    }
}

/// Random phase point with `π` the tangent projection of a random element,
/// expressed in the best-conditioned chart.
pub fn random_phase_point(desc: &AlgebraDescriptor, rng: &mut impl Rng) -> Result<PhasePoint> {
    let x = random_cone_element(desc, rng);
    let pi = project_bar(&x, &random_element(desc, rng))?;
    phase_from_embedded(&x, &pi)
}

/// Chart description of an embedded pair, choosing the best pivot.
pub fn phase_from_embedded(x: &AlgebraElement, pi: &AlgebraElement) -> Result<PhasePoint> {
    let hint = match x.descriptor().kind {
        AlgebraKind::Hn => Some(best_pivot(x)?),
        AlgebraKind::Gamma3 => None,
    };
    let (point, p) = unlift(x, pi, hint)?;
    lift(&point, &p)
}

/// Random chart point (no momentum).
pub fn random_chart_point(
    desc: &AlgebraDescriptor,
    rng: &mut impl Rng,
) -> Result<crate::cone::ChartPoint> {
    coords(&random_cone_element(desc, rng), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{check_rank_one, tangency_defect};

    #[test]
    fn samples_are_valid_and_reproducible() {
        for desc in [
            AlgebraDescriptor::hn(2).unwrap(),
            AlgebraDescriptor::hn(4).unwrap(),
            AlgebraDescriptor::gamma3(),
        ] {
            let a = random_phase_point(&desc, &mut rng(7)).unwrap();
            let b = random_phase_point(&desc, &mut rng(7)).unwrap();
            assert_eq!(a, b);
            check_rank_one(&a.x).unwrap();
            assert!(tangency_defect(&a.x, &a.pi).unwrap() < 1e-12);
            let t = a.x.trace();
            assert!((0.5..2.0).contains(&t), "{t}");
        }
    }

    #[test]
    fn trial_streams_differ() {
        let desc = AlgebraDescriptor::hn(3).unwrap();
        let a = random_element(&desc, &mut trial_rng(1, 0));
        let b = random_element(&desc, &mut trial_rng(1, 1));
        assert_ne!(a, b);
    }
}
