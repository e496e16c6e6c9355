use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use u1kepler::cone::{check_rank_one, unlift, Chart, PhasePoint};
use u1kepler::generators::{compile, GeneratorSpec, Realization};
use u1kepler::jordan::{onb, AlgebraDescriptor, AlgebraElement};
use u1kepler::poisson::{bracket, Observable, PhaseJet};
use u1kepler::sample::{random_element, random_phase_point, rng, SampleRng};

fn rel(l: f64, r: f64) -> f64 {
    (l - r).abs() / (1.0 + l.abs() + r.abs())
}

fn setup(n: usize, seed: u64) -> (AlgebraDescriptor, SampleRng, PhasePoint) {
    let desc = AlgebraDescriptor::hn(n).unwrap();
    let mut r = rng(seed);
    let ph = random_phase_point(&desc, &mut r).unwrap();
    (desc, r, ph)
}

fn val(spec: &GeneratorSpec, ph: &PhasePoint, mu: f64) -> f64 {
    compile(spec, mu).unwrap().value(ph, mu).unwrap()
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
fn random_orthogonal(d: usize, r: &mut SampleRng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| r.gen::<f64>() - 0.5);
    g.qr().q()
}

fn rotated_basis(desc: &AlgebraDescriptor, r: &mut SampleRng) -> Vec<AlgebraElement> {
    let basis = onb(desc);
    let o = random_orthogonal(basis.len(), r);
    (0..basis.len())
        .map(|a| {
            basis
                .iter()
                .enumerate()
                .fold(desc.zero(), |acc, (b, e)| acc.axpy(o[(a, b)], e))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embedded_point_is_rank_one_and_roundtrips(n in 2usize..=4, seed in any::<u64>()) {
        let (_, _, ph) = setup(n, seed);
        check_rank_one(&ph.x).unwrap();
        let sq = ph.x.jmul(&ph.x).unwrap();
        prop_assert!((&sq - &ph.x.scale(ph.x.trace())).max_abs() < 1e-12 * (1.0 + ph.x.trace().powi(2)));
        let k = match ph.point.chart { Chart::Pivot(k) => Some(k), Chart::Global => None };
        let (pt, p) = unlift(&ph.x, &ph.pi, k).unwrap();
        for (a, b) in pt.q.iter().zip(&ph.point.q) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
        for (a, b) in p.iter().zip(&ph.p) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn generators_do_not_depend_on_the_chart(n in 2usize..=4, seed in any::<u64>(), mu in -2.0f64..2.0) {
        let (desc, mut r, ph) = setup(n, seed);
        let u = random_element(&desc, &mut r);
        let v = random_element(&desc, &mut r);
        let specs = [
            GeneratorSpec::Ham,
            GeneratorSpec::L2,
            GeneratorSpec::A2,
            GeneratorSpec::X(u.clone()),
            GeneratorSpec::S(u.clone(), v.clone()),
        ];
        let base: Vec<f64> = specs.iter().map(|s| val(s, &ph, mu)).collect();
        let xu_yv = bracket(&compile(&specs[3], mu).unwrap(), &compile(&GeneratorSpec::Y(v.clone()), mu).unwrap(), &ph, mu).unwrap();
        for k in 0..n {
            if ph.x.as_matrix().unwrap().get(k, k).re < 1e-3 * ph.x.trace() {
                continue;
            }
            let other = ph.rechart(Some(k)).unwrap();
            for (s, b) in specs.iter().zip(&base) {
                prop_assert!(rel(val(s, &other, mu), *b) < 1e-10, "{:?} pivot {}", s.kind(), k);
            }
            let again = bracket(&compile(&specs[3], mu).unwrap(), &compile(&GeneratorSpec::Y(v.clone()), mu).unwrap(), &other, mu).unwrap();
            prop_assert!(rel(again, xu_yv) < 1e-9);
        }
    }

    #[test]
    fn casimirs_are_basis_independent(n in 2usize..=4, seed in any::<u64>(), mu in -2.0f64..2.0) {
        let (desc, mut r, ph) = setup(n, seed);
        let re = Realization::new(mu);
        let ctx = PhaseJet::values(&ph, mu).unwrap();
        let basis = rotated_basis(&desc, &mut r);
        let mut l2 = 0.0;
        for a in 0..basis.len() {
            for b in (a + 1)..basis.len() {
                l2 += re.luv(&ctx, &basis[a], &basis[b]).value.powi(2);
            }
        }
        let a2 = basis.iter().map(|b| re.lrl(&ctx, b).value.powi(2)).sum::<f64>() - 1.0;
        prop_assert!(rel(l2, re.casimir_l2(&ctx).value) < 1e-11);
        prop_assert!(rel(a2, re.casimir_a2(&ctx).value) < 1e-11);
    }

    #[test]
    fn structure_generator_with_identity_is_l(n in 2usize..=4, seed in any::<u64>(), mu in -2.0f64..2.0) {
        let (desc, mut r, ph) = setup(n, seed);
        let u = random_element(&desc, &mut r);
        let e = desc.identity();
        let l = val(&GeneratorSpec::L(u.clone()), &ph, mu);
        prop_assert!(rel(val(&GeneratorSpec::S(u.clone(), e.clone()), &ph, mu), l) < 1e-12);
        prop_assert!(rel(val(&GeneratorSpec::S(e.clone(), u.clone()), &ph, mu), l) < 1e-12);
        prop_assert!(val(&GeneratorSpec::Luv(u.clone(), e), &ph, mu).abs() < 1e-12 * (1.0 + l.abs()));
    }

    #[test]
    fn structure_generator_splits_into_symmetric_and_antisymmetric_parts(
        n in 2usize..=4, seed in any::<u64>(), mu in -2.0f64..2.0,
    ) {
        let (desc, mut r, ph) = setup(n, seed);
        let u = random_element(&desc, &mut r);
        let v = random_element(&desc, &mut r);
        let s = val(&GeneratorSpec::S(u.clone(), v.clone()), &ph, mu);
        let luv = val(&GeneratorSpec::Luv(u.clone(), v.clone()), &ph, mu);
        let l_uv = val(&GeneratorSpec::L(u.jmul(&v).unwrap()), &ph, mu);
        prop_assert!(rel(s, l_uv + luv) < 1e-11);
        let s_vu = val(&GeneratorSpec::S(v, u), &ph, mu);
        prop_assert!(rel(s_vu, l_uv - luv) < 1e-11);
    }

    #[test]
    fn magnetic_charge_shifts_energy_by_a_centrifugal_term(n in 2usize..=4, seed in any::<u64>(), mu in -2.0f64..2.0) {
        let (_, _, ph) = setup(n, seed);
        let r = ph.x.trace() / n as f64;
        let h0 = val(&GeneratorSpec::Ham, &ph, 0.0);
        let h = val(&GeneratorSpec::Ham, &ph, mu);
        prop_assert!(rel(h - h0, mu * mu / (2.0 * r * r)) < 1e-12);
    }

    #[test]
    fn position_generators_are_linear(n in 2usize..=4, seed in any::<u64>(), mu in -2.0f64..2.0, a in -3.0f64..3.0) {
        let (desc, mut r, ph) = setup(n, seed);
        let u = random_element(&desc, &mut r);
        let v = random_element(&desc, &mut r);
        let w = u.axpy(a, &v);
        for mk in [GeneratorSpec::X, GeneratorSpec::Y, GeneratorSpec::L, GeneratorSpec::Lrl] {
            let lhs = val(&mk(w.clone()), &ph, mu);
            let rhs = val(&mk(u.clone()), &ph, mu) + a * val(&mk(v.clone()), &ph, mu);
            prop_assert!(rel(lhs, rhs) < 1e-11);
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_leibniz(n in 2usize..=3, seed in any::<u64>(), mu in -2.0f64..2.0) {
        let (desc, mut r, ph) = setup(n, seed);
        let [u, v, w] = [0; 3].map(|_| random_element(&desc, &mut r));
        let f = compile(&GeneratorSpec::X(u), mu).unwrap();
        let g = compile(&GeneratorSpec::Luv(v.clone(), w), mu).unwrap();
        let h = Observable::inner_pi(&v);
        let fg = bracket(&f, &g, &ph, mu).unwrap();
        prop_assert!(rel(fg, -bracket(&g, &f, &ph, mu).unwrap()) < 1e-12);
        let lhs = bracket(&f, &g.product(&h), &ph, mu).unwrap();
        let rhs = fg * h.value(&ph, mu).unwrap() + g.value(&ph, mu).unwrap() * bracket(&f, &h, &ph, mu).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-11);
    }
}
