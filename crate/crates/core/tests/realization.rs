use u1kepler::generators::{compile, GeneratorSpec, Realization};
use u1kepler::jordan::{onb, AlgebraDescriptor, AlgebraElement};
use u1kepler::poisson::bracket;
use u1kepler::sample::{random_element, random_phase_point, rng};

fn rel(l: f64, r: f64) -> f64 {
    (l - r).abs() / (1.0 + l.abs() + r.abs())
}

fn br(a: &GeneratorSpec, b: &GeneratorSpec, ph: &u1kepler::cone::PhasePoint, mu: f64) -> f64 {
    bracket(&compile(a, mu).unwrap(), &compile(b, mu).unwrap(), ph, mu).unwrap()
}

fn val(a: &GeneratorSpec, ph: &u1kepler::cone::PhasePoint, mu: f64) -> f64 {
    compile(a, mu).unwrap().value(ph, mu).unwrap()
}

fn triple(u: &AlgebraElement, v: &AlgebraElement, w: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::smap(u, v, w).unwrap()
}

#[test]
fn realization_bracket_families() {
    use GeneratorSpec::*;
    for (n, mu) in [(2, 0.0), (2, 0.7), (3, -1.2), (4, 0.4)] {
        let desc = AlgebraDescriptor::hn(n).unwrap();
        let mut r = rng(100 + n as u64);
        for _ in 0..3 {
            let ph = random_phase_point(&desc, &mut r).unwrap();
            let [u, v, z, w] = [0; 4].map(|_| random_element(&desc, &mut r));
            let checks = [
                (br(&X(u.clone()), &X(v.clone()), &ph, mu), 0.0),
                (br(&Y(u.clone()), &Y(v.clone()), &ph, mu), 0.0),
                (
                    br(&X(u.clone()), &Y(v.clone()), &ph, mu),
                    -2.0 * val(&S(u.clone(), v.clone()), &ph, mu),
                ),
                (
                    br(&S(u.clone(), v.clone()), &X(z.clone()), &ph, mu),
                    val(&X(triple(&u, &v, &z)), &ph, mu),
                ),
                (
                    br(&S(u.clone(), v.clone()), &Y(z.clone()), &ph, mu),
                    -val(&Y(triple(&v, &u, &z)), &ph, mu),
                ),
                (
                    br(&S(u.clone(), v.clone()), &S(z.clone(), w.clone()), &ph, mu),
                    val(&S(triple(&u, &v, &z), w.clone()), &ph, mu)
                        - val(&S(z.clone(), triple(&v, &u, &w)), &ph, mu),
                ),
                (
                    br(&L(u.clone()), &L(v.clone()), &ph, mu),
                    val(&Luv(u.clone(), v.clone()), &ph, mu),
                ),
            ];
            for (i, (l, rr)) in checks.iter().enumerate() {
                assert!(rel(*l, *rr) < 1e-9, "n={n} mu={mu} family {i}: {l} vs {rr}");
            }
        }
    }
}

#[test]
fn quadratic_relations_and_hla() {
    for (n, mu) in [(2, 0.0), (2, 0.9), (3, 0.5), (4, -1.1)] {
        let desc = AlgebraDescriptor::hn(n).unwrap();
        let nf = n as f64;
        let mut r = rng(7 + n as u64);
        for _ in 0..5 {
            let ph = random_phase_point(&desc, &mut r).unwrap();
            let b = Realization::new(mu).basis_values(&ph).unwrap();
            let mu2 = mu * mu;
            let sum_l2: f64 = b.l.iter().map(|l| l * l).sum();
            assert!(
                rel((2.0 / nf) * sum_l2 - b.le * b.le - b.xe * b.ye, -mu2) < 1e-10,
                "(i)"
            );
            let sx: f64 = b.x.iter().map(|x| x * x).sum();
            assert!(rel(sx, nf * b.xe * b.xe) < 1e-10, "(iv)");
            let sxy: f64 = b.x.iter().zip(&b.y).map(|(x, y)| x * y).sum();
            assert!(rel(sxy, nf * (b.le * b.le + mu2)) < 1e-10, "(vi)");
            let sluv: f64 = b.luv.iter().flatten().map(|v| v * v).sum();
            assert!(
                rel(
                    4.0 / nf.powi(3) * sluv,
                    b.xe * b.ye - b.le * b.le + (nf - 2.0) * mu2 / nf
                ) < 1e-10,
                "(vii)"
            );
            let (l, rr) = b.hla_sides();
            assert!(rel(l, rr) < 1e-9, "hla n={n} mu={mu}: {l} vs {rr}");
        }
    }
    let _ = onb(&AlgebraDescriptor::gamma3());
}
