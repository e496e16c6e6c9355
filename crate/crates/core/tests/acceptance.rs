//! Acceptance criteria. Runs as a plain binary so that each criterion
//! reports exactly one PASS/FAIL line.

use std::process::ExitCode;
use std::time::Instant;

use u1kepler::dynamics::{integrate, sample_initial, FlowConfig};
use u1kepler::generators::Corruption;
use u1kepler::jordan::{AlgebraDescriptor, AlgebraKind};
use u1kepler::verify::{
    suite_bracket_lemma, suite_differentiation, suite_jordan_axioms, suite_kepler_crosscheck,
    suite_matrix_identities, suite_quadratic, suite_realization, SuiteOptions, SuiteReport,
    MU_GRID,
};

const SEED: u64 = 20240611;

fn summary(reports: &[&SuiteReport]) -> String {
    reports
        .iter()
        .map(|r| {
            let worst = r
                .identities
                .iter()
                .filter(|i| !i.pass)
                .map(|i| format!(" {}={:.2e}>{:.0e}", i.name, i.max_residual, i.tolerance))
                .collect::<String>();
            format!("{} max {:.2e}{}", r.suite, r.max_residual, worst)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn opts() -> SuiteOptions {
    SuiteOptions::default()
}

fn c1() -> Result<(bool, String), String> {
    let r = suite_matrix_identities(&[2, 3, 4, 5, 6], 1000, SEED, &opts())
        .map_err(|e| e.to_string())?;
    Ok((r.pass, summary(&[&r])))
}

fn c2() -> Result<(bool, String), String> {
    let h = suite_jordan_axioms(AlgebraKind::Hn, &[2, 3, 4, 5, 6], 1000, SEED, &opts())
        .map_err(|e| e.to_string())?;
    let g = suite_jordan_axioms(AlgebraKind::Gamma3, &[2], 1000, SEED, &opts())
        .map_err(|e| e.to_string())?;
    Ok((h.pass && g.pass, summary(&[&h, &g])))
}

fn c3() -> Result<(bool, String), String> {
    let h = suite_bracket_lemma(
        AlgebraKind::Hn,
        &[2, 3, 4],
        &[0.0, 0.5, -1.3],
        500,
        SEED,
        &opts(),
    )
    .map_err(|e| e.to_string())?;
    let g = suite_bracket_lemma(AlgebraKind::Gamma3, &[2], &[0.0], 500, SEED, &opts())
        .map_err(|e| e.to_string())?;
    Ok((h.pass && g.pass, summary(&[&h, &g])))
}

fn c4() -> Result<(bool, String), String> {
    let r = suite_realization(AlgebraKind::Hn, &[2, 3, 4], &MU_GRID, 100, SEED, &opts())
        .map_err(|e| e.to_string())?;
    Ok((r.pass, summary(&[&r])))
}

fn c5() -> Result<(bool, String), String> {
    let r = suite_quadratic(&[2, 3, 4], &MU_GRID, 100, SEED, &opts()).map_err(|e| e.to_string())?;
    let hand = r
        .identity("hand_point_relation_i")
        .map(|i| i.max_residual)
        .unwrap_or(f64::INFINITY);
    Ok((
        r.pass && hand <= 1e-13,
        format!("{}; hand point {hand:.1e}", summary(&[&r])),
    ))
}

fn c6() -> Result<(bool, String), String> {
    let r = suite_kepler_crosscheck(200, SEED, &FlowConfig::default(), &opts())
        .map_err(|e| e.to_string())?;
    let get = |n: &str| {
        r.identity(n)
            .map(|i| i.max_residual)
            .unwrap_or(f64::INFINITY)
    };
    Ok((
        r.pass,
        format!(
            "pointwise {:.1e}; period err {:.1e}; trajectory {:.1e}; {}",
            get("gamma3_lrl_vector").max(get("gamma3_h")),
            get("circular_period"),
            get("trajectory_vs_r3"),
            summary(&[&r])
        ),
    ))
}

fn c7() -> Result<(bool, String), String> {
    let desc = AlgebraDescriptor::hn(2).unwrap();
    let ph = sample_initial(&desc, 0.5, -1.0, SEED).map_err(|e| e.to_string())?;
    let cfg = FlowConfig {
        dt: 1e-3,
        t_end: 100.0,
        monitor_stride: 10,
        ..FlowConfig::default()
    };
    let rec = integrate(&ph, 0.5, &cfg).map_err(|e| e.to_string())?;
    let d = rec.max_drifts();
    let ok = d.h <= 1e-7 && d.luv <= 1e-7 && d.lrl <= 1e-7 && d.hla_residual <= 1e-9;
    Ok((
        ok,
        format!(
            "drift H {:.1e}, L_ab {:.1e}, A_a {:.1e}; hla_residual max {:.1e} over {} samples",
            d.h,
            d.luv,
            d.lrl,
            d.hla_residual,
            rec.len()
        ),
    ))
}

fn c8() -> Result<(bool, String), String> {
    let flip = SuiteOptions {
        corruption: Corruption::FlipSMuTerm,
        ..opts()
    };
    let drop = SuiteOptions {
        corruption: Corruption::DropXMuSquared,
        ..opts()
    };
    let e = |e: u1kepler::Error| e.to_string();
    let r_flip =
        suite_realization(AlgebraKind::Hn, &[2, 3], &[0.5, -1.3], 10, SEED, &flip).map_err(e)?;
    let r_drop =
        suite_realization(AlgebraKind::Hn, &[2, 3], &[0.5, -1.3], 10, SEED, &drop).map_err(e)?;
    let q_drop = suite_quadratic(&[2, 3], &[0.5, -1.3], 10, SEED, &drop).map_err(e)?;
    let ok = !r_flip.pass && !r_drop.pass && !q_drop.pass;
    Ok((
        ok,
        format!(
            "corrupted suites fail: realization/flip-S {:.1e}, realization/drop-X {:.1e}, quadratic/drop-X {:.1e}",
            r_flip.max_residual, r_drop.max_residual, q_drop.max_residual
        ),
    ))
}

fn c9() -> Result<(bool, String), String> {
    let h = suite_differentiation(AlgebraKind::Hn, &[2, 3, 4], &MU_GRID, 50, SEED, &opts())
        .map_err(|e| e.to_string())?;
    let g = suite_differentiation(AlgebraKind::Gamma3, &[2], &[0.0], 10, SEED, &opts())
        .map_err(|e| e.to_string())?;
    Ok((h.pass && g.pass, summary(&[&h, &g])))
}

type Criterion = fn() -> Result<(bool, String), String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("1 matrix identities on the rank-one cone", c1),
        ("2 Jordan and structure-algebra axioms", c2),
        ("3 tangent-bundle bracket lemma", c3),
        ("4 su(n,n) realization brackets", c4),
        ("5 quadratic relations and HLA", c5),
        ("6 Kepler reduction", c6),
        ("7 magnetized conservation", c7),
        ("8 negative controls", c8),
        ("9 jet differentiation self-test", c9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {name}: {} ({secs:.1}s) {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
