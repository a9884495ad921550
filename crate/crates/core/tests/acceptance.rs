//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line with
//! its measured values and runtime; the process exits non-zero if any fails.
//! Runs without the libtest harness so the lines show up in `cargo test` output.

mod common;

use std::time::Instant;

use aorhb_core::diagnostics::{certify_decay, certify_decay_with, fit_iteration_scaling, CertifyOptions, SaddleState};
use aorhb_core::linalg::{gaussian_vector, seeded_rng};
use aorhb_core::oracle::SmoothOracle;
use aorhb_core::solvers::{
    aor_hb_composite, aor_hb_saddle, aor_hb_saddle_implicit, aor_hb_two_var, aor_hb_zero, extragradient,
    gradient_descent, heavy_ball_polyak, nag, ImplicitSolveCache, InnerSolver, Reference, SolverConfig, SolverTrace,
    Termination,
};
use aorhb_core::zoo::{InstanceKind, InstanceSpec, Problem, SaddleProblem};
use aorhb_core::Vector;

use common::checks::*;
use common::*;

const LASSO_SEED: u64 = 7;
const MSPBE_SEED: u64 = 11;
const PIECEWISE_SEED: u64 = 2;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    Verdict { ok, detail }
}

fn criterion(n: usize, budget_s: f64, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = body();
    let secs = start.elapsed().as_secs_f64();
    let ok = v.ok && secs < budget_s;
    println!(
        "criterion {n}: {} | {} | runtime {secs:.2}s (limit {budget_s}s)",
        if ok { "PASS" } else { "FAIL" },
        v.detail
    );
    ok
}

fn rate_bound(alpha: f64) -> f64 {
    1.0 / (1.0 + alpha / 2.0)
}

fn iterations_to(trace: &SolverTrace) -> Option<f64> {
    (trace.termination == Termination::ErrorTolerance).then_some(trace.iterations as f64)
}

fn criterion_1() -> Verdict {
    let q = centered_quadratic(200, 1e4, 1);
    let x0 = gaussian_vector(200, &mut seeded_rng(2));
    let cfg = SolverConfig::new(5000).with_reference(Reference::exact(Vector::zeros(200), Some(0.0))).without_objective();
    let trace = aor_hb_two_var(&q, &x0, &x0, &cfg).unwrap();
    let alpha = trace.alpha.unwrap();
    let cert = certify_decay(&trace, rate_bound(alpha), 1e-8).unwrap();
    verdict(
        cert.passes() && cert.ratios.len() >= 5000 && (alpha - 0.01).abs() < 1e-6,
        format!(
            "alpha {alpha:.6}, {} steps checked, worst ratio {:.8} vs bound {:.8}, {} violations",
            cert.ratios.len(),
            cert.worst_ratio(),
            cert.theoretical_bound,
            cert.violations.len()
        ),
    )
}

fn criterion_2() -> Verdict {
    let kappas = [1e2, 1e3, 1e4];
    let mut sweeps: [Vec<(f64, f64)>; 3] = Default::default();
    for &kappa in &kappas {
        let p = smooth(InstanceSpec::new(InstanceKind::Quadratic, &[100], Some(kappa), 5));
        let x0 = gaussian_vector(100, &mut seeded_rng(6));
        let cfg = SolverConfig::new(2_000_000)
            .with_reference(p.reference.clone().unwrap())
            .with_error_tolerance(1e-6)
            .with_record_every(1_000_000)
            .without_objective();
        let o = p.oracle.as_ref();
        let runs = [
            aor_hb_two_var(o, &x0, &x0, &cfg).unwrap(),
            nag(o, &x0, None, &cfg).unwrap(),
            gradient_descent(o, &x0, &cfg).unwrap(),
        ];
        for (sweep, t) in sweeps.iter_mut().zip(&runs) {
            if let Some(it) = iterations_to(t) {
                sweep.push((kappa, it));
            }
        }
    }
    let slope = |s: &Vec<(f64, f64)>| if s.len() == 3 { fit_iteration_scaling(s).unwrap() } else { f64::NAN };
    let (aor, nesterov, gd) = (slope(&sweeps[0]), slope(&sweeps[1]), slope(&sweeps[2]));
    let ok = (aor - 0.5).abs() <= 0.15 && (nesterov - 0.5).abs() <= 0.15 && (gd - 1.0).abs() <= 0.15;
    verdict(
        ok,
        format!(
            "slopes aor_hb {aor:.3}, nag {nesterov:.3}, gd {gd:.3}; iterations {:?} / {:?} / {:?}",
            sweeps[0].iter().map(|p| p.1).collect::<Vec<_>>(),
            sweeps[1].iter().map(|p| p.1).collect::<Vec<_>>(),
            sweeps[2].iter().map(|p| p.1).collect::<Vec<_>>()
        ),
    )
}

fn criterion_3() -> Verdict {
    let ls = singular_least_squares(40, 30, 15, 3);
    let x0 = gaussian_vector(30, &mut seeded_rng(4));
    let xs = ls.projected_solution(&x0);
    let f_star = ls.value(&xs);
    let cfg = SolverConfig::new(10_000).with_reference(Reference::exact(xs, Some(f_star)));
    let trace = aor_hb_zero(&ls, &x0, &cfg).unwrap();
    let e0 = trace.records[0].lyapunov_e.unwrap();
    assert_eq!(trace.records[0].k, 1);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for r in trace.records.iter().filter(|r| r.k <= 10_000) {
        let k = r.k as f64;
        let gap = r.obj_gap.unwrap();
        let bound = 6.0 * e0 / ((k + 3.0) * (k + 2.0));
        worst = worst.max((gap - bound) / e0);
        if gap > bound + 1e-9 * e0 {
            violations += 1;
        }
    }
    let last = trace.records.last().unwrap().k;
    verdict(
        violations == 0 && last >= 10_000 && ls.mu() == 0.0,
        format!("E_0 {e0:.4e}, k up to {last}, max (gap - bound)/E_0 {worst:.3e}, {violations} violations"),
    )
}

fn criterion_4() -> Verdict {
    let problem = match InstanceSpec::new(InstanceKind::Lasso, &[256, 64], None, LASSO_SEED).build().unwrap() {
        Problem::Composite(c) => c,
        _ => unreachable!(),
    };
    let reference = problem.reference.clone().unwrap();
    let zero = Vector::zeros(64);
    let trace = aor_hb_composite(&problem, &zero, &zero, &SolverConfig::new(3000)).unwrap();
    let alpha = trace.alpha.unwrap();
    let cert =
        certify_decay_with(&trace, rate_bound(alpha), CertifyOptions { slack: 1e-8, floor_rel: 1e-20, floor_abs: 0.0 }).unwrap();
    let f_ref = reference.value.unwrap();
    let f_final = problem.objective(&trace.x_final).unwrap();
    let obj_gap = (f_final - f_ref).abs();
    verdict(
        cert.passes() && cert.ratios.len() >= 10 && obj_gap <= 1e-8,
        format!(
            "alpha {alpha:.4}, {} steps checked, worst ratio {:.6} vs bound {:.6}, |F - F_ref| {obj_gap:.2e}",
            cert.ratios.len(),
            cert.worst_ratio(),
            cert.theoretical_bound
        ),
    )
}

fn saddle_run(problem: &SaddleProblem, implicit: bool, tol: f64, every: usize) -> SolverTrace {
    let s0 = SaddleState::from_primal_dual(Vector::zeros(problem.m()), Vector::zeros(problem.n()));
    let cfg = SolverConfig::new(1_000_000).with_error_tolerance(tol).with_record_every(every);
    if implicit {
        let cache = ImplicitSolveCache::for_problem(problem).unwrap();
        aor_hb_saddle_implicit(problem, &s0, &cfg, &cache).unwrap()
    } else {
        aor_hb_saddle(problem, &s0, &cfg).unwrap()
    }
}

fn criterion_5() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for kappa in [1e2, 1e4] {
        let problem = saddle(250, 20, kappa, MSPBE_SEED);
        let mut iters = [0.0; 2];
        for (j, implicit) in [false, true].into_iter().enumerate() {
            let trace = saddle_run(&problem, implicit, 1e-6, 1);
            let alpha = trace.alpha.unwrap();
            let cert = certify_decay_with(&trace, rate_bound(alpha), CertifyOptions { slack: 1e-8, floor_rel: 1e-20, floor_abs: 0.0 })
                .unwrap();
            let reached = iterations_to(&trace);
            ok &= cert.passes() && reached.is_some();
            iters[j] = reached.unwrap_or(f64::INFINITY);
            parts.push(format!(
                "kappa_g {kappa:.0e} {}: alpha {alpha:.5}, worst ratio/bound {:.6}, {} violations, {} iters",
                if implicit { "implicit" } else { "explicit" },
                cert.worst_ratio() / cert.theoretical_bound,
                cert.violations.len(),
                iters[j]
            ));
        }
        ok &= iters[1] < iters[0];
    }
    verdict(ok, parts.join("; "))
}

fn criterion_6() -> Verdict {
    let mut eg = Vec::new();
    let mut aor = Vec::new();
    for kappa in [1e2, 1e3, 1e4] {
        let problem = saddle(250, 20, kappa, MSPBE_SEED);
        if let Some(it) = iterations_to(&saddle_run(&problem, false, 1e-6, 1_000_000)) {
            aor.push((kappa, it));
        }
        let z0 = Vector::zeros(problem.m() + problem.n());
        let cfg = SolverConfig::new(5_000_000).with_error_tolerance(1e-6).with_record_every(1_000_000);
        if let Some(it) = iterations_to(&extragradient(&problem, &z0, &cfg).unwrap()) {
            eg.push((kappa, it));
        }
    }
    let slope = |s: &Vec<(f64, f64)>| if s.len() == 3 { fit_iteration_scaling(s).unwrap() } else { f64::NAN };
    let (s_eg, s_aor) = (slope(&eg), slope(&aor));
    verdict(
        (s_eg - 1.0).abs() <= 0.2 && (s_aor - 0.5).abs() <= 0.15,
        format!(
            "slopes extragradient {s_eg:.3}, aor_hb_saddle {s_aor:.3}; iterations {:?} / {:?}",
            eg.iter().map(|p| p.1).collect::<Vec<_>>(),
            aor.iter().map(|p| p.1).collect::<Vec<_>>()
        ),
    )
}

fn criterion_7() -> Verdict {
    let (p, x0) = piecewise_case(PIECEWISE_SEED);
    let cfg = SolverConfig::new(10_000).with_reference(p.reference.clone().unwrap()).without_objective();
    let aor = aor_hb_two_var(p.oracle.as_ref(), &x0, &x0, &cfg).unwrap();
    let hb = heavy_ball_polyak(p.oracle.as_ref(), &x0, None, &cfg).unwrap();
    let reached = aor.iterations_to_relative_error(1e-6);
    let (e_aor, e_hb) = (aor.final_relative_error().unwrap(), hb.final_relative_error().unwrap_or(f64::INFINITY));
    verdict(
        reached.is_some() && e_hb >= 10.0 * e_aor,
        format!(
            "seed {PIECEWISE_SEED}: aor_hb reaches 1e-6 at k = {reached:?}, final relative errors aor_hb {e_aor:.2e}, heavy ball {e_hb:.2e}"
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut check = |name: &str, value: f64, pass: bool| {
        ok &= pass;
        parts.push(format!("{name} {value:.2e}"));
    };

    let oracles = zoo_oracles(21);
    let fd = oracles.iter().map(|(_, o)| fd_gradient_gap(o.as_ref(), 22, 10)).fold(0.0, f64::max);
    check("fd gradient gap", fd, fd <= 1e-5);
    let bb = oracles.iter().map(|(_, o)| bregman_bounds_worst(o.as_ref(), 23, 100)).fold(f64::INFINITY, f64::min);
    check("bregman bound slack", bb, bb >= -1e-9);
    let tp = oracles.iter().map(|(_, o)| three_point_worst(o.as_ref(), 24, 100)).fold(0.0, f64::max);
    check("three-point residual", tp, tp <= 1e-9);

    let minimizers = strongly_convex_with_minimizers(25);
    let sl = minimizers
        .iter()
        .map(|(_, o, x)| smooth_strong_lyapunov_worst(o.as_ref(), x, 26, 1000))
        .fold(f64::INFINITY, f64::min);
    check("smooth strong Lyapunov", sl, sl >= -1e-9);
    let cl = composite_strong_lyapunov_worst(27, 1000);
    check("composite strong Lyapunov", cl, cl >= -1e-9);
    let sd = saddle_strong_lyapunov_worst(28, 1000);
    check("saddle strong Lyapunov", sd, sd >= -1e-9);
    let sw = minimizers.iter().map(|(_, o, x)| sandwich_worst(o.as_ref(), x, 29, 1000)).fold(f64::NEG_INFINITY, f64::max);
    check("sandwich excess", sw, sw <= 1e-12);

    let tv = minimizers.iter().map(|(_, o, _)| triple_vs_two_var(o.as_ref(), 30, 100)).fold(0.0, f64::max);
    check("triple vs two-variable", tv, tv <= 1e-10);
    let de = saddle_vs_difference_equations(&saddle(30, 8, 100.0, 31), 32, 100);
    check("saddle vs difference equations", de, de <= 1e-12);

    let mut br: f64 = 0.0;
    for (m, n) in [(30, 8), (6, 15)] {
        let p = saddle(m, n, 100.0, 33);
        br = br.max(implicit_block_residual(&p, InnerSolver::Cholesky, 34, 20));
        br = br.max(implicit_block_residual(&p, InnerSolver::ConjugateGradient { tol: 1e-13, max_iters: 500 }, 35, 20));
    }
    check("implicit block residual", br, br <= 1e-10);
    verdict(ok, parts.join(", "))
}

fn main() -> std::process::ExitCode {
    let results = [
        criterion(1, 2.0, criterion_1),
        criterion(2, 30.0, criterion_2),
        criterion(3, 5.0, criterion_3),
        criterion(4, 20.0, criterion_4),
        criterion(5, 30.0, criterion_5),
        criterion(6, 60.0, criterion_6),
        criterion(7, f64::INFINITY, criterion_7),
        criterion(8, 120.0, criterion_8),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
