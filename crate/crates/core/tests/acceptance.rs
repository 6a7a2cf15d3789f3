//! Acceptance gate: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Failures are reported but only abort the process when
//! `FLOQLAB_ACCEPTANCE_STRICT=1`, so a known red criterion does not hide the
//! rest of the workspace test results.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use faer::Mat;
use floqlab::exec::Exec;
use floqlab::fermion::pfaffian::{pfaffian, SkewMatrix};
use floqlab::fermion::{self, IsingParams, ModeSet};
use floqlab::floquet::{build_phase_table, dense_unitary, step_in_place, SamplePlan};
use floqlab::lab::{self, ExperimentConfig, ENTROPY, JSQ};
use floqlab::linalg;
use floqlab::observables::{
    jsq_bit_reversal_even, random_state_reference, time_average,
    von_neumann_entropy, ReferenceValues, Restriction,
};
use floqlab::spin::{coherent_state, expval_jsq, Axis, Boundary, CoherentAngles, StateVector, SystemParams};
use floqlab::symmetry::{build_sector_basis, Parity, SectorLabel};
use floqlab::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: f64 = 6.0;
const P: f64 = 4.0 * PI / 11.0;

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn record(&mut self, id: u32, title: &str, pass: bool, details: &[String], started: Instant) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {title} ({:.1} s)", started.elapsed().as_secs_f64());
        for d in details {
            println!("          {d}");
        }
        if !pass {
            self.failed.push(id);
        }
    }
}

fn rel(x: f64, target: f64) -> f64 {
    (x - target).abs() / target.abs()
}

fn scan_config(n: usize) -> ExperimentConfig {
    ExperimentConfig {
        n_spins: n,
        ..Default::default()
    }
}

/// Time averages of the coherent-state trace over `[start, end]`.
fn steady_state(n: usize, alpha: f64, start: u64, end: u64, stride: u64) -> (f64, f64) {
    let cfg = scan_config(n);
    let plan = SamplePlan {
        n_steps: end,
        stride,
        first: start,
    };
    let series = lab::trace(&cfg, alpha, 1.0, plan).unwrap();
    (
        time_average(&series, JSQ, start, end).unwrap(),
        time_average(&series, ENTROPY, start, end).unwrap(),
    )
}

fn conservation(r: &mut Report) {
    let t = Instant::now();
    let n = 12;
    let params = SystemParams::new(n, 0.0, K, P, 1.0, Boundary::OpenLine).unwrap();
    let table = build_phase_table(&params).unwrap();
    let mut psi = coherent_state(n, CoherentAngles::new(2.25, 1.1));
    let mut worst = (expval_jsq(&psi) - 42.0).abs();
    for _ in 0..1000 {
        step_in_place(Exec::default(), psi.amplitudes_mut(), &table).unwrap();
        worst = worst.max((expval_jsq(&psi) - 42.0).abs());
    }
    r.record(
        1,
        "J² conserved at alpha = 0 (N = 12, 1000 kicks)",
        worst < 1e-9,
        &[format!("max |J² − 42| = {worst:.2e} (tol 1e-9)")],
        t,
    );
}

fn oracle_exact(r: &mut Report) {
    let t = Instant::now();
    let n = 8;
    let params = SystemParams::nearest_neighbor(n, K, P, 1.0, Boundary::Ring).unwrap();
    let ising = IsingParams::from_system(&params).unwrap();
    let states = common::trajectory(&params, StateVector::basis(n, 0), 20);
    let (mut d_jsq, mut d_corr, mut d_s) = (0.0f64, 0.0f64, 0.0f64);
    for (step, psi) in states.iter().enumerate() {
        let step = step as u64;
        d_jsq = d_jsq.max((fermion::jsq_oracle(&ising, step).unwrap() - expval_jsq(psi)).abs());
        for i in 0..n {
            for j in i + 1..n {
                for axis in [Axis::X, Axis::Y, Axis::Z] {
                    let o = fermion::spin_correlator(&ising, step, i, j, axis).unwrap();
                    d_corr = d_corr.max((o - common::pauli_pair(psi, i, j, axis)).abs());
                }
            }
        }
        for l in 1..=n / 2 {
            let exact = von_neumann_entropy(psi, (1u64 << l) - 1).unwrap();
            d_s = d_s.max((fermion::entropy_oracle(&ising, step, l).unwrap() - exact).abs());
        }
    }
    let worst = d_jsq.max(d_corr).max(d_s);
    r.record(
        2,
        "free-fermion oracle equals exact evolution (N = 8 ring, n ≤ 20)",
        worst < 1e-7,
        &[format!(
            "max diff: J² {d_jsq:.2e}, correlators {d_corr:.2e}, S_l (l ≤ 4) {d_s:.2e} (tol 1e-7)"
        )],
        t,
    );
}

fn oracle_large(r: &mut Report) {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        n_spins: 14,
        n_steps: 200,
        stride: 1,
        ..Default::default()
    };
    let tr = lab::oracle_trace(&cfg, 1.0).unwrap();
    let worst = tr.max_abs_diff.iter().copied().fold(0.0, f64::max);
    r.record(
        3,
        "exact and oracle traces coincide (N = 14 ring, n ≤ 200)",
        worst < 1e-6 && tr.exact.len() == 201,
        &[format!("max |Δ| over J² and S_7 = {worst:.2e} (tol 1e-6)")],
        t,
    );
}

fn thermalization(r: &mut Report) {
    let t = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for n in [12, 14] {
        let refs = ReferenceValues::for_spins(n);
        let (jsq, s) = steady_state(n, 1.5, 20_000, 50_000, 100);
        let (ej, es) = (rel(jsq, refs.jsq_rmt), rel(s, refs.s_page));
        pass &= ej < 0.10 && es < 0.05;
        details.push(format!(
            "N = {n}: J̄² = {jsq:.3} vs 3N/4 = {:.1} ({:.1}%, tol 10%); S̄ = {s:.4} vs Page {:.4} ({:.2}%, tol 5%)",
            refs.jsq_rmt,
            100.0 * ej,
            refs.s_page,
            100.0 * es
        ));
    }
    r.record(4, "alpha = 1.5 thermalizes (window 2e4..5e4)", pass, &details, t);
}

fn permutation_symmetric(r: &mut Report) {
    let t = Instant::now();
    let n = 14;
    let refs = ReferenceValues::for_spins(n);
    let (jsq, s) = steady_state(n, 0.01, 20_000, 50_000, 100);
    let (ej, es) = (rel(jsq, refs.jsq_pss), rel(s, refs.s_pss));
    r.record(
        5,
        "alpha = 0.01 stays near the symmetric subspace (N = 14, window 2e4..5e4)",
        ej < 0.05 && es < 0.20,
        &[
            format!("J̄² = {jsq:.3} vs {:.1} ({:.1}%, tol 5%)", refs.jsq_pss, 100.0 * ej),
            format!("S̄ = {s:.4} vs {:.4} ({:.1}%, tol 20%)", refs.s_pss, 100.0 * es),
        ],
        t,
    );
}

/// First α at which `mean_r` falls through `level`, linearly interpolated.
fn crossing(alphas: &[f64], rs: &[f64], level: f64) -> Option<f64> {
    (1..alphas.len()).find_map(|i| {
        (rs[i - 1] >= level && rs[i] < level).then(|| {
            alphas[i - 1] + (rs[i - 1] - level) / (rs[i - 1] - rs[i]) * (alphas[i] - alphas[i - 1])
        })
    })
}

fn spectral(r: &mut Report) {
    let t = Instant::now();
    let cfg = scan_config(12);
    let alphas = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0, 15.0, 20.0];
    let mean_r = |tau: f64| -> Vec<f64> {
        alphas
            .iter()
            .map(|&a| lab::even_sector_spectrum(&cfg, a, tau).unwrap().2.mean_r)
            .collect()
    };
    let r1 = mean_r(1.0);
    let r5 = mean_r(5.0);
    let at = |a: f64| r1[alphas.iter().position(|&x| x == a).unwrap()];
    let (low, high) = (at(1.0), at(10.0));
    let ok_low = (low - 0.529).abs() <= 0.02;
    let ok_high = (high - 0.386).abs() <= 0.03;
    let c1 = crossing(&alphas, &r1, 0.458);
    let c5 = crossing(&alphas, &r5, 0.458);
    let ok_cross = matches!((c1, c5), (Some(a), Some(b)) if b > a);
    let fmt = |rs: &[f64]| rs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    r.record(
        6,
        "level statistics cross over from COE to Poisson (N = 12, even-even sector)",
        ok_low && ok_high && ok_cross,
        &[
            format!("tau = 1, alpha = 1: <r> = {low:.4} (0.529 ± 0.02) {}", verdict(ok_low)),
            format!("tau = 1, alpha = 10: <r> = {high:.4} (0.386 ± 0.03) {}", verdict(ok_high)),
            format!(
                "midpoint crossing: tau = 1 at alpha ≈ {}, tau = 5 at alpha ≈ {} {}",
                show(c1),
                show(c5),
                verdict(ok_cross)
            ),
            format!("alpha grid {alphas:?}"),
            format!("tau = 1: {}", fmt(&r1)),
            format!("tau = 5: {}", fmt(&r5)),
        ],
        t,
    );
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "out of range"
    }
}

fn show(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "none".into())
}

fn effective_dimension(r: &mut Report) {
    let t = Instant::now();
    let cfg = scan_config(12);
    let alphas = [0.0, 1.0, 1.5, 2.0, 2.5, 10.0];
    let d: Vec<usize> = alphas
        .iter()
        .map(|&a| lab::deff_point(&cfg, a, 1.0).unwrap().k)
        .collect();
    let peak = d[1..5].iter().copied().max().unwrap();
    let ok_zero = d[0] <= 13;
    let ok_peak = rel(peak as f64, 2080.0) <= 0.25;
    let ok_tail = d[5] < peak;
    r.record(
        7,
        "effective dimension profile (N = 12, tau = 1, eps = 1e-4)",
        ok_zero && ok_peak && ok_tail,
        &[format!(
            "alpha {alphas:?} -> D_eff {d:?}; peak {peak} vs 2080 ({:.1}%, tol 25%)",
            100.0 * rel(peak as f64, 2080.0)
        )],
        t,
    );
}

fn sector_dimensions(r: &mut Report) {
    let t = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for n in (4..=12).step_by(2) {
        let dim: usize = [Parity::Even, Parity::Odd]
            .into_iter()
            .map(|z| {
                build_sector_basis(
                    n,
                    SectorLabel {
                        z_parity: z,
                        reflection: Parity::Even,
                    },
                )
                .unwrap()
                .dim()
            })
            .sum();
        let expected = (1 << (n - 1)) + (1 << (n / 2 - 1));
        pass &= dim == expected;
        details.push(format!("N = {n}: {dim} (expected {expected})"));
    }
    r.record(8, "reflection-even dimension identity", pass, &[details.join(", ")], t);
}

fn appendix_check(r: &mut Report) {
    let t = Instant::now();
    let n = 10;
    let m = random_state_reference(n, 1000, 2024, Restriction::BitReversalEven).unwrap();
    let expected = jsq_bit_reversal_even(n);
    let z = (m.mean_jsq - expected).abs() / m.sem_jsq;
    r.record(
        9,
        "Haar states in the reflection-even sector (N = 10, 1000 samples)",
        z < 3.0,
        &[format!(
            "mean J² = {:.4} ± {:.4} vs {expected:.4} ({z:.2} standard errors, tol 3)",
            m.mean_jsq, m.sem_jsq
        )],
        t,
    );
}

fn complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1 << n).map(|_| complex(rng)).collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

fn property_suites(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);

    let mut pf_worst = 0.0f64;
    for i in 0..200 {
        let dim = 2 * (1 + i % 8);
        let m = SkewMatrix::from_upper(dim, |_, _| complex(&mut rng));
        let dense = Mat::from_fn(dim, dim, |a, b| m.get(a, b));
        let det = linalg::determinant(dense.as_ref());
        let pf = pfaffian(&m).unwrap();
        pf_worst = pf_worst.max((pf * pf - det).norm() / det.norm());
    }

    let mut step_worst = 0.0f64;
    for i in 0..60 {
        let n = 2 + i % 5;
        let b = if i % 2 == 0 { Boundary::OpenLine } else { Boundary::Ring };
        let params = SystemParams::new(
            n,
            rng.random_range(0.0..4.0),
            rng.random_range(-8.0..8.0),
            rng.random_range(-PI..PI),
            rng.random_range(0.1..5.0),
            b,
        )
        .unwrap();
        let psi = random_state(n, &mut rng);
        let mut fast = psi.amplitudes().to_vec();
        step_in_place(Exec::default(), &mut fast, &build_phase_table(&params).unwrap()).unwrap();
        let dense = dense_unitary(&params).unwrap().apply(psi.amplitudes());
        for (a, b) in fast.iter().zip(&dense) {
            step_worst = step_worst.max((a - b).norm());
        }
    }

    let mut s_worst = 0.0f64;
    for i in 0..100 {
        let n = 2 + i % 9;
        let full = (1u64 << n) - 1;
        let mask = rng.random_range(1..full);
        let psi = random_state(n, &mut rng);
        let a = von_neumann_entropy(&psi, mask).unwrap();
        let b = von_neumann_entropy(&psi, full ^ mask).unwrap();
        s_worst = s_worst.max((a - b).abs());
    }

    let mut mode_worst = 0.0f64;
    for i in 0..20 {
        let ising = IsingParams::new(
            4 + 2 * (i % 8),
            rng.random_range(-8.0..8.0),
            rng.random_range(-PI..PI),
            rng.random_range(0.1..5.0),
        )
        .unwrap();
        for step in (0..=10_000).step_by(97).chain([10_000]) {
            mode_worst = mode_worst.max(ModeSet::at(&ising, step).normalization_defect());
        }
    }

    let pass = pf_worst < 1e-7 && step_worst < 1e-11 && s_worst < 1e-10 && mode_worst < 1e-11;
    r.record(
        10,
        "randomized property suites",
        pass,
        &[
            format!("Pf² vs det over 200 matrices: max rel {pf_worst:.2e} (tol 1e-7)"),
            format!("fast step vs dense, N ≤ 6: max {step_worst:.2e} (tol 1e-11)"),
            format!("entropy complement symmetry: max {s_worst:.2e} (tol 1e-10)"),
            format!("mode normalization, n ≤ 1e4: max {mode_worst:.2e} (tol 1e-11)"),
        ],
        t,
    );
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("FLOQLAB_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("FLOQLAB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [(u32, fn(&mut Report)); 10] = [
        (1, conservation),
        (2, oracle_exact),
        (3, oracle_large),
        (4, thermalization),
        (5, permutation_symmetric),
        (6, spectral),
        (7, effective_dimension),
        (8, sector_dimensions),
        (9, appendix_check),
        (10, property_suites),
    ];
    let mut report = Report { failed: Vec::new() };
    println!("acceptance criteria");
    for (id, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        check(&mut report);
    }
    if report.failed.is_empty() {
        println!("all criteria passed");
    } else {
        println!("failed criteria: {:?}", report.failed);
        if strict {
            std::process::exit(1);
        }
    }
}
