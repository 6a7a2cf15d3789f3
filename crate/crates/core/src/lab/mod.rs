//! Experiment configuration and runners.
//!
//! Each runner validates its configuration before computing anything,
//! schedules independent `(α, τ)` points on the worker pool and writes CSV
//! tables plus a JSON manifest into the output directory. A failed run
//! leaves nothing behind.

pub mod config;
pub mod output;

use std::io::Write;
use std::path::Path;

pub use config::{ExperimentConfig, ExperimentKind};
pub use output::{Manifest, ResultRow, RunOutput, RunSummary};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::fermion::{self, IsingParams};
use crate::floquet::{self, FnObserver, Observer, SamplePlan};
use crate::observables::{
    self, format_float, half_chain_mask, von_neumann_entropy, ReferenceValues, Restriction,
    TimeSeries,
};
use crate::spectral::{self, SpacingStats};
use crate::spin::{self, Boundary, CoherentAngles, StateVector};
use crate::symmetry::{self, SectorLabel};
use output::point_label;

pub const JSQ: &str = "jsq";
pub const ENTROPY: &str = "entropy";

/// Runs `kind` with `config`, writing into `out_dir`.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let mut config = config.clone();
    config.experiment = Some(kind);
    config.validate(kind)?;
    let mut out = RunOutput::create(out_dir)?;
    if !config.note.is_empty() {
        out.notes.push(config.note.clone());
    }
    let body = match kind {
        ExperimentKind::TimeSeries => time_series(&config, &mut out),
        ExperimentKind::AlphaScan => alpha_scan(&config, &mut out),
        ExperimentKind::SpectralScan => spectral_scan(&config, &mut out),
        ExperimentKind::DeffScan => deff_scan(&config, &mut out),
        ExperimentKind::OracleCompare => oracle_compare(&config, &mut out),
        ExperimentKind::ReferenceValues => reference_values(&config, &mut out),
    };
    match body.and_then(|rows| out.write_results(&rows).map(|_| ())) {
        Ok(()) => out.finish(kind, &config),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

pub fn run_time_series(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    run(ExperimentKind::TimeSeries, config, out_dir)
}
pub fn run_alpha_scan(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    run(ExperimentKind::AlphaScan, config, out_dir)
}
pub fn run_spectral_scan(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    run(ExperimentKind::SpectralScan, config, out_dir)
}
pub fn run_deff_scan(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    run(ExperimentKind::DeffScan, config, out_dir)
}
pub fn run_oracle_compare(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    run(ExperimentKind::OracleCompare, config, out_dir)
}
pub fn run_reference_values(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    run(ExperimentKind::ReferenceValues, config, out_dir)
}

/// Evaluates `f` on every grid point on the worker pool, in grid order.
fn sweep<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<((f64, f64), T)>>
where
    T: Send,
    F: Fn(f64, f64) -> Result<T> + Sync + Send,
{
    let grid = config.grid();
    let results = exec::map_indices(Exec::default(), grid.len(), |i| {
        let (a, t) = grid[i];
        f(a, t).inspect_err(|e| log::error!("point alpha={a} tau={t} failed: {e}"))
    });
    grid.into_iter()
        .zip(results)
        .map(|(p, r)| r.map(|v| (p, v)))
        .collect()
}

fn initial_state(config: &ExperimentConfig) -> StateVector {
    spin::coherent_state(config.n_spins, CoherentAngles::new(config.theta, config.phi))
}

/// Evolves the coherent state at one point, sampling on `plan`.
pub fn trace(
    config: &ExperimentConfig,
    alpha: f64,
    tau: f64,
    plan: SamplePlan,
) -> Result<TimeSeries> {
    let params = config.system(alpha, tau)?;
    let table = floquet::build_phase_table(&params)?;
    let mut state = initial_state(config);
    record_trace(&mut state, &table, plan, config.record_entropy)
}

fn record_trace(
    state: &mut StateVector,
    table: &floquet::PhaseTable,
    plan: SamplePlan,
    with_entropy: bool,
) -> Result<TimeSeries> {
    let mask = half_chain_mask(state.n_spins());
    let mut jsq = FnObserver::new(JSQ, |_, s: &StateVector| Ok(spin::expval_jsq(s)));
    let mut entropy = FnObserver::new(ENTROPY, |_, s: &StateVector| von_neumann_entropy(s, mask));
    let mut observers: Vec<&mut dyn Observer> = vec![&mut jsq];
    if with_entropy {
        observers.push(&mut entropy);
    }
    floquet::evolve_sampled(state, table, plan, &mut observers)
}

fn time_series(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<ResultRow>> {
    let plan = SamplePlan::every(config.n_steps, config.stride);
    let traces = sweep(config, |a, t| trace(config, a, t, plan))?;
    let mut rows = Vec::new();
    for ((a, t), series) in &traces {
        let name = format!("time_series_N{}_{}.csv", config.n_spins, point_label(*a, *t));
        out.write_file(&name, |w| series.write_csv(w))?;
        for obs in series.names() {
            let col = series.column(obs).expect("named column");
            rows.push(
                ResultRow::new(ExperimentKind::TimeSeries, config.n_spins, Some((*a, *t)), obs.as_str(), col[col.len() - 1])
                    .with_metadata(format!("final sample at step {}", series.steps()[col.len() - 1])),
            );
        }
    }
    Ok(rows)
}

fn alpha_scan(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<ResultRow>> {
    let (n_start, n_end) = (config.n_steps - config.avg_window, config.n_steps);
    // only samples inside the window are ever used
    let first = n_start.div_ceil(config.stride) * config.stride;
    let plan = SamplePlan {
        n_steps: n_end,
        stride: config.stride,
        first,
    };
    let points = sweep(config, |a, t| {
        let series = trace(config, a, t, plan)?;
        let jsq = observables::time_average(&series, JSQ, n_start, n_end)?;
        let s = if config.record_entropy {
            observables::time_average(&series, ENTROPY, n_start, n_end)?
        } else {
            f64::NAN
        };
        Ok((jsq, s, series.len()))
    })?;
    let refs = ReferenceValues::for_spins(config.n_spins);
    out.notes
        .push(format!("time averages over steps [{n_start}, {n_end}] every {} steps", config.stride));
    out.write_file("alpha_scan.csv", |w| {
        writeln!(w, "alpha,tau,jsq_mean,entropy_mean,jsq_pss,jsq_rmt,s_page,s_pss")?;
        for ((a, t), (jsq, s, _)) in &points {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                format_float(*a),
                format_float(*t),
                format_float(*jsq),
                format_float(*s),
                format_float(refs.jsq_pss),
                format_float(refs.jsq_rmt),
                format_float(refs.s_page),
                format_float(refs.s_pss)
            )?;
        }
        Ok(())
    })?;
    let mut rows = Vec::new();
    for ((a, t), (jsq, s, samples)) in points {
        let meta = format!("window {n_start}..{n_end}; {samples} samples");
        let p = Some((a, t));
        rows.push(ResultRow::new(ExperimentKind::AlphaScan, config.n_spins, p, "jsq_mean", jsq).with_metadata(&meta));
        if config.record_entropy {
            rows.push(ResultRow::new(ExperimentKind::AlphaScan, config.n_spins, p, "entropy_mean", s).with_metadata(meta));
        }
    }
    Ok(rows)
}

/// Spacing statistics of the reflection-even, `Z`-even block at one point.
pub fn even_sector_spectrum(
    config: &ExperimentConfig,
    alpha: f64,
    tau: f64,
) -> Result<(usize, Vec<f64>, SpacingStats)> {
    let params = config.system(alpha, tau)?;
    let sector = symmetry::build_sector_basis(config.n_spins, SectorLabel::EVEN_EVEN)?;
    let block = symmetry::sector_unitary(&params, &sector).inspect_err(|e| {
        log::error!("projecting U(alpha={alpha}, tau={tau}) onto {}: {e}", sector.label().tag())
    })?;
    let eigen = spectral::diagonalize_floquet(&block)?;
    let stats = spectral::spacing_ratios(&eigen.phases)?;
    Ok((sector.dim(), eigen.phases, stats))
}

fn spectral_scan(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<ResultRow>> {
    let points = sweep(config, |a, t| even_sector_spectrum(config, a, t))?;
    let refs = ReferenceValues::for_spins(config.n_spins);
    let tag = SectorLabel::EVEN_EVEN.tag();
    for ((a, t), (_, phases, _)) in &points {
        let name = format!("eigenphases_N{}_{}.csv", config.n_spins, point_label(*a, *t));
        out.write_file(&name, |w| {
            writeln!(w, "sector,eigenphase")?;
            for e in phases {
                writeln!(w, "{tag},{}", format_float(*e))?;
            }
            Ok(())
        })?;
    }
    out.write_file("spectral_summary.csv", |w| {
        writeln!(w, "alpha,tau,sector,dim,mean_r,merged,r_coe,r_poisson")?;
        for ((a, t), (dim, _, stats)) in &points {
            writeln!(
                w,
                "{},{},{tag},{dim},{},{},{},{}",
                format_float(*a),
                format_float(*t),
                format_float(stats.mean_r),
                stats.merged,
                format_float(refs.r_coe),
                format_float(refs.r_poisson)
            )?;
        }
        Ok(())
    })?;
    Ok(points
        .into_iter()
        .map(|((a, t), (dim, _, stats))| {
            ResultRow::new(ExperimentKind::SpectralScan, config.n_spins, Some((a, t)), "mean_r", stats.mean_r)
                .with_metadata(format!("sector {tag}; dim {dim}; merged {}", stats.merged))
        })
        .collect())
}

/// Effective dimension of the coherent state over the full eigenbasis.
pub fn deff_point(
    config: &ExperimentConfig,
    alpha: f64,
    tau: f64,
) -> Result<spectral::EffectiveDimension> {
    let params = config.system(alpha, tau)?;
    let parts = spectral::diagonalize_sectors(&params)?;
    spectral::effective_dimension(&initial_state(config), &parts, config.epsilon)
}

fn deff_scan(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<ResultRow>> {
    let points = sweep(config, |a, t| deff_point(config, a, t))?;
    let n = config.n_spins;
    let b_plus = symmetry::reflection_even_dimension(n);
    out.write_file("deff.csv", |w| {
        writeln!(w, "alpha,tau,d_eff,captured,pss_dim,b_plus")?;
        for ((a, t), d) in &points {
            writeln!(
                w,
                "{},{},{},{},{},{b_plus}",
                format_float(*a),
                format_float(*t),
                d.k,
                format_float(d.captured),
                n + 1
            )?;
        }
        Ok(())
    })?;
    Ok(points
        .into_iter()
        .map(|(p, d)| {
            ResultRow::new(ExperimentKind::DeffScan, n, Some(p), "d_eff", d.k as f64)
                .with_metadata(format!("epsilon {}", config.epsilon))
        })
        .collect())
}

/// Paired exact and free-fermion traces on the nearest-neighbour ring.
pub struct OracleTrace {
    pub exact: TimeSeries,
    pub oracle: TimeSeries,
    pub max_abs_diff: Vec<f64>,
}

pub fn oracle_trace(config: &ExperimentConfig, tau: f64) -> Result<OracleTrace> {
    let n = config.n_spins;
    let params = spin::SystemParams::nearest_neighbor(n, config.coupling, config.kick, tau, Boundary::Ring)?;
    let ising = IsingParams::from_system(&params)?;
    let table = floquet::build_phase_table(&params)?;
    let mut state = spin::all_up(n);
    let plan = SamplePlan::every(config.n_steps, config.stride);
    let exact = record_trace(&mut state, &table, plan, true)?;

    let mut oracle = TimeSeries::new(vec![JSQ.to_string(), ENTROPY.to_string()]);
    let values = exec::map_indices(Exec::default(), exact.len(), |i| {
        let step = exact.steps()[i];
        Ok::<_, Error>((
            fermion::jsq_oracle(&ising, step)?,
            fermion::entropy_oracle(&ising, step, n / 2)?,
        ))
    });
    let exact_jsq = exact.column(JSQ).expect("jsq column");
    let exact_s = exact.column(ENTROPY).expect("entropy column");
    let mut max_abs_diff = Vec::with_capacity(exact.len());
    for (i, v) in values.into_iter().enumerate() {
        let (jsq, s) = v?;
        oracle.push(exact.steps()[i], vec![jsq, s])?;
        max_abs_diff.push((jsq - exact_jsq[i]).abs().max((s - exact_s[i]).abs()));
    }
    Ok(OracleTrace {
        exact,
        oracle,
        max_abs_diff,
    })
}

fn oracle_compare(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<ResultRow>> {
    if config.interaction != spin::Interaction::NearestNeighbor || config.boundary != Boundary::Ring {
        out.notes
            .push("interaction forced to nearest_neighbor and boundary to ring".into());
    }
    if (config.theta, config.phi) != (0.0, 0.0) {
        out.notes.push("initial state forced to all spins up".into());
    }
    let taus = config.tau_list.clone();
    let traces = exec::map_indices(Exec::default(), taus.len(), |i| oracle_trace(config, taus[i]));
    let n = config.n_spins;
    let mut rows = Vec::new();
    for (tau, tr) in taus.into_iter().zip(traces) {
        let tr = tr?;
        let label = format!("N{n}_tau{tau}");
        out.write_file(&format!("exact_trace_{label}.csv"), |w| tr.exact.write_csv(w))?;
        out.write_file(&format!("oracle_trace_{label}.csv"), |w| tr.oracle.write_csv(w))?;
        out.write_file(&format!("oracle_compare_{label}.csv"), |w| {
            writeln!(w, "step,jsq_exact,jsq_oracle,entropy_exact,entropy_oracle,max_abs_diff")?;
            let (ej, es) = (tr.exact.column(JSQ).unwrap(), tr.exact.column(ENTROPY).unwrap());
            let (oj, os) = (tr.oracle.column(JSQ).unwrap(), tr.oracle.column(ENTROPY).unwrap());
            for (i, step) in tr.exact.steps().iter().enumerate() {
                writeln!(
                    w,
                    "{step},{},{},{},{},{}",
                    format_float(ej[i]),
                    format_float(oj[i]),
                    format_float(es[i]),
                    format_float(os[i]),
                    format_float(tr.max_abs_diff[i])
                )?;
            }
            Ok(())
        })?;
        let worst = tr.max_abs_diff.iter().copied().fold(0.0, f64::max);
        if worst > config.oracle_tolerance {
            let msg = format!(
                "tau={tau}: exact and oracle traces differ by {worst:.3e} > tolerance {:.1e}",
                config.oracle_tolerance
            );
            log::warn!("{msg}");
            out.flags.push(msg);
        }
        let mut row = ResultRow::new(ExperimentKind::OracleCompare, n, Some((0.0, tau)), "max_abs_diff", worst)
            .with_metadata("nearest-neighbour ring");
        row.alpha = None;
        rows.push(row);
    }
    Ok(rows)
}

fn reference_values(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<ResultRow>> {
    let n = config.n_spins;
    let refs = ReferenceValues::for_spins(n);
    let closed = [
        ("jsq_pss", refs.jsq_pss),
        ("jsq_rmt", refs.jsq_rmt),
        ("jsq_bit_reversal_even", observables::jsq_bit_reversal_even(n)),
        ("s_pss", refs.s_pss),
        ("s_page", refs.s_page),
        ("r_poisson", refs.r_poisson),
        ("r_coe", refs.r_coe),
        ("pss_dim", (n + 1) as f64),
        ("b_plus", symmetry::reflection_even_dimension(n) as f64),
    ];
    let sampled = [
        ("full", Restriction::Full, refs.jsq_rmt),
        ("bit_reversal_even", Restriction::BitReversalEven, observables::jsq_bit_reversal_even(n)),
    ]
    .map(|(name, r, expected)| {
        observables::random_state_reference(n, config.n_samples, config.seed, r).map(|m| (name, m, expected))
    });
    let sampled: Vec<_> = sampled.into_iter().collect::<Result<_>>()?;

    out.write_file("reference_values.csv", |w| {
        writeln!(w, "quantity,value")?;
        for (q, v) in &closed {
            writeln!(w, "{q},{}", format_float(*v))?;
        }
        Ok(())
    })?;
    out.write_file("random_states.csv", |w| {
        writeln!(w, "restriction,samples,mean_jsq,sem_jsq,expected_jsq,mean_entropy,sem_entropy,s_page")?;
        for (name, m, expected) in &sampled {
            writeln!(
                w,
                "{name},{},{},{},{},{},{},{}",
                m.samples,
                format_float(m.mean_jsq),
                format_float(m.sem_jsq),
                format_float(*expected),
                format_float(m.mean_entropy),
                format_float(m.sem_entropy),
                format_float(refs.s_page)
            )?;
        }
        Ok(())
    })?;
    let mut rows: Vec<ResultRow> = closed
        .iter()
        .map(|(q, v)| ResultRow::new(ExperimentKind::ReferenceValues, n, None, *q, *v).with_metadata("closed form"))
        .collect();
    for (name, m, _) in &sampled {
        let meta = format!("{} Haar samples; seed {}", m.samples, config.seed);
        rows.push(ResultRow::new(ExperimentKind::ReferenceValues, n, None, format!("haar_{name}_jsq"), m.mean_jsq).with_metadata(&meta));
        rows.push(ResultRow::new(ExperimentKind::ReferenceValues, n, None, format!("haar_{name}_entropy"), m.mean_entropy).with_metadata(&meta));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig {
            n_spins: 6,
            alpha_list: vec![0.0, 1.5],
            n_steps: 40,
            avg_window: 20,
            stride: 5,
            n_samples: 8,
            ..Default::default()
        };
        c.experiment = Some(kind);
        c
    }

    fn read(dir: &Path, name: &str) -> String {
        std::fs::read_to_string(dir.join(name)).unwrap()
    }

    #[test]
    fn alpha_zero_trace_is_constant() {
        let tmp = tempfile::tempdir().unwrap();
        let c = small(ExperimentKind::TimeSeries);
        let s = run_time_series(&c, tmp.path()).unwrap();
        assert_eq!(s.files.len(), 4);
        let series = trace(&c, 0.0, 1.0, SamplePlan::every(40, 5)).unwrap();
        for v in series.column(JSQ).unwrap() {
            assert!((v - 12.0).abs() < 1e-9);
        }
        let text = read(tmp.path(), "time_series_N6_alpha0_tau1.csv");
        assert!(text.starts_with("step,jsq,entropy\n0,"));
    }

    #[test]
    fn zero_steps_give_one_row() {
        let tmp = tempfile::tempdir().unwrap();
        let mut c = small(ExperimentKind::TimeSeries);
        c.n_steps = 0;
        run_time_series(&c, tmp.path()).unwrap();
        assert_eq!(read(tmp.path(), "time_series_N6_alpha1.5_tau1.csv").lines().count(), 2);
    }

    #[test]
    fn reruns_are_identical() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let c = small(ExperimentKind::AlphaScan);
        run_alpha_scan(&c, a.path()).unwrap();
        run_alpha_scan(&c, b.path()).unwrap();
        for f in ["alpha_scan.csv", output::RESULTS_FILE] {
            assert_eq!(read(a.path(), f), read(b.path(), f));
        }
    }

    #[test]
    fn window_error_before_compute() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("never");
        let mut c = small(ExperimentKind::AlphaScan);
        c.avg_window = 100;
        assert!(matches!(run_alpha_scan(&c, &dir), Err(Error::Config(_))));
        assert!(!dir.exists());
    }

    #[test]
    fn failed_runs_leave_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let c = small(ExperimentKind::TimeSeries);
        // a directory in the way of the second trace makes the run fail mid-way
        std::fs::create_dir(tmp.path().join("time_series_N6_alpha1.5_tau1.csv")).unwrap();
        assert!(matches!(run_time_series(&c, tmp.path()), Err(Error::Io { .. })));
        let left: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().collect();
        assert_eq!(left.len(), 1);
    }

    #[test]
    fn oracle_compare_agrees_at_small_size() {
        let tmp = tempfile::tempdir().unwrap();
        let mut c = small(ExperimentKind::OracleCompare);
        c.n_spins = 6;
        c.n_steps = 10;
        c.stride = 1;
        let s = run_oracle_compare(&c, tmp.path()).unwrap();
        assert!(s.flags.is_empty(), "{:?}", s.flags);
        let text = read(tmp.path(), "oracle_compare_N6_tau1.csv");
        let first = text.lines().nth(1).unwrap();
        assert!(first.starts_with("0,1.2000000000000000e1,1.2"));
    }

    #[test]
    fn spectral_and_deff_tables() {
        let tmp = tempfile::tempdir().unwrap();
        let c = small(ExperimentKind::SpectralScan);
        run_spectral_scan(&c, tmp.path()).unwrap();
        assert_eq!(read(tmp.path(), "spectral_summary.csv").lines().count(), 3);
        let tmp = tempfile::tempdir().unwrap();
        run_deff_scan(&c, tmp.path()).unwrap();
        let text = read(tmp.path(), "deff.csv");
        let alpha0: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert!(alpha0[2].parse::<usize>().unwrap() <= 7);
    }

    #[test]
    fn reference_tables() {
        let tmp = tempfile::tempdir().unwrap();
        run_reference_values(&small(ExperimentKind::ReferenceValues), tmp.path()).unwrap();
        assert!(read(tmp.path(), "reference_values.csv").contains("jsq_pss,1.2000000000000000e1"));
        assert_eq!(read(tmp.path(), "random_states.csv").lines().count(), 3);
    }
}
