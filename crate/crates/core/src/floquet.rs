//! The one-period evolution operator
//!
//! `U = exp(−i kτ/(4N(α)) Σ_{i≠j} σˣ_iσˣ_j / D_ij^α) · exp(−i pτ/2 Σ_i σᶻ_i)`.
//!
//! The kick is diagonal in the z basis and the coupling is diagonal in the
//! x basis, so one period is two phase multiplications separated by
//! Walsh–Hadamard transforms. The kick acts first.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::observables::TimeSeries;
use crate::spin::{StateVector, SystemParams};
use crate::symmetry::SectorLabel;
use crate::wht;

/// Largest chain for which a dense `2^N × 2^N` operator may be formed.
pub const MAX_DENSE_SPINS: usize = 14;
/// Largest chain accepted by the state-vector evolution.
pub const MAX_EVOLUTION_SPINS: usize = 22;
/// Steps between renormalizations of a long trajectory.
pub const RENORMALIZE_EVERY: u64 = 10_000;

/// Diagonal phases for one Floquet period.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    n_spins: usize,
    /// `exp(−i (kτ/4N(α)) Σ_{i≠j} x_i x_j / D_ij^α)` indexed by x-basis state.
    coupling_phases: Vec<Complex64>,
    /// `exp(−i (pτ/2) Σ_b z_b)` indexed by z-basis state.
    kick_phases: Vec<Complex64>,
}

impl PhaseTable {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }
    pub fn dim(&self) -> usize {
        self.kick_phases.len()
    }
    pub fn coupling_phases(&self) -> &[Complex64] {
        &self.coupling_phases
    }
    pub fn kick_phases(&self) -> &[Complex64] {
        &self.kick_phases
    }
}

fn spin_sign(index: usize, bit: usize) -> f64 {
    if index & (1 << bit) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn build_phase_table(params: &SystemParams) -> Result<PhaseTable> {
    build_phase_table_with(Exec::default(), params)
}

pub fn build_phase_table_with(exec: Exec, params: &SystemParams) -> Result<PhaseTable> {
    let n = params.n_spins();
    if n > MAX_EVOLUTION_SPINS {
        return Err(Error::Capacity {
            what: "state-vector evolution",
            max: MAX_EVOLUTION_SPINS,
            requested: n,
        });
    }
    let dim = params.dim();

    // unordered pairs with non-zero weight
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = params.pair_weight(i, j);
            if w != 0.0 {
                pairs.push((i, j, w));
            }
        }
    }
    // the ordered-pair sum counts each pair twice
    let coupling_scale = params.coupling() * params.period() / (2.0 * params.kac());
    let kick_scale = params.kick() * params.period() / 2.0;

    let mut coupling_phases = vec![Complex64::new(0.0, 0.0); dim];
    exec::for_each_chunk_mut(exec, &mut coupling_phases, exec::CHUNK, |offset, chunk| {
        for (k, out) in chunk.iter_mut().enumerate() {
            let s = offset + k;
            let energy: f64 = pairs
                .iter()
                .map(|&(i, j, w)| spin_sign(s, i) * spin_sign(s, j) * w)
                .sum();
            *out = Complex64::from_polar(1.0, -coupling_scale * energy);
        }
    });

    let mut kick_phases = vec![Complex64::new(0.0, 0.0); dim];
    exec::for_each_chunk_mut(exec, &mut kick_phases, exec::CHUNK, |offset, chunk| {
        for (k, out) in chunk.iter_mut().enumerate() {
            let s = offset + k;
            let magnetization = n as f64 - 2.0 * s.count_ones() as f64;
            *out = Complex64::from_polar(1.0, -kick_scale * magnetization);
        }
    });

    Ok(PhaseTable {
        n_spins: n,
        coupling_phases,
        kick_phases,
    })
}

/// Applies one period in place: kick phases, `W`, coupling phases, `W`.
///
/// Both transforms are left unnormalized and the `1/2^N` is folded into the
/// coupling multiplication.
pub fn step_in_place(exec: Exec, amps: &mut [Complex64], table: &PhaseTable) -> Result<()> {
    if amps.len() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            actual: amps.len(),
        });
    }
    let kick = &table.kick_phases;
    exec::for_each_chunk_mut(exec, amps, exec::CHUNK, |offset, chunk| {
        for (x, p) in chunk.iter_mut().zip(&kick[offset..]) {
            *x *= p;
        }
    });
    wht::transform_unnormalized(exec, amps);
    let coupling = &table.coupling_phases;
    let scale = 1.0 / amps.len() as f64;
    exec::for_each_chunk_mut(exec, amps, exec::CHUNK, |offset, chunk| {
        for (x, p) in chunk.iter_mut().zip(&coupling[offset..]) {
            *x *= p * scale;
        }
    });
    wht::transform_unnormalized(exec, amps);
    Ok(())
}

/// `U|ψ⟩` for one period.
pub fn floquet_step(state: &StateVector, table: &PhaseTable) -> Result<StateVector> {
    let mut next = state.clone();
    step_in_place(Exec::default(), next.amplitudes_mut(), table)?;
    Ok(next)
}

/// Advances `state` by `n_steps` periods, renormalizing periodically.
pub fn evolve(state: &mut StateVector, table: &PhaseTable, n_steps: u64) -> Result<()> {
    let exec = Exec::default();
    for step in 1..=n_steps {
        step_in_place(exec, state.amplitudes_mut(), table)?;
        if step % RENORMALIZE_EVERY == 0 {
            state.normalize();
        }
    }
    Ok(())
}

/// Which operator basis a dense matrix is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Computational,
    /// A joint Z-parity and bit-reversal sector.
    Sector(SectorLabel),
}

/// A dense unitary matrix with a tag naming its basis.
#[derive(Debug, Clone)]
pub struct DenseUnitary {
    pub entries: Mat<Complex64>,
    pub basis: BasisTag,
}

impl DenseUnitary {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `‖U U† − I‖_F / dim`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.entries)
    }

    /// `U x` for a column vector given as a slice.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let m = &self.entries;
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
            .collect()
    }
}

pub(crate) fn unitarity_defect(m: &Mat<Complex64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let prod = m * m.adjoint();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            acc += (prod[(i, j)] - Complex64::new(target, 0.0)).norm_sqr();
        }
    }
    acc.sqrt() / n as f64
}

/// Dense Floquet operator, built column by column with the fast step.
pub fn dense_unitary(params: &SystemParams) -> Result<DenseUnitary> {
    let n = params.n_spins();
    if n > MAX_DENSE_SPINS {
        return Err(Error::Capacity {
            what: "dense Floquet operator",
            max: MAX_DENSE_SPINS,
            requested: n,
        });
    }
    let table = build_phase_table(params)?;
    let dim = params.dim();
    let columns = exec::map_indices(Exec::default(), dim, |j| {
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        col[j] = Complex64::new(1.0, 0.0);
        step_in_place(Exec::Sequential, &mut col, &table).map(|_| col)
    });
    let mut entries = Mat::<Complex64>::zeros(dim, dim);
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        for (i, v) in col.into_iter().enumerate() {
            entries[(i, j)] = v;
        }
    }
    Ok(DenseUnitary {
        entries,
        basis: BasisTag::Computational,
    })
}

/// A named scalar measurement taken during an evolution.
pub trait Observer {
    fn name(&self) -> &str;
    fn observe(&mut self, step: u64, state: &StateVector) -> Result<f64>;
}

/// Adapts a closure into an [`Observer`].
pub struct FnObserver<F> {
    name: String,
    f: F,
}

impl<F> FnObserver<F>
where
    F: FnMut(u64, &StateVector) -> Result<f64>,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnObserver {
            name: name.into(),
            f,
        }
    }
}

impl<F> Observer for FnObserver<F>
where
    F: FnMut(u64, &StateVector) -> Result<f64>,
{
    fn name(&self) -> &str {
        &self.name
    }
    fn observe(&mut self, step: u64, state: &StateVector) -> Result<f64> {
        (self.f)(step, state)
    }
}

/// Steps at which observers fire: `first, first + stride, …` up to `n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePlan {
    pub n_steps: u64,
    pub stride: u64,
    pub first: u64,
}

impl SamplePlan {
    pub fn every(n_steps: u64, stride: u64) -> Self {
        SamplePlan {
            n_steps,
            stride,
            first: 0,
        }
    }

    pub fn samples(&self, step: u64) -> bool {
        step >= self.first && (step - self.first) % self.stride == 0
    }
}

/// Evolves `state` for `n_steps` periods and records every observer each
/// `stride` steps, starting with the initial state at step 0.
pub fn evolve_record(
    state: &mut StateVector,
    table: &PhaseTable,
    n_steps: u64,
    stride: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<TimeSeries> {
    evolve_sampled(state, table, SamplePlan::every(n_steps, stride), observers)
}

/// [`evolve_record`] with an arbitrary first sampled step.
pub fn evolve_sampled(
    state: &mut StateVector,
    table: &PhaseTable,
    plan: SamplePlan,
    observers: &mut [&mut dyn Observer],
) -> Result<TimeSeries> {
    if plan.stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    if state.dim() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            actual: state.dim(),
        });
    }
    let names: Vec<String> = observers.iter().map(|o| o.name().to_string()).collect();
    let mut series = TimeSeries::new(names);
    let exec = Exec::default();

    let mut record = |step: u64, state: &StateVector, series: &mut TimeSeries| -> Result<()> {
        let mut row = Vec::with_capacity(observers.len());
        for obs in observers.iter_mut() {
            let value = obs.observe(step, state).map_err(|e| Error::Observer {
                step,
                message: format!("{}: {e}", obs.name()),
            })?;
            row.push(value);
        }
        series.push(step, row)
    };

    if plan.samples(0) {
        record(0, state, &mut series)?;
    }
    for step in 1..=plan.n_steps {
        step_in_place(exec, state.amplitudes_mut(), table)?;
        if step % RENORMALIZE_EVERY == 0 {
            state.normalize();
        }
        if plan.samples(step) {
            record(step, state, &mut series)?;
        }
    }
    Ok(series)
}
