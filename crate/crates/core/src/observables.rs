//! Entanglement entropy, time averages and random-state reference values.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::linalg;
use crate::spin::{expval_jsq_with, StateVector};
use crate::symmetry;

/// Singular values below this are dropped from the entropy sum.
const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Sampled observables indexed by step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    steps: Vec<u64>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        let columns = vec![Vec::new(); names.len()];
        TimeSeries {
            steps: Vec::new(),
            names,
            columns,
        }
    }

    pub fn push(&mut self, step: u64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                actual: values.len(),
            });
        }
        if let Some(&last) = self.steps.last() {
            if step <= last {
                return Err(Error::InvalidParameter(format!(
                    "step {step} does not follow {last}"
                )));
            }
        }
        self.steps.push(step);
        for (col, v) in self.columns.iter_mut().zip(values) {
            col.push(v);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
    pub fn steps(&self) -> &[u64] {
        &self.steps
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.columns[k].as_slice())
    }

    /// Header `step,<names…>`, then one row per sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "step")?;
        for name in &self.names {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (row, step) in self.steps.iter().enumerate() {
            write!(out, "{step}")?;
            for col in &self.columns {
                write!(out, ",{}", format_float(col[row]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Fixed 17-significant-digit formatting used in every CSV.
pub fn format_float(x: f64) -> String {
    // drop the sign of negative zero so equal values print identically
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Mask selecting the first `N/2` sites.
pub fn half_chain_mask(n_spins: usize) -> u64 {
    (1u64 << (n_spins / 2)) - 1
}

/// Von Neumann entropy in bits of the sites selected by `mask` (bit `b` is
/// spin `b + 1`).
pub fn von_neumann_entropy(state: &StateVector, mask: u64) -> Result<f64> {
    let n = state.n_spins();
    let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mask_a = mask & full;
    let n_a = mask_a.count_ones() as usize;
    if mask & !full != 0 {
        return Err(Error::InvalidParameter(format!(
            "subsystem mask {mask:#b} addresses sites beyond N = {n}"
        )));
    }
    if n_a == 0 || n_a == n {
        return Err(Error::InvalidParameter(
            "subsystem must contain at least one site and leave at least one out".into(),
        ));
    }
    let sites_a: Vec<usize> = (0..n).filter(|b| mask_a >> b & 1 == 1).collect();
    let sites_b: Vec<usize> = (0..n).filter(|b| mask_a >> b & 1 == 0).collect();
    let gather = |s: usize, sites: &[usize]| -> usize {
        sites
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &b)| acc | ((s >> b) & 1) << k)
    };

    let rows = 1usize << n_a;
    let cols = 1usize << (n - n_a);
    let amps = state.amplitudes();
    let mut m = Mat::<Complex64>::zeros(rows, cols);
    for (s, &a) in amps.iter().enumerate() {
        m[(gather(s, &sites_a), gather(s, &sites_b))] = a;
    }
    let sv = if rows <= cols {
        linalg::singular_values(m.as_ref())?
    } else {
        linalg::singular_values(m.transpose())?
    };
    Ok(entropy_bits(sv.iter().filter(|&&s| s >= SCHMIDT_CUTOFF).map(|s| s * s)))
}

/// `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn entropy_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Mean of the `name` column over samples with `n_start ≤ step ≤ n_end`.
pub fn time_average(series: &TimeSeries, name: &str, n_start: u64, n_end: u64) -> Result<f64> {
    let col = series
        .column(name)
        .ok_or_else(|| Error::InvalidParameter(format!("no observable named {name:?}")))?;
    let (sum, count) = series
        .steps()
        .iter()
        .zip(col)
        .filter(|(&s, _)| s >= n_start && s <= n_end)
        .fold((0.0, 0usize), |(acc, c), (_, &v)| (acc + v, c + 1));
    if count == 0 {
        return Err(Error::InvalidParameter(format!(
            "averaging window [{n_start}, {n_end}] contains no samples"
        )));
    }
    Ok(sum / count as f64)
}

/// Steady-state window for a run of `n_steps`: `[10⁵, 3·10⁵]` for runs of
/// that length or longer, otherwise the trailing half.
pub fn default_window(n_steps: u64) -> (u64, u64) {
    if n_steps >= 300_000 {
        (100_000, 300_000)
    } else {
        log::info!("run of {n_steps} steps is short; averaging over the trailing half");
        (n_steps / 2, n_steps)
    }
}

/// Closed-form reference values for a chain of `N` spins.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ReferenceValues {
    pub jsq_pss: f64,
    pub jsq_rmt: f64,
    pub s_pss: f64,
    pub s_page: f64,
    pub r_poisson: f64,
    pub r_coe: f64,
}

impl ReferenceValues {
    pub fn for_spins(n_spins: usize) -> Self {
        let n = n_spins as f64;
        ReferenceValues {
            jsq_pss: n / 2.0 * (n / 2.0 + 1.0),
            jsq_rmt: 0.75 * n,
            s_pss: (n / 2.0 + 1.0).log2() - 2.0 / 3.0,
            s_page: n / 2.0 - 1.0 / (2.0 * std::f64::consts::LN_2),
            r_poisson: 0.386,
            r_coe: 0.529,
        }
    }
}

/// `⟨J²⟩` averaged over Haar states in the bit-reversal-even sector.
pub fn jsq_bit_reversal_even(n_spins: usize) -> f64 {
    let n = n_spins as f64;
    let x = 2f64.powf(n / 2.0);
    0.75 * n * (1.0 + 2.0 / x) / (1.0 + 1.0 / x)
}

/// Subspace from which random states are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    Full,
    BitReversalEven,
}

/// Sample means with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomReference {
    pub samples: usize,
    pub mean_jsq: f64,
    pub sem_jsq: f64,
    pub mean_entropy: f64,
    pub sem_entropy: f64,
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random state; sample `stream` of the generator seeded with `seed`.
pub fn haar_state(
    n_spins: usize,
    restriction: Restriction,
    seed: u64,
    stream: u64,
) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let dim = 1usize << n_spins;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    match restriction {
        Restriction::Full => amps.iter_mut().for_each(|a| *a = complex_gaussian(&mut rng)),
        Restriction::BitReversalEven => {
            if n_spins % 2 == 1 {
                return Err(Error::Unsupported(
                    "bit-reversal sectors are built for even N only".into(),
                ));
            }
            let reverse = symmetry::bit_reversal_permutation(n_spins);
            for s in 0..dim {
                let t = reverse[s];
                if t == s {
                    amps[s] = complex_gaussian(&mut rng);
                } else if s < t {
                    let g = complex_gaussian(&mut rng) * std::f64::consts::FRAC_1_SQRT_2;
                    amps[s] = g;
                    amps[t] = g;
                }
            }
        }
    }
    let mut state = StateVector::from_amplitudes(n_spins, amps)?;
    state.normalize();
    Ok(state)
}

/// Monte Carlo means of `⟨J²⟩` and the half-chain entropy over Haar states.
pub fn random_state_reference(
    n_spins: usize,
    n_samples: usize,
    seed: u64,
    restriction: Restriction,
) -> Result<RandomReference> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let per_sample = exec::map_indices(Exec::default(), n_samples, |i| {
        let state = haar_state(n_spins, restriction, seed, i as u64)?;
        let jsq = expval_jsq_with(Exec::Sequential, &state);
        let s = von_neumann_entropy(&state, half_chain_mask(n_spins))?;
        Ok::<_, Error>((jsq, s))
    });
    let values: Vec<(f64, f64)> = per_sample.into_iter().collect::<Result<_>>()?;
    let (mean_jsq, sem_jsq) = mean_and_sem(values.iter().map(|v| v.0));
    let (mean_entropy, sem_entropy) = mean_and_sem(values.iter().map(|v| v.1));
    Ok(RandomReference {
        samples: n_samples,
        mean_jsq,
        sem_jsq,
        mean_entropy,
        sem_entropy,
    })
}

pub(crate) fn mean_and_sem(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
