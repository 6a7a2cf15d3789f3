//! System parameters, state vectors and collective spin operators.
//!
//! Basis index `s` encodes the z-configuration of the chain: bit `b` is spin
//! `b + 1`, and a cleared bit is `|0⟩` with `σᶻ = +1`. Bit reversal of the
//! index is therefore the spatial reflection `i ↔ N + 1 − i`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};

/// Distance metric between sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `D_ij = |i − j|`.
    OpenLine,
    /// `D_ij = min(|i − j|, N − |i − j|)`.
    Ring,
}

impl Boundary {
    pub fn distance(self, i: usize, j: usize, n_spins: usize) -> usize {
        let d = i.abs_diff(j);
        match self {
            Boundary::OpenLine => d,
            Boundary::Ring => d.min(n_spins - d),
        }
    }
}

/// Range of the `σˣσˣ` interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    /// `1/D_ij^α` between every pair.
    PowerLaw,
    /// Only pairs at distance one; the `α → ∞` limit without forming
    /// `D^{-α}` for large `α`.
    NearestNeighbor,
}

/// Physical and drive parameters of the kicked chain.
///
/// Fields are private so that the Kac factor stays consistent with the
/// rest; every setter recomputes it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    n_spins: usize,
    alpha: f64,
    coupling: f64,
    kick: f64,
    period: f64,
    boundary: Boundary,
    interaction: Interaction,
    kac: f64,
}

impl SystemParams {
    /// Power-law chain with coupling `k`, kick `p` and period `τ`.
    pub fn new(
        n_spins: usize,
        alpha: f64,
        coupling: f64,
        kick: f64,
        period: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        let mut params = SystemParams {
            n_spins,
            alpha,
            coupling,
            kick,
            period,
            boundary,
            interaction: Interaction::PowerLaw,
            kac: f64::NAN,
        };
        params.refresh()?;
        Ok(params)
    }

    /// Nearest-neighbour chain (the kicked Ising limit).
    pub fn nearest_neighbor(
        n_spins: usize,
        coupling: f64,
        kick: f64,
        period: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        let mut params = SystemParams {
            n_spins,
            alpha: f64::INFINITY,
            coupling,
            kick,
            period,
            boundary,
            interaction: Interaction::NearestNeighbor,
            kac: f64::NAN,
        };
        params.refresh()?;
        Ok(params)
    }

    fn refresh(&mut self) -> Result<()> {
        if self.n_spins < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two spins, got {}",
                self.n_spins
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "period must be positive and finite, got {}",
                self.period
            )));
        }
        if !self.coupling.is_finite() || !self.kick.is_finite() {
            return Err(Error::InvalidParameter(
                "coupling and kick must be finite".into(),
            ));
        }
        self.kac = match self.interaction {
            Interaction::PowerLaw => {
                if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be finite and non-negative, got {}",
                        self.alpha
                    )));
                }
                kac_factor(self.n_spins, self.alpha, self.boundary)?
            }
            Interaction::NearestNeighbor => nearest_neighbor_kac(self.n_spins, self.boundary),
        };
        Ok(())
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }
    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }
    /// Range exponent; `+∞` for [`Interaction::NearestNeighbor`].
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn kick(&self) -> f64 {
        self.kick
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn interaction(&self) -> Interaction {
        self.interaction
    }
    /// Kac normalization `N(α)`.
    pub fn kac(&self) -> f64 {
        self.kac
    }

    pub fn with_n_spins(mut self, n_spins: usize) -> Result<Self> {
        self.n_spins = n_spins;
        self.refresh()?;
        Ok(self)
    }

    /// Switches to a power-law interaction with exponent `alpha`.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.interaction = Interaction::PowerLaw;
        self.refresh()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        self.coupling = coupling;
        self.refresh()?;
        Ok(self)
    }

    pub fn with_kick(mut self, kick: f64) -> Result<Self> {
        self.kick = kick;
        self.refresh()?;
        Ok(self)
    }

    pub fn with_period(mut self, period: f64) -> Result<Self> {
        self.period = period;
        self.refresh()?;
        Ok(self)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<Self> {
        self.boundary = boundary;
        self.refresh()?;
        Ok(self)
    }

    /// Coupling weight of the (unordered) pair `i ≠ j`, 0-based sites,
    /// before the Kac normalization.
    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        let d = self.boundary.distance(i, j, self.n_spins);
        match self.interaction {
            Interaction::PowerLaw => (d as f64).powf(-self.alpha),
            Interaction::NearestNeighbor => {
                if d == 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Kac factor `N(α) = (1/(N−1)) Σ_{i≠j} D_ij^{−α}` over ordered pairs.
///
/// With the ring metric and `α → ∞` this tends to `2N/(N−1)`, the
/// normalization used for the kicked Ising limit.
pub fn kac_factor(n_spins: usize, alpha: f64, boundary: Boundary) -> Result<f64> {
    if n_spins < 2 {
        return Err(Error::InvalidParameter(format!(
            "the Kac factor needs N >= 2, got {n_spins}"
        )));
    }
    let mut sum = 0.0;
    for i in 0..n_spins {
        for j in 0..n_spins {
            if i != j {
                sum += (boundary.distance(i, j, n_spins) as f64).powf(-alpha);
            }
        }
    }
    Ok(sum / (n_spins - 1) as f64)
}

fn nearest_neighbor_kac(n_spins: usize, boundary: Boundary) -> f64 {
    let mut bonds = 0usize;
    for i in 0..n_spins {
        for j in 0..n_spins {
            if i != j && boundary.distance(i, j, n_spins) == 1 {
                bonds += 1;
            }
        }
    }
    bonds as f64 / (n_spins - 1) as f64
}

/// Pure state on `N` spins in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_spins: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(n_spins: usize) -> Self {
        StateVector {
            n_spins,
            amps: vec![Complex64::new(0.0, 0.0); 1 << n_spins],
        }
    }

    /// Computational basis state `|s⟩`.
    pub fn basis(n_spins: usize, index: usize) -> Self {
        let mut state = Self::zeros(n_spins);
        state.amps[index] = Complex64::new(1.0, 0.0);
        state
    }

    pub fn from_amplitudes(n_spins: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_spins {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_spins,
                actual: amps.len(),
            });
        }
        Ok(StateVector { n_spins, amps })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }
    pub fn dim(&self) -> usize {
        self.amps.len()
    }
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        exec::chunked_sum(Exec::Sequential, &self.amps, |_, c| {
            c.iter().map(|a| a.norm_sqr()).sum()
        })
    }

    /// Rescales to unit norm; returns the norm before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        norm
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Polar and azimuthal angle of a spin coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentAngles {
    pub theta: f64,
    pub phi: f64,
}

impl CoherentAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        CoherentAngles { theta, phi }
    }
}

/// `(cos θ/2 |0⟩ + e^{iφ} sin θ/2 |1⟩)^{⊗N}`.
pub fn coherent_state(n_spins: usize, angles: CoherentAngles) -> StateVector {
    let up = Complex64::new((angles.theta / 2.0).cos(), 0.0);
    let down = Complex64::from_polar((angles.theta / 2.0).sin(), angles.phi);
    // amplitude depends only on the number of flipped spins
    let by_popcount: Vec<Complex64> = (0..=n_spins)
        .map(|k| up.powu((n_spins - k) as u32) * down.powu(k as u32))
        .collect();
    let amps = (0..1usize << n_spins)
        .map(|s| by_popcount[s.count_ones() as usize])
        .collect();
    StateVector { n_spins, amps }
}

/// `|0…0⟩`, the all-up product state.
pub fn all_up(n_spins: usize) -> StateVector {
    StateVector::basis(n_spins, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `J_z` eigenvalue `(N − 2·popcount(s))/2` of basis state `s`.
pub fn jz_eigenvalue(n_spins: usize, index: usize) -> f64 {
    (n_spins as f64 - 2.0 * index.count_ones() as f64) / 2.0
}

/// Component `s` of `J_axis |ψ⟩`.
#[inline]
fn collective_component(amps: &[Complex64], n_spins: usize, axis: Axis, s: usize) -> Complex64 {
    match axis {
        Axis::Z => amps[s] * jz_eigenvalue(n_spins, s),
        Axis::X => {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..n_spins {
                acc += amps[s ^ (1 << b)];
            }
            acc * 0.5
        }
        Axis::Y => {
            // σʸ|0⟩ = i|1⟩, σʸ|1⟩ = −i|0⟩
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..n_spins {
                let a = amps[s ^ (1 << b)];
                if s & (1 << b) != 0 {
                    acc += Complex64::new(-a.im, a.re);
                } else {
                    acc += Complex64::new(a.im, -a.re);
                }
            }
            acc * 0.5
        }
    }
}

/// `J_axis |ψ⟩` with `J_a = Σ_i σᵃ_i / 2`; the result is not normalized.
pub fn apply_collective(state: &StateVector, axis: Axis) -> StateVector {
    let mut out = StateVector::zeros(state.n_spins);
    apply_collective_into(Exec::default(), state, axis, &mut out.amps);
    out
}

/// Writes `J_axis |ψ⟩` into `out` (length `2^N`).
pub fn apply_collective_into(exec: Exec, state: &StateVector, axis: Axis, out: &mut [Complex64]) {
    assert_eq!(out.len(), state.dim(), "output buffer has the wrong length");
    let n = state.n_spins;
    let amps = &state.amps;
    exec::for_each_chunk_mut(exec, out, exec::CHUNK, |offset, chunk| {
        for (k, o) in chunk.iter_mut().enumerate() {
            *o = collective_component(amps, n, axis, offset + k);
        }
    });
}

/// `⟨ψ|J²|ψ⟩ = Σ_a ‖J_a ψ‖²` for a normalized state.
pub fn expval_jsq(state: &StateVector) -> f64 {
    expval_jsq_with(Exec::default(), state)
}

pub fn expval_jsq_with(exec: Exec, state: &StateVector) -> f64 {
    let n = state.n_spins;
    let amps = &state.amps;
    exec::index_sum(exec, state.dim(), |s| {
        collective_component(amps, n, Axis::X, s).norm_sqr()
            + collective_component(amps, n, Axis::Y, s).norm_sqr()
            + collective_component(amps, n, Axis::Z, s).norm_sqr()
    })
}

/// `⟨ψ|J_a²|ψ⟩` for a single axis.
pub fn expval_collective_sq(state: &StateVector, axis: Axis) -> f64 {
    let n = state.n_spins;
    let amps = &state.amps;
    exec::index_sum(Exec::default(), state.dim(), |s| {
        collective_component(amps, n, axis, s).norm_sqr()
    })
}
