//! Floquet eigenphases, level-spacing ratios and the effective dimension.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::floquet::{self, BasisTag, DenseUnitary};
use crate::linalg;
use crate::observables::format_float;
use crate::spin::{StateVector, SystemParams};
use crate::symmetry::{self, SectorBasis};

/// Blocks whose unitarity defect exceeds this are rejected.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Spacings below this are treated as exact degeneracies.
pub const DEGENERACY_GAP: f64 = 1e-12;
/// Accepted mismatch between captured and expected weight.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Eigenphases in `(−π, π]`, ascending, with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub phases: Vec<f64>,
    pub vectors: Mat<Complex64>,
    pub basis: BasisTag,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }
}

pub fn diagonalize_floquet(block: &DenseUnitary) -> Result<EigenSystem> {
    let defect = block.unitarity_defect();
    if !(defect <= UNITARITY_TOL) {
        return Err(Error::NonUnitary { defect });
    }
    let eig = linalg::unitary_eigen(block.entries.as_ref())?;
    Ok(EigenSystem {
        phases: eig.phases,
        vectors: eig.vectors,
        basis: block.basis,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingStats {
    pub ratios: Vec<f64>,
    pub mean_r: f64,
    /// Levels folded into a neighbour because their spacing was degenerate.
    pub merged: usize,
}

/// Ratios `min(s_n, s_{n−1})/max(s_n, s_{n−1})` of consecutive spacings on
/// the circle, including the wrap-around spacing.
pub fn spacing_ratios(phases: &[f64]) -> Result<SpacingStats> {
    if phases.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "spacing ratios need at least 3 levels, got {}",
            phases.len()
        )));
    }
    if phases.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParameter("non-finite eigenphase".into()));
    }
    let mut sorted = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let first = sorted[0];
    let last = sorted[sorted.len() - 1];
    let mut spacings: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    spacings.push(2.0 * PI - (last - first));

    let before = spacings.len();
    spacings.retain(|&s| s >= DEGENERACY_GAP);
    let merged = before - spacings.len();
    if merged > 0 {
        log::info!("merged {merged} degenerate level spacings below {DEGENERACY_GAP:e}");
    }
    if spacings.len() < 2 {
        return Err(Error::InvalidParameter(
            "fewer than two distinct spacings after merging degeneracies".into(),
        ));
    }
    let m = spacings.len();
    let ratios: Vec<f64> = (0..m)
        .map(|k| {
            let a = spacings[k];
            let b = spacings[(k + m - 1) % m];
            a.min(b) / a.max(b)
        })
        .collect();
    let mean_r = ratios.iter().sum::<f64>() / m as f64;
    Ok(SpacingStats {
        ratios,
        mean_r,
        merged,
    })
}

/// Eigen-decomposition of one block together with the sector it lives in;
/// `sector = None` means the block is the full computational-basis operator.
#[derive(Debug, Clone)]
pub struct SectorEigen {
    pub sector: Option<SectorBasis>,
    pub eigen: EigenSystem,
}

impl SectorEigen {
    /// Overlaps `⟨φ_i|ψ⟩` with this block's eigenvectors.
    pub fn overlaps(&self, state: &StateVector) -> Vec<Complex64> {
        let coeffs = match &self.sector {
            Some(sector) => sector.project(state.amplitudes()),
            None => state.amplitudes().to_vec(),
        };
        let w = &self.eigen.vectors;
        (0..w.ncols())
            .map(|j| (0..w.nrows()).map(|i| w[(i, j)].conj() * coeffs[i]).sum())
            .collect()
    }

    /// Eigenvector `j` as a full-space state.
    pub fn eigenstate(&self, j: usize) -> StateVector {
        let w = &self.eigen.vectors;
        let col: Vec<Complex64> = (0..w.nrows()).map(|i| w[(i, j)]).collect();
        match &self.sector {
            Some(sector) => {
                let n = sector.n_spins();
                StateVector::from_amplitudes(n, sector.embed(&col)).expect("sector dimension")
            }
            None => {
                let n = col.len().trailing_zeros() as usize;
                StateVector::from_amplitudes(n, col).expect("power-of-two dimension")
            }
        }
    }
}

/// Diagonalizes the four joint-sector blocks of the Floquet operator.
pub fn diagonalize_sectors(params: &SystemParams) -> Result<Vec<SectorEigen>> {
    let sectors = symmetry::all_sectors(params.n_spins())?;
    let table = floquet::build_phase_table(params)?;
    let mut out = Vec::with_capacity(4);
    for sector in sectors {
        let block = symmetry::sector_unitary_from_table(&table, &sector)?;
        let eigen = diagonalize_floquet(&block)?;
        out.push(SectorEigen {
            sector: Some(sector),
            eigen,
        });
    }
    Ok(out)
}

/// Diagonalizes the full operator without symmetry resolution.
pub fn diagonalize_full(params: &SystemParams) -> Result<SectorEigen> {
    let u = floquet::dense_unitary(params)?;
    Ok(SectorEigen {
        sector: None,
        eigen: diagonalize_floquet(&u)?,
    })
}

/// One eigenstate's share of the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub phase: f64,
    pub weight: f64,
}

pub fn overlap_weights(state: &StateVector, parts: &[SectorEigen]) -> Vec<Overlap> {
    parts
        .iter()
        .flat_map(|p| {
            p.overlaps(state)
                .into_iter()
                .zip(p.eigen.phases.clone())
                .map(|(c, phase)| Overlap {
                    phase,
                    weight: c.norm_sqr(),
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDimension {
    pub k: usize,
    pub captured: f64,
}

/// Smallest `K` whose `K` largest weights sum to `(1 − ε)·expected`.
///
/// Weights are sorted descending with ties broken by ascending eigenphase.
pub fn effective_dimension_of(
    overlaps: &[Overlap],
    epsilon: f64,
    expected: f64,
) -> Result<EffectiveDimension> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let captured: f64 = overlaps.iter().map(|o| o.weight).sum();
    if (captured - expected).abs() > COMPLETENESS_TOL || expected <= 0.0 {
        return Err(Error::Completeness { captured, expected });
    }
    let mut sorted = overlaps.to_vec();
    sorted.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap_or(Ordering::Equal)
            .then(a.phase.total_cmp(&b.phase))
    });
    let target = (1.0 - epsilon) * captured;
    let mut acc = 0.0;
    for (k, o) in sorted.iter().enumerate() {
        acc += o.weight;
        if acc >= target {
            return Ok(EffectiveDimension { k: k + 1, captured });
        }
    }
    Ok(EffectiveDimension {
        k: sorted.len(),
        captured,
    })
}

/// Effective dimension over the complete eigenbasis assembled from `parts`.
pub fn effective_dimension(
    state: &StateVector,
    parts: &[SectorEigen],
    epsilon: f64,
) -> Result<EffectiveDimension> {
    effective_dimension_of(&overlap_weights(state, parts), epsilon, state.norm_sqr())
}

/// Effective dimension of the state's normalized projection onto one sector.
pub fn effective_dimension_in_sector(
    state: &StateVector,
    part: &SectorEigen,
    epsilon: f64,
) -> Result<EffectiveDimension> {
    let expected = match &part.sector {
        Some(sector) => sector
            .project(state.amplitudes())
            .iter()
            .map(|c| c.norm_sqr())
            .sum(),
        None => state.norm_sqr(),
    };
    let mut overlaps = overlap_weights(state, std::slice::from_ref(part));
    let mut result = effective_dimension_of(&overlaps, epsilon, expected)?;
    if expected > 0.0 {
        overlaps.iter_mut().for_each(|o| o.weight /= expected);
        result = effective_dimension_of(&overlaps, epsilon, 1.0)?;
    }
    Ok(result)
}

/// Infinite-time average `Σ_i |c_i|² f(φ_i)` for non-degenerate phases.
pub fn diagonal_ensemble<F>(state: &StateVector, parts: &[SectorEigen], f: F) -> f64
where
    F: Fn(&StateVector) -> f64 + Sync + Send,
{
    let mut total = 0.0;
    for part in parts {
        let weights: Vec<f64> = part.overlaps(state).iter().map(|c| c.norm_sqr()).collect();
        let values = exec::map_indices(Exec::default(), weights.len(), |j| {
            if weights[j] > 0.0 {
                weights[j] * f(&part.eigenstate(j))
            } else {
                0.0
            }
        });
        total += values.iter().sum::<f64>();
    }
    total
}

/// Rows `sector,eigenphase`.
pub fn write_eigenphases<W: Write>(mut out: W, parts: &[SectorEigen]) -> std::io::Result<()> {
    writeln!(out, "sector,eigenphase")?;
    for part in parts {
        let tag = match &part.sector {
            Some(s) => s.label().tag(),
            None => "full".to_string(),
        };
        for e in &part.eigen.phases {
            writeln!(out, "{tag},{}", format_float(*e))?;
        }
    }
    Ok(())
}

/// Random spectra used to calibrate the spacing-ratio statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceEnsemble {
    /// Independent uniform phases.
    Poisson,
    /// Eigenphases of `UᵀU` with `U` Haar-distributed.
    Coe,
}

/// Haar unitary from the QR decomposition of a complex Ginibre matrix, with
/// the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut ChaCha8Rng) -> Mat<Complex64> {
    let g = Mat::from_fn(dim, dim, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    Mat::from_fn(dim, dim, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

/// One sampled spectrum of `dim` levels.
pub fn sample_spectrum(
    ensemble: ReferenceEnsemble,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    match ensemble {
        ReferenceEnsemble::Poisson => Ok((0..dim).map(|_| rng.random_range(-PI..PI)).collect()),
        ReferenceEnsemble::Coe => {
            let u = haar_unitary(dim, rng);
            let w = u.transpose() * &u;
            Ok(linalg::unitary_eigen(w.as_ref())?.phases)
        }
    }
}

/// Mean spacing ratio pooled over `draws` spectra of `dim` levels each.
pub fn reference_mean_r(
    ensemble: ReferenceEnsemble,
    dim: usize,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    let per_draw = exec::map_indices(Exec::default(), draws, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let phases = sample_spectrum(ensemble, dim, &mut rng)?;
        spacing_ratios(&phases).map(|s| s.ratios)
    });
    let mut sum = 0.0;
    let mut count = 0usize;
    for ratios in per_draw {
        let ratios = ratios?;
        sum += ratios.iter().sum::<f64>();
        count += ratios.len();
    }
    Ok(sum / count as f64)
}
