//! Dense linear algebra on complex matrices, backed by `faer`.
//!
//! Unitary matrices are diagonalized through the Hermitian matrix
//! `(U + U†)/2 + c (U − U†)/2i`, which shares the eigenvectors of `U` and maps
//! the phase `E` to `cos E + c sin E`. Two distinct phases may land close
//! together under that map, so clusters of nearby values are re-diagonalized
//! against `U` itself. Every result is checked against `U v = e^{iE} v`.

use std::f64::consts::PI;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Slope of the Hermitian combination; any irrational value works.
const MIX: f64 = 0.754_877_666_246_692_8;
/// Hermitian eigenvalues closer than this are resolved against `U` directly.
const CLUSTER_GAP: f64 = 1e-6;
/// Accepted residual `‖U v − e^{iE} v‖` per eigenvector.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

pub fn mat_from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Mat<Complex64> {
    Mat::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

/// `max |(M†M − I)_ij|`.
pub fn orthonormality_defect(m: MatRef<'_, Complex64>) -> f64 {
    let g = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Singular values in non-increasing order.
pub fn singular_values(m: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    m.singular_values()
        .map_err(|e| Error::Linalg(format!("singular value decomposition failed: {e:?}")))
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues(m: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("Hermitian eigensolver failed: {e:?}")))
}

pub fn determinant(m: MatRef<'_, Complex64>) -> Complex64 {
    m.determinant()
}

/// Principal argument in `(−π, π]`.
pub fn principal_phase(z: Complex64) -> f64 {
    let e = z.arg();
    if e <= -PI {
        PI
    } else {
        e
    }
}

/// Eigenphases (ascending) and orthonormal eigenvectors of a unitary matrix.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    pub phases: Vec<f64>,
    pub vectors: Mat<Complex64>,
    /// Largest `‖U v − e^{iE} v‖` over the columns.
    pub residual: f64,
}

pub fn unitary_eigen(u: MatRef<'_, Complex64>) -> Result<UnitaryEigen> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: u.ncols(),
        });
    }
    if n == 0 {
        return Ok(UnitaryEigen {
            phases: Vec::new(),
            vectors: Mat::zeros(0, 0),
            residual: 0.0,
        });
    }

    let half = Complex64::new(0.5, 0.0);
    let mix = Complex64::new(0.0, -0.5 * MIX);
    let h = Mat::from_fn(n, n, |i, j| {
        let a = u[(i, j)];
        let b = u[(j, i)].conj();
        half * (a + b) + mix * (a - b)
    });
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("Hermitian eigensolver failed: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let mut vectors = evd.U().to_owned();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            resolve_cluster(u, &mut vectors, start, end)?;
        }
        start = end;
    }

    let uv = u * &vectors;
    let mut pairs: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let rayleigh: Complex64 = (0..n).map(|i| vectors[(i, j)].conj() * uv[(i, j)]).sum();
            (principal_phase(rayleigh), j)
        })
        .collect();

    let mut residual: f64 = 0.0;
    for &(phase, j) in &pairs {
        let lambda = Complex64::from_polar(1.0, phase);
        let r: f64 = (0..n)
            .map(|i| (uv[(i, j)] - lambda * vectors[(i, j)]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
    }
    if residual > EIGEN_RESIDUAL_TOL {
        return Err(Error::Linalg(format!(
            "eigenvector residual {residual:.3e} exceeds {EIGEN_RESIDUAL_TOL:.0e}"
        )));
    }

    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let sorted = Mat::from_fn(n, n, |i, k| vectors[(i, pairs[k].1)]);
    Ok(UnitaryEigen {
        phases: pairs.into_iter().map(|(e, _)| e).collect(),
        vectors: sorted,
        residual,
    })
}

/// Replaces columns `start..end` of `vectors` by eigenvectors of `U`
/// restricted to their span.
fn resolve_cluster(
    u: MatRef<'_, Complex64>,
    vectors: &mut Mat<Complex64>,
    start: usize,
    end: usize,
) -> Result<()> {
    let w = vectors.as_ref().subcols(start, end - start).to_owned();
    let block = w.adjoint() * u * &w;
    let evd = block
        .eigen()
        .map_err(|e| Error::Linalg(format!("cluster eigensolver failed: {e:?}")))?;
    // sort by phase so that genuinely distinct levels come out separated
    let k = end - start;
    let s = evd.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| principal_phase(s[a]).total_cmp(&principal_phase(s[b])));
    let ordered = Mat::from_fn(k, k, |i, j| evd.U()[(i, order[j])]);
    // degenerate levels can yield non-orthogonal eigenvectors
    let q = ordered.qr().compute_thin_Q();
    let rotated = &w * &q;
    vectors
        .as_mut()
        .subcols_mut(start, k)
        .copy_from(rotated.as_ref());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn haar_like(n: usize, seed: u64) -> Mat<Complex64> {
        let mut x = seed;
        let mut next = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = Mat::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        a.qr().compute_Q()
    }

    #[test]
    fn diagonal_phases() {
        let u = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(0.0, 1.0),
            (1, 1) => Complex64::new(0.0, -1.0),
            _ => Complex64::new(0.0, 0.0),
        });
        let e = unitary_eigen(u.as_ref()).unwrap();
        assert!((e.phases[0] + PI / 2.0).abs() < 1e-14);
        assert!((e.phases[1] - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn minus_one_maps_to_pi() {
        assert_eq!(principal_phase(Complex64::new(-1.0, -0.0)), PI);
        assert_eq!(principal_phase(Complex64::new(-1.0, 0.0)), PI);
    }

    #[test]
    fn random_unitary_decomposes() {
        let u = haar_like(60, 7);
        let e = unitary_eigen(u.as_ref()).unwrap();
        assert!(e.residual < 1e-10);
        assert!(orthonormality_defect(e.vectors.as_ref()) < 1e-10);
        assert!(e.phases.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn degenerate_spectrum() {
        // V diag(phases with repeats) V†
        let v = haar_like(12, 3);
        let phases = [0.3, 0.3, 0.3, -1.0, -1.0, 2.0, 2.0, 2.0, 2.0, PI, 1.1, 0.3];
        let d = Mat::from_fn(12, 12, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, phases[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let u = &v * &d * v.adjoint();
        let e = unitary_eigen(u.as_ref()).unwrap();
        assert!(orthonormality_defect(e.vectors.as_ref()) < 1e-10);
        let mut expected = phases.to_vec();
        expected.sort_by(f64::total_cmp);
        for (a, b) in e.phases.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn reflected_phases_are_separated() {
        // cos E + c sin E coincides for E and 2·atan(c) − E
        let v = haar_like(4, 11);
        let center = MIX.atan();
        let phases = [center + 0.4, center - 0.4, 1.0, -2.5];
        let d = Mat::from_fn(4, 4, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, phases[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let u = &v * &d * v.adjoint();
        let e = unitary_eigen(u.as_ref()).unwrap();
        assert!(e.residual < 1e-10);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = Mat::from_fn(3, 2, |i, j| {
            if i == j {
                Complex64::new(0.0, (i + 1) as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let s = singular_values(m.as_ref()).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
    }
}
