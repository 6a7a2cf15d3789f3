//! Z-parity `R = e^{−iπJ_z}` and bit reversal (the reflection `i ↔ N+1−i`),
//! their joint sectors, and Floquet operators restricted to a sector.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::floquet::{self, BasisTag, DenseUnitary, PhaseTable, MAX_DENSE_SPINS};
use crate::observables::format_float;
use crate::spin::{StateVector, SystemParams};

/// Largest commutator defect accepted before projecting onto a sector.
pub const COMMUTATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    fn from_sign(negative: bool) -> Self {
        if negative {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Eigenvalues of `R` and of bit reversal labelling a joint sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorLabel {
    pub z_parity: Parity,
    pub reflection: Parity,
}

impl SectorLabel {
    pub const EVEN_EVEN: SectorLabel = SectorLabel {
        z_parity: Parity::Even,
        reflection: Parity::Even,
    };

    pub fn all() -> [SectorLabel; 4] {
        use Parity::*;
        [(Even, Even), (Even, Odd), (Odd, Even), (Odd, Odd)].map(|(z, r)| SectorLabel {
            z_parity: z,
            reflection: r,
        })
    }

    /// Short tag such as `"R+B-"` for file names and CSV columns.
    pub fn tag(self) -> String {
        let c = |p: Parity| if p == Parity::Even { '+' } else { '-' };
        format!("R{}B{}", c(self.z_parity), c(self.reflection))
    }
}

/// Diagonal of `R`: `e^{−iπ m_s}` with `m_s = (N − 2·popcount s)/2`.
pub fn z_parity_diagonal(n_spins: usize) -> Vec<Complex64> {
    (0..1usize << n_spins)
        .map(|s| {
            let m = (n_spins as f64 - 2.0 * s.count_ones() as f64) / 2.0;
            // exact ±1, ±i for integer and half-integer m
            let quarter = (2.0 * m).rem_euclid(4.0) as u32;
            match quarter {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 1.0),
            }
        })
        .collect()
}

fn z_parity_of(n_spins: usize, s: usize) -> Parity {
    let m = n_spins as i64 / 2 - s.count_ones() as i64;
    Parity::from_sign(m.rem_euclid(2) == 1)
}

pub fn reverse_bits(s: usize, n_spins: usize) -> usize {
    if n_spins == 0 {
        return 0;
    }
    s.reverse_bits() >> (usize::BITS as usize - n_spins)
}

/// Index map exchanging bit `b` with bit `N − 1 − b`.
pub fn bit_reversal_permutation(n_spins: usize) -> Vec<usize> {
    (0..1usize << n_spins)
        .map(|s| reverse_bits(s, n_spins))
        .collect()
}

/// One basis vector of a sector; touches one or two computational states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectorVector {
    /// A reflection-symmetric configuration `|s⟩`.
    Single(usize),
    /// `(|s⟩ + sign·|t⟩)/√2` with `t` the reflection of `s` and `s < t`.
    Pair { s: usize, t: usize, sign: f64 },
}

impl SectorVector {
    /// Non-zero entries `(index, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> {
        let pair = match *self {
            SectorVector::Single(s) => [(s, 1.0), (usize::MAX, 0.0)],
            SectorVector::Pair { s, t, sign } => [(s, FRAC_1_SQRT_2), (t, sign * FRAC_1_SQRT_2)],
        };
        pair.into_iter().filter(|&(i, _)| i != usize::MAX)
    }

    /// `⟨v|ψ⟩`.
    pub fn overlap(&self, amps: &[Complex64]) -> Complex64 {
        self.entries().map(|(i, v)| amps[i] * v).sum()
    }
}

/// Orthonormal basis of a joint `(R, B)` sector.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n_spins: usize,
    label: SectorLabel,
    vectors: Vec<SectorVector>,
}

impl SectorBasis {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }
    pub fn label(&self) -> SectorLabel {
        self.label
    }
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
    pub fn vectors(&self) -> &[SectorVector] {
        &self.vectors
    }

    /// `V†ψ`.
    pub fn project(&self, amps: &[Complex64]) -> Vec<Complex64> {
        self.vectors.iter().map(|v| v.overlap(amps)).collect()
    }

    /// `V c` as a full-space amplitude vector.
    pub fn embed(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_spins];
        for (v, &c) in self.vectors.iter().zip(coeffs) {
            for (i, x) in v.entries() {
                amps[i] += c * x;
            }
        }
        amps
    }

    /// `V` as a dense `2^N × dim` matrix.
    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut m = Mat::zeros(1 << self.n_spins, self.dim());
        for (k, v) in self.vectors.iter().enumerate() {
            for (i, x) in v.entries() {
                m[(i, k)] = Complex64::new(x, 0.0);
            }
        }
        m
    }

    /// Sparse triplets `row,col,value` with row the computational index and
    /// col the sector index.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        for (k, v) in self.vectors.iter().enumerate() {
            for (i, x) in v.entries() {
                writeln!(out, "{i},{k},{}", format_float(x))?;
            }
        }
        Ok(())
    }
}

/// Builds a joint sector from reflection orbits, keeping vectors whose
/// `R` eigenvalue matches.
pub fn build_sector_basis(n_spins: usize, label: SectorLabel) -> Result<SectorBasis> {
    if n_spins % 2 == 1 || n_spins == 0 {
        return Err(Error::Unsupported(format!(
            "symmetry sectors require an even number of spins, got {n_spins}"
        )));
    }
    if n_spins >= usize::BITS as usize - 1 {
        return Err(Error::Capacity {
            what: "symmetry sector",
            max: usize::BITS as usize - 2,
            requested: n_spins,
        });
    }
    let mut vectors = Vec::new();
    for s in 0..1usize << n_spins {
        if z_parity_of(n_spins, s) != label.z_parity {
            continue;
        }
        let t = reverse_bits(s, n_spins);
        match (t.cmp(&s), label.reflection) {
            (std::cmp::Ordering::Equal, Parity::Even) => vectors.push(SectorVector::Single(s)),
            (std::cmp::Ordering::Greater, p) => vectors.push(SectorVector::Pair {
                s,
                t,
                sign: p.sign(),
            }),
            _ => {}
        }
    }
    Ok(SectorBasis {
        n_spins,
        label,
        vectors,
    })
}

/// The four joint sectors, in [`SectorLabel::all`] order.
pub fn all_sectors(n_spins: usize) -> Result<Vec<SectorBasis>> {
    exec::map_indices(Exec::default(), 4, |k| {
        build_sector_basis(n_spins, SectorLabel::all()[k])
    })
    .into_iter()
    .collect()
}

/// `dim(B = +1) = 2^{N−1} + 2^{N/2−1}` for even `N`.
pub fn reflection_even_dimension(n_spins: usize) -> usize {
    (1 << (n_spins - 1)) + (1 << (n_spins / 2 - 1))
}

/// `‖[U, R]‖_F/√dim` and `‖[U, B]‖_F/√dim` of a dense operator.
pub fn commutator_defects(u: &Mat<Complex64>, n_spins: usize) -> (f64, f64) {
    let dim = u.nrows();
    let r = z_parity_diagonal(n_spins);
    let p = bit_reversal_permutation(n_spins);
    let (mut dr, mut db) = (0.0, 0.0);
    for j in 0..dim {
        for i in 0..dim {
            dr += (u[(i, j)] * (r[j] - r[i])).norm_sqr();
            db += (u[(i, p[j])] - u[(p[i], j)]).norm_sqr();
        }
    }
    let scale = (dim as f64).sqrt();
    (dr.sqrt() / scale, db.sqrt() / scale)
}

/// `V† U V` after verifying that `U` commutes with both symmetries.
pub fn project_unitary(u: &DenseUnitary, sector: &SectorBasis) -> Result<DenseUnitary> {
    let n = sector.n_spins();
    if u.dim() != 1 << n || u.basis != BasisTag::Computational {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            actual: u.dim(),
        });
    }
    let (dr, db) = commutator_defects(&u.entries, n);
    if dr > COMMUTATOR_TOL {
        return Err(Error::SymmetryViolation {
            symmetry: "z parity",
            defect: dr,
        });
    }
    if db > COMMUTATOR_TOL {
        return Err(Error::SymmetryViolation {
            symmetry: "bit reversal",
            defect: db,
        });
    }
    let d = sector.dim();
    let vecs = sector.vectors();
    let dim = u.dim();
    // U V, one sparse combination of columns per sector vector
    let mut uv = Mat::<Complex64>::zeros(dim, d);
    for (k, v) in vecs.iter().enumerate() {
        for (j, x) in v.entries() {
            for i in 0..dim {
                uv[(i, k)] += u.entries[(i, j)] * x;
            }
        }
    }
    let block = Mat::from_fn(d, d, |a, k| {
        vecs[a]
            .entries()
            .map(|(i, x)| uv[(i, k)] * x)
            .sum::<Complex64>()
    });
    Ok(DenseUnitary {
        entries: block,
        basis: BasisTag::Sector(sector.label()),
    })
}

/// Sector block of the Floquet operator built with the fast step, without
/// forming the full `2^N × 2^N` matrix.
///
/// The weight each image leaves outside the sector is reported as a
/// symmetry violation if it exceeds [`COMMUTATOR_TOL`].
pub fn sector_unitary(params: &SystemParams, sector: &SectorBasis) -> Result<DenseUnitary> {
    let n = params.n_spins();
    if n != sector.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: 1 << sector.n_spins(),
            actual: params.dim(),
        });
    }
    if n > MAX_DENSE_SPINS {
        return Err(Error::Capacity {
            what: "dense sector operator",
            max: MAX_DENSE_SPINS,
            requested: n,
        });
    }
    let table = floquet::build_phase_table(params)?;
    sector_unitary_from_table(&table, sector)
}

pub(crate) fn sector_unitary_from_table(
    table: &PhaseTable,
    sector: &SectorBasis,
) -> Result<DenseUnitary> {
    let d = sector.dim();
    let columns = exec::map_indices(Exec::default(), d, |k| {
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        e[k] = Complex64::new(1.0, 0.0);
        let mut amps = sector.embed(&e);
        floquet::step_in_place(Exec::Sequential, &mut amps, table)?;
        let coeffs = sector.project(&amps);
        let leak = sector
            .embed(&coeffs)
            .iter()
            .zip(&amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok::<_, Error>((coeffs, leak))
    });
    let mut block = Mat::<Complex64>::zeros(d, d);
    let mut leak: f64 = 0.0;
    for (k, col) in columns.into_iter().enumerate() {
        let (coeffs, l) = col?;
        leak = leak.max(l);
        for (a, c) in coeffs.into_iter().enumerate() {
            block[(a, k)] = c;
        }
    }
    if leak > COMMUTATOR_TOL {
        return Err(Error::SymmetryViolation {
            symmetry: "joint sector",
            defect: leak,
        });
    }
    Ok(DenseUnitary {
        entries: block,
        basis: BasisTag::Sector(sector.label()),
    })
}

/// `‖P_{B+}ψ‖²`, the weight of `ψ` in the reflection-even subspace.
pub fn coherent_state_sector_check(state: &StateVector) -> f64 {
    let n = state.n_spins();
    let amps = state.amplitudes();
    (0..amps.len())
        .map(|s| {
            let t = reverse_bits(s, n);
            match t.cmp(&s) {
                std::cmp::Ordering::Equal => amps[s].norm_sqr(),
                std::cmp::Ordering::Greater => (amps[s] + amps[t]).norm_sqr() / 2.0,
                std::cmp::Ordering::Less => 0.0,
            }
        })
        .sum()
}

/// The state with site labels reflected, `|s⟩ → |s̄⟩`.
pub fn reflect_state(state: &StateVector) -> StateVector {
    let n = state.n_spins();
    let amps = state.amplitudes();
    let out = (0..amps.len()).map(|s| amps[reverse_bits(s, n)]).collect();
    StateVector::from_amplitudes(n, out).expect("dimension preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::spin::{coherent_state, Boundary, CoherentAngles};
    use std::f64::consts::PI;

    #[test]
    fn z_parity_small_cases() {
        let r = z_parity_diagonal(2);
        let expected = [-1.0, 1.0, 1.0, -1.0];
        for (z, e) in r.iter().zip(expected) {
            assert_eq!(*z, Complex64::new(e, 0.0));
        }
        assert_eq!(z_parity_diagonal(4)[0b0011], Complex64::new(1.0, 0.0));
        for n in [2, 4, 6] {
            assert!(z_parity_diagonal(n).iter().all(|z| *z * *z == Complex64::new(1.0, 0.0)));
        }
        // odd N: half-integer m gives ±i
        assert_eq!(z_parity_diagonal(1)[0], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn bit_reversal_examples() {
        let p = bit_reversal_permutation(4);
        assert_eq!(p[0b0001], 0b1000);
        assert_eq!(p[0b0110], 0b0110);
        for n in 1..=12 {
            let p = bit_reversal_permutation(n);
            assert!(p.iter().enumerate().all(|(s, &t)| p[t] == s));
            let fixed = p.iter().enumerate().filter(|(s, t)| s == *t).count();
            assert_eq!(fixed, 1 << n.div_ceil(2));
        }
    }

    #[test]
    fn two_spin_even_sector() {
        let even = |z| SectorLabel {
            z_parity: z,
            reflection: Parity::Even,
        };
        let a = build_sector_basis(2, even(Parity::Even)).unwrap();
        let b = build_sector_basis(2, even(Parity::Odd)).unwrap();
        assert_eq!(a.dim() + b.dim(), 3);
        // R = +1 on |01⟩, |10⟩
        assert_eq!(
            a.vectors(),
            &[SectorVector::Pair {
                s: 1,
                t: 2,
                sign: 1.0
            }]
        );
        assert_eq!(b.vectors(), &[SectorVector::Single(0), SectorVector::Single(3)]);
    }

    #[test]
    fn sector_dimensions() {
        for n in (2..=12).step_by(2) {
            let sectors = all_sectors(n).unwrap();
            let total: usize = sectors.iter().map(|s| s.dim()).sum();
            assert_eq!(total, 1 << n);
            let even: usize = sectors
                .iter()
                .filter(|s| s.label().reflection == Parity::Even)
                .map(|s| s.dim())
                .sum();
            assert_eq!(even, reflection_even_dimension(n));
        }
        assert_eq!(reflection_even_dimension(12), 2080);
        assert!(build_sector_basis(5, SectorLabel::EVEN_EVEN).is_err());
    }

    #[test]
    fn sector_vectors_are_orthonormal() {
        let v = build_sector_basis(6, SectorLabel::all()[1]).unwrap().to_dense();
        assert!(linalg::orthonormality_defect(v.as_ref()) < 1e-13);
    }

    #[test]
    fn sector_weights() {
        let psi = coherent_state(8, CoherentAngles::new(2.25, 1.1));
        assert!((coherent_state_sector_check(&psi) - 1.0).abs() < 1e-12);
        let edge = StateVector::basis(8, 1);
        assert!((coherent_state_sector_check(&edge) - 0.5).abs() < 1e-15);
        let odd = build_sector_basis(8, SectorLabel::all()[3]).unwrap();
        let mut e = vec![Complex64::new(0.0, 0.0); odd.dim()];
        e[5] = Complex64::new(1.0, 0.0);
        let v = StateVector::from_amplitudes(8, odd.embed(&e)).unwrap();
        assert!(coherent_state_sector_check(&v).abs() < 1e-15);
    }

    #[test]
    fn projected_identity_and_fast_block_agree() {
        let params =
            SystemParams::new(6, 1.2, 6.0, 4.0 * PI / 11.0, 1.0, Boundary::OpenLine).unwrap();
        let dense = floquet::dense_unitary(&params).unwrap();
        for label in SectorLabel::all() {
            let sector = build_sector_basis(6, label).unwrap();
            let a = project_unitary(&dense, &sector).unwrap();
            let b = sector_unitary(&params, &sector).unwrap();
            assert!((&a.entries - &b.entries).norm_max() < 1e-12);
            assert!(a.unitarity_defect() < 1e-10);
        }
        let id = DenseUnitary {
            entries: Mat::identity(64, 64),
            basis: BasisTag::Computational,
        };
        let sector = build_sector_basis(6, SectorLabel::EVEN_EVEN).unwrap();
        let p = project_unitary(&id, &sector).unwrap();
        assert!((&p.entries - Mat::<Complex64>::identity(sector.dim(), sector.dim())).norm_max() < 1e-15);
    }

    #[test]
    fn symmetry_breaking_operator_rejected() {
        let mut entries = Mat::<Complex64>::identity(16, 16);
        // swap |0001⟩ and |0010⟩: breaks reflection
        entries[(1, 1)] = Complex64::new(0.0, 0.0);
        entries[(2, 2)] = Complex64::new(0.0, 0.0);
        entries[(1, 2)] = Complex64::new(1.0, 0.0);
        entries[(2, 1)] = Complex64::new(1.0, 0.0);
        let u = DenseUnitary {
            entries,
            basis: BasisTag::Computational,
        };
        let sector = build_sector_basis(4, SectorLabel::EVEN_EVEN).unwrap();
        assert!(matches!(
            project_unitary(&u, &sector),
            Err(Error::SymmetryViolation { symmetry: "bit reversal", .. })
        ));
    }

    #[test]
    fn triplet_export() {
        let sector = build_sector_basis(2, SectorLabel::EVEN_EVEN).unwrap();
        let mut buf = Vec::new();
        sector.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("row,col,value\n1,0,"));
    }
}
