//! Free-fermion solution of the nearest-neighbour kicked Ising ring.
//!
//! With `σᶻ = 1 − 2n` and a Jordan–Wigner string, the ring Floquet operator
//! decouples into `2 × 2` blocks acting on the pairs `(q, −q)` of
//! antiperiodic momenta. Starting from `|0…0⟩` (the fermion vacuum) each
//! block evolves independently, and every spin correlator follows from the
//! two-point functions `C_ij = ⟨c_i†c_j⟩` and `F_ij = ⟨c_i†c_j†⟩` by Wick's
//! theorem.
//!
//! Majorana operators are `A = c† + c` and `B = c† − c`, so that
//! `σᶻ_k = A_k B_k` and, for `i < j`,
//!
//! * `σˣ_iσˣ_j =  B_i A_{i+1}B_{i+1} ⋯ A_{j−1}B_{j−1} A_j`,
//! * `σʸ_iσʸ_j = −A_i A_{i+1}B_{i+1} ⋯ A_{j−1}B_{j−1} B_j`.

pub mod pfaffian;

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::linalg;
use crate::observables::entropy_bits;
use crate::spin::{Axis, Boundary, Interaction, SystemParams};

pub use pfaffian::{pfaffian, SkewMatrix};

/// `|sin θ|` below which `sin nθ / sin θ` is replaced by its limit.
const RESONANCE: f64 = 1e-9;
/// Largest accepted imaginary part of a spin correlator.
pub const IMAG_TOL: f64 = 1e-7;
/// Accepted excursion of correlation-matrix eigenvalues outside `[0, 1]`.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Couplings of `U = exp(−iJτ Σ σˣ_iσˣ_{i+1}) exp(−iBτ Σ σᶻ_i)` on a ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    n_spins: usize,
    coupling: f64,
    field: f64,
    period: f64,
}

impl IsingParams {
    /// From the chain parameters: `J = k/(2N(α))` with the ring
    /// nearest-neighbour Kac factor `2N/(N − 1)`, and `B = p/2`.
    pub fn new(n_spins: usize, k: f64, p: f64, period: f64) -> Result<Self> {
        if n_spins < 4 || n_spins % 2 == 1 {
            return Err(Error::InvalidParameter(format!(
                "the fermion solution needs an even ring of at least 4 spins, got {n_spins}"
            )));
        }
        if !(period > 0.0) || !k.is_finite() || !p.is_finite() || !period.is_finite() {
            return Err(Error::InvalidParameter(
                "couplings must be finite and the period positive".into(),
            ));
        }
        let n = n_spins as f64;
        let kac = 2.0 * n / (n - 1.0);
        Ok(IsingParams {
            n_spins,
            coupling: k / (2.0 * kac),
            field: p / 2.0,
            period,
        })
    }

    /// The same drive as a [`SystemParams`] ring with nearest-neighbour bonds.
    pub fn from_system(params: &SystemParams) -> Result<Self> {
        if params.boundary() != Boundary::Ring || params.interaction() != Interaction::NearestNeighbor
        {
            return Err(Error::Unsupported(
                "the fermion solution describes the nearest-neighbour ring only".into(),
            ));
        }
        IsingParams::new(
            params.n_spins(),
            params.coupling(),
            params.kick(),
            params.period(),
        )
    }

    /// Matching chain parameters for state-vector evolution.
    pub fn to_system(&self) -> Result<SystemParams> {
        let n = self.n_spins as f64;
        let kac = 2.0 * n / (n - 1.0);
        SystemParams::nearest_neighbor(
            self.n_spins,
            self.coupling * 2.0 * kac,
            self.field * 2.0,
            self.period,
            Boundary::Ring,
        )
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }
    /// `J`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    /// `B`.
    pub fn field(&self) -> f64 {
        self.field
    }
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Positive antiperiodic momenta `(2m − 1)π/N`, `m = 1..N/2`.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.n_spins as f64;
        (1..=self.n_spins / 2)
            .map(|m| (2 * m - 1) as f64 * PI / n)
            .collect()
    }

    /// One-period block on `(filled, empty)`: `[[a, −b*], [b, a*]]`.
    pub fn mode_matrix(&self, q: f64) -> [[Complex64; 2]; 2] {
        let (a, b) = self.mode_entries(q);
        [[a, -b.conj()], [b, a.conj()]]
    }

    fn mode_entries(&self, q: f64) -> (Complex64, Complex64) {
        let jt = 2.0 * self.coupling * self.period;
        let kick = Complex64::from_polar(1.0, 2.0 * self.field * self.period);
        let a = kick * Complex64::new(jt.cos(), -q.cos() * jt.sin());
        let b = kick * (-q.sin() * jt.sin());
        (a, b)
    }

    /// Quasi-energy `θ_q` with `cos θ_q = Re a`.
    pub fn theta(&self, q: f64) -> f64 {
        self.mode_entries(q).0.re.clamp(-1.0, 1.0).acos()
    }
}

/// `(u_q(n), v_q(n))`, the filled and empty amplitudes of mode pair `q`
/// after `n` periods from `(0, 1)`.
pub fn mode_evolution(q: f64, params: &IsingParams, n: u64) -> (Complex64, Complex64) {
    let (a, b) = params.mode_entries(q);
    let theta = a.re.clamp(-1.0, 1.0).acos();
    let nf = n as f64;
    let s = theta.sin();
    let ratio = if s.abs() < RESONANCE {
        // limit of sin nθ / sin θ at θ = 0 or π
        let sign = if theta > PI / 2.0 && n % 2 == 0 { -1.0 } else { 1.0 };
        nf * sign
    } else {
        (nf * theta).sin() / s
    };
    let u = -b.conj() * ratio;
    let v = Complex64::new((nf * theta).cos(), -a.im * ratio);
    (u, v)
}

/// Mode amplitudes of all positive momenta at one time.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub step: u64,
    pub momenta: Vec<f64>,
    pub thetas: Vec<f64>,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl ModeSet {
    pub fn at(params: &IsingParams, n: u64) -> Self {
        let momenta = params.momenta();
        let thetas = momenta.iter().map(|&q| params.theta(q)).collect();
        let (u, v) = momenta.iter().map(|&q| mode_evolution(q, params, n)).unzip();
        ModeSet {
            step: n,
            momenta,
            thetas,
            u,
            v,
        }
    }

    /// `max ||u|² + |v|² − 1|`.
    pub fn normalization_defect(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| (u.norm_sqr() + v.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `C` and `F` restricted to the first `L` sites.
#[derive(Debug, Clone)]
pub struct CorrelatorPair {
    pub step: u64,
    pub c: Mat<Complex64>,
    pub f: Mat<Complex64>,
}

/// Translation-invariant profiles `C(d)` and `F(d)` for `d = 0..N`.
#[derive(Debug, Clone)]
struct Profiles {
    c: Vec<f64>,
    f: Vec<Complex64>,
}

impl Profiles {
    fn new(params: &IsingParams, n: u64) -> Self {
        let modes = ModeSet::at(params, n);
        let size = params.n_spins();
        let norm = 2.0 / size as f64;
        let mut c = vec![0.0; size];
        let mut f = vec![Complex64::new(0.0, 0.0); size];
        for (d, (cd, fd)) in c.iter_mut().zip(f.iter_mut()).enumerate() {
            for ((q, u), v) in modes.momenta.iter().zip(&modes.u).zip(&modes.v) {
                let x = q * d as f64;
                *cd += norm * u.norm_sqr() * x.cos();
                // F(d) = ⟨c_i†c_{i+d}†⟩ with d = j − i, antisymmetric in d
                *fd += Complex64::new(0.0, norm) * u.conj() * v * x.sin();
            }
        }
        Profiles { c, f }
    }

    /// `C_ij`.
    fn c(&self, i: usize, j: usize) -> f64 {
        self.c[i.abs_diff(j)]
    }

    /// `F_ij = −(2i/N) Σ u* v sin q(i − j)`.
    fn f(&self, i: usize, j: usize) -> Complex64 {
        if j >= i {
            self.f[j - i]
        } else {
            -self.f[i - j]
        }
    }

    /// `⟨A_m A_l⟩`.
    fn aa(&self, m: usize, l: usize) -> Complex64 {
        if m == l {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::new(0.0, 2.0 * self.f(m, l).im)
    }

    /// `⟨B_m B_l⟩`.
    fn bb(&self, m: usize, l: usize) -> Complex64 {
        if m == l {
            return Complex64::new(-1.0, 0.0);
        }
        Complex64::new(0.0, 2.0 * self.f(m, l).im)
    }

    /// `⟨A_m B_l⟩`.
    fn ab(&self, m: usize, l: usize) -> Complex64 {
        let delta = if m == l { 1.0 } else { 0.0 };
        Complex64::new(2.0 * self.f(m, l).re - 2.0 * self.c(m, l) + delta, 0.0)
    }
}

pub fn correlators(params: &IsingParams, n: u64, l: usize) -> Result<CorrelatorPair> {
    if l > params.n_spins() {
        return Err(Error::InvalidParameter(format!(
            "subsystem of {l} sites exceeds the ring of {}",
            params.n_spins()
        )));
    }
    let p = Profiles::new(params, n);
    Ok(CorrelatorPair {
        step: n,
        c: Mat::from_fn(l, l, |i, j| Complex64::new(p.c(i, j), 0.0)),
        f: Mat::from_fn(l, l, |i, j| p.f(i, j)),
    })
}

/// Skew matrix of Wick contractions for a Majorana string, blocked as
/// `[[X, Z], [−Zᵀ, Y]]` over its `A` and `B` operators, with the sign of the
/// reordering.
#[derive(Debug, Clone)]
pub struct PfaffianMatrix {
    pub matrix: SkewMatrix,
    pub sign: f64,
}

impl PfaffianMatrix {
    pub fn value(&self) -> Result<Complex64> {
        Ok(self.sign * pfaffian(&self.matrix)?)
    }
}

fn blocked(
    a_sites: &[usize],
    b_sites: &[usize],
    profiles: &Profiles,
    sign: f64,
) -> PfaffianMatrix {
    let r = a_sites.len();
    let matrix = SkewMatrix::from_upper(2 * r, |x, y| match (x < r, y < r) {
        (true, true) => profiles.aa(a_sites[x], a_sites[y]),
        (true, false) => profiles.ab(a_sites[x], b_sites[y - r]),
        (false, false) => profiles.bb(b_sites[x - r], b_sites[y - r]),
        (false, true) => unreachable!("upper triangle has x < y"),
    });
    PfaffianMatrix { matrix, sign }
}

/// String for `σˣ_iσˣ_j`: `A_{i+1..j}` against `B_{i..j−1}`.
fn xx_matrix(profiles: &Profiles, i: usize, j: usize) -> PfaffianMatrix {
    let r = j - i;
    let a: Vec<usize> = (i + 1..=j).collect();
    let b: Vec<usize> = (i..j).collect();
    let sign = if (r * (r + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    blocked(&a, &b, profiles, sign)
}

/// String for `σʸ_iσʸ_j`: `A_{i..j−1}` against `B_{i+1..j}`, including the
/// overall minus sign.
fn yy_matrix(profiles: &Profiles, i: usize, j: usize) -> PfaffianMatrix {
    let r = j - i;
    let a: Vec<usize> = (i..j).collect();
    let b: Vec<usize> = (i + 1..=j).collect();
    let sign = if ((r - 1) * (r.saturating_sub(2)) / 2) % 2 == 0 { -1.0 } else { 1.0 };
    blocked(&a, &b, profiles, sign)
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::Consistency(format!(
            "{what} has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

fn correlator_from(profiles: &Profiles, i: usize, j: usize, axis: Axis) -> Result<f64> {
    match axis {
        Axis::Z => {
            let cii = profiles.c(i, i);
            let cij = profiles.c(i, j);
            Ok(1.0 - 4.0 * cii + 4.0 * cii * cii + 4.0 * profiles.f(i, j).norm_sqr()
                - 4.0 * cij * cij)
        }
        Axis::X => real_part(xx_matrix(profiles, i, j).value()?, "xx correlator"),
        Axis::Y => real_part(yy_matrix(profiles, i, j).value()?, "yy correlator"),
    }
}

/// `⟨σᵃ_i σᵃ_j⟩` after `n` periods, sites counted from 0, `i < j`.
pub fn spin_correlator(params: &IsingParams, n: u64, i: usize, j: usize, axis: Axis) -> Result<f64> {
    if !(i < j && j < params.n_spins()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 ≤ i < j < N, got i = {i}, j = {j}"
        )));
    }
    correlator_from(&Profiles::new(params, n), i, j, axis)
}

/// The xx Wick matrix, exposed for checks of `Pf² = det`.
pub fn pfaffian_matrix(params: &IsingParams, n: u64, i: usize, j: usize, axis: Axis) -> Result<PfaffianMatrix> {
    if !(i < j && j < params.n_spins()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 ≤ i < j < N, got i = {i}, j = {j}"
        )));
    }
    let p = Profiles::new(params, n);
    match axis {
        Axis::X => Ok(xx_matrix(&p, i, j)),
        Axis::Y => Ok(yy_matrix(&p, i, j)),
        Axis::Z => Err(Error::InvalidParameter(
            "the zz correlator has a closed form".into(),
        )),
    }
}

/// `⟨J²⟩ = 3N/4 + ½ Σ_{i<j} (xx + yy + zz)`, using translation invariance.
pub fn jsq_oracle(params: &IsingParams, n: u64) -> Result<f64> {
    let size = params.n_spins();
    let p = Profiles::new(params, n);
    let per_distance = exec::map_indices(Exec::default(), size - 1, |k| {
        let r = k + 1;
        let mut total = 0.0;
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            total += correlator_from(&p, 0, r, axis)?;
        }
        Ok::<_, Error>((size - r) as f64 * total)
    });
    let mut pairs = 0.0;
    for x in per_distance {
        pairs += x?;
    }
    Ok(0.75 * size as f64 + 0.5 * pairs)
}

/// Eigenvalues of `Π = [[I − C, F], [F†, C]]` over the first `l` sites.
pub fn correlation_spectrum(params: &IsingParams, n: u64, l: usize) -> Result<Vec<f64>> {
    let p = Profiles::new(params, n);
    let pi = Mat::from_fn(2 * l, 2 * l, |x, y| match (x < l, y < l) {
        (true, true) => {
            let id = if x == y { 1.0 } else { 0.0 };
            Complex64::new(id - p.c(x, y), 0.0)
        }
        (true, false) => p.f(x, y - l),
        (false, true) => p.f(y, x - l).conj(),
        (false, false) => Complex64::new(p.c(x - l, y - l), 0.0),
    });
    linalg::hermitian_eigenvalues(pi.as_ref())
}

/// Entanglement entropy in bits of the first `l` sites.
pub fn entropy_oracle(params: &IsingParams, n: u64, l: usize) -> Result<f64> {
    if l == 0 || l > params.n_spins() / 2 {
        return Err(Error::InvalidParameter(format!(
            "subsystem size must lie in 1..={}, got {l}",
            params.n_spins() / 2
        )));
    }
    let mu = correlation_spectrum(params, n, l)?;
    if let Some(bad) = mu
        .iter()
        .find(|&&m| !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&m))
    {
        return Err(Error::Consistency(format!(
            "correlation-matrix eigenvalue {bad} outside [0, 1]"
        )));
    }
    Ok(entropy_bits(mu.into_iter().map(|m| m.clamp(0.0, 1.0))))
}

/// Linear fit of window-averaged subsystem entropies.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Extrapolation {
    pub sizes: Vec<usize>,
    pub mean_entropy: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub target_size: usize,
    /// Fitted entropy at `l = target_size`.
    pub value: f64,
    /// Largest fit residual exceeds 5 % of the data range.
    pub poor_fit: bool,
}

/// Steps `first, first + stride, …, last` over which entropies are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepWindow {
    pub first: u64,
    pub last: u64,
    pub stride: u64,
}

impl StepWindow {
    fn steps(&self) -> impl Iterator<Item = u64> {
        (self.first..=self.last).step_by(self.stride.max(1) as usize)
    }
}

/// Fits `S(l) = slope·l + intercept` to time-averaged entropies and
/// evaluates it at `l = target_size`.
pub fn extrapolate_half_chain(
    params: &IsingParams,
    sizes: &[usize],
    window: StepWindow,
    target_size: usize,
) -> Result<Extrapolation> {
    if sizes.len() < 3 {
        return Err(Error::InvalidParameter(
            "the entropy fit needs at least three subsystem sizes".into(),
        ));
    }
    if window.first > window.last || window.stride == 0 {
        return Err(Error::InvalidParameter("empty averaging window".into()));
    }
    let steps: Vec<u64> = window.steps().collect();
    let mut mean_entropy = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let values = exec::map_indices(Exec::default(), steps.len(), |k| {
            entropy_oracle(params, steps[k], l)
        });
        let mut sum = 0.0;
        for v in values {
            sum += v?;
        }
        mean_entropy.push(sum / steps.len() as f64);
    }
    let xs: Vec<f64> = sizes.iter().map(|&l| l as f64).collect();
    let (slope, intercept) = least_squares_line(&xs, &mean_entropy)?;
    let lo = mean_entropy.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mean_entropy.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let worst = xs
        .iter()
        .zip(&mean_entropy)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    let poor_fit = worst > 0.05 * (hi - lo);
    if poor_fit {
        log::warn!("entropy fit residual {worst:.3e} exceeds 5% of the data range");
    }
    Ok(Extrapolation {
        sizes: sizes.to_vec(),
        mean_entropy,
        slope,
        intercept,
        target_size,
        value: slope * target_size as f64 + intercept,
        poor_fit,
    })
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "fit abscissae must not all coincide".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
