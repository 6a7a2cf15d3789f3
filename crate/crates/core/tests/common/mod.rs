//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use floqlab::floquet::{build_phase_table, step_in_place};
use floqlab::spin::{Axis, StateVector};
use floqlab::{Complex64, Exec};

/// `⟨σᵃ_i σᵃ_j⟩` by direct Pauli action, `i ≠ j`.
pub fn pauli_pair(state: &StateVector, i: usize, j: usize, axis: Axis) -> f64 {
    let amps = state.amplitudes();
    let flip = (1usize << i) | (1usize << j);
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, &a) in amps.iter().enumerate() {
        match axis {
            Axis::Z => {
                let zi = if s >> i & 1 == 0 { 1.0 } else { -1.0 };
                let zj = if s >> j & 1 == 0 { 1.0 } else { -1.0 };
                acc += a.norm_sqr() * zi * zj;
            }
            Axis::X => acc += amps[s ^ flip].conj() * a,
            Axis::Y => {
                // σʸ|0⟩ = i|1⟩, σʸ|1⟩ = −i|0⟩
                let y = |b: usize| {
                    if s >> b & 1 == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    }
                };
                acc += amps[s ^ flip].conj() * y(i) * y(j) * a;
            }
        }
    }
    acc.re
}

fn jw_sign(s: usize, j: usize) -> f64 {
    if (s & ((1 << j) - 1)).count_ones() % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}

/// `c_j†` with the string over sites below `j`.
pub fn create(amps: &[Complex64], j: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (s, &a) in amps.iter().enumerate() {
        if s >> j & 1 == 0 {
            out[s | 1 << j] += a * jw_sign(s, j);
        }
    }
    out
}

/// `c_j`, the adjoint of [`create`].
pub fn annihilate(amps: &[Complex64], j: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (s, &a) in amps.iter().enumerate() {
        if s >> j & 1 == 1 {
            out[s ^ 1 << j] += a * jw_sign(s ^ 1 << j, j);
        }
    }
    out
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨c_i†c_j⟩` and `⟨c_i†c_j†⟩`.
pub fn fermion_two_point(state: &StateVector, i: usize, j: usize) -> (Complex64, Complex64) {
    let amps = state.amplitudes();
    // ⟨ψ|c_i† X|ψ⟩ = ⟨c_i ψ|X ψ⟩
    let ci = annihilate(amps, i);
    let c = inner(&ci, &annihilate(amps, j));
    let f = inner(&ci, &create(amps, j));
    (c, f)
}

/// States after `0..=steps` periods.
pub fn trajectory(params: &floqlab::spin::SystemParams, initial: StateVector, steps: u64) -> Vec<StateVector> {
    let table = build_phase_table(params).unwrap();
    let mut out = vec![initial.clone()];
    let mut psi = initial;
    for _ in 0..steps {
        step_in_place(Exec::Sequential, psi.amplitudes_mut(), &table).unwrap();
        out.push(psi.clone());
    }
    out
}
