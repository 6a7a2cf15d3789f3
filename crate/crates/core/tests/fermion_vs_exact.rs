mod common;

use std::f64::consts::PI;

use floqlab::fermion::{self, IsingParams};
use floqlab::observables::von_neumann_entropy;
use floqlab::spin::{all_up, expval_jsq, Axis};

fn ising(n: usize) -> IsingParams {
    IsingParams::new(n, 6.0, 4.0 * PI / 11.0, 1.0).unwrap()
}

#[test]
fn two_point_functions_match_exact_evolution() {
    for (n, k, p, tau) in [(8, 6.0, 4.0 * PI / 11.0, 1.0), (6, 2.1, 0.8, 1.7)] {
        let params = IsingParams::new(n, k, p, tau).unwrap();
        let states = common::trajectory(&params.to_system().unwrap(), all_up(n), 5);
        let cf = fermion::correlators(&params, 5, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let (c, f) = common::fermion_two_point(&states[5], i, j);
                assert!((c - cf.c[(i, j)]).norm() < 1e-10, "C[{i},{j}] {c} vs {}", cf.c[(i, j)]);
                assert!((f - cf.f[(i, j)]).norm() < 1e-10, "F[{i},{j}] {f} vs {}", cf.f[(i, j)]);
            }
        }
    }
}

#[test]
fn spin_correlators_jsq_and_entropy_match() {
    for n in [4, 6, 8] {
        let params = ising(n);
        let states = common::trajectory(&params.to_system().unwrap(), all_up(n), 20);
        for (step, psi) in states.iter().enumerate() {
            let step = step as u64;
            for i in 0..n {
                for j in i + 1..n {
                    for axis in [Axis::X, Axis::Y, Axis::Z] {
                        let exact = common::pauli_pair(psi, i, j, axis);
                        let oracle = fermion::spin_correlator(&params, step, i, j, axis).unwrap();
                        assert!(
                            (exact - oracle).abs() < 1e-7,
                            "N={n} n={step} ({i},{j}) {axis:?}: {exact} vs {oracle}"
                        );
                    }
                }
            }
            let jsq = fermion::jsq_oracle(&params, step).unwrap();
            assert!((jsq - expval_jsq(psi)).abs() < 1e-7, "J² at N={n} n={step}");
            for l in 1..=n / 2 {
                let exact = von_neumann_entropy(psi, (1u64 << l) - 1).unwrap();
                let oracle = fermion::entropy_oracle(&params, step, l).unwrap();
                assert!((exact - oracle).abs() < 1e-7, "S_{l} at N={n} n={step}: {exact} vs {oracle}");
            }
        }
    }
}
