//! Exhaustive-enumeration oracles on tiny graphs, independent of the
//! min-plus, value-iteration and Karp code paths.

use weakkam::action::{build_kernel, minplus_power, ActionKernel};
use weakkam::discounted::discounted_sweeps;
use weakkam::mather::min_mean_cycle;
use weakkam::models::{
    CosineMode, GridFunction, LagrangianSpec, Potential, TorusGrid, VelocityStencil,
};

mod common;

use common::{brute_action, brute_discounted, brute_min_mean_cycle};

const EXACT: f64 = 1e-12;

/// Equal infinities (unreachable pairs) match; finite values within `EXACT`.
fn agrees(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= EXACT
}

fn asymmetric_spec(dim: usize) -> LagrangianSpec {
    let potential = Potential::Cosine {
        modes: vec![
            CosineMode {
                amplitude: 1.0,
                wavenumber: [1, 0],
                phase: 0.3,
            },
            CosineMode {
                amplitude: 0.4,
                wavenumber: [2, 1],
                phase: 1.1,
            },
        ],
    };
    LagrangianSpec::transport(dim, [0.7, -0.2], potential)
}

fn kernel_1d() -> ActionKernel {
    let grid = TorusGrid::new(1, &[8]).unwrap();
    let stencil = VelocityStencil::new(&grid, 0.2, 2).unwrap();
    build_kernel(&grid, &asymmetric_spec(1), &stencil, 0.35).unwrap()
}

fn kernel_2d() -> ActionKernel {
    let grid = TorusGrid::new(2, &[4, 3]).unwrap();
    let stencil = VelocityStencil::new(&grid, 0.3, 1).unwrap();
    build_kernel(&grid, &asymmetric_spec(2), &stencil, -0.1).unwrap()
}

fn check_action(kernel: &ActionKernel, max_steps: usize) {
    for steps in 1..=max_steps {
        let brute = brute_action(kernel, steps);
        let fast = minplus_power(kernel, steps).unwrap();
        for (i, (a, b)) in brute.iter().zip(fast.values()).enumerate() {
            assert!(
                agrees(*a, *b),
                "steps {steps}, entry {i}: enumeration {a} vs min-plus {b}"
            );
        }
    }
}

#[test]
fn minplus_powers_match_path_enumeration_1d() {
    check_action(&kernel_1d(), 6);
}

#[test]
fn minplus_powers_match_path_enumeration_2d() {
    check_action(&kernel_2d(), 4);
}

#[test]
fn truncated_discounted_values_match_enumeration() {
    let kernel = kernel_1d();
    let init: Vec<f64> = (0..kernel.nodes())
        .map(|i| (i as f64 * 0.37).sin())
        .collect();
    for &lambda in &[0.5, 0.03] {
        for steps in 1..=6 {
            let brute = brute_discounted(&kernel, lambda, &init, steps);
            let fast = discounted_sweeps(&kernel, lambda, &GridFunction::new(init.clone()), steps)
                .unwrap();
            for (x, (a, b)) in brute.iter().zip(fast.values()).enumerate() {
                assert!(
                    agrees(*a, *b),
                    "λ {lambda}, steps {steps}, node {x}: enumeration {a} vs sweeps {b}"
                );
            }
        }
    }
}

#[test]
fn karp_matches_simple_cycle_enumeration() {
    for kernel in [kernel_1d(), kernel_2d()] {
        let brute = brute_min_mean_cycle(&kernel);
        let karp = min_mean_cycle(&kernel);
        assert!(
            agrees(karp.mean, brute),
            "Karp {} vs enumeration {brute}",
            karp.mean
        );
        assert!((karp.karp_value - brute).abs() <= 1e-10);
    }
}

#[test]
fn pendulum_oracle_matches_closed_form() {
    // ∫₀ˣ 2 sin(πs) ds = (2/π)(1 − cos πx) on the shorter arc.
    let pi = std::f64::consts::PI;
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        let arc = x.min(1.0 - x);
        let exact = 2.0 / pi * (1.0 - (pi * arc).cos());
        assert!((common::pendulum_u0(x) - exact).abs() < 1e-10, "x = {x}");
    }
}
