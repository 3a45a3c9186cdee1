//! Property-based invariants on small random problems.

use proptest::prelude::*;

use weakkam::action::{
    build_kernel, peierls_barrier, triangle_violation, verify_subsolution, ActionKernel,
    MinPlusMatrix,
};
use weakkam::discounted::solve_discounted;
use weakkam::harness::config::presets;
use weakkam::harness::ExperimentConfig;
use weakkam::mather::{
    closedness_residual, compute_u0, default_eps_c, min_mean_cycle, solve_mather_lp, SimplexOptions,
};
use weakkam::models::{
    legendre_transform, uniform_grid, CosineMode, LagrangianSpec, Potential, TorusGrid,
    VelocityStencil,
};

#[derive(Debug, Clone)]
struct Problem {
    n: usize,
    radius: usize,
    tau: f64,
    amplitude: f64,
    phase: f64,
    drift: Option<f64>,
}

fn problem() -> impl Strategy<Value = Problem> {
    (
        5usize..12,
        1usize..3,
        0.1f64..0.5,
        prop_oneof![-1.5f64..-0.25, 0.25f64..1.5],
        0.0f64..6.3,
        prop::option::of(-1.0f64..1.0),
    )
        .prop_filter("stencil must not wrap", |(n, k, ..)| 2 * k < *n)
        .prop_map(|(n, radius, tau, amplitude, phase, drift)| Problem {
            n,
            radius,
            tau,
            amplitude,
            phase,
            drift,
        })
}

/// Window long enough to outlast the transient on these small graphs; the
/// default `[4n, 8n]` window can be too short when cycle means are close.
const WINDOW: (usize, usize) = (1024, 2048);

/// Kernel shifted by the critical value of its minimum mean cycle.
fn critical_kernel(p: &Problem) -> ActionKernel {
    let grid = TorusGrid::new(1, &[p.n]).unwrap();
    let potential = Potential::Cosine {
        modes: vec![CosineMode {
            amplitude: p.amplitude,
            wavenumber: [1, 0],
            phase: p.phase,
        }],
    };
    let spec = match p.drift {
        Some(d) => LagrangianSpec::transport(1, [d, 0.0], potential),
        None => LagrangianSpec::mechanical(1, potential),
    };
    let stencil = VelocityStencil::new(&grid, p.tau, p.radius).unwrap();
    let k = build_kernel(&grid, &spec, &stencil, 0.0).unwrap();
    let c = min_mean_cycle(&k).critical_value();
    k.with_shift(c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn legendre_conjugate_satisfies_fenchel(a in 0.2f64..3.0, b in -1.0f64..1.0, v in -2.0f64..2.0) {
        let p = uniform_grid(-20.0, 20.0, 4001);
        let h: Vec<f64> = p.iter().map(|&q| 0.5 * a * q * q + b * q).collect();
        let vs = [v - 0.1, v, v + 0.1];
        let l = legendre_transform(&h, &p, &vs).unwrap();
        for (&q, &hq) in p.iter().zip(&h) {
            prop_assert!(l.values[1] + hq >= q * v - 1e-12);
        }
        // Convex in v.
        prop_assert!(l.values[0] + l.values[2] >= 2.0 * l.values[1] - 1e-12);
        let exact = (v - b) * (v - b) / (2.0 * a);
        prop_assert!((l.values[1] - exact).abs() <= 1e-2 * (1.0 + exact));
    }

    #[test]
    fn minplus_product_is_associative(
        n in 2usize..6,
        seed in prop::collection::vec(-20i32..20, 108),
    ) {
        // Integer-valued entries keep the sums exact.
        let m = |off: usize| {
            MinPlusMatrix::new(n, (0..n * n).map(|i| seed[off + i] as f64).collect())
        };
        let (a, b, c) = (m(0), m(36), m(72));
        prop_assert_eq!(a.product(&b).product(&c), a.product(&b.product(&c)));
    }

    #[test]
    fn grid_shift_inverts_displacement(n in 3usize..40, m in 3usize..40, a in 0usize..1600, b in 0usize..1600) {
        let g = TorusGrid::new(2, &[n, m]).unwrap();
        let (a, b) = (a % g.len(), b % g.len());
        prop_assert_eq!(g.shift(a, g.index_displacement(a, b)), b);
    }

    #[test]
    fn barrier_at_critical_shift_is_a_pseudometric(p in problem()) {
        let k = critical_kernel(&p);
        let h = peierls_barrier(&k, WINDOW.0, WINDOW.1, 1e-9).unwrap();
        prop_assert!(h.stable, "residual {}", h.residual);
        prop_assert!(triangle_violation(&h) <= 1e-9);
        prop_assert!(h.diagonal().iter().all(|&d| d >= -1e-9));
        prop_assert!(h.diagonal().iter().any(|&d| d.abs() <= 1e-9));
        // Every row is a fixed point of one Lax–Oleinik step.
        for y in 0..k.nodes() {
            for x in 0..k.nodes() {
                let best = k
                    .in_edges(x)
                    .iter()
                    .map(|&e| h.get(y, k.tail(e as usize)) + k.cost(e as usize))
                    .fold(f64::INFINITY, f64::min);
                prop_assert!((best - h.get(y, x)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn mather_lp_matches_mean_cycle(p in problem()) {
        let k = critical_kernel(&p);
        let lp = solve_mather_lp(&k, &SimplexOptions::default()).unwrap();
        let mean = min_mean_cycle(&k).mean;
        prop_assert!((lp.value - mean).abs() <= 1e-8, "LP {} vs cycle {}", lp.value, mean);
        prop_assert!(closedness_residual(&lp.measure, &k) <= 1e-9);
        prop_assert!((lp.measure.mass() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn discounted_values_grow_as_discount_vanishes(p in problem()) {
        // Requires constants to be critical subsolutions, which holds for the
        // mechanical family (L(x, v) + c >= max V − V(x) >= 0).
        let k = critical_kernel(&Problem { drift: None, ..p });
        prop_assert!(k.min_cost() >= 0.0);
        let tol = 1e-10;
        let mut prev: Option<Vec<f64>> = None;
        for lambda in [1.0, 0.5, 0.25, 0.125] {
            let s = solve_discounted(&k, lambda, tol, 10_000_000).unwrap();
            prop_assert!(s.bellman_residual(&k) <= tol);
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(s.values.values()) {
                    prop_assert!(*b >= a - 2.0 * tol);
                }
            }
            prev = Some(s.values.into_values());
        }
    }

    #[test]
    fn limit_function_is_a_constrained_subsolution(p in problem()) {
        let k = critical_kernel(&p);
        let h = peierls_barrier(&k, WINDOW.0, WINDOW.1, 1e-9).unwrap();
        prop_assume!(h.stable);
        let c = k.shift();
        let opts = SimplexOptions::default();
        let targets: Vec<usize> = (0..k.nodes()).collect();
        let r = compute_u0(&h, &k, c, default_eps_c(c, c), &targets, &opts).unwrap();
        let u0 = r.to_grid_function().unwrap();
        prop_assert!(verify_subsolution(&u0, &k) <= 1e-8);
        let lp = solve_mather_lp(&k, &opts).unwrap();
        prop_assert!(lp.measure.integrate(&u0) <= 1e-8);
        // Some Mather measure reaches the constraint, so u0 + δ violates it.
        prop_assert!(lp.measure.integrate(&u0.map(|v| v + 0.01)) > 1e-6);
    }

    #[test]
    fn config_round_trips(
        n in 3usize..500,
        first in 0.05f64..2.0,
        ratios in prop::collection::vec(0.1f64..0.9, 2..8),
        stride in 1usize..5,
    ) {
        let mut cfg = presets::pendulum(n);
        let mut l = first;
        cfg.schedule.lambdas = ratios.iter().map(|r| { l *= r; l }).collect();
        cfg.schedule.target_stride = stride;
        cfg.validate().unwrap();
        let json = cfg.to_json().unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json().unwrap(), json);
    }
}
