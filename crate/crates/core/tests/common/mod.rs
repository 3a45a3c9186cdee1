//! Brute-force and quadrature oracles shared by the integration tests.
#![allow(dead_code)]

use weakkam::action::ActionKernel;
use weakkam::discounted::{discount_factor, step_weight};

/// Out-edges of `x` as edge indices.
pub fn out_edges(kernel: &ActionKernel, x: usize) -> impl Iterator<Item = usize> + '_ {
    (0..kernel.degree()).map(move |k| kernel.edge(x, k))
}

/// Every `steps`-edge path from `start`, visited with its edge list.
pub fn for_each_path(
    kernel: &ActionKernel,
    start: usize,
    steps: usize,
    visit: &mut dyn FnMut(&[usize]),
) {
    fn rec(
        k: &ActionKernel,
        at: usize,
        left: usize,
        path: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if left == 0 {
            visit(path);
            return;
        }
        for e in out_edges(k, at) {
            path.push(e);
            rec(k, k.head(e), left - 1, path, visit);
            path.pop();
        }
    }
    rec(kernel, start, steps, &mut Vec::new(), visit);
}

pub fn brute_action(kernel: &ActionKernel, steps: usize) -> Vec<f64> {
    let n = kernel.nodes();
    let mut h = vec![f64::INFINITY; n * n];
    for y in 0..n {
        for_each_path(kernel, y, steps, &mut |p| {
            let x = kernel.head(*p.last().unwrap());
            let cost: f64 = p.iter().map(|&e| kernel.cost(e)).sum();
            h[y * n + x] = h[y * n + x].min(cost);
        });
    }
    h
}

/// Discounted cost of the best `steps`-edge path ending at each node, with a
/// terminal value `init` at its start: edges nearer the end are discounted less.
pub fn brute_discounted(
    kernel: &ActionKernel,
    lambda: f64,
    init: &[f64],
    steps: usize,
) -> Vec<f64> {
    let beta = discount_factor(lambda, kernel.tau());
    let theta = step_weight(lambda, kernel.tau());
    let mut best = vec![f64::INFINITY; kernel.nodes()];
    for (y, &start) in init.iter().enumerate() {
        for_each_path(kernel, y, steps, &mut |p| {
            let x = kernel.head(*p.last().unwrap());
            let mut value = beta.powi(steps as i32) * start;
            for (j, &e) in p.iter().enumerate() {
                let age = (steps - 1 - j) as i32;
                value += beta.powi(age) * theta * kernel.cost(e);
            }
            best[x] = best[x].min(value);
        });
    }
    best
}

/// Minimum mean of `L` over all simple cycles, by depth-first enumeration from
/// each cycle's smallest node.
pub fn brute_min_mean_cycle(kernel: &ActionKernel) -> f64 {
    fn rec(
        k: &ActionKernel,
        root: usize,
        at: usize,
        on_path: &mut Vec<bool>,
        sum: f64,
        len: usize,
        best: &mut f64,
    ) {
        for e in out_edges(k, at) {
            let next = k.head(e);
            let s = sum + k.lagrangian(e);
            if next == root {
                *best = best.min(s / (len + 1) as f64);
            } else if next > root && !on_path[next] {
                on_path[next] = true;
                rec(k, root, next, on_path, s, len + 1, best);
                on_path[next] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut on_path = vec![false; kernel.nodes()];
    for root in 0..kernel.nodes() {
        on_path[root] = true;
        rec(kernel, root, root, &mut on_path, 0.0, 0, &mut best);
        on_path[root] = false;
    }
    best
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Continuum limit function of the pendulum `H = ½p² + cos 2πx` at the
/// critical level `c = 1`: the Maupertuis distance from the Aubry point `x = 0`
/// for the metric `√(2(1 − cos 2πs))`, minimized over both arcs.
pub fn pendulum_u0(x: f64) -> f64 {
    let speed = |s: f64| {
        (2.0 * (1.0 - (2.0 * std::f64::consts::PI * s).cos()))
            .max(0.0)
            .sqrt()
    };
    let x = x.rem_euclid(1.0);
    let forward = adaptive_simpson(&speed, 0.0, x, 1e-12);
    let backward = adaptive_simpson(&speed, x, 1.0, 1e-12);
    forward.min(backward)
}
