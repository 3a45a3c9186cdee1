//! Revised primal simplex for `min cᵀx  s.t.  A x = b, x >= 0` with sparse
//! columns and a dense basis inverse.
//!
//! Pricing is Dantzig's rule with lowest-index ties; after a run of
//! degenerate pivots it falls back to Bland's rule until progress resumes.
//! The leaving row is chosen by the minimum ratio with ties broken by the
//! smallest basic variable index, so every run is deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SparseColumn = Vec<(u32, f64)>;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub rows: usize,
    pub columns: Vec<SparseColumn>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(rhs: Vec<f64>) -> Self {
        Self {
            rows: rhs.len(),
            columns: Vec::new(),
            cost: Vec::new(),
            rhs,
        }
    }

    pub fn add_column(&mut self, column: SparseColumn, cost: f64) -> usize {
        debug_assert!(column.iter().all(|&(r, _)| (r as usize) < self.rows));
        self.columns.push(column);
        self.cost.push(cost);
        self.columns.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// Largest `|A x − b|` and most negative entry of `x`.
    pub fn infeasibility(&self, x: &[f64]) -> f64 {
        let mut r: Vec<f64> = self.rhs.iter().map(|b| -b).collect();
        for (j, col) in self.columns.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, a) in col {
                    r[i as usize] += a * x[j];
                }
            }
        }
        let neg = x.iter().fold(0.0f64, |m, v| m.max(-v));
        r.iter().fold(neg, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iter: usize,
    pub refactor_every: usize,
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-9,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-11,
            max_iter: 1_000_000,
            refactor_every: 100,
            bland_after: 1000,
        }
    }
}

/// Basic column indices with the dense row-major inverse of the basis matrix.
#[derive(Clone, Debug)]
pub struct Basis {
    pub indices: Vec<usize>,
    inverse: Vec<f64>,
}

impl Basis {
    /// Inverts the basis matrix by Gauss–Jordan elimination with partial pivoting.
    pub fn factorize(lp: &LinearProgram, indices: Vec<usize>) -> Result<Self> {
        let cols: Vec<&SparseColumn> = indices.iter().map(|&j| &lp.columns[j]).collect();
        let inverse = invert(lp.rows, &cols)?;
        Ok(Self { indices, inverse })
    }

    /// Builds a basis from a known inverse (e.g. a bordered extension).
    pub fn from_parts(indices: Vec<usize>, inverse: Vec<f64>) -> Self {
        assert_eq!(inverse.len(), indices.len() * indices.len());
        Self { indices, inverse }
    }

    pub fn rows(&self) -> usize {
        self.indices.len()
    }

    pub fn inverse(&self) -> &[f64] {
        &self.inverse
    }

    /// `B⁻¹ v` for a dense vector.
    fn solve_dense(&self, v: &[f64]) -> Vec<f64> {
        let m = self.rows();
        (0..m)
            .map(|i| {
                let row = &self.inverse[i * m..(i + 1) * m];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `B⁻¹ a` for a sparse column.
    fn solve_sparse(&self, col: &SparseColumn) -> Vec<f64> {
        let m = self.rows();
        let mut out = vec![0.0; m];
        for &(r, a) in col {
            let r = r as usize;
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.inverse[i * m + r] * a;
            }
        }
        out
    }

    /// `yᵀ = c_Bᵀ B⁻¹`.
    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.rows();
        let mut y = vec![0.0; m];
        for (i, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                let row = &self.inverse[i * m..(i + 1) * m];
                for (yj, a) in y.iter_mut().zip(row) {
                    *yj += c * a;
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.rows();
        let inv_p = 1.0 / alpha[r];
        let (before, rest) = self.inverse.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for v in pivot_row.iter_mut() {
            *v *= inv_p;
        }
        for (i, row) in before
            .chunks_exact_mut(m)
            .chain(after.chunks_exact_mut(m))
            .enumerate()
        {
            let idx = if i < r { i } else { i + 1 };
            let f = alpha[idx];
            if f != 0.0 {
                for (a, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *a -= f * p;
                }
            }
        }
    }
}

fn invert(m: usize, cols: &[&SparseColumn]) -> Result<Vec<f64>> {
    if cols.len() != m {
        return Err(Error::SingularBasis);
    }
    // augmented [B | I], row-major, width 2m
    let w = 2 * m;
    let mut a = vec![0.0; m * w];
    for (j, col) in cols.iter().enumerate() {
        for &(r, v) in col.iter() {
            a[r as usize * w + j] += v;
        }
    }
    for i in 0..m {
        a[i * w + m + i] = 1.0;
    }
    for c in 0..m {
        let mut p = c;
        let mut best = a[c * w + c].abs();
        for r in c + 1..m {
            let v = a[r * w + c].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best < 1e-12 {
            return Err(Error::SingularBasis);
        }
        if p != c {
            for k in 0..w {
                a.swap(c * w + k, p * w + k);
            }
        }
        let inv = 1.0 / a[c * w + c];
        for k in 0..w {
            a[c * w + k] *= inv;
        }
        let pivot_row: Vec<f64> = a[c * w..(c + 1) * w].to_vec();
        for r in 0..m {
            if r != c {
                let f = a[r * w + c];
                if f != 0.0 {
                    for k in 0..w {
                        a[r * w + k] -= f * pivot_row[k];
                    }
                }
            }
        }
    }
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m..(i + 1) * m].copy_from_slice(&a[i * w + m..(i + 1) * w]);
    }
    Ok(inv)
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

/// Primal simplex from a feasible `basis` of `lp`.
pub fn solve_from(lp: &LinearProgram, basis: Basis, opts: &SimplexOptions) -> Result<LpSolution> {
    solve_from_with_cost(lp, &lp.cost, basis, opts)
}

/// As [`solve_from`], minimizing `cost` instead of `lp.cost`.
pub fn solve_from_with_cost(
    lp: &LinearProgram,
    cost: &[f64],
    basis: Basis,
    opts: &SimplexOptions,
) -> Result<LpSolution> {
    if cost.len() != lp.cols() {
        return Err(Error::InvalidArgument(
            "cost vector has the wrong length".into(),
        ));
    }
    let mut state = State::new(lp, basis, opts)?;
    state.run(lp, cost, &|_| true, usize::MAX)?;
    Ok(state.finish(lp, cost))
}

/// Two-phase primal simplex (artificial variables on every row).
pub fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    let n = lp.cols();
    let m = lp.rows;
    let mut ext = lp.clone();
    for i in 0..m {
        if ext.rhs[i] < 0.0 {
            ext.rhs[i] = -ext.rhs[i];
            for col in ext.columns.iter_mut() {
                for e in col.iter_mut() {
                    if e.0 as usize == i {
                        e.1 = -e.1;
                    }
                }
            }
        }
    }
    for i in 0..m {
        ext.add_column(vec![(i as u32, 1.0)], 0.0);
    }
    let phase1: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    let basis = Basis::from_parts((n..n + m).collect(), identity(m));
    let mut state = State::new(&ext, basis, opts)?;
    state.run(&ext, &phase1, &|_| true, usize::MAX)?;
    let infeas: f64 = state
        .basis
        .indices
        .iter()
        .zip(&state.xb)
        .filter(|(j, _)| **j >= n)
        .map(|(_, v)| *v)
        .sum();
    if infeas > opts.feasibility_tol * (1.0 + m as f64).sqrt() {
        return Err(Error::Infeasible(format!(
            "phase one ended with artificial mass {infeas:e}"
        )));
    }
    let iter1 = state.iterations;
    state.drive_out_artificials(&ext, n);
    state.run(&ext, &ext.cost, &|j| j < n, n)?;
    let mut sol = state.finish(&ext, &ext.cost);
    sol.x.truncate(n);
    sol.iterations = sol.iterations.max(iter1);
    // duals refer to the sign-normalized rows; restore the original signs
    for i in 0..m {
        if lp.rhs[i] < 0.0 {
            sol.duals[i] = -sol.duals[i];
        }
    }
    Ok(sol)
}

fn identity(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    v
}

struct State<'o> {
    basis: Basis,
    xb: Vec<f64>,
    is_basic: Vec<bool>,
    opts: &'o SimplexOptions,
    iterations: usize,
    since_refactor: usize,
}

impl<'o> State<'o> {
    fn new(lp: &LinearProgram, basis: Basis, opts: &'o SimplexOptions) -> Result<Self> {
        if basis.rows() != lp.rows {
            return Err(Error::InvalidArgument(format!(
                "basis has {} columns for {} rows",
                basis.rows(),
                lp.rows
            )));
        }
        let mut is_basic = vec![false; lp.cols()];
        for &j in &basis.indices {
            is_basic[j] = true;
        }
        let xb = basis.solve_dense(&lp.rhs);
        if xb.iter().any(|&v| v < -opts.feasibility_tol) {
            return Err(Error::Infeasible(
                "starting basis is not primal feasible".into(),
            ));
        }
        Ok(Self {
            basis,
            xb,
            is_basic,
            opts,
            iterations: 0,
            since_refactor: 0,
        })
    }

    fn refactor(&mut self, lp: &LinearProgram) -> Result<()> {
        self.basis = Basis::factorize(lp, std::mem::take(&mut self.basis.indices))?;
        self.xb = self.basis.solve_dense(&lp.rhs);
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -self.opts.feasibility_tol {
                *v = 0.0;
            }
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Runs pivots until optimal. Columns at or beyond `artificial` are held at
    /// zero once basic (they leave as soon as they would move).
    fn run(
        &mut self,
        lp: &LinearProgram,
        cost: &[f64],
        allowed: &dyn Fn(usize) -> bool,
        artificial: usize,
    ) -> Result<()> {
        let opts = self.opts;
        let scale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let opt_tol = opts.optimality_tol * scale;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= opts.max_iter {
                return Err(Error::IterationLimit(opts.max_iter));
            }
            if self.since_refactor >= opts.refactor_every {
                self.refactor(lp)?;
            }
            let cb: Vec<f64> = self.basis.indices.iter().map(|&j| cost[j]).collect();
            let y = self.basis.duals(&cb);
            let bland = degenerate_run > opts.bland_after;
            let mut entering = None;
            let mut best = -opt_tol;
            for (j, &cj) in cost.iter().enumerate() {
                if self.is_basic[j] || !allowed(j) {
                    continue;
                }
                let d = cj
                    - lp.columns[j]
                        .iter()
                        .map(|&(r, a)| y[r as usize] * a)
                        .sum::<f64>();
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let alpha = self.basis.solve_sparse(&lp.columns[j]);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                let held = self.basis.indices[i] >= artificial;
                let ratio = if a > opts.pivot_tol {
                    if held {
                        0.0
                    } else {
                        self.xb[i].max(0.0) / a
                    }
                } else if held && a < -opts.pivot_tol {
                    0.0
                } else {
                    continue;
                };
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 * (1.0 + br)
                            || (ratio <= br + 1e-12 * (1.0 + br)
                                && self.basis.indices[i] < self.basis.indices[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, step)) = leave else {
                return Err(Error::Unbounded);
            };
            for (i, v) in self.xb.iter_mut().enumerate() {
                if i != r {
                    *v -= step * alpha[i];
                    if *v < 0.0 && *v > -opts.feasibility_tol {
                        *v = 0.0;
                    }
                }
            }
            self.xb[r] = step;
            self.basis.pivot(r, &alpha);
            self.is_basic[self.basis.indices[r]] = false;
            self.is_basic[j] = true;
            self.basis.indices[r] = j;
            self.iterations += 1;
            self.since_refactor += 1;
            if step <= opts.feasibility_tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
    }

    /// Replaces zero-level basic artificials by structural columns where the
    /// row allows it; redundant rows keep their artificial (held at zero).
    fn drive_out_artificials(&mut self, lp: &LinearProgram, artificial: usize) {
        for r in 0..self.basis.rows() {
            if self.basis.indices[r] < artificial {
                continue;
            }
            let m = self.basis.rows();
            let row: Vec<f64> = self.basis.inverse[r * m..(r + 1) * m].to_vec();
            let candidate = (0..artificial).find(|&j| {
                !self.is_basic[j]
                    && lp.columns[j]
                        .iter()
                        .map(|&(i, a)| row[i as usize] * a)
                        .sum::<f64>()
                        .abs()
                        > 1e-7
            });
            if let Some(j) = candidate {
                let alpha = self.basis.solve_sparse(&lp.columns[j]);
                let step = self.xb[r] / alpha[r];
                for (i, v) in self.xb.iter_mut().enumerate() {
                    if i != r {
                        *v -= step * alpha[i];
                    }
                }
                self.xb[r] = step;
                self.basis.pivot(r, &alpha);
                self.is_basic[self.basis.indices[r]] = false;
                self.is_basic[j] = true;
                self.basis.indices[r] = j;
            }
        }
    }

    fn finish(self, lp: &LinearProgram, cost: &[f64]) -> LpSolution {
        let mut x = vec![0.0; lp.cols()];
        for (&j, &v) in self.basis.indices.iter().zip(&self.xb) {
            x[j] = v.max(0.0);
        }
        let objective = x.iter().zip(cost).map(|(a, b)| a * b).sum();
        let cb: Vec<f64> = self.basis.indices.iter().map(|&j| cost[j]).collect();
        let duals = self.basis.duals(&cb);
        LpSolution {
            x,
            objective,
            basis: self.basis,
            duals,
            iterations: self.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: &[&[f64]], b: &[f64], c: &[f64]) -> LinearProgram {
        let mut p = LinearProgram::new(b.to_vec());
        for j in 0..c.len() {
            let col = a
                .iter()
                .enumerate()
                .filter(|(_, row)| row[j] != 0.0)
                .map(|(i, row)| (i as u32, row[j]))
                .collect();
            p.add_column(col, c[j]);
        }
        p
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 (slacks s1..s3)
        let p = lp(
            &[
                &[1.0, 0.0, 1.0, 0.0, 0.0],
                &[0.0, 2.0, 0.0, 1.0, 0.0],
                &[3.0, 2.0, 0.0, 0.0, 1.0],
            ],
            &[4.0, 12.0, 18.0],
            &[-3.0, -5.0, 0.0, 0.0, 0.0],
        );
        let s = solve(&p, &SimplexOptions::default()).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        assert!(p.infeasibility(&s.x) < 1e-12);
    }

    #[test]
    fn negative_rhs_and_redundant_row() {
        // x + y = 2 ; -x - y = -2 (redundant) ; min x + 2y
        let p = lp(&[&[1.0, 1.0], &[-1.0, -1.0]], &[2.0, -2.0], &[1.0, 2.0]);
        let s = solve(&p, &SimplexOptions::default()).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert_eq!(s.x, vec![2.0, 0.0]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(&[&[1.0, 1.0]], &[-1.0], &[1.0, 1.0]);
        assert!(matches!(
            solve(&p, &SimplexOptions::default()),
            Err(Error::Infeasible(_))
        ));
        let p = lp(&[&[1.0, -1.0]], &[1.0], &[0.0, -1.0]);
        assert!(matches!(
            solve(&p, &SimplexOptions::default()),
            Err(Error::Unbounded)
        ));
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let p = lp(
            &[&[1.0, 1.0, 1.0, 0.0], &[1.0, -1.0, 0.0, 1.0]],
            &[4.0, 1.0],
            &[-1.0, -2.0, 0.0, 0.0],
        );
        let cold = solve(&p, &SimplexOptions::default()).unwrap();
        let basis = Basis::factorize(&p, vec![2, 3]).unwrap();
        let warm = solve_from(&p, basis, &SimplexOptions::default()).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-12);
        assert!((warm.objective + 8.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example: cycles under naive Dantzig without anti-cycling.
        let p = lp(
            &[
                &[0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                &[0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            &[0.0, 0.0, 1.0],
            &[-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
        );
        let opts = SimplexOptions {
            bland_after: 2,
            ..SimplexOptions::default()
        };
        let s = solve(&p, &opts).unwrap();
        assert!((s.objective + 0.05).abs() < 1e-12, "{}", s.objective);
    }
}
