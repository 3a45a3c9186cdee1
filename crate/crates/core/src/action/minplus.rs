//! Dense (min, +) matrix algebra over `ℝ ∪ {+∞}`.
//!
//! Products run row-parallel; each output entry is a minimum over exactly the
//! same set of sums regardless of the worker count, so results are
//! bit-identical across thread pools.

use rayon::prelude::*;

use super::kernel::ActionKernel;

#[derive(Clone, Debug, PartialEq)]
pub struct MinPlusMatrix {
    n: usize,
    data: Vec<f64>,
}

impl MinPlusMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn infinite(n: usize) -> Self {
        Self {
            n,
            data: vec![f64::INFINITY; n * n],
        }
    }

    /// Tropical identity: 0 on the diagonal, `+∞` elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::infinite(n);
        for i in 0..n {
            m.data[i * n + i] = 0.0;
        }
        m
    }

    /// The one-step kernel as a dense matrix; non-edges are `+∞`.
    pub fn from_kernel(kernel: &ActionKernel) -> Self {
        let n = kernel.nodes();
        let mut m = Self::infinite(n);
        for e in 0..kernel.edges() {
            let (i, j) = (kernel.tail(e), kernel.head(e));
            let c = kernel.cost(e);
            if c < m.data[i * n + j] {
                m.data[i * n + j] = c;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `(self ⊗ other)(i,j) = min_k self(i,k) + other(k,j)`.
    pub fn product(&self, other: &MinPlusMatrix) -> MinPlusMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![f64::INFINITY; n * n];
        out.par_chunks_mut(n)
            .with_min_len(8)
            .enumerate()
            .for_each(|(i, row)| {
                let a_row = &self.data[i * n..(i + 1) * n];
                for (k, &a) in a_row.iter().enumerate() {
                    if a == f64::INFINITY {
                        continue;
                    }
                    let b_row = &other.data[k * n..(k + 1) * n];
                    for (o, &b) in row.iter_mut().zip(b_row) {
                        let s = a + b;
                        if s < *o {
                            *o = s;
                        }
                    }
                }
            });
        MinPlusMatrix { n, data: out }
    }

    /// `self ⊗ A` for the sparse kernel `A`.
    pub fn product_kernel(&self, kernel: &ActionKernel) -> MinPlusMatrix {
        let n = self.n;
        assert_eq!(n, kernel.nodes());
        let d = kernel.degree();
        let mut out = vec![f64::INFINITY; n * n];
        out.par_chunks_mut(n)
            .with_min_len(8)
            .enumerate()
            .for_each(|(i, row)| {
                let a_row = &self.data[i * n..(i + 1) * n];
                for (z, &a) in a_row.iter().enumerate() {
                    if a == f64::INFINITY {
                        continue;
                    }
                    for k in 0..d {
                        let e = z * d + k;
                        let s = a + kernel.cost(e);
                        let o = &mut row[kernel.head(e)];
                        if s < *o {
                            *o = s;
                        }
                    }
                }
            });
        MinPlusMatrix { n, data: out }
    }

    /// Entry-wise minimum (tropical sum).
    pub fn min_with(&self, other: &MinPlusMatrix) -> MinPlusMatrix {
        assert_eq!(self.n, other.n);
        MinPlusMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.min(*b))
                .collect(),
        }
    }

    /// `self^p` by binary powering (`p >= 1`); bits are consumed from the least
    /// significant end and the accumulated result is always the left factor.
    pub fn power(&self, p: usize) -> MinPlusMatrix {
        assert!(p >= 1, "min-plus power needs p >= 1");
        let mut base = self.clone();
        let mut acc: Option<MinPlusMatrix> = None;
        let mut e = p;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.product(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.product(&base);
        }
        acc.expect("p >= 1")
    }

    /// `self^p` with `self^0` the tropical identity.
    pub fn power_or_identity(&self, p: usize) -> MinPlusMatrix {
        if p == 0 {
            Self::identity(self.n)
        } else {
            self.power(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MinPlusMatrix {
        let inf = f64::INFINITY;
        MinPlusMatrix::new(3, vec![0.0, 1.0, inf, inf, 0.5, 2.0, 0.25, inf, 1.0])
    }

    #[test]
    fn identity_is_neutral() {
        let a = small();
        let id = MinPlusMatrix::identity(3);
        assert_eq!(a.product(&id), a);
        assert_eq!(id.product(&a), a);
    }

    #[test]
    fn power_matches_repeated_products() {
        let a = small();
        let mut acc = a.clone();
        for p in 2..=9 {
            acc = acc.product(&a);
            let pw = a.power(p);
            for (x, y) in pw.data().iter().zip(acc.data()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_step_path_value() {
        let a = small();
        let a2 = a.power(2);
        // 0 -> 1 -> 2 : 1 + 2
        assert_eq!(a2.get(0, 2), 3.0);
        // 2 -> 0 -> 1 : 0.25 + 1
        assert_eq!(a2.get(2, 1), 1.25);
    }
}
