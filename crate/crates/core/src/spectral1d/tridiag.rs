//! Symmetric tridiagonal eigensolver: Sturm-count bisection for eigenvalues,
//! inverse iteration for eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix, diagonal `d` and off-diagonal `e`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

/// Eigenvectors for eigenvalues closer than this fraction of `‖T‖` are
/// explicitly orthogonalized against each other.
const CLUSTER_GAP: f64 = 1e-6;
const MAX_INVERSE_STEPS: usize = 6;

/// An eigenvector with its residual.
type Eigenpair = (Vec<f64>, f64);

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if d.is_empty() || e.len() + 1 != d.len() {
            return Err(Error::InvalidInput(format!(
                "tridiagonal shape: {} diagonal and {} off-diagonal entries",
                d.len(),
                e.len()
            )));
        }
        Ok(Self { d, e })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Infinity norm, which bounds the spectral radius.
    pub fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.d[i].abs();
                if i > 0 {
                    s += self.e[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.e[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.e[i - 1].abs();
            }
            if i + 1 < n {
                r += self.e[i].abs();
            }
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> f64 {
        let emax = self.e.iter().map(|x| x * x).fold(1.0, f64::max);
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `T - x`).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut q = self.d[0] - x;
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        let mut count = usize::from(q < 0.0);
        for i in 1..self.len() {
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            count += usize::from(q < 0.0);
        }
        count
    }

    /// The `k` smallest eigenvalues, ascending, by bisection.
    pub fn eigenvalues(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.len());
        let (lo0, hi0) = self.gershgorin();
        let pad = f64::EPSILON * (lo0.abs() + hi0.abs()) + self.pivmin();
        let (lo0, hi0) = (lo0 - pad, hi0 + pad);
        (0..k)
            .into_par_iter()
            .map(|j| {
                let (mut lo, mut hi) = (lo0, hi0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if hi - lo <= 2.0 * f64::EPSILON * (lo.abs() + hi.abs()) + self.pivmin()
                        || mid <= lo
                        || mid >= hi
                    {
                        break;
                    }
                    if self.count_below(mid) > j {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    fn residual(&self, mu: f64, x: &[f64]) -> f64 {
        let n = self.len();
        let mut r2 = 0.0;
        for i in 0..n {
            let mut y = (self.d[i] - mu) * x[i];
            if i > 0 {
                y += self.e[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += self.e[i] * x[i + 1];
            }
            r2 += y * y;
        }
        r2.sqrt()
    }

    /// Orthonormal eigenvectors for the given (ascending) eigenvalues, plus the
    /// residual `‖T x - μ x‖` of each.
    pub fn eigenvectors(&self, values: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let n = self.len();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        // split into clusters of close eigenvalues; clusters are independent
        let mut clusters: Vec<std::ops::Range<usize>> = Vec::new();
        let mut start = 0;
        for j in 1..=values.len() {
            if j == values.len() || values[j] - values[j - 1] > CLUSTER_GAP * norm {
                clusters.push(start..j);
                start = j;
            }
        }
        let solved: Vec<Result<Vec<Eigenpair>>> = clusters
            .into_par_iter()
            .map(|range| {
                let mut done: Vec<Eigenpair> = Vec::with_capacity(range.len());
                for j in range {
                    let mu = values[j];
                    let lu = ShiftedLu::factor(self, mu, norm);
                    let mut rng = ChaCha8Rng::seed_from_u64(0x7a1d_0000 + j as u64);
                    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    normalize(&mut x);
                    let mut res = f64::INFINITY;
                    for _ in 0..MAX_INVERSE_STEPS {
                        lu.solve(&mut x);
                        for (v, _) in &done {
                            let c = dot(v, &x);
                            x.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
                        }
                        normalize(&mut x);
                        res = self.residual(mu, &x);
                        if res <= 4.0 * f64::EPSILON * norm * (n as f64).sqrt() {
                            break;
                        }
                    }
                    if !x.iter().all(|v| v.is_finite()) {
                        return Err(Error::Convergence { residual: f64::NAN });
                    }
                    done.push((x, res));
                }
                Ok(done)
            })
            .collect();
        let mut vectors = Vec::with_capacity(values.len());
        let mut residuals = Vec::with_capacity(values.len());
        for block in solved {
            for (v, r) in block? {
                vectors.push(v);
                residuals.push(r);
            }
        }
        Ok((vectors, residuals))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let s = dot(x, x).sqrt();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

/// LU factorization of `T - μ I` with partial pivoting; the factor has a
/// second super-diagonal from row swaps.
struct ShiftedLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    upper2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, mu: f64, norm: f64) -> Self {
        let n = t.len();
        let tiny = f64::EPSILON * norm;
        let mut lower = t.e.clone();
        let mut diag: Vec<f64> = t.d.iter().map(|d| d - mu).collect();
        let mut upper = t.e.clone();
        let mut upper2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if diag[i].abs() >= lower[i].abs() {
                if diag[i] == 0.0 {
                    diag[i] = tiny;
                }
                let f = lower[i] / diag[i];
                lower[i] = f;
                diag[i + 1] -= f * upper[i];
            } else {
                let f = diag[i] / lower[i];
                diag[i] = lower[i];
                lower[i] = f;
                let tmp = upper[i];
                upper[i] = diag[i + 1];
                diag[i + 1] = tmp - f * diag[i + 1];
                if i + 2 < n {
                    upper2[i] = upper[i + 1];
                    upper[i + 1] *= -f;
                }
                swapped[i] = true;
            }
        }
        for d in diag.iter_mut() {
            if d.abs() < tiny {
                *d = if *d < 0.0 { -tiny } else { tiny };
            }
        }
        Self { lower, diag, upper, upper2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.lower[i] * b[i];
        }
        b[n - 1] /= self.diag[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.upper[n - 2] * b[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.upper[i] * b[i + 1] - self.upper2[i] * b[i + 2]) / self.diag[i];
        }
        // guard against overflow from near-exact shifts
        let m = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m > 1e150 {
            b.iter_mut().for_each(|v| *v /= m);
        }
    }
}
