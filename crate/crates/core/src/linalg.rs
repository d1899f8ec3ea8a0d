//! Sparse symmetric linear algebra: CSR storage, incomplete Cholesky,
//! preconditioned conjugate gradients and a banded Cholesky solver.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Zero matrix with the given sparsity pattern (columns per row).
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        row_ptr.push(0);
        for r in rows {
            let mut r = r.clone();
            r.sort_unstable();
            r.dedup();
            col.extend_from_slice(&r);
            row_ptr.push(col.len());
        }
        let nnz = col.len();
        Csr { n, row_ptr, col, val: vec![0.0; nnz] }
    }

    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let s = self.row_ptr[row];
        let e = self.row_ptr[row + 1];
        self.col[s..e].binary_search(&col).ok().map(|k| s + k)
    }

    pub fn clear(&mut self) {
        self.val.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.find(i, i).map_or(0.0, |k| self.val[k])).collect()
    }

    /// Largest `|i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                b = b.max(i.abs_diff(self.col[k]));
            }
        }
        b
    }
}

/// Zero-fill incomplete Cholesky factor `L` (lower triangle, by rows).
#[derive(Debug, Clone)]
pub struct Ic0 {
    l: Csr,
    diag: Vec<usize>,
}

impl Ic0 {
    /// Factorises `a`, retrying with a growing diagonal shift on breakdown.
    pub fn new(a: &Csr) -> Ic0 {
        let mut shift = 0.0;
        loop {
            if let Some(f) = Self::try_factor(a, shift) {
                return f;
            }
            shift = if shift == 0.0 { 1e-3 } else { shift * 10.0 };
        }
    }

    fn try_factor(a: &Csr, shift: f64) -> Option<Ic0> {
        let n = a.n;
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n);
        for i in 0..n {
            rows.push((a.row_ptr[i]..a.row_ptr[i + 1]).map(|k| a.col[k]).filter(|&j| j <= i).collect());
        }
        let mut l = Csr::from_pattern(&rows);
        let mut diag = vec![0; n];
        for i in 0..n {
            let s = l.row_ptr[i];
            let e = l.row_ptr[i + 1];
            for k in s..e {
                let j = l.col[k];
                let mut v = a.val[a.find(i, j).unwrap()];
                if j == i {
                    v *= 1.0 + shift;
                }
                if j == i {
                    for p in s..k {
                        v -= l.val[p] * l.val[p];
                    }
                } else {
                    // sparse dot of row i and row j over columns below j
                    let (mut p, mut q) = (s, l.row_ptr[j]);
                    while p < k && q < diag[j] {
                        let (cp, cq) = (l.col[p], l.col[q]);
                        if cp == cq {
                            v -= l.val[p] * l.val[q];
                            p += 1;
                            q += 1;
                        } else if cp < cq {
                            p += 1;
                        } else {
                            q += 1;
                        }
                    }
                }
                if j == i {
                    if !(v > 0.0) || !v.is_finite() {
                        return None;
                    }
                    l.val[k] = v.sqrt();
                    diag[i] = k;
                } else {
                    l.val[k] = v / l.val[diag[j]];
                }
            }
        }
        Some(Ic0 { l, diag })
    }

    /// `z = (L Lᵀ)⁻¹ r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let l = &self.l;
        for i in 0..l.n {
            let mut v = r[i];
            for k in l.row_ptr[i]..self.diag[i] {
                v -= l.val[k] * z[l.col[k]];
            }
            z[i] = v / l.val[self.diag[i]];
        }
        for i in (0..l.n).rev() {
            z[i] /= l.val[self.diag[i]];
            let zi = z[i];
            for k in l.row_ptr[i]..self.diag[i] {
                z[l.col[k]] -= l.val[k] * zi;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOutcome {
    pub iterations: usize,
    /// Final `‖r‖₂ / ‖b‖₂`.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for SPD `a`, starting from `x`.
pub fn pcg(a: &Csr, b: &[f64], x: &mut [f64], pre: &Ic0, rel_tol: f64, max_iter: usize) -> PcgOutcome {
    let n = a.n;
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let bn = norm(b);
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return PcgOutcome { iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut r = vec![0.0; n];
    a.mul(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut q = vec![0.0; n];
    let mut rel = norm(&r) / bn;
    let mut it = 0;
    while it < max_iter && rel > rel_tol {
        a.mul(&p, &mut q);
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        it += 1;
        rel = norm(&r) / bn;
        pre.apply(&r, &mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    PcgOutcome { iterations: it, relative_residual: rel, converged: rel <= rel_tol }
}

/// Dense-band Cholesky solve of SPD `a`. Returns `None` if the matrix is
/// not numerically positive definite.
pub fn banded_cholesky_solve(a: &Csr, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n;
    let w = a.bandwidth();
    // band[i][w + j - i] holds L[i][j] for i - w ≤ j ≤ i
    let width = w + 1;
    let mut band = vec![0.0; n * width];
    for i in 0..n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col[k];
            if j <= i {
                band[i * width + w + j - i] = a.val[k];
            }
        }
    }
    for i in 0..n {
        let j0 = i.saturating_sub(w);
        for j in j0..=i {
            let mut v = band[i * width + w + j - i];
            let k0 = j0.max(j.saturating_sub(w));
            for k in k0..j {
                v -= band[i * width + w + k - i] * band[j * width + w + k - j];
            }
            if j == i {
                if !(v > 0.0) {
                    return None;
                }
                band[i * width + w] = v.sqrt();
            } else {
                band[i * width + w + j - i] = v / band[j * width + w];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let j0 = i.saturating_sub(w);
        for j in j0..i {
            y[i] -= band[i * width + w + j - i] * y[j];
        }
        y[i] /= band[i * width + w];
    }
    for i in (0..n).rev() {
        y[i] /= band[i * width + w];
        let yi = y[i];
        let j0 = i.saturating_sub(w);
        for j in j0..i {
            y[j] -= band[i * width + w + j - i] * yi;
        }
    }
    Some(y)
}
