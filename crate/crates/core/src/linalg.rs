//! Real symmetric tridiagonal eigensolver and small dense helpers.
//!
//! The solver is the classic implicit-shift QL iteration with accumulated
//! Givens rotations, operating directly on the diagonal/off-diagonal arrays.
//! Eigenvectors are stored column-major so the rotation updates stream over
//! contiguous memory.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Self {
        assert!(
            offdiag.len() + 1 == diag.len() || (diag.is_empty() && offdiag.is_empty()),
            "off-diagonal length must be diag length - 1"
        );
        Self { diag, offdiag }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Tridiagonal matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.dim();
        assert_eq!(x.len(), m);
        let mut y = vec![0.0; m];
        for i in 0..m {
            y[i] = self.diag[i] * x[i];
            if i > 0 {
                y[i] += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < m {
                y[i] += self.offdiag[i] * x[i + 1];
            }
        }
        y
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigh(&self) -> Result<TridiagEigen> {
        let m = self.dim();
        let mut d = self.diag.clone();
        // workspace copy with a trailing zero slot
        let mut e = vec![0.0; m];
        e[..m.saturating_sub(1)].copy_from_slice(&self.offdiag);
        let mut v = vec![0.0; m * m];
        for i in 0..m {
            v[i * m + i] = 1.0;
        }
        ql_implicit(&mut d, &mut e, &mut v, m)?;
        sort_ascending(&mut d, &mut v, m);
        Ok(TridiagEigen {
            dim: m,
            values: d,
            vectors: v,
        })
    }
}

/// Eigendecomposition of a real symmetric tridiagonal matrix.
///
/// `vectors` is column-major: column `i` (eigenvector of `values[i]`)
/// occupies `vectors[i*dim..(i+1)*dim]`.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    dim: usize,
    values: Vec<f64>,
    vectors: Vec<f64>,
}

impl TridiagEigen {
    #[cfg(test)]
    pub(crate) fn from_parts(dim: usize, values: Vec<f64>, vectors: Vec<f64>) -> Self {
        assert_eq!(values.len(), dim);
        assert_eq!(vectors.len(), dim * dim);
        Self {
            dim,
            values,
            vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors_flat(&self) -> &[f64] {
        &self.vectors
    }

    /// Row 0 of the eigenvector matrix: the component of each eigenvector
    /// on the first rung.
    pub fn first_components(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.vectors[i * self.dim]).collect()
    }

    /// y = V^T x
    pub fn project(&self, x: &[Complex64]) -> Vec<Complex64> {
        let m = self.dim;
        assert_eq!(x.len(), m);
        let mut y = vec![Complex64::ZERO; m];
        for (col, yc) in y.iter_mut().enumerate() {
            let vcol = &self.vectors[col * m..(col + 1) * m];
            let mut acc = Complex64::ZERO;
            for (vk, xk) in vcol.iter().zip(x) {
                acc += xk * *vk;
            }
            *yc = acc;
        }
        y
    }

    /// y = V x
    pub fn reconstruct(&self, x: &[Complex64]) -> Vec<Complex64> {
        let m = self.dim;
        assert_eq!(x.len(), m);
        let mut y = vec![Complex64::ZERO; m];
        for col in 0..m {
            let vcol = &self.vectors[col * m..(col + 1) * m];
            let xc = x[col];
            if xc == Complex64::ZERO {
                continue;
            }
            for (yk, vk) in y.iter_mut().zip(vcol) {
                *yk += xc * *vk;
            }
        }
        y
    }

    /// Applies exp(-i f(lambda) r) in the eigenbasis: V e^{-i f(lam) r} V^T x.
    pub fn apply_exp<F>(&self, x: &[Complex64], r: f64, f: F) -> Vec<Complex64>
    where
        F: Fn(f64) -> f64,
    {
        let mut c = self.project(x);
        for (ck, lam) in c.iter_mut().zip(&self.values) {
            let phase = Complex64::from_polar(1.0, -f(*lam) * r);
            *ck *= phase;
        }
        self.reconstruct(&c)
    }
}

fn sign_of(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Implicit-shift QL iteration with eigenvector accumulation (EISPACK tql2
/// lineage). `d` holds the diagonal, `e` the off-diagonal with a spare
/// trailing slot, `v` the column-major identity on entry.
fn ql_implicit(d: &mut [f64], e: &mut [f64], v: &mut [f64], m: usize) -> Result<()> {
    if m == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    for l in 0..m {
        let mut iter = 0usize;
        loop {
            let mut seg = l;
            while seg + 1 < m {
                let dd = d[seg].abs() + d[seg + 1].abs();
                if e[seg].abs() <= eps * dd {
                    break;
                }
                seg += 1;
            }
            if seg == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::EigenFailure { size: m });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[seg] - d[l] + e[l] / (g + sign_of(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..seg).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[seg] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rotate eigenvector columns i and i+1
                let (left, right) = v.split_at_mut((i + 1) * m);
                let col_i = &mut left[i * m..(i + 1) * m];
                let col_ip1 = &mut right[..m];
                for (vi, vip1) in col_i.iter_mut().zip(col_ip1.iter_mut()) {
                    f = *vip1;
                    *vip1 = s * *vi + c * f;
                    *vi = c * *vi - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[seg] = 0.0;
        }
    }
    Ok(())
}

fn sort_ascending(d: &mut Vec<f64>, v: &mut Vec<f64>, m: usize) {
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let sorted_d: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut sorted_v = vec![0.0; m * m];
    for (new_col, &old_col) in order.iter().enumerate() {
        sorted_v[new_col * m..(new_col + 1) * m].copy_from_slice(&v[old_col * m..(old_col + 1) * m]);
    }
    *d = sorted_d;
    *v = sorted_v;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two_symmetric() {
        let t = SymTridiag::new(vec![0.0, 0.0], vec![6.0_f64.sqrt()]);
        let eig = t.eigh().unwrap();
        let b = 6.0_f64.sqrt();
        assert_abs_diff_eq!(eig.values()[0], -b, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values()[1], b, epsilon = 1e-14);
        for i in 0..2 {
            assert_abs_diff_eq!(eig.vector(i)[0].abs(), 0.5_f64.sqrt(), epsilon = 1e-14);
        }
    }

    #[test]
    fn residual_and_orthonormality() {
        // pseudo-random but deterministic tridiagonal
        let m = 60;
        let diag: Vec<f64> = (0..m).map(|i| ((i * 7919 % 101) as f64) / 50.0 - 1.0).collect();
        let off: Vec<f64> = (0..m - 1).map(|i| ((i * 104729 % 97) as f64) / 40.0 + 0.1).collect();
        let t = SymTridiag::new(diag, off);
        let eig = t.eigh().unwrap();
        // residual ||T v - lambda v||
        for i in 0..m {
            let vi: Vec<f64> = eig.vector(i).to_vec();
            let tv = t.matvec(&vi);
            for k in 0..m {
                assert_abs_diff_eq!(tv[k], eig.values()[i] * vi[k], epsilon = 1e-10);
            }
        }
        // orthonormality
        for i in 0..m {
            for j in i..m {
                let dot: f64 = eig
                    .vector(i)
                    .iter()
                    .zip(eig.vector(j))
                    .map(|(a, b)| a * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-12);
            }
        }
        // ascending
        for w in eig.values().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn apply_exp_is_unitary() {
        let m = 25;
        let off: Vec<f64> = (0..m - 1).map(|i| ((i + 1) as f64).sqrt()).collect();
        let t = SymTridiag::new(vec![0.0; m], off);
        let eig = t.eigh().unwrap();
        let mut x = vec![Complex64::ZERO; m];
        x[0] = Complex64::new(1.0, 0.0);
        let y = eig.apply_exp(&x, 0.3, |lam| lam);
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-13);
    }
}
