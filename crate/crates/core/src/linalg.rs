//! Small dense linear algebra: a symmetric eigensolver (Householder
//! tridiagonalization followed by implicit-shift QL) used for Cayley-graph
//! Laplacian spectra and the sphere-containment rank test.

use crate::error::{Error, Result};

/// Dense symmetric matrix stored row-major.
#[derive(Clone)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// All eigenvalues of a symmetric matrix, ascending.
///
/// Householder reduction to tridiagonal form (eigenvalues only, no
/// accumulation of transforms) and then the implicit-shift QL iteration.
pub fn symmetric_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    let n = m.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.data.clone();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tred_values(&mut a, n, &mut d, &mut e);
    tqli_values(&mut d, &mut e, n)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Householder tridiagonalization, diagonal into `d`, subdiagonal into `e`.
fn tred_values(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i;
        let mut h = 0.0;
        if l > 1 {
            let scale: f64 = (0..l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l - 1];
            } else {
                for k in 0..l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let mut f = a[i * n + l - 1];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l - 1] = f - g;
                f = 0.0;
                for j in 0..l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l - 1];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
}

/// Implicit-shift QL on a tridiagonal matrix; eigenvalues land in `d`.
fn tqli_values(d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::numeric("QL iteration failed to converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = 0.0;
                let _ = f;
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Smallest eigenvalue of AᵀA for a tall matrix given row-wise, i.e. the
/// squared smallest singular value. Rows are scale-normalized by the caller.
pub fn gram_smallest_eigenvalue(rows: &[Vec<f64>]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::domain("no rows"));
    }
    let k = rows[0].len();
    let mut g = SymMatrix::zeros(k);
    for r in rows {
        for i in 0..k {
            for j in i..k {
                let v = g.at(i, j) + r[i] * r[j];
                g.set(i, j, v);
            }
        }
    }
    let ev = symmetric_eigenvalues(&g)?;
    Ok(ev[0])
}

/// (σ_min, σ_max) of a tall row-major matrix by one-sided Jacobi on the
/// columns — accurate for tiny singular values where the Gram route loses
/// half the digits to squaring.
pub fn singular_value_range(rows: &[Vec<f64>]) -> Result<(f64, f64)> {
    if rows.is_empty() {
        return Err(Error::domain("no rows"));
    }
    let n = rows[0].len();
    let m = rows.len();
    if m < n {
        return Err(Error::domain("need at least as many rows as columns"));
    }
    // column-major copy
    let mut col: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut app, mut aqq, mut apq) = (0.0f64, 0.0f64, 0.0f64);
                for i in 0..m {
                    app += col[p][i] * col[p][i];
                    aqq += col[q][i] * col[q][i];
                    apq += col[p][i] * col[q][i];
                }
                off = off.max(apq.abs() / (app * aqq).sqrt().max(1e-300));
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let vp = col[p][i];
                    let vq = col[q][i];
                    col[p][i] = c * vp - s * vq;
                    col[q][i] = s * vp + c * vq;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut smin = f64::INFINITY;
    let mut smax = 0.0f64;
    for c in &col {
        let s = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        smin = smin.min(s);
        smax = smax.max(s);
    }
    Ok((smin, smax))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_known_matrix() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, 2.0);
        m.set(1, 1, 2.0);
        m.set(0, 1, 1.0);
        let ev = symmetric_eigenvalues(&m).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_path_laplacian() {
        // Path graph on 3 vertices: Laplacian eigenvalues 0, 1, 3.
        let mut m = SymMatrix::zeros(3);
        m.set(0, 0, 1.0);
        m.set(1, 1, 2.0);
        m.set(2, 2, 1.0);
        m.set(0, 1, -1.0);
        m.set(1, 2, -1.0);
        let ev = symmetric_eigenvalues(&m).unwrap();
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - 1.0).abs() < 1e-12);
        assert!((ev[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn circulant_laplacian_matches_cosine_formula() {
        let n = 12;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
            let j = (i + 1) % n;
            m.set(i, j, -0.5);
        }
        let ev = symmetric_eigenvalues(&m).unwrap();
        let expected = 1.0 - (2.0 * std::f64::consts::PI / n as f64).cos();
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - expected).abs() < 1e-10);
    }

    #[test]
    fn gram_rank_deficiency_detects_dependence() {
        // Points on a line lifted to (1, x, x²)? No: rows (1, x, y) with y = 2x+1.
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                let x = i as f64;
                vec![1.0, x, 2.0 * x + 1.0]
            })
            .collect();
        // dependent columns: y - 2x - 1 = 0.
        let min = gram_smallest_eigenvalue(&rows).unwrap();
        assert!(min < 1e-12);
    }
}
