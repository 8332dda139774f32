//! Small dense complex matrices and a self-contained cyclic Jacobi
//! eigensolver. Dense singular values come from the hermitian eigensolve of
//! the Gram matrix, which is adequate at the dense size cap; diagonal
//! matrices never take this path.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        Ok(Matrix { n, data: vec![ZERO; n * n] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Matrix::zeros(n)?;
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Matrix::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch { expected: n, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        let mut m = Matrix::zeros(diag.len())?;
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch { expected: self.n, found: other.n });
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch { expected: self.n, found: other.n });
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut out = Matrix::zeros(n)?;
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n).expect("same size");
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// `A^H A`, hermitian by construction.
    pub fn gram(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n).expect("same size");
        for i in 0..n {
            for j in i..n {
                let mut sum = ZERO;
                for k in 0..n {
                    sum += self[(k, i)].conj() * self[(k, j)];
                }
                out[(i, j)] = sum;
                out[(j, i)] = sum.conj();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.n;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if i != j && self[(i, j)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.size();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Eigen-decomposition of a hermitian matrix by cyclic Jacobi sweeps with
/// complex rotations. Returns eigenvalues sorted descending and the unitary
/// matrix whose columns are the matching eigenvectors.
pub fn hermitian_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let dev = a.hermitian_deviation();
    let scale = a.max_abs().max(1.0);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = a.size();
    let mut g = a.clone();
    // Symmetrize exactly so rounding in the input cannot accumulate.
    for i in 0..n {
        g[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (g[(i, j)] + g[(j, i)].conj());
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
    }
    let mut v = Matrix::identity(n)?;
    let tol = 1e-14 * scale * n as f64;
    let max_sweeps = 60;
    let mut sweeps = 0;
    while off_diagonal_norm(&g) > tol {
        if sweeps >= max_sweeps {
            return Err(Error::EigensolveDiverged { sweeps, off: off_diagonal_norm(&g) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let gpq = g[(p, q)];
                let r = gpq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = gpq / r;
                let app = g[(p, p)].re;
                let aqq = g[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary rotation U with U[p][p]=c, U[p][q]=s*phase,
                // U[q][p]=-s*conj(phase), U[q][q]=c applied as G <- U^H G U.
                let sp = s * phase;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let gkp = g[(k, p)];
                    let gkq = g[(k, q)];
                    g[(k, p)] = c * gkp - sp.conj() * gkq;
                    g[(k, q)] = sp * gkp + c * gkq;
                    g[(p, k)] = g[(k, p)].conj();
                    g[(q, k)] = g[(k, q)].conj();
                }
                let new_pp = app * c * c + aqq * s * s - 2.0 * c * s * r;
                let new_qq = app * s * s + aqq * c * c + 2.0 * c * s * r;
                g[(p, p)] = Complex64::new(new_pp, 0.0);
                g[(q, q)] = Complex64::new(new_qq, 0.0);
                g[(p, q)] = ZERO;
                g[(q, p)] = ZERO;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sp.conj() * vkq;
                    v[(k, q)] = sp * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let eigenvalues: Vec<f64> = (0..n).map(|i| g[(i, i)].re).collect();
    order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut vectors = Matrix::zeros(n)?;
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    Ok((sorted, vectors))
}

/// Hermitian eigenvalues only, sorted descending.
pub fn hermitian_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.0)
}

/// Singular values sorted descending. Diagonal inputs short-circuit to the
/// sorted absolute diagonal; everything else goes through the Gram matrix.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    if a.is_diagonal(0.0) {
        return Ok(sorted_magnitudes(&a.diagonal()));
    }
    let (eigs, _) = hermitian_eigen(&a.gram())?;
    Ok(eigs.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

/// Sorted (descending) absolute values, the singular values of a diagonal.
pub fn sorted_magnitudes(diag: &[Complex64]) -> Vec<f64> {
    let mut mags: Vec<f64> = diag.iter().map(|v| v.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags
}

/// Right singular subspace projection `A V_r V_r^H` used by the SVD split:
/// the returned matrix keeps the `rank` leading singular directions of `A`.
pub fn leading_singular_part(a: &Matrix, rank: usize) -> Result<Matrix> {
    let n = a.size();
    if rank == 0 {
        return Matrix::zeros(n);
    }
    let (_, v) = hermitian_eigen(&a.gram())?;
    // P = V_r V_r^H
    let mut projector = Matrix::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            let mut sum = ZERO;
            for k in 0..rank.min(n) {
                sum += v[(i, k)] * v[(j, k)].conj();
            }
            projector[(i, j)] = sum;
        }
    }
    a.mul(&projector)
}
