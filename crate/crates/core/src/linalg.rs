//! Dense symmetric eigendecomposition, singular values and resolvent
//! quadratic forms.
//!
//! The eigensolver is the classical two-phase scheme: Householder reduction
//! to tridiagonal form followed by implicit-shift QL iteration. Storage is
//! column-major so the inner loops of both phases walk contiguous memory.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum distance between a resolvent shift and the spectrum.
pub const RESOLVENT_MIN_GAP: f64 = 1e-8;

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_SWEEPS: usize = 100;

/// A real symmetric matrix. Symmetry is exact: every constructor mirrors or
/// verifies the upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "SymMatrix dimension must be positive");
        Self {
            inner: DMatrix::zeros(n, n),
        }
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle
    /// (`i <= j`) and mirrored.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                let x = f(i, j);
                m.inner[(i, j)] = x;
                m.inner[(j, i)] = x;
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.inner[(i, i)] = x;
        }
        m
    }

    /// Wraps an existing square matrix, rejecting any asymmetry.
    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for j in 0..n {
            for i in 0..j {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                // NaN never compares equal; let it through so eig_sym reports it.
                if a != b && !(a.is_nan() && b.is_nan()) {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// Symmetric part `(M + Mᵀ)/2` of a square matrix.
    pub fn symmetrize(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::from_upper_fn(m.nrows(), |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)])
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.inner[(i, j)] = value;
        self.inner[(j, i)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|x| x.is_finite())
    }

    /// Lower-right principal block starting at `start` (0-based).
    pub fn trailing_block(&self, start: usize) -> Result<SymMatrix> {
        let n = self.dim();
        if start >= n {
            return Err(Error::Dimension(format!(
                "trailing block start {start} out of range for dimension {n}"
            )));
        }
        let m = n - start;
        Ok(SymMatrix {
            inner: self.inner.view((start, start), (m, m)).into_owned(),
        })
    }

    /// The matrix with row and column `index` removed.
    pub fn delete_index(&self, index: usize) -> Result<SymMatrix> {
        let n = self.dim();
        if n < 2 || index >= n {
            return Err(Error::Dimension(format!(
                "cannot delete index {index} from a {n}x{n} matrix"
            )));
        }
        let keep = |k: usize| if k < index { k } else { k + 1 };
        let inner = DMatrix::from_fn(n - 1, n - 1, |i, j| self.inner[(keep(i), keep(j))]);
        Ok(SymMatrix { inner })
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        x.dot(&(&self.inner * &x))
    }
}

/// Eigenvalues sorted descending, with optional eigenvectors stored as the
/// columns of an orthonormal matrix (column `k` pairs with `eigenvalues[k]`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `k`-th largest eigenvalue, 1-based as in λ_1 ≥ λ_2 ≥ ….
    pub fn nth_largest(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// `k`-th smallest eigenvalue, 1-based, i.e. λ_{n-k+1}.
    pub fn nth_smallest(&self, k: usize) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - k]
    }
}

/// Eigendecomposition of a symmetric matrix.
pub fn eig_sym(a: &SymMatrix, want_vectors: bool) -> Result<Spectrum> {
    if !a.is_finite() {
        return Err(Error::InvalidInput(
            "matrix has non-finite entries".to_string(),
        ));
    }
    let n = a.dim();
    let mut work: Vec<f64> = a.as_matrix().as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut work, &mut d, &mut e, want_vectors);
    let vectors = if want_vectors {
        Some(work.as_mut_slice())
    } else {
        None
    };
    ql_implicit(n, &mut d, &mut e, vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    if want_vectors {
        // Ties fall back to the eigenvector columns so the vector output is
        // reproducible; eigenvalue output is unaffected.
        let col = |k: usize| &work[k * n..(k + 1) * n];
        order.sort_by(|&x, &y| {
            d[y].total_cmp(&d[x]).then_with(|| {
                col(x)
                    .iter()
                    .zip(col(y))
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
    } else {
        order.sort_by(|&x, &y| d[y].total_cmp(&d[x]));
    }
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let eigenvectors = want_vectors.then(|| {
        DMatrix::from_fn(n, n, |i, j| work[i + order[j] * n])
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only; shorthand for the common Monte Carlo path.
pub fn eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    eig_sym(a, false).map(|s| s.eigenvalues)
}

/// Singular values of a `p × n` matrix, descending, computed as the square
/// roots of the eigenvalues of `M Mᵀ` (clamped at zero). Returns `p` values.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "matrix has non-finite entries".to_string(),
        ));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let gram = SymMatrix::symmetrize(&(m * m.transpose()))?;
    Ok(eigenvalues(&gram)?
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect())
}

/// Quadratic forms of the resolvent `R = (G̃ − λI)⁻¹` against `v`, plus the
/// normalized traces of `R` and `R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventForms {
    /// `vᵀ R v`
    pub l1: f64,
    /// `vᵀ R² v`
    pub l2: f64,
    /// `tr(R)/m`
    pub tr_r_over_m: f64,
    /// `tr(R²)/m`
    pub tr_r2_over_m: f64,
}

/// Resolvent of a symmetric matrix at a real shift, applied through the
/// eigenbasis. Construction fails when the shift is within
/// [`RESOLVENT_MIN_GAP`] of the spectrum.
#[derive(Debug, Clone)]
pub struct Resolvent<'a> {
    spectrum: &'a Spectrum,
    vectors: &'a DMatrix<f64>,
    lambda: f64,
    inv: Vec<f64>,
}

impl<'a> Resolvent<'a> {
    pub fn new(spectrum: &'a Spectrum, lambda: f64) -> Result<Self> {
        let vectors = spectrum.eigenvectors.as_ref().ok_or_else(|| {
            Error::InvalidInput("resolvent needs a spectrum with eigenvectors".to_string())
        })?;
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite shift {lambda}")));
        }
        let gap = spectrum
            .eigenvalues
            .iter()
            .map(|&mu| (mu - lambda).abs())
            .fold(f64::INFINITY, f64::min);
        if gap <= RESOLVENT_MIN_GAP {
            return Err(Error::SingularResolvent { lambda, gap });
        }
        let inv = spectrum
            .eigenvalues
            .iter()
            .map(|&mu| 1.0 / (mu - lambda))
            .collect();
        Ok(Self {
            spectrum,
            vectors,
            lambda,
            inv,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.inv.len()
    }

    /// Coordinates of `v` in the eigenbasis.
    fn coords(&self, v: &[f64]) -> Result<DVector<f64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector length {} does not match resolvent dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(self.vectors.tr_mul(&DVector::from_column_slice(v)))
    }

    /// `(vᵀRv, vᵀR²v)`.
    pub fn quadratic_forms(&self, v: &[f64]) -> Result<(f64, f64)> {
        let w = self.coords(v)?;
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for (wk, rk) in w.iter().zip(&self.inv) {
            let w2 = wk * wk;
            l1 += w2 * rk;
            l2 += w2 * rk * rk;
        }
        Ok((l1, l2))
    }

    /// `R v`.
    pub fn apply(&self, v: &[f64]) -> Result<DVector<f64>> {
        let mut w = self.coords(v)?;
        for (wk, rk) in w.iter_mut().zip(&self.inv) {
            *wk *= rk;
        }
        Ok(self.vectors * w)
    }

    pub fn trace_over_m(&self) -> f64 {
        self.inv.iter().sum::<f64>() / self.dim() as f64
    }

    pub fn trace_sq_over_m(&self) -> f64 {
        self.inv.iter().map(|r| r * r).sum::<f64>() / self.dim() as f64
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
    }
}

/// Resolvent quadratic forms `L₁ = vᵀRv`, `L₂ = vᵀR²v` with
/// `R = (G̃ − λI)⁻¹`, together with `tr R / m` and `tr R² / m`.
pub fn resolvent_quadratics(gt: &SymMatrix, lambda: f64, v: &[f64]) -> Result<ResolventForms> {
    let spectrum = eig_sym(gt, true)?;
    let resolvent = Resolvent::new(&spectrum, lambda)?;
    let (l1, l2) = resolvent.quadratic_forms(v)?;
    Ok(ResolventForms {
        l1,
        l2,
        tr_r_over_m: resolvent.trace_over_m(),
        tr_r2_over_m: resolvent.trace_sq_over_m(),
    })
}

/// Householder reduction of the column-major symmetric matrix in `v` to
/// tridiagonal form: diagonal in `d`, sub-diagonal in `e[1..]`.
/// With `accumulate`, `v` is overwritten by the orthogonal transformation.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let at = |r: usize, c: usize| r + c * n;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for x in &d[..i] {
            scale += x.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = if f > 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                let col = &v[at(j + 1, j)..at(i, j)];
                for ((vk, dk), ek) in col.iter().zip(&d[j + 1..i]).zip(&mut e[j + 1..i]) {
                    g += vk * dk;
                    *ek += vk * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v[at(j, j)..at(i, j)];
                for ((vk, ek), dk) in col.iter_mut().zip(&e[j..i]).zip(&d[j..i]) {
                    *vk -= f * ek + g * dk;
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n.saturating_sub(1) {
            v[at(n - 1, i)] = v[at(i, i)];
            v[at(i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[at(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[at(k, i + 1)] * v[at(k, j)];
                    }
                    for k in 0..=i {
                        v[at(k, j)] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[at(k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[at(n - 1, j)];
            v[at(n - 1, j)] = 0.0;
        }
        v[at(n - 1, n - 1)] = 1.0;
    } else {
        for j in 0..n {
            d[j] = v[at(j, j)];
        }
    }
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal `(d, e)`. Eigenvalues are
/// left unsorted in `d`; when `vectors` is given its columns are rotated
/// along.
fn ql_implicit(n: usize, d: &mut [f64], e: &mut [f64], mut vectors: Option<&mut [f64]>) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut shift_total = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence(MAX_QL_SWEEPS));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in &mut d[l + 2..n] {
                    *x -= h;
                }
                shift_total += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = vectors.as_deref_mut() {
                        let (left, right) = v.split_at_mut((i + 1) * n);
                        let col_i = &mut left[i * n..];
                        let col_next = &mut right[..n];
                        for (a, b) in col_i.iter_mut().zip(col_next.iter_mut()) {
                            let hk = *b;
                            *b = s * *a + c * hk;
                            *a = c * *a - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += shift_total;
        e[l] = 0.0;
    }
    Ok(())
}
