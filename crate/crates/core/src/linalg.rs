//! Dense complex Hermitian linear algebra.
//!
//! The eigensolver reduces to a real symmetric tridiagonal matrix with
//! complex Householder reflections, removes the off-diagonal phases with a
//! diagonal unitary and finishes with implicit QL iterations.

use crate::error::{Error, Result};
use num_complex::Complex;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub type C64 = Complex<f64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct ComplexMatrix {
    #[serde(rename = "dim")]
    n: usize,
    #[serde(rename = "entries")]
    data: Vec<C64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: RawMatrix) -> Result<Self> {
        if r.dim == 0 || r.entries.len() != r.dim * r.dim {
            return Err(Error::DimensionMismatch(format!("{} entries for dimension {}", r.entries.len(), r.dim)));
        }
        let m = Self { n: r.dim, data: r.entries };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows must form a square matrix".into()));
        }
        Ok(Self { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n, "matvec dimension mismatch");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let orow = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { n, data: out }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)] == ZERO))
    }

    /// Largest entry of |A − A*|.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "add dimension mismatch");
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "sub dimension mismatch");
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// A complex matrix known to be Hermitian. Construction symmetrizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Accepts `m` when |m − m*| ≤ 1e-12·‖m‖ entrywise, then replaces it by (m + m*)/2.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let tolerance = 1e-12 * m.norm_fro().max(f64::MIN_POSITIVE);
        let asymmetry = m.hermitian_defect();
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        Ok(Self::symmetrized(&m))
    }

    /// (m + m*)/2 without any check.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        HermitianMatrix(ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                C64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        }))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(n))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        HermitianMatrix(ComplexMatrix::from_real_diag(d))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.norm_fro()
    }

    pub fn is_real(&self) -> bool {
        self.0.as_slice().iter().all(|z| z.im == 0.0)
    }

    /// a·A + b·B for real a, b.
    pub fn combine(a: f64, x: &HermitianMatrix, b: f64, y: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(x.dim(), y.dim(), "combine dimension mismatch");
        HermitianMatrix(ComplexMatrix {
            n: x.dim(),
            data: x.0.data.iter().zip(&y.0.data).map(|(p, q)| p * a + q * b).collect(),
        })
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self::combine(1.0, self, 1.0, other)
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale_real(s))
    }

    pub fn shift(&self, s: f64) -> HermitianMatrix {
        let mut m = self.0.clone();
        for i in 0..m.dim() {
            m[(i, i)] += s;
        }
        HermitianMatrix(m)
    }

    /// ⟨u|A|v⟩
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let av = self.0.matvec(v);
        u.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }
}

impl TryFrom<ComplexMatrix> for HermitianMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for ComplexMatrix {
    fn from(h: HermitianMatrix) -> ComplexMatrix {
        h.0
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors (stored as columns).
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column k of this matrix pairs with `values[k]`.
    pub vectors: ComplexMatrix,
    /// Each column's largest-magnitude entry has been made real and positive.
    pub phase_fixed: bool,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// max |λ|, the spectral norm of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// (λI − A)† w, dropping eigendirections with |λ − λ_j| ≤ rank_tol.
    pub fn pinv_apply(&self, lambda: f64, w: &[C64], rank_tol: f64) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(w.len(), n, "pinv_apply dimension mismatch");
        let mut out = vec![ZERO; n];
        for j in 0..n {
            let d = lambda - self.values[j];
            if d.abs() <= rank_tol {
                continue;
            }
            let mut c = ZERO;
            for i in 0..n {
                c += self.vectors[(i, j)].conj() * w[i];
            }
            c /= d;
            for i in 0..n {
                out[i] += c * self.vectors[(i, j)];
            }
        }
        out
    }

    /// V·diag(f(λ))·V*
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.dim();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += self.vectors[(i, k)] * self.vectors[(j, k)].conj() * fl[k];
                }
                m[(i, j)] = s;
            }
        }
        HermitianMatrix::symmetrized(&m)
    }
}

/// Default numerical rank threshold for the shifted pseudo-inverse.
pub fn default_rank_tol(n: usize, norm: f64) -> f64 {
    1e-9 * n as f64 * norm.max(f64::MIN_POSITIVE)
}

pub fn eigh(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if n > 4096 {
        return Err(Error::InvalidArgument(format!("dimension {n} exceeds 4096")));
    }
    if a.matrix().is_diagonal() {
        return Ok(diagonal_eigh(a));
    }

    let (d, e_complex, q) = householder_tridiagonal(a.matrix());

    // Remove the phases of the subdiagonal: T = D·T_r·D*.
    let mut phases = vec![ONE; n];
    let mut e = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let r = e_complex[i].norm();
        e[i] = r;
        let ph = if r > 0.0 { e_complex[i] / r } else { ONE };
        phases[i + 1] = phases[i] * ph;
    }

    let mut d = d;
    let mut zt = vec![0.0; n * n]; // rows of zt are eigenvectors of T_r
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut zt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));

    // V = Q·D·Z
    let mut qd = q;
    for i in 0..n {
        for j in 0..n {
            qd[(i, j)] *= phases[j];
        }
    }
    let mut vectors = ComplexMatrix::zeros(n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        values.push(d[k]);
        let z = &zt[k * n..(k + 1) * n];
        for i in 0..n {
            let row = qd.row(i);
            let mut s = ZERO;
            for (r, &zv) in row.iter().zip(z) {
                s += r * zv;
            }
            vectors[(i, col)] = s;
        }
    }
    fix_phases(&mut vectors);
    Ok(EigenDecomposition { values, vectors, phase_fixed: true })
}

fn diagonal_eigh(a: &HermitianMatrix) -> EigenDecomposition {
    let n = a.dim();
    let diag: Vec<f64> = (0..n).map(|i| a.matrix()[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        vectors[(k, col)] = ONE;
    }
    EigenDecomposition { values: order.iter().map(|&k| diag[k]).collect(), vectors, phase_fixed: true }
}

/// Returns (diagonal, complex subdiagonal, Q) with A = Q·T·Q*.
fn householder_tridiagonal(a: &ComplexMatrix) -> (Vec<f64>, Vec<C64>, ComplexMatrix) {
    let n = a.dim();
    let mut m = a.clone();
    let mut reflectors: Vec<(usize, Vec<C64>, f64)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| m[(i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if alpha == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let mut v = x;
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        let off = k + 1;
        let len = n - off;
        // p = tau·A22·v
        let mut p = vec![ZERO; len];
        for i in 0..len {
            let mut s = ZERO;
            for j in 0..len {
                s += m[(off + i, off + j)] * v[j];
            }
            p[i] = s * tau;
        }
        let vp: C64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let kfac = 0.5 * tau * vp.re;
        let q: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kfac).collect();
        for i in 0..len {
            for j in 0..len {
                let upd = v[i] * q[j].conj() + q[i] * v[j].conj();
                m[(off + i, off + j)] -= upd;
            }
        }
        let sub = -phase * alpha;
        m[(off, k)] = sub;
        m[(k, off)] = sub.conj();
        for i in off + 1..n {
            m[(i, k)] = ZERO;
            m[(k, i)] = ZERO;
        }
        reflectors.push((off, v, tau));
    }

    let d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let e: Vec<C64> = (0..n.saturating_sub(1)).map(|i| m[(i + 1, i)]).collect();

    let mut q = ComplexMatrix::identity(n);
    for (off, v, tau) in reflectors.iter().rev() {
        // Q ← H·Q on rows off..n
        for col in 0..n {
            let mut s = ZERO;
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * q[(off + i, col)];
            }
            s *= *tau;
            if s == ZERO {
                continue;
            }
            for (i, vi) in v.iter().enumerate() {
                q[(off + i, col)] -= vi * s;
            }
        }
    }
    (d, e, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix (EISPACK tql2 lineage).
/// `e[i]` couples rows i and i+1; `zt` holds the eigenvectors as rows.
fn tql2(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence);
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
                let h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

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
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = zt.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..(i + 1) * n];
                    let row_i1 = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                        let hh = *b;
                        *b = s * *a + c * hh;
                        *a = c * *a - s * hh;
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
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Rotates each column so its largest-magnitude entry is real positive.
/// Entries within 1e-9 (relative) of the maximum count as ties; the lowest index wins.
fn fix_phases(v: &mut ComplexMatrix) {
    let n = v.dim();
    for col in 0..n {
        let max = (0..n).map(|i| v[(i, col)].norm()).fold(0.0f64, f64::max);
        if max == 0.0 {
            continue;
        }
        let pivot = (0..n).find(|&i| v[(i, col)].norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
        let z = v[(pivot, col)];
        let rot = z.conj() / z.norm();
        for i in 0..n {
            v[(i, col)] *= rot;
        }
        v[(pivot, col)] = C64::new(v[(pivot, col)].norm(), 0.0);
    }
}

pub fn shifted_pinv_apply(a: &HermitianMatrix, lambda: f64, w: &[C64], rank_tol: f64) -> Result<Vec<C64>> {
    if w.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!("vector length {} vs dim {}", w.len(), a.dim())));
    }
    if rank_tol <= 0.0 {
        return Err(Error::InvalidArgument("rank_tol must be positive".into()));
    }
    Ok(eigh(a)?.pinv_apply(lambda, w, rank_tol))
}

pub fn commutator(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    Ok(&ab - &ba)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignMethod {
    Spectral,
    Newton,
}

pub fn matrix_sign(a: &HermitianMatrix, method: SignMethod) -> Result<HermitianMatrix> {
    match method {
        SignMethod::Spectral => {
            if a.matrix().is_diagonal() {
                let d: Vec<f64> = (0..a.dim()).map(|i| sign(a.matrix()[(i, i)].re)).collect();
                return Ok(HermitianMatrix::from_real_diag(&d));
            }
            Ok(eigh(a)?.spectral_map(sign))
        }
        SignMethod::Newton => newton_sign(a),
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn newton_sign(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let mut z = a.matrix().clone();
    let scale = a.norm_fro();
    for _ in 0..100 {
        let inv = inverse(&z, scale).map_err(|_| {
            Error::Singular("Newton sign iteration hit a singular matrix; use the spectral method".into())
        })?;
        let next = (&z + &inv).scale_real(0.5);
        let step = (&next - &z).norm_fro();
        z = next;
        if step < 1e-12 {
            return Ok(HermitianMatrix::symmetrized(&z));
        }
    }
    Err(Error::NoConvergence)
}

/// Inverse by LU with partial pivoting; fails when a pivot is below 1e-14·scale.
pub fn inverse(a: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| lu[(i, col)].norm().total_cmp(&lu[(j, col)].norm()))
            .unwrap();
        if lu[(piv, col)].norm() <= tiny {
            return Err(Error::Singular(format!("pivot {col} vanishes")));
        }
        if piv != col {
            for j in 0..n {
                let t = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(piv, j)];
                inv[(piv, j)] = t;
            }
        }
        let p = lu[(col, col)];
        for j in 0..n {
            lu[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = lu[(i, col)];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let lv = lu[(col, j)];
                let iv = inv[(col, j)];
                lu[(i, j)] -= f * lv;
                inv[(i, j)] -= f * iv;
            }
        }
    }
    Ok(inv)
}

/// Embeds a 2×2 operator at `site` (1-based, site 1 is the most significant bit) among `n` sites.
pub fn kron_embed(op: &HermitianMatrix, site: usize, n: usize) -> Result<HermitianMatrix> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch("site operator must be 2×2".into()));
    }
    if n == 0 || site == 0 || site > n {
        return Err(Error::InvalidArgument(format!("site {site} out of range 1..={n}")));
    }
    if n > 12 {
        return Err(Error::InvalidArgument(format!("{n} sites exceed the supported 12")));
    }
    let dim = 1usize << n;
    let shift = n - site;
    let mut m = ComplexMatrix::zeros(dim);
    for r in 0..dim {
        let br = (r >> shift) & 1;
        for bc in 0..2 {
            let c = (r & !(1 << shift)) | (bc << shift);
            m[(r, c)] = op.matrix()[(br, bc)];
        }
    }
    Ok(HermitianMatrix(m))
}

/// Deterministic uniform [−1, 1) stream from a seeded ChaCha8 generator.
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// 53-bit mantissa scaled to [−1, 1).
    pub fn next(&mut self) -> f64 {
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * u - 1.0
    }
}

/// Random Hermitian matrix (X + X*)/2 with X entries uniform in the unit square [−1,1]².
pub fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
    let mut s = UniformStream::new(seed);
    let x = ComplexMatrix::from_fn(n, |_, _| {
        let re = s.next();
        let im = s.next();
        C64::new(re, im)
    });
    HermitianMatrix::symmetrized(&x)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}
