//! Symmetric 2×2 / 3×3 tensors, fourth-order operators on them, and the
//! symmetric eigendecomposition.

use std::f64::consts::SQRT_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Number of packed entries of a symmetric `dim × dim` matrix.
#[inline]
pub const fn packed_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Packed (upper triangle, row-major) position of entry `(i, j)`.
#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if dim == 2 {
        i + j
    } else {
        // rows: (0,0..3) -> 0..3, (1,1..3) -> 3..5, (2,2) -> 5
        match i {
            0 => j,
            1 => 2 + j,
            _ => 5,
        }
    }
}

/// Symmetric `dim × dim` tensor, `dim ∈ {2, 3}`, stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor {
    dim: usize,
    v: [f64; 6],
}

impl SymTensor {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "tensor dimension must be 2 or 3");
        SymTensor { dim, v: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.set(i, i, 1.0);
        }
        t
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut t = Self::zeros(values.len());
        for (i, &x) in values.iter().enumerate() {
            t.set(i, i, x);
        }
        t
    }

    /// Build from the packed upper triangle.
    pub fn from_packed(dim: usize, packed: &[f64]) -> Self {
        let mut t = Self::zeros(dim);
        assert_eq!(packed.len(), packed_len(dim));
        t.v[..packed.len()].copy_from_slice(packed);
        t
    }

    /// Build from a full matrix; only the upper triangle is read.
    pub fn from_matrix(dim: usize, a: &[[f64; 3]; 3]) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, a[i][j]);
            }
        }
        t
    }

    /// Symmetric part `½(G + Gᵀ)` of a general matrix.
    pub fn sym_part(dim: usize, g: &[[f64; 3]; 3]) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, 0.5 * (g[i][j] + g[j][i]));
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn packed(&self) -> &[f64] {
        &self.v[..packed_len(self.dim)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[packed_index(self.dim, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.v[packed_index(self.dim, i, j)] = x;
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate().take(self.dim) {
            for (j, x) in row.iter_mut().enumerate().take(self.dim) {
                *x = self.get(i, j);
            }
        }
        a
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &SymTensor) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let a = self.to_mandel();
        let b = other.to_mandel();
        a.iter().zip(&b).map(|(x, y)| x * y).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Deviatoric part `ε − (tr ε / m) I`.
    pub fn dev(&self) -> SymTensor {
        let mut d = *self;
        let t = self.trace() / self.dim as f64;
        for i in 0..self.dim {
            d.set(i, i, self.get(i, i) - t);
        }
        d
    }

    /// Coordinates in the orthonormal Mandel basis (off-diagonals scaled by √2).
    pub fn to_mandel(&self) -> [f64; 6] {
        let mut m = [0.0; 6];
        for i in 0..self.dim {
            for j in i..self.dim {
                let p = packed_index(self.dim, i, j);
                m[p] = if i == j { self.v[p] } else { SQRT_2 * self.v[p] };
            }
        }
        m
    }

    pub fn from_mandel(dim: usize, m: &[f64]) -> SymTensor {
        let mut t = SymTensor::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let p = packed_index(dim, i, j);
                t.v[p] = if i == j { m[p] } else { m[p] / SQRT_2 };
            }
        }
        t
    }

    /// `Q diag(values) Qᵀ` for column eigenvectors `Q`.
    pub fn from_spectral(dim: usize, values: &[f64; 3], q: &[[f64; 3]; 3]) -> SymTensor {
        let mut t = SymTensor::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let s: f64 = (0..dim).map(|k| q[i][k] * values[k] * q[j][k]).sum();
                t.set(i, j, s);
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> SymTensor {
        let mut t = *self;
        t.v.iter_mut().for_each(|x| *x *= s);
        t
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(mut self, rhs: SymTensor) -> SymTensor {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.v.iter_mut().zip(rhs.v) {
            *a += b;
        }
        self
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, rhs: SymTensor) {
        *self = *self + rhs;
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(self, rhs: SymTensor) -> SymTensor {
        self + (-rhs)
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        self.scale(-1.0)
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    fn mul(self, rhs: SymTensor) -> SymTensor {
        rhs.scale(self)
    }
}

/// Self-adjoint linear map on symmetric tensors (a fourth-order tensor with
/// minor and major symmetries), stored as a symmetric matrix in the Mandel basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymOp {
    dim: usize,
    m: [[f64; 6]; 6],
}

impl SymOp {
    pub fn zeros(dim: usize) -> Self {
        SymOp { dim, m: [[0.0; 6]; 6] }
    }

    /// Fourth-order identity.
    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..packed_len(dim) {
            op.m[i][i] = 1.0;
        }
        op
    }

    /// `a ⊗ b`, i.e. `E ↦ ⟨b, E⟩ a`.
    pub fn outer(a: &SymTensor, b: &SymTensor) -> Self {
        let (am, bm) = (a.to_mandel(), b.to_mandel());
        let mut op = Self::zeros(a.dim());
        let n = packed_len(a.dim());
        for i in 0..n {
            for j in 0..n {
                op.m[i][j] = am[i] * bm[j];
            }
        }
        op
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mandel matrix, `packed_len(dim)` leading rows/columns are meaningful.
    #[inline]
    pub fn mandel(&self) -> &[[f64; 6]; 6] {
        &self.m
    }

    #[inline]
    pub fn mandel_mut(&mut self) -> &mut [[f64; 6]; 6] {
        &mut self.m
    }

    pub fn apply(&self, e: &SymTensor) -> SymTensor {
        let n = packed_len(self.dim);
        let em = e.to_mandel();
        let mut out = [0.0; 6];
        for i in 0..n {
            out[i] = (0..n).map(|j| self.m[i][j] * em[j]).sum();
        }
        SymTensor::from_mandel(self.dim, &out)
    }

    /// `⟨e, Op e⟩`.
    pub fn quad(&self, e: &SymTensor) -> f64 {
        self.apply(e).inner(e)
    }

    pub fn add_scaled(&mut self, s: f64, other: &SymOp) {
        for (ra, rb) in self.m.iter_mut().zip(&other.m) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += s * b;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> SymOp {
        let mut r = SymOp::zeros(self.dim);
        r.add_scaled(s, self);
        r
    }
}

/// Result of [`eig_sym`]: ascending eigenvalues and matching orthonormal
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub dim: usize,
    pub values: [f64; 3],
    pub vectors: [[f64; 3]; 3],
}

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 30;

/// Eigendecomposition of a symmetric tensor with eigenvalues in ascending order.
///
/// Closed form for `dim = 2`, cyclic Jacobi with the fixed pivot order
/// (0,1), (0,2), (1,2) for `dim = 3`.
pub fn eig_sym(a: &SymTensor) -> SymEigen {
    match a.dim() {
        2 => eig_sym2(a),
        _ => eig_sym3(a),
    }
}

fn eig_sym2(a: &SymTensor) -> SymEigen {
    let (x, b, z) = (a.get(0, 0), a.get(0, 1), a.get(1, 1));
    let mean = 0.5 * (x + z);
    let half = 0.5 * (x - z);
    let r = half.hypot(b);
    let theta = 0.5 * (2.0 * b).atan2(x - z);
    let (s, c) = theta.sin_cos();
    let mut vectors = [[0.0; 3]; 3];
    // column 0: smaller eigenvalue, column 1: larger one
    vectors[0][0] = -s;
    vectors[1][0] = c;
    vectors[0][1] = c;
    vectors[1][1] = s;
    SymEigen {
        dim: 2,
        values: [mean - r, mean + r, 0.0],
        vectors,
    }
}

fn eig_sym3(t: &SymTensor) -> SymEigen {
    let mut a = t.to_matrix();
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = t.norm();
    if scale > 0.0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off = (2.0 * (a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2))).sqrt();
            if off <= JACOBI_TOL * scale {
                break;
            }
            for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (k, &o) in order.iter().enumerate() {
        values[k] = a[o][o];
        for r in 0..3 {
            vectors[r][k] = v[r][o];
        }
    }
    SymEigen {
        dim: 3,
        values,
        vectors,
    }
}

fn jacobi_rotate(a: &mut [[f64; 3]; 3], v: &mut [[f64; 3]; 3], p: usize, q: usize) {
    let apq = a[p][q];
    if apq == 0.0 {
        return;
    }
    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    for k in 0..3 {
        let akp = a[k][p];
        let akq = a[k][q];
        a[k][p] = c * akp - s * akq;
        a[k][q] = s * akp + c * akq;
    }
    for k in 0..3 {
        let apk = a[p][k];
        let aqk = a[q][k];
        a[p][k] = c * apk - s * aqk;
        a[q][k] = s * apk + c * aqk;
    }
    a[p][q] = 0.0;
    a[q][p] = 0.0;
    for row in v.iter_mut() {
        let vp = row[p];
        let vq = row[q];
        row[p] = c * vp - s * vq;
        row[q] = s * vp + c * vq;
    }
}
