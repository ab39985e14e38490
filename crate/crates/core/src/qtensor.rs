//! Traceless symmetric 3×3 tensors in a fixed orthonormal basis, the bulk
//! potential and the uniaxial projection.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

const INV_SQRT6: f64 = 0.408_248_290_463_863_03;
const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Normalization constant of the potential: the value of `f` at `Q = 0`.
pub const POTENTIAL_C: f64 = 2.0 / 9.0;

/// Coefficients `c` of the azimuthal penalty, `Ξ = Σ c_k a_k²`.
pub const XI_COEFFS: [f64; 5] = [0.0, 4.0, 4.0, 1.0, 1.0];

/// Default gate on the gap between the two largest eigenvalues.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Coefficients `a0..a4` of `Q = Σ a_k E_k`.
///
/// The basis is `E0 = (3 e3⊗e3 − I)/√6`, `E1 = (e1⊗e1 − e2⊗e2)/√2` and the
/// three symmetrized off-diagonal units `E2`, `E3`, `E4` for the pairs
/// (1,2), (1,3), (2,3).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QComponents(pub [f64; 5]);

/// The far-field tensor `e3⊗e3 − I/3`.
pub const Q_INF: QComponents = QComponents([0.816_496_580_927_726, 0.0, 0.0, 0.0, 0.0]);

impl QComponents {
    pub const ZERO: QComponents = QComponents([0.0; 5]);

    pub fn new(a: [f64; 5]) -> Self {
        QComponents(a)
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dot(&self, other: &QComponents) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn to_matrix(&self) -> Mat3 {
        let [a0, a1, a2, a3, a4] = self.0;
        let m11 = -a0 * INV_SQRT6 + a1 * INV_SQRT2;
        let m22 = -a0 * INV_SQRT6 - a1 * INV_SQRT2;
        let m33 = 2.0 * a0 * INV_SQRT6;
        let m12 = a2 * INV_SQRT2;
        let m13 = a3 * INV_SQRT2;
        let m23 = a4 * INV_SQRT2;
        [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]]
    }

    /// Frobenius projections onto the basis, with no symmetry or trace check.
    pub fn project_matrix(m: &Mat3) -> Self {
        let s12 = 0.5 * (m[0][1] + m[1][0]);
        let s13 = 0.5 * (m[0][2] + m[2][0]);
        let s23 = 0.5 * (m[1][2] + m[2][1]);
        QComponents([
            (-m[0][0] - m[1][1] + 2.0 * m[2][2]) * INV_SQRT6,
            (m[0][0] - m[1][1]) * INV_SQRT2,
            SQRT2 * s12,
            SQRT2 * s13,
            SQRT2 * s23,
        ])
    }

    /// Image under the reflection `z → −z`, i.e. `S Q S` with `S = diag(1,1,−1)`.
    pub fn mirrored(&self) -> Self {
        let [a0, a1, a2, a3, a4] = self.0;
        QComponents([a0, a1, a2, -a3, -a4])
    }

    /// Conjugation by the rotation of angle `phi` about `e3`.
    ///
    /// In components `(a1, a2)` turns by `2 phi` and `(a3, a4)` by `phi`.
    pub fn rotated_about_e3(&self, phi: f64) -> Self {
        let [a0, a1, a2, a3, a4] = self.0;
        let (s2, c2) = (2.0 * phi).sin_cos();
        let (s1, c1) = phi.sin_cos();
        QComponents([
            a0,
            c2 * a1 - s2 * a2,
            s2 * a1 + c2 * a2,
            c1 * a3 - s1 * a4,
            s1 * a3 + c1 * a4,
        ])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for QComponents {
    type Output = QComponents;
    fn add(self, o: QComponents) -> QComponents {
        QComponents(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for QComponents {
    type Output = QComponents;
    fn sub(self, o: QComponents) -> QComponents {
        QComponents(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Mul<QComponents> for f64 {
    type Output = QComponents;
    fn mul(self, q: QComponents) -> QComponents {
        QComponents(q.0.map(|x| self * x))
    }
}

impl Neg for QComponents {
    type Output = QComponents;
    fn neg(self) -> QComponents {
        QComponents(self.0.map(|x| -x))
    }
}

/// Expands a symmetric traceless matrix in the basis.
pub fn from_matrix(m: &Mat3) -> Result<QComponents> {
    let scale = m.iter().flatten().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let tol = 1e-10 * scale;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (m[i][j] - m[j][i]).abs() > tol {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric: entries ({i},{j}) and ({j},{i}) differ by {:.3e}",
                    m[i][j] - m[j][i]
                )));
            }
        }
    }
    let tr = m[0][0] + m[1][1] + m[2][2];
    if tr.abs() > tol {
        return Err(Error::invalid(format!("matrix trace {tr:.3e} is not zero")));
    }
    Ok(QComponents::project_matrix(m))
}

fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

fn trace(a: &Mat3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

/// Basis matrix `E_k`.
pub fn basis(k: usize) -> Mat3 {
    let mut a = [0.0; 5];
    a[k] = 1.0;
    QComponents(a).to_matrix()
}

/// Potential parameters. Only `xi` is free; `c` is forced by `min f = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    pub c: f64,
    pub xi: f64,
}

impl PotentialParams {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::invalid(format!("correlation length must be positive, got {xi}")));
        }
        Ok(PotentialParams { c: POTENTIAL_C, xi })
    }
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams { c: POTENTIAL_C, xi: 1.0 / 70.0 }
    }
}

/// `f(Q) = −|Q|²/2 − tr Q³ + 3|Q|⁴/4 + C`.
pub fn potential(q: &QComponents, params: &PotentialParams) -> f64 {
    potential_c(q, params.c)
}

pub(crate) fn potential_c(q: &QComponents, c: f64) -> f64 {
    let m = q.to_matrix();
    let s = q.norm2();
    let t = trace(&matmul(&matmul(&m, &m), &m));
    -0.5 * s - t + 0.75 * s * s + c
}

/// Gradient of the potential with respect to the components.
///
/// The components are orthonormal coordinates on traceless matrices, so this is
/// the traceless projection of `−Q − 3Q² + 3|Q|²Q`.
pub fn potential_gradient(q: &QComponents, _params: &PotentialParams) -> QComponents {
    potential_grad(q)
}

pub(crate) fn potential_grad(q: &QComponents) -> QComponents {
    let m = q.to_matrix();
    let q2 = QComponents::project_matrix(&matmul(&m, &m));
    let s = q.norm2();
    QComponents(std::array::from_fn(|k| -q.0[k] - 3.0 * q2.0[k] + 3.0 * s * q.0[k]))
}

/// Components of the traceless parts of `E_k E_l + E_l E_k`.
fn basis_products() -> &'static [[[f64; 5]; 5]; 5] {
    static TABLE: OnceLock<[[[f64; 5]; 5]; 5]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[[0.0; 5]; 5]; 5];
        for (k, row) in t.iter_mut().enumerate() {
            for (l, cell) in row.iter_mut().enumerate() {
                let ek = basis(k);
                let el = basis(l);
                let a = matmul(&ek, &el);
                let b = matmul(&el, &ek);
                let mut s = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        s[i][j] = a[i][j] + b[i][j];
                    }
                }
                *cell = QComponents::project_matrix(&s).0;
            }
        }
        t
    })
}

/// Hessian of the potential in components.
pub fn potential_hessian(q: &QComponents) -> [[f64; 5]; 5] {
    let t = basis_products();
    let a = &q.0;
    let s = q.norm2();
    let mut h = [[0.0; 5]; 5];
    for k in 0..5 {
        for l in 0..5 {
            let mut tq = 0.0;
            for m in 0..5 {
                tq += t[k][l][m] * a[m];
            }
            h[k][l] = 6.0 * a[k] * a[l] - 3.0 * tq;
        }
        h[k][k] += 3.0 * s - 1.0;
    }
    h
}

/// Azimuthal penalty `Ξ = 4(a1² + a2²) + a3² + a4²`.
pub fn xi_penalty(q: &QComponents) -> f64 {
    XI_COEFFS.iter().zip(q.0.iter()).map(|(c, a)| c * a * a).sum()
}

/// Uniaxial tensor `n⊗n − I/3` with unit director.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniaxialTensor {
    pub n: [f64; 3],
}

impl UniaxialTensor {
    pub fn new(n: [f64; 3]) -> Result<Self> {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::invalid("director must be a nonzero finite vector"));
        }
        Ok(UniaxialTensor { n: n.map(|x| x / len) })
    }

    pub fn components(&self) -> QComponents {
        uniaxial(self.n)
    }
}

/// Components of `n⊗n − I/3`; `n` is assumed to be a unit vector.
pub fn uniaxial(n: [f64; 3]) -> QComponents {
    let [x, y, z] = n;
    QComponents([
        (2.0 * z * z - x * x - y * y) * INV_SQRT6,
        (x * x - y * y) * INV_SQRT2,
        SQRT2 * x * y,
        SQRT2 * x * z,
        SQRT2 * y * z,
    ])
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// rows.
pub fn sym_eigen(m: &Mat3) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..50 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let diag = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
        if off <= f64::EPSILON * 1e-3 * diag || off < 1e-300 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
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
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let vals = idx.map(|i| a[i][i]);
    let vecs = idx.map(|i| [v[0][i], v[1][i], v[2][i]]);
    (vals, vecs)
}

/// Director of the largest eigenvalue, with a gate on the spectral gap.
pub fn leading_director(q: &QComponents, gap_tol: f64) -> Result<[f64; 3]> {
    let (vals, vecs) = sym_eigen(&q.to_matrix());
    let gap = vals[0] - vals[1];
    if !(gap > gap_tol) {
        return Err(Error::ProjectionUndefined { gap });
    }
    Ok(vecs[0])
}

/// Nearest-point projection onto the uniaxial manifold.
pub fn project_uniaxial(q: &QComponents) -> Result<UniaxialTensor> {
    project_uniaxial_with(q, DEFAULT_GAP_TOL)
}

pub fn project_uniaxial_with(q: &QComponents, gap_tol: f64) -> Result<UniaxialTensor> {
    UniaxialTensor::new(leading_director(q, gap_tol)?)
}

/// Sanity check of the normalization constant, `f(Q_∞) = 0`.
pub fn check_normalization() -> Result<()> {
    let v = potential_c(&Q_INF, POTENTIAL_C);
    if v.abs() > 1e-14 {
        return Err(Error::NumericFailure(format!("f(Q_inf) = {v:.3e}, expected 0")));
    }
    Ok(())
}
