//! Dense complex operator algebra.
//!
//! Operators are plain `nalgebra` matrices over `Complex64`. Every rank
//! decision in the crate goes through this module so that a single relative
//! singular-value threshold (`tol * sigma_max`) governs all of them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Scalar = Complex64;
pub type Vector = DVector<Complex64>;
pub type Operator = DMatrix<Complex64>;

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Thin singular value decomposition with singular values sorted in
/// decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Operator,
    pub singular_values: Vec<f64>,
    pub v_adjoint: Operator,
}

impl Svd {
    pub fn new(m: &Operator) -> Self {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return Svd {
                u: Operator::zeros(rows, 0),
                singular_values: Vec::new(),
                v_adjoint: Operator::zeros(0, cols),
            };
        }
        // Work on the tall orientation: m = U S V*  <=>  m* = V S U*.
        let (u, values, v) = if rows >= cols {
            jacobi_svd(m.clone())
        } else {
            let (v, values, u) = jacobi_svd(m.adjoint());
            (u, values, v)
        };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut su = Operator::zeros(rows, k);
        let mut svt = Operator::zeros(k, cols);
        let mut sv = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            su.set_column(dst, &u.column(src));
            svt.set_row(dst, &v.column(src).adjoint());
            sv.push(values[src]);
        }
        Svd {
            u: su,
            singular_values: sv,
            v_adjoint: svt,
        }
    }

    pub fn max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `tol * sigma_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let cutoff = tol * self.max();
        self.singular_values
            .iter()
            .take_while(|&&s| s > cutoff && s > 0.0)
            .count()
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD of a tall matrix `a` (`rows >= cols`).
///
/// Returns `(U, sigma, V)` with `a = U diag(sigma) V*`, `U` having `cols`
/// columns; columns of `U` belonging to zero singular values are zero.
fn jacobi_svd(mut a: Operator) -> (Operator, Vec<f64>, Operator) {
    let (rows, cols) = a.shape();
    let mut v = Operator::identity(cols, cols);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let mag = gamma.norm();
                if mag == 0.0 || mag <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / mag).conj();
                let zeta = (beta - alpha) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, p, q, phase, c, s);
                rotate_columns(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut values = Vec::with_capacity(cols);
    let mut u = Operator::zeros(rows, cols);
    for j in 0..cols {
        let sigma = a.column(j).norm();
        values.push(sigma);
        if sigma > 0.0 {
            u.set_column(j, &(a.column(j) / Complex64::new(sigma, 0.0)));
        }
    }
    (u, values, v)
}

fn rotate_columns(m: &mut Operator, p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let mp = m[(i, p)];
        let mq = m[(i, q)] * phase;
        m[(i, p)] = mp * c - mq * s;
        m[(i, q)] = mp * s + mq * c;
    }
}

/// Replaces `tol = 0` by a machine-precision threshold scaled by the matrix size.
pub fn effective_tol(tol: f64, m: &Operator) -> f64 {
    if tol > 0.0 {
        tol
    } else {
        m.nrows().max(m.ncols()).max(1) as f64 * f64::EPSILON
    }
}

pub fn adjoint(m: &Operator) -> Operator {
    m.adjoint()
}

/// Inner product, linear in the first argument.
pub fn inner(x: &Vector, y: &Vector) -> Scalar {
    y.dotc(x)
}

pub fn is_finite(m: &Operator) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn identity(n: usize) -> Operator {
    Operator::identity(n, n)
}

/// Embeds a real matrix given row by row.
pub fn from_real_rows(rows: &[&[f64]]) -> Operator {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    Operator::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
}

pub fn real_diag(d: &[f64]) -> Operator {
    let n = d.len();
    Operator::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(d[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Moore-Penrose pseudo-inverse; singular values at or below `tol * sigma_max`
/// are treated as zero.
pub fn pinv(m: &Operator, tol: f64) -> Operator {
    let tol = effective_tol(tol, m);
    let svd = Svd::new(m);
    let r = svd.rank(tol);
    let mut out = Operator::zeros(m.ncols(), m.nrows());
    for k in 0..r {
        let inv = 1.0 / svd.singular_values[k];
        let v = svd.v_adjoint.row(k).adjoint();
        let u = svd.u.column(k);
        out += (v * u.adjoint()) * Complex64::new(inv, 0.0);
    }
    out
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &Operator) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    Svd::new(m).max()
}

/// Smallest singular value among the `min(rows, cols)` singular values.
pub fn min_singular_value(m: &Operator) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    Svd::new(m).singular_values.last().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the numerical column space of `m`.
pub fn range_basis(m: &Operator, tol: f64) -> Operator {
    let tol = effective_tol(tol, m);
    let svd = Svd::new(m);
    let r = svd.rank(tol);
    svd.u.columns(0, r).into_owned()
}

/// Orthogonal projector onto the numerical column space of `m`.
pub fn range_projector(m: &Operator, tol: f64) -> Operator {
    let basis = range_basis(m, tol);
    &basis * basis.adjoint()
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &Operator) -> (Vec<f64>, Operator) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Operator::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vecs = Operator::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
        vals.push(eig.eigenvalues[src]);
    }
    (vals, vecs)
}

pub fn hermitian_part(m: &Operator) -> Operator {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Extreme eigenvalues `(min, max)` of the Hermitian part of `m`.
pub fn eig_extremes(m: &Operator) -> (f64, f64) {
    let (vals, _) = hermitian_eigen(m);
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// Pseudo-inverse of the PSD square root of `m`.
///
/// `m` must be Hermitian and positive semidefinite up to `tol * ||m||`.
/// Eigenvalues at or below `tol * lambda_max` are treated as zero.
pub fn psd_sqrt_pinv(m: &Operator, tol: f64) -> Result<Operator> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let tol = effective_tol(tol, m);
    let norm = op_norm(m);
    let asymmetry = (m - m.adjoint()).norm();
    if asymmetry > tol * norm.max(f64::MIN_POSITIVE) * (m.nrows() as f64).sqrt() {
        return Err(Error::NotHermitian {
            asymmetry: asymmetry / norm.max(f64::MIN_POSITIVE),
        });
    }
    let (vals, vecs) = hermitian_eigen(m);
    let threshold = tol * norm;
    if let Some(&min) = vals.first() {
        if min < -threshold {
            return Err(Error::NotPsd {
                min_eig: min,
                threshold,
            });
        }
    }
    let n = m.nrows();
    let mut out = Operator::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam > threshold && lam > 0.0 {
            let v = vecs.column(k);
            out += (v * v.adjoint()) * Complex64::new(1.0 / lam.sqrt(), 0.0);
        }
    }
    Ok(out)
}

/// Relative Frobenius distance `||a - b||_F / max(||a||_F, ||b||_F)`; zero when both vanish.
pub fn relative_distance(a: &Operator, b: &Operator) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
