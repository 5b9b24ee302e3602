//! Generators and transformers of K-g-systems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsystem::{GSystem, KGSystem, Tolerances};
use crate::linops::{self, eig_extremes, op_norm, Operator, Svd, Vector};
use crate::random::{complex_gaussian_matrix, rng};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Truncation of the two-dimensional-block system `Λ_j f = <f, e_j + e_{j+1}> (e_j + e_{j+1})`
/// with `K e_j = e_j + e_{j+1}`, for `j = 1..n-1`.
///
/// Block `j` is written in the basis `(e_j, e_{j+1})` of its target space.
pub fn example1(n: usize) -> Result<KGSystem> {
    if n < 3 {
        return Err(Error::BadDim(format!("example1 needs n >= 3, got {n}")));
    }
    let mut blocks = Vec::with_capacity(n - 1);
    let mut k = Operator::zeros(n, n);
    for j in 0..n - 1 {
        let mut b = Operator::zeros(2, n);
        for r in 0..2 {
            b[(r, j)] = one();
            b[(r, j + 1)] = one();
        }
        blocks.push(b);
        k[(j, j)] = one();
        k[(j + 1, j)] = one();
    }
    KGSystem::new(GSystem::new(n, blocks)?, k)
}

/// `n/3` three-dimensional blocks; `Λ_1` is the coordinate map onto
/// `span{e_1, e_2, e_3}`, every other block is zero, and `K` projects onto
/// `span{e_1, e_2}`.
pub fn example2(n: usize) -> Result<KGSystem> {
    if n < 6 || !n.is_multiple_of(3) {
        return Err(Error::BadDim(format!(
            "example2 needs n >= 6 divisible by 3, got {n}"
        )));
    }
    let mut blocks = vec![Operator::zeros(3, n); n / 3];
    for i in 0..3 {
        blocks[0][(i, i)] = one();
    }
    let mut k = Operator::zeros(n, n);
    k[(0, 0)] = one();
    k[(1, 1)] = one();
    KGSystem::new(GSystem::new(n, blocks)?, k)
}

const GENERATION_ATTEMPTS: usize = 10;

/// Seeded random K-g-system: Gaussian blocks of the given dimensions and a
/// Gaussian `K` of rank `rank_k`.
///
/// When the blocks cannot span `C^n` (`Σ d_j < n`), the column factor of `K`
/// is drawn inside `range(S_Λ)` so the range condition can hold.
pub fn random_kg_system(n: usize, dims: &[usize], rank_k: usize, seed: u64) -> Result<KGSystem> {
    if n == 0 {
        return Err(Error::BadDim("n must be positive".into()));
    }
    if rank_k == 0 || rank_k > n {
        return Err(Error::BadDim(format!(
            "rank of K must lie in 1..={n}, got {rank_k}"
        )));
    }
    if let Some(j) = dims.iter().position(|&d| d == 0) {
        return Err(Error::BadDim(format!("block {j} has dimension 0")));
    }
    let tol = Tolerances::default();
    let total: usize = dims.iter().sum();
    let mut r = rng(seed);
    for _ in 0..GENERATION_ATTEMPTS {
        let blocks = dims
            .iter()
            .map(|&d| complex_gaussian_matrix(&mut r, d, n))
            .collect();
        let sys = GSystem::new(n, blocks)?;
        let left = if total >= n {
            complex_gaussian_matrix(&mut r, n, rank_k)
        } else {
            sys.analysis_matrix().adjoint() * complex_gaussian_matrix(&mut r, total, rank_k)
        };
        let k = left * complex_gaussian_matrix(&mut r, rank_k, n);
        let ksys = KGSystem::new(sys, k)?;
        let rank_ok = Svd::new(ksys.k()).rank(tol.rank) == rank_k;
        if rank_ok && ksys.range_residual(tol.rank) <= tol.range {
            return Ok(ksys);
        }
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
    })
}

/// Rescales every nonzero block to unit operator norm.
pub fn normalize_blocks(sys: &GSystem) -> GSystem {
    let blocks = sys
        .blocks()
        .iter()
        .map(|b| {
            let n = op_norm(b);
            if n > 0.0 {
                b / Complex64::new(n, 0.0)
            } else {
                b.clone()
            }
        })
        .collect();
    GSystem::new(sys.ambient_dim(), blocks).expect("rescaling preserves shape")
}

/// Semi-normalization witnesses `a = min |w_j|`, `b = max |w_j|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBounds {
    pub a: f64,
    pub b: f64,
}

fn weight_bounds(sys: &GSystem, w: &[Complex64]) -> Result<WeightBounds> {
    if w.len() != sys.len() {
        return Err(Error::DimMismatch(format!(
            "{} weights for {} blocks",
            w.len(),
            sys.len()
        )));
    }
    let mut a = f64::INFINITY;
    let mut b: f64 = 0.0;
    for (j, wj) in w.iter().enumerate() {
        let m = wj.norm();
        if !m.is_finite() {
            return Err(Error::NonFinite(format!("weight {j}")));
        }
        if m == 0.0 {
            return Err(Error::ZeroWeight { index: j });
        }
        a = a.min(m);
        b = b.max(m);
    }
    if w.is_empty() {
        a = 1.0;
        b = 1.0;
    }
    Ok(WeightBounds { a, b })
}

/// Blocks `w_j Λ_j` with `K` unchanged.
pub fn scale_weights(ksys: &KGSystem, w: &[Complex64]) -> Result<(KGSystem, WeightBounds)> {
    let bounds = weight_bounds(ksys.system(), w)?;
    let blocks = ksys
        .system()
        .blocks()
        .iter()
        .zip(w)
        .map(|(b, &wj)| b * wj)
        .collect();
    let sys = GSystem::new(ksys.ambient_dim(), blocks)?;
    Ok((ksys.with_system(sys)?, bounds))
}

/// The dual partner of a weighted system: blocks `conj(w_j)^{-1} Θ_j`, so that
/// `(w_j Λ_j)* (conj(w_j)^{-1} Θ_j) = Λ_j* Θ_j`. For real weights this is `w_j^{-1} Θ_j`.
pub fn scale_dual_weights(theta: &GSystem, w: &[Complex64]) -> Result<GSystem> {
    weight_bounds(theta, w)?;
    let blocks = theta
        .blocks()
        .iter()
        .zip(w)
        .map(|(b, &wj)| b * wj.conj().inv())
        .collect();
    GSystem::new(theta.ambient_dim(), blocks)
}

/// Per-index vector frames `{f_{i,j}}_i` for the block target spaces `H_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFrameFamily {
    families: Vec<Vec<Vector>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SubspaceFrameFamily {
    /// Checks that family `j` is a frame for `C^{d_j}`, where `d_j` is the
    /// common length of its vectors.
    pub fn new(families: Vec<Vec<Vector>>) -> Result<Self> {
        let mut lower = Vec::with_capacity(families.len());
        let mut upper = Vec::with_capacity(families.len());
        for (j, fam) in families.iter().enumerate() {
            let d = fam
                .first()
                .map(|v| v.len())
                .ok_or(Error::NotAFrame { index: j })?;
            if d == 0 || fam.iter().any(|v| v.len() != d) {
                return Err(Error::DimMismatch(format!(
                    "family {j} mixes vector dimensions"
                )));
            }
            if fam
                .iter()
                .any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
            {
                return Err(Error::NonFinite(format!("family {j}")));
            }
            let (lo, hi) = eig_extremes(&family_frame_operator(fam));
            if lo.is_nan() || lo <= linops::DEFAULT_RANK_TOL * hi {
                return Err(Error::NotAFrame { index: j });
            }
            lower.push(lo);
            upper.push(hi);
        }
        Ok(SubspaceFrameFamily {
            families,
            lower,
            upper,
        })
    }

    /// Standard basis of each `C^{d_j}`.
    pub fn orthonormal(dims: &[usize]) -> Result<Self> {
        Self::new(
            dims.iter()
                .map(|&d| {
                    (0..d)
                        .map(|i| {
                            Vector::from_fn(d, |r, _| {
                                if r == i {
                                    one()
                                } else {
                                    Complex64::new(0.0, 0.0)
                                }
                            })
                        })
                        .collect()
                })
                .collect(),
        )
    }

    /// Gaussian frames with `d_j + extra` vectors per index.
    pub fn random(dims: &[usize], extra: usize, seed: u64) -> Result<Self> {
        let mut r = rng(seed);
        let families = dims
            .iter()
            .map(|&d| {
                let m = complex_gaussian_matrix(&mut r, d, d + extra);
                m.column_iter().map(|c| c.into_owned()).collect()
            })
            .collect();
        Self::new(families)
    }

    pub fn families(&self) -> &[Vec<Vector>] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.families.iter().map(|f| f[0].len()).collect()
    }

    /// Optimal frame bounds `(C_j, D_j)` of family `j`.
    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// `C = inf C_j`.
    pub fn lower(&self) -> f64 {
        self.lower.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `D = sup D_j`.
    pub fn upper(&self) -> f64 {
        self.upper.iter().copied().fold(0.0, f64::max)
    }

    /// Canonical dual `{F_j^{-1} f_{i,j}}_i` of family `j`.
    pub fn canonical_dual(&self, j: usize) -> Vec<Vector> {
        let fam = &self.families[j];
        let inv = family_frame_operator(fam)
            .try_inverse()
            .expect("frame operator checked invertible");
        fam.iter().map(|f| &inv * f).collect()
    }

    fn check_against(&self, sys: &GSystem) -> Result<()> {
        if self.dims() != sys.block_dims() {
            return Err(Error::DimMismatch(format!(
                "family dimensions {:?} do not match block dimensions {:?}",
                self.dims(),
                sys.block_dims()
            )));
        }
        Ok(())
    }
}

fn family_frame_operator(fam: &[Vector]) -> Operator {
    let d = fam[0].len();
    let mut s = Operator::zeros(d, d);
    for f in fam {
        s += f * f.adjoint();
    }
    s
}

/// Composition with vector frames of the block spaces: the flattened system
/// of rows `h ↦ <Λ_j h, f_{i,j}>`, ordered by `j` then `i`, with `K` unchanged.
pub fn compose(ksys: &KGSystem, fams: &SubspaceFrameFamily) -> Result<KGSystem> {
    fams.check_against(ksys.system())?;
    let mut blocks = Vec::new();
    for (lam, fam) in ksys.system().blocks().iter().zip(fams.families()) {
        for f in fam {
            let row = f.adjoint() * lam;
            let row = Operator::from_row_slice(1, row.ncols(), row.as_slice());
            blocks.push(row);
        }
    }
    ksys.with_system(GSystem::new(ksys.ambient_dim(), blocks)?)
}

/// Both directions of "tight g-frame with constant `A_2` iff `K K* = (A_2/A_1) I`"
/// for a tight K-g-frame with constant `A_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TightRelationReport {
    pub a1: f64,
    pub tight_g: bool,
    pub a2: Option<f64>,
    /// `c` with `K K* = c I`, when `K K*` is scalar.
    pub kk_scalar: Option<f64>,
    /// `||K K* - (A_2/A_1) I||` when the system is a tight g-frame.
    pub forward_deviation: Option<f64>,
    /// Whether `S = c A_1 I` holds when `K K* = c I`.
    pub converse_holds: Option<bool>,
    /// `tight_g` agrees with `K K*` being scalar.
    pub iff_holds: bool,
}

pub fn tight_relation_check(ksys: &KGSystem, tol: f64) -> Result<TightRelationReport> {
    let bounds = ksys.optimal_bounds();
    let a1 = bounds.tightness_constant.ok_or(Error::NotTightKG)?;
    let n = ksys.ambient_dim();
    let s = ksys.system().frame_operator();
    let (lo, hi) = eig_extremes(&s);
    let tight_g = lo > 0.0 && hi - lo <= tol * hi;
    let a2 = tight_g.then(|| s.trace().re / n as f64);
    let kkt = ksys.k() * ksys.k().adjoint();
    let c = kkt.trace().re / n as f64;
    let id = linops::identity(n);
    let kk_is_scalar =
        op_norm(&(&kkt - &id * Complex64::new(c, 0.0))) <= tol * op_norm(&kkt).max(1.0);
    let kk_scalar = kk_is_scalar.then_some(c);
    let forward_deviation = a2.map(|a2| op_norm(&(&kkt - &id * Complex64::new(a2 / a1, 0.0))));
    let converse_holds = kk_scalar
        .map(|c| linops::relative_distance(&s, &(&id * Complex64::new(c * a1, 0.0))) <= tol);
    Ok(TightRelationReport {
        a1,
        tight_g,
        a2,
        kk_scalar,
        forward_deviation,
        converse_holds,
        iff_holds: tight_g == kk_is_scalar,
    })
}
