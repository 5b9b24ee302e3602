//! g-systems, K-g-systems and their frame operators.
//!
//! A [`GSystem`] is a finite ordered family of operators `Λ_j : C^n -> C^{d_j}`.
//! Pairing it with a square `K` gives a [`KGSystem`], for which
//! [`KGSystem::optimal_bounds`] computes the best constants in
//! `A ||K* f||² <= Σ ||Λ_j f||² <= B ||f||²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{
    self, eig_extremes, hermitian_eigen, inner, op_norm, psd_sqrt_pinv, range_projector,
    relative_distance, Operator, Vector, DEFAULT_RANK_TOL,
};

/// Numerical thresholds used across bound, dual and erasure computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    /// Relative singular-value cutoff for every rank decision.
    pub rank: f64,
    /// Relative residual `||(I - P_S) K|| / ||K||` accepted as `range(K) ⊆ range(S)`.
    pub range: f64,
    /// Relative Frobenius distance accepted as equality in tightness tests.
    pub tight: f64,
    /// Defect at or below which a pair counts as an exact K-g-dual.
    pub dual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: DEFAULT_RANK_TOL,
            range: 1e-8,
            tight: 1e-8,
            dual: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GSystem {
    ambient_dim: usize,
    blocks: Vec<Operator>,
}

impl GSystem {
    /// Every block must have `ambient_dim` columns, at least one row and finite entries.
    pub fn new(ambient_dim: usize, blocks: Vec<Operator>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::BadDim("ambient dimension must be positive".into()));
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.ncols() != ambient_dim {
                return Err(Error::DimMismatch(format!(
                    "block {j} has {} columns, expected {ambient_dim}",
                    b.ncols()
                )));
            }
            if b.nrows() == 0 {
                return Err(Error::BadDim(format!(
                    "block {j} maps into a zero-dimensional space"
                )));
            }
            if !linops::is_finite(b) {
                return Err(Error::NonFinite(format!("block {j}")));
            }
        }
        Ok(GSystem {
            ambient_dim,
            blocks,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn blocks(&self) -> &[Operator] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Operator> {
        self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    /// True when both systems act on the same space with the same block dimensions.
    pub fn same_shape(&self, other: &GSystem) -> bool {
        self.ambient_dim == other.ambient_dim && self.block_dims() == other.block_dims()
    }

    /// Stacked analysis matrix `T*` of size `(Σ d_j) x n`.
    pub fn analysis_matrix(&self) -> Operator {
        let total: usize = self.blocks.iter().map(|b| b.nrows()).sum();
        let mut out = Operator::zeros(total, self.ambient_dim);
        let mut row = 0;
        for b in &self.blocks {
            out.rows_mut(row, b.nrows()).copy_from(b);
            row += b.nrows();
        }
        out
    }

    /// `T_Λ {g_j} = Σ Λ_j* g_j`.
    pub fn synthesis(&self, g: &BlockSequence) -> Result<Vector> {
        if g.parts.len() != self.blocks.len() {
            return Err(Error::DimMismatch(format!(
                "sequence has {} parts, system has {} blocks",
                g.parts.len(),
                self.blocks.len()
            )));
        }
        let mut out = Vector::zeros(self.ambient_dim);
        for (j, (b, part)) in self.blocks.iter().zip(&g.parts).enumerate() {
            if part.len() != b.nrows() {
                return Err(Error::DimMismatch(format!(
                    "part {j} has dimension {}, block maps into dimension {}",
                    part.len(),
                    b.nrows()
                )));
            }
            out += b.adjoint() * part;
        }
        Ok(out)
    }

    /// `T_Λ* f = {Λ_j f}`.
    pub fn analysis(&self, f: &Vector) -> Result<BlockSequence> {
        if f.len() != self.ambient_dim {
            return Err(Error::DimMismatch(format!(
                "vector has dimension {}, expected {}",
                f.len(),
                self.ambient_dim
            )));
        }
        Ok(BlockSequence {
            parts: self.blocks.iter().map(|b| b * f).collect(),
        })
    }

    /// `S_Λ = Σ Λ_j* Λ_j`, summed in index order.
    pub fn frame_operator(&self) -> Operator {
        let mut s = Operator::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.blocks {
            s += b.adjoint() * b;
        }
        s
    }

    /// `T_Λ T_Θ* = Σ Λ_j* Θ_j` with `self = Λ`.
    pub fn mixed_operator(&self, theta: &GSystem) -> Result<Operator> {
        if !self.same_shape(theta) {
            return Err(Error::DimMismatch(format!(
                "systems differ in shape: n={} dims={:?} vs n={} dims={:?}",
                self.ambient_dim,
                self.block_dims(),
                theta.ambient_dim,
                theta.block_dims()
            )));
        }
        let mut m = Operator::zeros(self.ambient_dim, self.ambient_dim);
        for (l, t) in self.blocks.iter().zip(&theta.blocks) {
            m += l.adjoint() * t;
        }
        Ok(m)
    }

    /// Blocks `Λ_j X` for an `n x n` operator `X`.
    pub fn compose_right(&self, x: &Operator) -> Result<GSystem> {
        if x.nrows() != self.ambient_dim || x.ncols() != self.ambient_dim {
            return Err(Error::DimMismatch(format!(
                "right factor is {}x{}, expected {n}x{n}",
                x.nrows(),
                x.ncols(),
                n = self.ambient_dim
            )));
        }
        GSystem::new(
            self.ambient_dim,
            self.blocks.iter().map(|b| b * x).collect(),
        )
    }

    pub fn scaled(&self, c: Complex64) -> GSystem {
        GSystem {
            ambient_dim: self.ambient_dim,
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    /// Subsystem over `keep`, in the given order.
    pub fn select(&self, keep: &[usize]) -> Result<GSystem> {
        let mut blocks = Vec::with_capacity(keep.len());
        for &j in keep {
            let b = self.blocks.get(j).ok_or(Error::BadIndex {
                index: j,
                len: self.blocks.len(),
            })?;
            blocks.push(b.clone());
        }
        Ok(GSystem {
            ambient_dim: self.ambient_dim,
            blocks,
        })
    }

    /// Subsystem with the indices in `removed` erased.
    pub fn without(&self, removed: &[usize]) -> Result<GSystem> {
        if let Some(&bad) = removed.iter().find(|&&j| j >= self.blocks.len()) {
            return Err(Error::BadIndex {
                index: bad,
                len: self.blocks.len(),
            });
        }
        let keep: Vec<usize> = (0..self.blocks.len())
            .filter(|j| !removed.contains(j))
            .collect();
        self.select(&keep)
    }
}

/// An element of `ℓ²({H_j})`: one vector per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSequence {
    pub parts: Vec<Vector>,
}

impl BlockSequence {
    pub fn new(parts: Vec<Vector>) -> Self {
        BlockSequence { parts }
    }

    pub fn zeros(sys: &GSystem) -> Self {
        BlockSequence {
            parts: sys.block_dims().into_iter().map(Vector::zeros).collect(),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.parts.iter().map(|p| p.norm_squared()).sum()
    }

    /// `Σ_j <f_j, g_j>`; parts must agree in dimension.
    pub fn inner(&self, other: &BlockSequence) -> Result<Complex64> {
        if self.parts.len() != other.parts.len() {
            return Err(Error::DimMismatch("sequences differ in length".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.parts.iter().zip(&other.parts) {
            if a.len() != b.len() {
                return Err(Error::DimMismatch(
                    "sequence parts differ in dimension".into(),
                ));
            }
            acc += inner(a, b);
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KGSystem {
    system: GSystem,
    k: Operator,
}

impl KGSystem {
    pub fn new(system: GSystem, k: Operator) -> Result<Self> {
        let n = system.ambient_dim();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::DimMismatch(format!(
                "K is {}x{}, expected {n}x{n}",
                k.nrows(),
                k.ncols()
            )));
        }
        if !linops::is_finite(&k) {
            return Err(Error::NonFinite("K".into()));
        }
        Ok(KGSystem { system, k })
    }

    /// Ordinary g-system: `K = I`.
    pub fn with_identity(system: GSystem) -> Self {
        let n = system.ambient_dim();
        KGSystem {
            system,
            k: linops::identity(n),
        }
    }

    pub fn system(&self) -> &GSystem {
        &self.system
    }

    pub fn k(&self) -> &Operator {
        &self.k
    }

    pub fn ambient_dim(&self) -> usize {
        self.system.ambient_dim()
    }

    pub fn with_system(&self, system: GSystem) -> Result<KGSystem> {
        KGSystem::new(system, self.k.clone())
    }

    /// Relative residual `||(I - P_S) K|| / ||K||` of the range inclusion.
    pub fn range_residual(&self, rank_tol: f64) -> f64 {
        let s = self.system.frame_operator();
        range_residual(&s, &self.k, rank_tol)
    }

    pub fn optimal_bounds(&self) -> BoundReport {
        self.optimal_bounds_with(&Tolerances::default())
    }

    pub fn optimal_bounds_with(&self, tol: &Tolerances) -> BoundReport {
        let s = self.system.frame_operator();
        let (lo, hi) = eig_extremes(&s);
        let g_lower_opt = lo.max(0.0);
        let bessel_upper_opt = hi.max(g_lower_opt);
        let residual = range_residual(&s, &self.k, tol.rank);
        let kg_lower_opt = if residual <= tol.range {
            douglas_lower_bound(&s, &self.k, tol.rank)
        } else {
            None
        };
        let kkt = &self.k * self.k.adjoint();
        let tight = kg_lower_opt
            .filter(|&a| relative_distance(&s, &(&kkt * Complex64::new(a, 0.0))) <= tol.tight);
        BoundReport {
            bessel_upper_opt,
            g_lower_opt,
            kg_lower_opt,
            tight_kg: tight.is_some(),
            tightness_constant: tight,
            range_residual: residual,
        }
    }

    /// Classification with rank tolerance `tol` and default thresholds otherwise.
    pub fn classify(&self, tol: f64) -> Classification {
        self.classify_with(&Tolerances {
            rank: tol,
            ..Tolerances::default()
        })
    }

    pub fn classify_with(&self, tol: &Tolerances) -> Classification {
        let bounds = self.optimal_bounds_with(tol);
        let is_kg_frame = bounds.kg_lower_opt.is_some();
        let is_g_frame = bounds.bessel_upper_opt > 0.0
            && bounds.g_lower_opt > tol.rank * bounds.bessel_upper_opt;
        let is_tight_g = is_g_frame
            && bounds.bessel_upper_opt - bounds.g_lower_opt <= tol.tight * bounds.bessel_upper_opt;
        let kstar_lower = linops::min_singular_value(&self.k.adjoint());
        let k_norm = op_norm(&self.k);
        let kstar_bounded_below = k_norm > 0.0 && kstar_lower > tol.rank * k_norm;
        let class = if is_tight_g {
            FrameClass::TightGFrame
        } else if is_g_frame {
            FrameClass::GFrame
        } else if bounds.tight_kg {
            FrameClass::TightKGFrame
        } else if is_kg_frame {
            FrameClass::KGFrame
        } else {
            FrameClass::GBesselOnly
        };
        Classification {
            class,
            is_kg_frame,
            is_g_frame,
            is_tight_kg: bounds.tight_kg,
            is_tight_g,
            kstar_lower,
            g_frame_implied: kstar_bounded_below && is_kg_frame,
            bounds,
        }
    }
}

fn range_residual(s: &Operator, k: &Operator, rank_tol: f64) -> f64 {
    let k_norm = op_norm(k);
    if k_norm == 0.0 {
        return 0.0;
    }
    let p = range_projector(s, rank_tol);
    op_norm(&(k - &p * k)) / k_norm
}

/// `1 / ||S^{†/2} K||²`, the largest `A` with `S ⪰ A K K*` when
/// `range(K) ⊆ range(S)`. `None` when `K = 0` (every `A` works).
fn douglas_lower_bound(s: &Operator, k: &Operator, rank_tol: f64) -> Option<f64> {
    let half = psd_sqrt_pinv(s, rank_tol).ok()?;
    let norm = op_norm(&(half * k));
    if norm > 0.0 {
        Some(1.0 / (norm * norm))
    } else {
        None
    }
}

/// Independent route to the optimal lower K-g bound:
/// bisection for `sup { A : λ_min(S - A K K*) >= -eig_tol }`.
pub fn bisect_kg_lower(ksys: &KGSystem, eig_tol: f64) -> f64 {
    let s = ksys.system().frame_operator();
    let kkt = ksys.k() * ksys.k().adjoint();
    let (vals, vecs) = hermitian_eigen(&kkt);
    let top = match vals.last() {
        Some(&v) if v > 0.0 => v,
        _ => return f64::INFINITY,
    };
    let u = vecs.column(vals.len() - 1).into_owned();
    let rayleigh = inner(&(&s * &u), &u).re;
    let feasible = |a: f64| {
        let (lo, _) = eig_extremes(&(&s - &kkt * Complex64::new(a, 0.0)));
        lo >= -eig_tol
    };
    let mut lo = 0.0;
    let mut hi = (rayleigh + 2.0 * eig_tol) / top;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

/// Optimal frame constants of a K-g-system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub bessel_upper_opt: f64,
    pub g_lower_opt: f64,
    /// Absent when `range(K) ⊄ range(S_Λ)` or `K = 0`.
    pub kg_lower_opt: Option<f64>,
    #[serde(rename = "tightKG")]
    pub tight_kg: bool,
    pub tightness_constant: Option<f64>,
    pub range_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FrameClass {
    GBesselOnly,
    #[serde(rename = "KGFrame")]
    KGFrame,
    GFrame,
    #[serde(rename = "tightKGFrame")]
    TightKGFrame,
    TightGFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Classification {
    pub class: FrameClass,
    #[serde(rename = "isKGFrame")]
    pub is_kg_frame: bool,
    pub is_g_frame: bool,
    #[serde(rename = "isTightKG")]
    pub is_tight_kg: bool,
    pub is_tight_g: bool,
    /// Largest `C` with `||K* f|| >= C ||f||`.
    pub kstar_lower: f64,
    /// `K*` bounded below and the system is a K-g-frame, so it is a g-frame.
    pub g_frame_implied: bool,
    pub bounds: BoundReport,
}
