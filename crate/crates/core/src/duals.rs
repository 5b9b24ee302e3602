//! Exact and approximate K-g-duals, Neumann-series reconstruction and the
//! lift of g-dual pairs to vector-frame pairs.
//!
//! Operators on `R(K)` are carried as full `n x n` matrices composed with the
//! orthogonal projector `P` onto `R(K)`. With `M = T_Λ T_Θ* = Σ Λ_j* Θ_j` the
//! defect of a pair is `||(I - M) P||`.
//!
//! The Neumann constructions (exactification, truncated duals, reconstruction)
//! treat `I_{R(K)} - M` as an operator on `R(K)`. Their guarantees hold when
//! `M` maps `R(K)` into itself; [`DualCertificate::leakage`] measures
//! `||(I - P) M P||` so callers can see when that fails.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructions::SubspaceFrameFamily;
use crate::error::{Error, Result};
use crate::gsystem::{GSystem, KGSystem, Tolerances};
use crate::linops::{self, op_norm, pinv, range_basis, Operator, Vector};
use crate::random::{complex_gaussian_matrix, rng};

/// Default cap on Neumann reconstruction steps.
pub const DEFAULT_NEUMANN_STEPS: usize = 50;

/// Relative residual `||f - P f|| / ||f||` accepted as `f ∈ R(K)`.
pub const RANGE_MEMBERSHIP_TOL: f64 = 1e-8;

/// Early-stop threshold for reconstruction, relative to `||f||`.
pub const RECONSTRUCTION_STOP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualCertificate {
    /// `||I_{R(K)} - T_Λ T_Θ*||`, the norm of `(I - M) P`.
    pub defect: f64,
    pub is_exact_dual: bool,
    pub is_approx_dual: bool,
    /// `||P (I - T_Θ T_Λ*) P||`.
    pub interchange_defect: f64,
    /// `||(I - P) M P||`: how far `M` pushes `R(K)` out of itself.
    pub leakage: f64,
}

struct RangeData {
    basis: Operator,
    projector: Operator,
}

impl RangeData {
    fn of(k: &Operator, tol: &Tolerances) -> Self {
        let basis = range_basis(k, tol.rank);
        let projector = &basis * basis.adjoint();
        RangeData { basis, projector }
    }
}

fn check_k(lambda: &GSystem, k: &Operator) -> Result<()> {
    let n = lambda.ambient_dim();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::DimMismatch(format!(
            "K is {}x{}, expected {n}x{n}",
            k.nrows(),
            k.ncols()
        )));
    }
    Ok(())
}

fn certificate(m: &Operator, p: &Operator, tol: &Tolerances) -> DualCertificate {
    let n = m.nrows();
    let id = linops::identity(n);
    let defect = op_norm(&(p - m * p));
    let interchange_defect = op_norm(&(p - p * m.adjoint() * p));
    let leakage = op_norm(&((&id - p) * m * p));
    DualCertificate {
        defect,
        is_exact_dual: defect <= tol.dual,
        is_approx_dual: defect < 1.0,
        interchange_defect,
        leakage,
    }
}

/// Canonical K-g-dual `Θ_j = Λ_j S_Λ^† P_{R(K)}`.
///
/// This is `Γ_j K^†|_{R(K)}` for the choice `Γ_j = Λ_j S_Λ^† K`, which
/// satisfies `K = Σ Λ_j* Γ_j` once `range(K) ⊆ range(S_Λ)`.
pub fn canonical_kg_dual(ksys: &KGSystem) -> Result<GSystem> {
    canonical_kg_dual_with(ksys, &Tolerances::default())
}

pub fn canonical_kg_dual_with(ksys: &KGSystem, tol: &Tolerances) -> Result<GSystem> {
    let residual = ksys.range_residual(tol.rank);
    if residual > tol.range {
        return Err(Error::RangeCondFailed { residual });
    }
    let s_pinv = pinv(&ksys.system().frame_operator(), tol.rank);
    let p = RangeData::of(ksys.k(), tol).projector;
    ksys.system().compose_right(&(s_pinv * p))
}

pub fn approx_defect(lambda: &GSystem, theta: &GSystem, k: &Operator) -> Result<DualCertificate> {
    approx_defect_with(lambda, theta, k, &Tolerances::default())
}

pub fn approx_defect_with(
    lambda: &GSystem,
    theta: &GSystem,
    k: &Operator,
    tol: &Tolerances,
) -> Result<DualCertificate> {
    check_k(lambda, k)?;
    let m = lambda.mixed_operator(theta)?;
    Ok(certificate(&m, &RangeData::of(k, tol).projector, tol))
}

/// True iff the defect of `(Λ, Θ)` is at most `tol`.
pub fn is_kg_dual(lambda: &GSystem, theta: &GSystem, k: &Operator, tol: f64) -> Result<bool> {
    Ok(approx_defect(lambda, theta, k)?.defect <= tol)
}

/// `{Θ_j (T_Λ T_Θ*)^{-1}}` with the inverse taken on `R(K)` and extended by
/// zero on its orthogonal complement.
pub fn exactify_dual(lambda: &GSystem, theta: &GSystem, k: &Operator) -> Result<GSystem> {
    exactify_dual_with(lambda, theta, k, &Tolerances::default())
}

pub fn exactify_dual_with(
    lambda: &GSystem,
    theta: &GSystem,
    k: &Operator,
    tol: &Tolerances,
) -> Result<GSystem> {
    check_k(lambda, k)?;
    let m = lambda.mixed_operator(theta)?;
    let range = RangeData::of(k, tol);
    let cert = certificate(&m, &range.projector, tol);
    if !cert.is_approx_dual {
        return Err(Error::NotApproxDual {
            defect: cert.defect,
        });
    }
    let u = &range.basis;
    let compressed = u.adjoint() * &m * u;
    let inv = compressed.try_inverse().ok_or(Error::NotApproxDual {
        defect: cert.defect,
    })?;
    theta.compose_right(&(u * inv * u.adjoint()))
}

/// `{Θ_j T_N}` with `T_N = Σ_{n=0}^{N} (P - P M P)^n P`.
pub fn truncated_neumann_dual(
    lambda: &GSystem,
    theta: &GSystem,
    k: &Operator,
    n_terms: usize,
) -> Result<GSystem> {
    truncated_neumann_dual_with(lambda, theta, k, n_terms, &Tolerances::default())
}

pub fn truncated_neumann_dual_with(
    lambda: &GSystem,
    theta: &GSystem,
    k: &Operator,
    n_terms: usize,
    tol: &Tolerances,
) -> Result<GSystem> {
    check_k(lambda, k)?;
    let m = lambda.mixed_operator(theta)?;
    let p = RangeData::of(k, tol).projector;
    let cert = certificate(&m, &p, tol);
    if !cert.is_approx_dual {
        return Err(Error::NotApproxDual {
            defect: cert.defect,
        });
    }
    let d = &p - &p * &m * &p;
    let mut term = p.clone();
    let mut sum = p;
    for _ in 0..n_terms {
        term = &d * term;
        sum += &term;
    }
    theta.compose_right(&sum)
}

/// Partial sums of `f = Σ_n (I - T_Λ T_Θ*)^n T_Λ T_Θ* f` for `f ∈ R(K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionTrace {
    pub iterates: Vec<Vector>,
    /// `||f - f^(N)||`.
    pub errors: Vec<f64>,
    /// `ε^{N+1} ||f||` with `ε` the defect of the pair.
    pub predicted_bound: Vec<f64>,
    pub defect: f64,
}

/// Runs at most `max_steps + 1` partial sums, stopping early once
/// `||f - f^(N)|| < 1e-12 ||f||`. Only analysis and synthesis applications
/// are used; `T_Λ T_Θ*` is never formed or inverted. Each correction is
/// projected back onto `R(K)`, where `I_{R(K)} - T_Λ T_Θ*` acts.
pub fn neumann_reconstruct(
    lambda: &GSystem,
    theta: &GSystem,
    k: &Operator,
    f: &Vector,
    max_steps: usize,
) -> Result<ReconstructionTrace> {
    neumann_reconstruct_with(lambda, theta, k, f, max_steps, &Tolerances::default())
}

pub fn neumann_reconstruct_with(
    lambda: &GSystem,
    theta: &GSystem,
    k: &Operator,
    f: &Vector,
    max_steps: usize,
    tol: &Tolerances,
) -> Result<ReconstructionTrace> {
    let cert = approx_defect_with(lambda, theta, k, tol)?;
    if f.len() != lambda.ambient_dim() {
        return Err(Error::DimMismatch(format!(
            "vector has dimension {}, expected {}",
            f.len(),
            lambda.ambient_dim()
        )));
    }
    let f_norm = f.norm();
    let p = RangeData::of(k, tol).projector;
    let residual = if f_norm > 0.0 {
        (f - &p * f).norm() / f_norm
    } else {
        0.0
    };
    if residual > RANGE_MEMBERSHIP_TOL {
        return Err(Error::NotInRange { residual });
    }
    if !cert.is_approx_dual {
        return Err(Error::NotApproxDual {
            defect: cert.defect,
        });
    }
    let apply = |v: &Vector| -> Result<Vector> { lambda.synthesis(&theta.analysis(v)?) };

    let mut trace = ReconstructionTrace {
        iterates: Vec::new(),
        errors: Vec::new(),
        predicted_bound: Vec::new(),
        defect: cert.defect,
    };
    let mut correction = &p * apply(f)?;
    let mut partial = correction.clone();
    let mut envelope = cert.defect * f_norm;
    for step in 0..=max_steps {
        if step > 0 {
            let mapped = apply(&correction)?;
            correction = &p * (correction - mapped);
            partial += &correction;
            envelope *= cert.defect;
        }
        let err = (f - &partial).norm();
        trace.iterates.push(partial.clone());
        trace.errors.push(err);
        trace.predicted_bound.push(envelope);
        if err < RECONSTRUCTION_STOP * f_norm || f_norm == 0.0 {
            break;
        }
    }
    Ok(trace)
}

/// Vector frames `E = {Θ_j* f_{i,j}}` and `F = {Λ_j* f̃_{i,j}}` built from
/// per-index frames and their canonical duals.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFrameLift {
    pub e: Vec<Vector>,
    pub f: Vec<Vector>,
    /// `||T_E T_F* - T_Θ T_Λ*||`.
    pub residual: f64,
    /// `||I - T_Θ T_Λ*||` over all of `H`.
    pub g_defect: f64,
    /// `||I - T_E T_F*||` over all of `H`.
    pub vector_defect: f64,
    /// Defect of `(Λ, Θ)` restricted to `R(K)`.
    pub restricted_defect: f64,
    pub g_approx_dual: bool,
    pub vector_approx_dual: bool,
}

pub fn lift_to_vector_frames(
    ksys: &KGSystem,
    theta: &GSystem,
    fams: &SubspaceFrameFamily,
) -> Result<VectorFrameLift> {
    let lambda = ksys.system();
    if !lambda.same_shape(theta) {
        return Err(Error::DimMismatch("Λ and Θ differ in shape".into()));
    }
    if fams.dims() != lambda.block_dims() {
        return Err(Error::DimMismatch(format!(
            "family dimensions {:?} do not match block dimensions {:?}",
            fams.dims(),
            lambda.block_dims()
        )));
    }
    let n = lambda.ambient_dim();
    let mut e = Vec::new();
    let mut f = Vec::new();
    for (j, fam) in fams.families().iter().enumerate() {
        let duals = fams.canonical_dual(j);
        let lam_adj = lambda.blocks()[j].adjoint();
        let theta_adj = theta.blocks()[j].adjoint();
        for (fij, dual) in fam.iter().zip(&duals) {
            e.push(&theta_adj * fij);
            f.push(&lam_adj * dual);
        }
    }
    let mut tetf = Operator::zeros(n, n);
    for (ei, fi) in e.iter().zip(&f) {
        tetf += ei * fi.adjoint();
    }
    let theta_lambda = theta.mixed_operator(lambda)?;
    let id = linops::identity(n);
    let g_defect = op_norm(&(&id - &theta_lambda));
    let vector_defect = op_norm(&(&id - &tetf));
    let restricted_defect = approx_defect(lambda, theta, ksys.k())?.defect;
    Ok(VectorFrameLift {
        residual: op_norm(&(&tetf - &theta_lambda)),
        e,
        f,
        g_defect,
        vector_defect,
        restricted_defect,
        g_approx_dual: g_defect < 1.0,
        vector_approx_dual: vector_defect < 1.0,
    })
}

/// Approximate dual with defect exactly `eps`, built from the canonical dual
/// `Θ^c` as `Θ^c_j (P - eps W) + Z_j (I - P)` for a random contraction `W`
/// on `R(K)` of norm one and random `Z_j`. `T_Λ T_Θ*` maps `R(K)` into itself.
pub fn perturbed_dual(ksys: &KGSystem, eps: f64, seed: u64) -> Result<GSystem> {
    let tol = Tolerances::default();
    let canonical = canonical_kg_dual_with(ksys, &tol)?;
    let n = ksys.ambient_dim();
    let p = RangeData::of(ksys.k(), &tol).projector;
    let mut r = rng(seed);
    let x = complex_gaussian_matrix(&mut r, n, n);
    let pxp = &p * x * &p;
    let norm = op_norm(&pxp);
    let w = if norm > 0.0 {
        pxp / Complex64::new(norm, 0.0)
    } else {
        pxp
    };
    let q = &p - w * Complex64::new(eps, 0.0);
    let outside = linops::identity(n) - &p;
    let blocks = canonical
        .blocks()
        .iter()
        .map(|b| {
            let z = complex_gaussian_matrix(&mut r, b.nrows(), n) * Complex64::new(0.5, 0.0);
            b * &q + z * &outside
        })
        .collect();
    GSystem::new(n, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{example2, random_kg_system, scale_dual_weights, scale_weights};
    use crate::linops::{identity, real_diag};
    use crate::random::complex_gaussian_vector;

    fn in_range(ksys: &KGSystem, seed: u64) -> Vector {
        let mut r = rng(seed);
        ksys.k() * complex_gaussian_vector(&mut r, ksys.ambient_dim())
    }

    #[test]
    fn identity_dual_is_identity() {
        let ksys = KGSystem::with_identity(GSystem::new(3, vec![identity(3)]).unwrap());
        let theta = canonical_kg_dual(&ksys).unwrap();
        assert!((theta.blocks()[0].clone() - identity(3)).norm() <= 1e-12);
    }

    #[test]
    fn example2_canonical_dual_projects_onto_range_of_k() {
        let ksys = example2(6).unwrap();
        let theta = canonical_kg_dual(&ksys).unwrap();
        let mut expected = Operator::zeros(3, 6);
        expected[(0, 0)] = Complex64::new(1.0, 0.0);
        expected[(1, 1)] = Complex64::new(1.0, 0.0);
        assert!((theta.blocks()[0].clone() - expected).norm() <= 1e-12);
        assert!(theta.blocks()[1].norm() == 0.0);
        let cert = approx_defect(ksys.system(), &theta, ksys.k()).unwrap();
        assert!(cert.is_exact_dual && cert.defect <= 1e-12);
    }

    #[test]
    fn canonical_dual_requires_range_condition() {
        let sys = GSystem::new(2, vec![real_diag(&[1.0, 0.0])]).unwrap();
        assert!(matches!(
            canonical_kg_dual(&KGSystem::with_identity(sys)),
            Err(Error::RangeCondFailed { .. })
        ));
    }

    #[test]
    fn defect_of_zero_and_scaled_duals() {
        let ksys = random_kg_system(5, &[2, 2, 2], 3, 3).unwrap();
        let canonical = canonical_kg_dual(&ksys).unwrap();
        let zero = canonical.scaled(Complex64::new(0.0, 0.0));
        let cert = approx_defect(ksys.system(), &zero, ksys.k()).unwrap();
        assert!((cert.defect - 1.0).abs() <= 1e-12 && !cert.is_approx_dual);
        assert!(!is_kg_dual(ksys.system(), &zero, ksys.k(), 1e-9).unwrap());
        assert!(is_kg_dual(ksys.system(), &canonical, ksys.k(), 1e-9).unwrap());
        let scaled = canonical.scaled(Complex64::new(1.3, 0.0));
        let cert = approx_defect(ksys.system(), &scaled, ksys.k()).unwrap();
        assert!((cert.defect - 0.3).abs() <= 1e-9);
        assert!(cert.is_approx_dual && !cert.is_exact_dual);
    }

    #[test]
    fn defect_rejects_mismatched_shapes() {
        let ksys = random_kg_system(4, &[2, 2], 2, 1).unwrap();
        let other = random_kg_system(4, &[2, 3], 2, 1).unwrap();
        assert!(matches!(
            approx_defect(ksys.system(), other.system(), ksys.k()),
            Err(Error::DimMismatch(_))
        ));
        assert!(matches!(
            approx_defect(ksys.system(), ksys.system(), &identity(3)),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn exactify_scaled_and_perturbed_duals() {
        let ksys = random_kg_system(6, &[3, 2, 2], 4, 17).unwrap();
        let canonical = canonical_kg_dual(&ksys).unwrap();
        let exact = exactify_dual(ksys.system(), &canonical, ksys.k()).unwrap();
        assert!(
            approx_defect(ksys.system(), &exact, ksys.k())
                .unwrap()
                .defect
                <= 1e-10
        );
        let scaled = canonical.scaled(Complex64::new(0.7, 0.0));
        let fixed = exactify_dual(ksys.system(), &scaled, ksys.k()).unwrap();
        assert!(
            approx_defect(ksys.system(), &fixed, ksys.k())
                .unwrap()
                .defect
                <= 1e-9
        );
        let noisy = perturbed_dual(&ksys, 0.4, 2).unwrap();
        let cert = approx_defect(ksys.system(), &noisy, ksys.k()).unwrap();
        assert!((cert.defect - 0.4).abs() <= 1e-9 && cert.leakage <= 1e-9);
        let fixed = exactify_dual(ksys.system(), &noisy, ksys.k()).unwrap();
        assert!(
            approx_defect(ksys.system(), &fixed, ksys.k())
                .unwrap()
                .defect
                <= 1e-9
        );
        let zero = canonical.scaled(Complex64::new(0.0, 0.0));
        assert!(matches!(
            exactify_dual(ksys.system(), &zero, ksys.k()),
            Err(Error::NotApproxDual { .. })
        ));
    }

    #[test]
    fn truncated_duals_follow_geometric_bound() {
        let ksys = random_kg_system(6, &[2, 2, 3], 4, 23).unwrap();
        let theta = perturbed_dual(&ksys, 0.5, 4).unwrap();
        let zeroth = truncated_neumann_dual(ksys.system(), &theta, ksys.k(), 0).unwrap();
        let p = crate::linops::range_projector(ksys.k(), crate::linops::DEFAULT_RANK_TOL);
        assert!(zeroth
            .blocks()
            .iter()
            .zip(theta.blocks())
            .all(|(a, b)| (a - b * &p).norm() <= 1e-12));
        let mut previous = f64::INFINITY;
        for n in 0..=10 {
            let gamma = truncated_neumann_dual(ksys.system(), &theta, ksys.k(), n).unwrap();
            let d = approx_defect(ksys.system(), &gamma, ksys.k())
                .unwrap()
                .defect;
            assert!(d <= 0.5f64.powi(n as i32 + 1) + 1e-9, "N={n}: {d}");
            assert!(d <= previous + 1e-12);
            previous = d;
        }
    }

    #[test]
    fn reconstruction_exact_dual_converges_immediately() {
        let ksys = random_kg_system(5, &[2, 2, 2], 3, 31).unwrap();
        let theta = canonical_kg_dual(&ksys).unwrap();
        let f = in_range(&ksys, 1);
        let trace = neumann_reconstruct(ksys.system(), &theta, ksys.k(), &f, 50).unwrap();
        assert_eq!(trace.iterates.len(), 1);
        assert!(trace.errors[0] <= 1e-12 * f.norm());
    }

    #[test]
    fn reconstruction_follows_envelope() {
        let ksys = random_kg_system(6, &[2, 3, 2], 3, 37).unwrap();
        let theta = perturbed_dual(&ksys, 0.5, 9).unwrap();
        let f = in_range(&ksys, 2);
        let trace = neumann_reconstruct(ksys.system(), &theta, ksys.k(), &f, 20).unwrap();
        assert_eq!(trace.errors.len(), 21);
        for (n, (err, bound)) in trace.errors.iter().zip(&trace.predicted_bound).enumerate() {
            assert!(*err <= bound + 1e-9, "N={n}");
            assert!((bound - 0.5f64.powi(n as i32 + 1) * f.norm()).abs() <= 1e-9);
        }
    }

    #[test]
    fn reconstruction_rejects_vectors_outside_range() {
        let ksys = random_kg_system(5, &[3, 3], 2, 41).unwrap();
        let theta = canonical_kg_dual(&ksys).unwrap();
        let mut r = rng(3);
        let f = complex_gaussian_vector(&mut r, 5);
        assert!(matches!(
            neumann_reconstruct(ksys.system(), &theta, ksys.k(), &f, 10),
            Err(Error::NotInRange { .. })
        ));
    }

    #[test]
    fn weighted_pairs_remain_duals() {
        let ksys = random_kg_system(5, &[2, 2, 2], 3, 43).unwrap();
        let theta = canonical_kg_dual(&ksys).unwrap();
        let real_w: Vec<Complex64> = [0.5, 1.7, -2.0]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let (weighted, _) = scale_weights(&ksys, &real_w).unwrap();
        // For real weights conj(w)^{-1} = w^{-1}.
        let inv: Vec<Complex64> = real_w.iter().map(|w| w.inv()).collect();
        let theta_w = GSystem::new(
            5,
            theta
                .blocks()
                .iter()
                .zip(&inv)
                .map(|(b, &w)| b * w)
                .collect(),
        )
        .unwrap();
        assert!(is_kg_dual(weighted.system(), &theta_w, ksys.k(), 1e-9).unwrap());
        let complex_w = vec![
            Complex64::new(0.3, 0.8),
            Complex64::new(-1.0, 0.2),
            Complex64::new(0.0, 2.0),
        ];
        let (weighted, _) = scale_weights(&ksys, &complex_w).unwrap();
        let theta_w = scale_dual_weights(&theta, &complex_w).unwrap();
        assert!(is_kg_dual(weighted.system(), &theta_w, ksys.k(), 1e-9).unwrap());
    }

    #[test]
    fn lift_with_orthonormal_families() {
        let ksys = random_kg_system(5, &[2, 3], 3, 47).unwrap();
        let theta = perturbed_dual(&ksys, 0.3, 1).unwrap();
        let fams = SubspaceFrameFamily::orthonormal(&[2, 3]).unwrap();
        let lift = lift_to_vector_frames(&ksys, &theta, &fams).unwrap();
        assert_eq!(lift.e.len(), 5);
        assert!(lift.residual <= 1e-10);
        assert!((lift.restricted_defect - 0.3).abs() <= 1e-9);
        let bad = SubspaceFrameFamily::orthonormal(&[2, 2]).unwrap();
        assert!(matches!(
            lift_to_vector_frames(&ksys, &theta, &bad),
            Err(Error::DimMismatch(_))
        ));
    }
}
