//! Erasure analysis: which subfamilies `{Λ_j}_{j ∉ I}` remain K-g-frames.
//!
//! Two sufficient/characterizing criteria are provided next to a brute-force
//! oracle that recomputes the optimal bounds of every reduced system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsystem::{BoundReport, GSystem, KGSystem, Tolerances};
use crate::linops::{self, op_norm, Operator, Svd};

/// Upper limit on the number of subsets `bruteForceErasureSearch` visits.
pub const MAX_SUBSETS: u128 = 100_000;

/// Relative smallest-singular-value threshold for invertibility of `I - S^{-1} S_I`.
pub const INVERTIBILITY_TOL: f64 = 1e-10;

/// Accepted deviation of `||Λ_j||` from one in the norm-count criterion.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ErasureCriterion {
    NormCount,
    Invertibility,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ErasureReport {
    pub removed: Vec<usize>,
    pub criterion: ErasureCriterion,
    pub survives: bool,
    pub predicted_lower_bound: Option<f64>,
    /// Optimal lower K-g bound of the reduced system.
    pub actual_lower_bound: Option<f64>,
    /// Optimal lower g-frame bound of the reduced system.
    pub actual_g_lower_bound: f64,
    /// `||(I - S^{-1} S_I)^{-1}||`.
    pub invertibility_norm: Option<f64>,
    /// `A / ||(I - S^{-1} S_I)^{-1}||²`, reported but not guaranteed as a K-g bound.
    pub statement_lower_bound: Option<f64>,
    /// Norm count only: `|I| < A C` and `|I| < A C²` disagree.
    pub count_conditions_differ: Option<bool>,
    /// `survives` matches whether the reduced system is a K-g-frame.
    pub agrees_with_reduced: bool,
}

fn normalized_indices(sys: &GSystem, removed: &[usize]) -> Result<Vec<usize>> {
    if let Some(&bad) = removed.iter().find(|&&j| j >= sys.len()) {
        return Err(Error::BadIndex {
            index: bad,
            len: sys.len(),
        });
    }
    let mut out = removed.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `S_{Λ,I} = Σ_{j ∈ I} Λ_j* Λ_j`.
pub fn partial_frame_operator(sys: &GSystem, indices: &[usize]) -> Result<Operator> {
    let indices = normalized_indices(sys, indices)?;
    let n = sys.ambient_dim();
    let mut s = Operator::zeros(n, n);
    for j in indices {
        let b = &sys.blocks()[j];
        s += b.adjoint() * b;
    }
    Ok(s)
}

fn reduced_bounds(ksys: &KGSystem, removed: &[usize]) -> Result<BoundReport> {
    let reduced = ksys.with_system(ksys.system().without(removed)?)?;
    Ok(reduced.optimal_bounds())
}

/// Norm-count criterion: with `C` the lower bound of `K*`, `A` the optimal
/// lower K-g bound and unit-norm blocks on `I`, the reduced family satisfies
/// `Σ_{j ∉ I} ||Λ_j f||² >= (A C² - |I|) ||f||²`.
pub fn erasure_norm_count(ksys: &KGSystem, removed: &[usize]) -> Result<ErasureReport> {
    let removed = normalized_indices(ksys.system(), removed)?;
    let tol = Tolerances::default();
    let k_svd = Svd::new(ksys.k());
    let c = k_svd.singular_values.last().copied().unwrap_or(0.0);
    if c.is_nan() || c <= tol.rank * k_svd.max() {
        return Err(Error::KStarNotBoundedBelow { lower: c });
    }
    let a = ksys
        .optimal_bounds_with(&tol)
        .kg_lower_opt
        .ok_or(Error::NotKGFrame)?;
    for &j in &removed {
        let norm = op_norm(&ksys.system().blocks()[j]);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm { index: j, norm });
        }
    }
    let count = removed.len() as f64;
    let bound = a * c * c - count;
    let survives = bound > 0.0;
    let reduced = reduced_bounds(ksys, &removed)?;
    Ok(ErasureReport {
        survives,
        predicted_lower_bound: survives.then_some(bound),
        agrees_with_reduced: survives == reduced.kg_lower_opt.is_some(),
        actual_lower_bound: reduced.kg_lower_opt,
        actual_g_lower_bound: reduced.g_lower_opt,
        invertibility_norm: None,
        statement_lower_bound: None,
        count_conditions_differ: Some((count < a * c) != (count < a * c * c)),
        removed,
        criterion: ErasureCriterion::NormCount,
    })
}

/// Invertibility criterion: the reduced family is a frame iff
/// `T = I - S^{-1} S_I` is invertible, and then
/// `λ_min(S) / ||K* T^{-1}||²` is a lower K-g bound for it.
///
/// Requires an invertible frame operator.
pub fn erasure_invertibility(ksys: &KGSystem, removed: &[usize]) -> Result<ErasureReport> {
    let removed = normalized_indices(ksys.system(), removed)?;
    let tol = Tolerances::default();
    let n = ksys.ambient_dim();
    let s = ksys.system().frame_operator();
    let s_svd = Svd::new(&s);
    if s_svd.rank(tol.rank) < n {
        return Err(Error::FrameOpSingular);
    }
    let s_inv = s.clone().try_inverse().ok_or(Error::FrameOpSingular)?;
    let s_i = partial_frame_operator(ksys.system(), &removed)?;
    let t = linops::identity(n) - s_inv * s_i;
    let t_svd = Svd::new(&t);
    let t_min = t_svd.singular_values.last().copied().unwrap_or(0.0);
    let survives = t_min > INVERTIBILITY_TOL * t_svd.max();
    let g_lower = linops::eig_extremes(&s).0;
    let (invertibility_norm, predicted, statement) = if survives {
        let t_inv = t.try_inverse().ok_or(Error::FrameOpSingular)?;
        let inv_norm = 1.0 / t_min;
        let kt = op_norm(&(ksys.k().adjoint() * &t_inv));
        let predicted = (kt > 0.0).then(|| g_lower / (kt * kt));
        (
            Some(inv_norm),
            predicted,
            Some(g_lower / (inv_norm * inv_norm)),
        )
    } else {
        (None, None, None)
    };
    let reduced = reduced_bounds(ksys, &removed)?;
    Ok(ErasureReport {
        survives,
        predicted_lower_bound: predicted,
        agrees_with_reduced: survives == reduced.kg_lower_opt.is_some(),
        actual_lower_bound: reduced.kg_lower_opt,
        actual_g_lower_bound: reduced.g_lower_opt,
        invertibility_norm,
        statement_lower_bound: statement,
        count_conditions_differ: None,
        removed,
        criterion: ErasureCriterion::Invertibility,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Calls `visit` on every `k`-subset of `0..m` in lexicographic order.
fn for_each_subset(
    m: usize,
    k: usize,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if k > m {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx)?;
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] < m - k + i {
                break;
            }
            if i == 0 {
                return Ok(());
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every removal set with `|I| <= max_remove`, ordered by size then
/// lexicographically; survival is read off the reduced system's optimal bounds.
pub fn brute_force_erasure_search(
    ksys: &KGSystem,
    max_remove: usize,
) -> Result<Vec<ErasureReport>> {
    let m = ksys.system().len();
    let max_remove = max_remove.min(m);
    let count: u128 = (0..=max_remove).map(|k| binomial(m, k)).sum();
    if count > MAX_SUBSETS {
        return Err(Error::TooManySubsets {
            count,
            limit: MAX_SUBSETS,
        });
    }
    let mut reports = Vec::with_capacity(count as usize);
    for size in 0..=max_remove {
        for_each_subset(m, size, &mut |subset| {
            reports.push(brute_force_report(ksys, subset)?);
            Ok(())
        })?;
    }
    Ok(reports)
}

/// Ground truth for a single removal set.
pub fn brute_force_report(ksys: &KGSystem, removed: &[usize]) -> Result<ErasureReport> {
    let removed = normalized_indices(ksys.system(), removed)?;
    let reduced = reduced_bounds(ksys, &removed)?;
    Ok(ErasureReport {
        survives: reduced.kg_lower_opt.is_some(),
        predicted_lower_bound: None,
        actual_lower_bound: reduced.kg_lower_opt,
        actual_g_lower_bound: reduced.g_lower_opt,
        invertibility_norm: None,
        statement_lower_bound: None,
        count_conditions_differ: None,
        agrees_with_reduced: true,
        removed,
        criterion: ErasureCriterion::BruteForce,
    })
}

/// Scales `K` to unit operator norm; the norm-count bound is a valid lower
/// K-g bound only when `||K|| <= 1`.
pub fn with_unit_norm_k(ksys: &KGSystem) -> Result<KGSystem> {
    let norm = op_norm(ksys.k());
    if norm == 0.0 {
        return Err(Error::KStarNotBoundedBelow { lower: 0.0 });
    }
    KGSystem::new(ksys.system().clone(), ksys.k() / Complex64::new(norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{example2, normalize_blocks, random_kg_system};
    use crate::gsystem::GSystem;
    use crate::linops::identity;
    use proptest::prelude::*;

    #[test]
    fn partial_frame_operator_edges() {
        let ksys = random_kg_system(4, &[2, 1, 3], 4, 1).unwrap();
        let sys = ksys.system();
        assert_eq!(
            partial_frame_operator(sys, &[]).unwrap(),
            Operator::zeros(4, 4)
        );
        assert!(
            (partial_frame_operator(sys, &[0, 1, 2]).unwrap() - sys.frame_operator()).norm()
                <= 1e-12
        );
        assert!(matches!(
            partial_frame_operator(sys, &[3]),
            Err(Error::BadIndex { index: 3, len: 3 })
        ));
    }

    proptest! {
        #[test]
        fn partial_frame_operators_are_additive(seed in 0u64..1000, mask in 0u32..64) {
            let ksys = random_kg_system(4, &[1, 2, 1, 2, 1, 1], 2, seed).unwrap();
            let sys = ksys.system();
            let inside: Vec<usize> = (0..6).filter(|j| mask & (1 << j) != 0).collect();
            let outside: Vec<usize> = (0..6).filter(|j| mask & (1 << j) == 0).collect();
            let sum = partial_frame_operator(sys, &inside).unwrap()
                + partial_frame_operator(sys, &outside).unwrap();
            prop_assert!((sum - sys.frame_operator()).norm() <= 1e-12);
        }
    }

    #[test]
    fn subsets_enumerate_in_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, &mut |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(binomial(10, 3), 120);
    }

    #[test]
    fn norm_count_empty_removal() {
        let ksys = with_unit_norm_k(&random_kg_system(3, &[2, 2, 2, 2], 3, 5).unwrap()).unwrap();
        let ksys = ksys.with_system(normalize_blocks(ksys.system())).unwrap();
        let r = erasure_norm_count(&ksys, &[]).unwrap();
        let a = ksys.optimal_bounds().kg_lower_opt.unwrap();
        let c = linops::min_singular_value(ksys.k());
        assert!(r.survives);
        assert!((r.predicted_lower_bound.unwrap() - a * c * c).abs() <= 1e-12);
    }

    #[test]
    fn norm_count_preconditions() {
        // Example 2 has zero blocks and a singular K.
        let ex2 = example2(6).unwrap();
        assert!(matches!(
            erasure_norm_count(&ex2, &[1]),
            Err(Error::KStarNotBoundedBelow { .. })
        ));
        let blocks = vec![identity(2), Operator::zeros(2, 2)];
        let ksys = KGSystem::with_identity(GSystem::new(2, blocks).unwrap());
        assert!(matches!(
            erasure_norm_count(&ksys, &[1]),
            Err(Error::NotUnitNorm { index: 1, .. })
        ));
    }

    #[test]
    fn norm_count_bound_needs_k_in_unit_ball() {
        // Two orthonormal-basis copies, K = 2I: A = 2/4, C = 2, A C² - 1 = 1 > 0,
        // yet removing one copy leaves optimal K-g bound 1/4.
        let blocks = vec![identity(2), identity(2)];
        let k = identity(2) * Complex64::new(2.0, 0.0);
        let ksys = KGSystem::new(GSystem::new(2, blocks).unwrap(), k).unwrap();
        let r = erasure_norm_count(&ksys, &[0]).unwrap();
        assert!((r.predicted_lower_bound.unwrap() - 1.0).abs() <= 1e-12);
        assert!((r.actual_lower_bound.unwrap() - 0.25).abs() <= 1e-12);
        assert!(r.actual_g_lower_bound >= r.predicted_lower_bound.unwrap() - 1e-12);
        let unit = with_unit_norm_k(&ksys).unwrap();
        let r = erasure_norm_count(&unit, &[0]).unwrap();
        assert!(r.actual_lower_bound.unwrap() >= r.predicted_lower_bound.unwrap() - 1e-12);
    }

    #[test]
    fn invertibility_trivial_cases() {
        let ksys = random_kg_system(4, &[2, 2, 2], 4, 9).unwrap();
        let r = erasure_invertibility(&ksys, &[]).unwrap();
        assert!(r.survives);
        assert!((r.invertibility_norm.unwrap() - 1.0).abs() <= 1e-10);
        assert!(r.predicted_lower_bound.unwrap() <= r.actual_lower_bound.unwrap() + 1e-8);

        let mut blocks = ksys.system().blocks().to_vec();
        blocks.push(Operator::zeros(2, 4));
        let padded = ksys.with_system(GSystem::new(4, blocks).unwrap()).unwrap();
        let r = erasure_invertibility(&padded, &[3]).unwrap();
        assert!(r.survives);
        assert!((r.invertibility_norm.unwrap() - 1.0).abs() <= 1e-10);
        let before = ksys.optimal_bounds().kg_lower_opt.unwrap();
        assert!((r.actual_lower_bound.unwrap() - before).abs() <= 1e-10 * before.max(1.0));

        assert!(matches!(
            erasure_invertibility(&example2(6).unwrap(), &[0]),
            Err(Error::FrameOpSingular)
        ));
    }

    #[test]
    fn invertibility_detects_lost_span() {
        let ksys = random_kg_system(4, &[2, 2, 1], 4, 13).unwrap();
        let r = erasure_invertibility(&ksys, &[0]).unwrap();
        assert!(!r.survives && r.agrees_with_reduced);
        assert!(r.actual_lower_bound.is_none());
    }

    #[test]
    fn brute_force_on_example2() {
        let ksys = example2(6).unwrap();
        let all = brute_force_erasure_search(&ksys, 0).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].survives);
        let singles = brute_force_erasure_search(&ksys, 1).unwrap();
        assert_eq!(singles.len(), 3);
        assert_eq!(singles[1].removed, vec![0]);
        assert!(!singles[1].survives);
        assert_eq!(singles[2].removed, vec![1]);
        assert!(singles[2].survives);
    }

    #[test]
    fn brute_force_guard() {
        let ksys = random_kg_system(2, &[1; 40], 2, 3).unwrap();
        assert!(matches!(
            brute_force_erasure_search(&ksys, 10),
            Err(Error::TooManySubsets { .. })
        ));
    }

    #[test]
    fn redundant_tight_frame_survives_singleton_removal() {
        // Six unit-norm rank-one blocks along a Mercedes-type tight frame in C^2.
        let blocks: Vec<Operator> = (0..6)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 6.0;
                Operator::from_row_slice(
                    1,
                    2,
                    &[Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0)],
                )
            })
            .collect();
        let ksys = KGSystem::with_identity(GSystem::new(2, blocks).unwrap());
        assert!(ksys.optimal_bounds().tight_kg);
        let reports = brute_force_erasure_search(&ksys, 1).unwrap();
        assert!(reports[1..].iter().any(|r| r.survives));
    }
}
