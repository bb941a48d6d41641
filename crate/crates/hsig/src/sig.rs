//! Discrete-time signatures, expected signatures, higher-rank signatures
//! and the conditional signature process on a filtration tree.
//!
//! A path is lifted step by step: each increment is time-augmented to
//! `(1, x(t) - x(t-1))`, exponentiated, and the exponentials are
//! multiplied in time order. The first factor uses `(1, x(0))`. Rank-`r`
//! signatures apply the same construction to paths whose values are
//! rank-`(r-1)` tensors.

use crate::graded::{exp_rank, Basis, GradedError, TensorR};
use crate::process::FiltrationTree;
use crate::scalar::Scalar;
use crate::tensor::{tensor_exp, tensor_product, NormMode, Tensor1, TensorError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SigError {
    #[error("path must have at least one point")]
    EmptyPath,
    #[error("path values must share one dimension, got {0} and {1}")]
    MixedDims(usize, usize),
    #[error("weights sum to {0}, expected 1")]
    WeightMismatch(f64),
    #[error("rank must be >= 1")]
    RankTooLow,
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// Truncation and normalization choices shared by the signature-level
/// operations and the metrics built on them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignatureConfig {
    /// Single total-degree bound applied at every rank level.
    pub max_degree: usize,
    /// Robust normalization of each per-path signature before averaging.
    pub normalize: bool,
    pub norm: NormMode,
}

impl SignatureConfig {
    pub fn plain(max_degree: usize) -> Self {
        SignatureConfig {
            max_degree,
            normalize: false,
            norm: NormMode::Hilbert,
        }
    }

    pub fn robust(max_degree: usize) -> Self {
        SignatureConfig {
            max_degree,
            normalize: true,
            norm: NormMode::Hilbert,
        }
    }
}

/// Signature of a discrete path in `R^d`, truncated at `max_degree`.
///
/// The product runs over `exp(1, x(0))`, then `exp(1, x(t) - x(t-1))` for
/// each later time, so the level-1 time coefficient counts the increments.
pub fn signature<T: Scalar>(path: &[Vec<T>], max_degree: usize) -> Result<Tensor1<T>, SigError> {
    if path.is_empty() {
        return Err(SigError::EmptyPath);
    }
    let dim = path[0].len();
    for v in path {
        if v.len() != dim {
            return Err(SigError::MixedDims(dim, v.len()));
        }
    }
    let mut increment = vec![T::zero(); dim + 1];
    increment[0] = T::one();
    increment[1..].clone_from_slice(&path[0]);
    let mut sig = tensor_exp(&increment, max_degree);
    for step in path.windows(2) {
        for (slot, (next, prev)) in increment[1..]
            .iter_mut()
            .zip(step[1].iter().zip(step[0].iter()))
        {
            *slot = next.clone() - prev.clone();
        }
        sig = tensor_product(&sig, &tensor_exp(&increment, max_degree))?;
    }
    Ok(sig)
}

/// Probability-weighted average of path signatures.
pub fn expected_signature(
    weighted_paths: &[(f64, Vec<Vec<f64>>)],
    max_degree: usize,
) -> Result<Tensor1<f64>, SigError> {
    if weighted_paths.is_empty() {
        return Err(SigError::EmptyPath);
    }
    let total: f64 = weighted_paths.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SigError::WeightMismatch(total));
    }
    let dim = weighted_paths[0].1[0].len();
    let mut acc = Tensor1::zero(dim, max_degree);
    for (p, path) in weighted_paths {
        acc = acc.add(&signature(path, max_degree)?.scale(p))?;
    }
    Ok(acc)
}

/// Sup norm of a path: the largest Euclidean norm among its values.
pub fn path_sup_norm(path: &[Vec<f64>]) -> f64 {
    path.iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Dilates a signature by `exp(-||s|| - path_sup_norm)`, mapping it into
/// the unit ball while keeping signatures of distinct paths distinct.
pub fn robust_normalize(s: &Tensor1<f64>, path_sup_norm: f64, norm: NormMode) -> Tensor1<f64> {
    let lambda = (-s.norm(norm) - path_sup_norm).exp();
    s.dilate(&lambda)
}

/// Signature followed by robust normalization.
pub fn robust_signature(
    path: &[Vec<f64>],
    max_degree: usize,
    norm: NormMode,
) -> Result<Tensor1<f64>, SigError> {
    let s = signature(path, max_degree)?;
    Ok(robust_normalize(&s, path_sup_norm(path), norm))
}

/// Signature of a path whose values are rank-`(r-1)` tensors; the result
/// has rank `r`, truncated at `max_degree`.
///
/// Increments are time-augmented exactly as at rank 1. The generator space
/// of the higher algebra carries no unit component, so the first
/// increment's inner value enters with its unit coefficient projected out.
pub fn rank_signature<T: Scalar>(
    path: &[TensorR<T>],
    max_degree: usize,
) -> Result<TensorR<T>, SigError> {
    if path.is_empty() {
        return Err(SigError::EmptyPath);
    }
    let first = &path[0];
    for v in &path[1..] {
        if v.rank() != first.rank()
            || v.dim() != first.dim()
            || v.max_degree() != first.max_degree()
        {
            return Err(SigError::Graded(GradedError::AlgebraMismatch {
                expected_rank: first.rank(),
                expected_dim: first.dim(),
                expected_degree: first.max_degree(),
                rank: v.rank(),
                dim: v.dim(),
                degree: v.max_degree(),
            }));
        }
    }
    let one = T::one();
    let mut delta = first.clone();
    delta.set_coeff(
        &crate::graded::CompositeWord::empty(first.rank()),
        T::zero(),
    )?;
    let mut sig = exp_rank(&one, &delta, max_degree)?;
    for step in path.windows(2) {
        let delta = step[1].sub(&step[0])?;
        sig = sig.product(&exp_rank(&one, &delta, max_degree)?)?;
    }
    Ok(sig)
}

/// Per-node conditional signature values at rank `rank`.
///
/// `per_node[id]` is the rank-`rank` value on the atom `id`; at the leaves
/// this is the signature of the realized branch, higher up it is the
/// conditional expectation of the leaf values below.
pub fn conditional_signature_process(
    tree: &FiltrationTree<f64>,
    rank: usize,
    max_degree: usize,
    robust: Option<NormMode>,
) -> Result<Vec<TensorR<f64>>, SigError> {
    if rank < 1 {
        return Err(SigError::RankTooLow);
    }
    // rank 1: per-leaf branch signatures, conditionally averaged
    let leaf_sigs: Vec<TensorR<f64>> = tree
        .leaves()
        .iter()
        .map(|&leaf| {
            let path: Vec<Vec<f64>> = tree
                .branch(leaf)
                .iter()
                .map(|&id| tree.node(id).value.clone())
                .collect();
            let s = match robust {
                Some(mode) => robust_signature(&path, max_degree, mode)?,
                None => signature(&path, max_degree)?,
            };
            TensorR::from_tensor1(&s).map_err(SigError::from)
        })
        .collect::<Result<_, _>>()?;
    let mut per_node = cond_exp_tensors(tree, &leaf_sigs);

    for _ in 2..=rank {
        let leaf_sigs: Vec<TensorR<f64>> = tree
            .leaves()
            .iter()
            .map(|&leaf| {
                let branch = tree.branch(leaf);
                let path: Vec<TensorR<f64>> =
                    branch.iter().map(|&id| per_node[id].clone()).collect();
                let s = rank_signature(&path, max_degree)?;
                Ok(match robust {
                    Some(mode) => {
                        let sup = path.iter().map(|v| v.norm(mode)).fold(0.0, f64::max);
                        let lambda = (-s.norm(mode) - sup).exp();
                        s.dilate(&lambda)
                    }
                    None => s,
                })
            })
            .collect::<Result<_, SigError>>()?;
        per_node = cond_exp_tensors(tree, &leaf_sigs);
    }
    Ok(per_node)
}

/// Bottom-up conditional expectation of per-leaf tensors at every node.
fn cond_exp_tensors(tree: &FiltrationTree<f64>, leaf_values: &[TensorR<f64>]) -> Vec<TensorR<f64>> {
    let basis = leaf_values[0].basis().clone();
    let mut vals: Vec<TensorR<f64>> = vec![TensorR::zero(basis); tree.node_count()];
    for (&leaf, v) in tree.leaves().iter().zip(leaf_values.iter()) {
        vals[leaf] = v.clone();
    }
    for id in (0..tree.node_count()).rev() {
        let node = tree.node(id);
        if node.children.is_empty() {
            continue;
        }
        let mut acc = TensorR::zero(vals[id].basis().clone());
        for &c in &node.children {
            acc = acc
                .add(&vals[c].scale(&tree.node(c).prob))
                .expect("children share the algebra");
        }
        vals[id] = acc;
    }
    vals
}

/// Basis handle for results of [`rank_signature`] at a given setting.
pub fn signature_basis(
    rank: usize,
    dim: usize,
    max_degree: usize,
) -> Result<std::sync::Arc<Basis>, GradedError> {
    Basis::get(rank, dim, max_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graded::CompositeWord;
    use crate::scalar::ratio;
    use crate::tensor::{shuffle_product, Word};
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn w(letters: &[u8]) -> Word {
        Word(letters.to_vec())
    }

    #[test]
    fn empty_path_is_rejected() {
        assert!(matches!(signature::<f64>(&[], 2), Err(SigError::EmptyPath)));
    }

    #[test]
    fn single_point_at_origin_is_a_pure_time_step() {
        let s = signature(&[vec![0.0]], 3).unwrap();
        assert_eq!(s.coeff(&w(&[])), 1.0);
        assert_eq!(s.coeff(&w(&[0])), 1.0);
        assert_eq!(s.coeff(&w(&[1])), 0.0);
        assert_eq!(s.coeff(&w(&[0, 0])), 0.5);
    }

    #[test]
    fn two_point_path_is_a_product_of_two_exponentials() {
        let path = vec![vec![0.5], vec![2.0]];
        let s = signature(&path, 3).unwrap();
        let expected =
            tensor_product(&tensor_exp(&[1.0, 0.5], 3), &tensor_exp(&[1.0, 1.5], 3)).unwrap();
        assert!(s.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn level_one_reads_step_count_and_endpoint() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let len = rng.gen_range(1..6);
            let path: Vec<Vec<f64>> = (0..len)
                .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
                .collect();
            let s = signature(&path, 2).unwrap();
            assert!((s.coeff(&w(&[0])) - len as f64).abs() < 1e-12);
            let last = path.last().unwrap();
            assert!((s.coeff(&w(&[1])) - last[0]).abs() < 1e-12);
            assert!((s.coeff(&w(&[2])) - last[1]).abs() < 1e-12);
        }
    }

    /// Chen: appending a path whose first increment continues the prefix
    /// multiplies the signatures.
    #[test]
    fn concatenation_multiplies_signatures() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let prefix: Vec<Vec<f64>> = (0..3)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let increments: Vec<Vec<f64>> = (0..3)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let end = prefix.last().unwrap().clone();
            let mut joined = prefix.clone();
            let mut acc = end;
            for inc in &increments {
                acc = vec![acc[0] + inc[0], acc[1] + inc[1]];
                joined.push(acc.clone());
            }
            // the suffix, seen from zero, starts with the same increments
            let mut shifted = vec![];
            let mut run = vec![0.0, 0.0];
            for inc in &increments {
                run = vec![run[0] + inc[0], run[1] + inc[1]];
                shifted.push(run.clone());
            }
            let lhs = signature(&joined, 4).unwrap();
            let rhs = tensor_product(
                &signature(&prefix, 4).unwrap(),
                &signature(&shifted, 4).unwrap(),
            )
            .unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn expected_signature_of_single_path_is_its_signature() {
        let path = vec![vec![0.0], vec![1.0], vec![0.5]];
        let e = expected_signature(&[(1.0, path.clone())], 3).unwrap();
        let s = signature(&path, 3).unwrap();
        assert!(e.max_abs_diff(&s).unwrap() < 1e-15);
    }

    #[test]
    fn mirrored_paths_cancel_odd_space_words() {
        let up = vec![vec![0.0], vec![1.0], vec![2.0]];
        let down = vec![vec![0.0], vec![-1.0], vec![-2.0]];
        let e = expected_signature(&[(0.5, up), (0.5, down)], 3).unwrap();
        assert_eq!(e.coeff(&w(&[1])), 0.0);
        assert!((e.coeff(&w(&[1, 1, 1]))).abs() < 1e-15);
        // even space words survive
        assert!(e.coeff(&w(&[1, 1])) > 0.0);
    }

    #[test]
    fn expected_signature_matches_manual_average_on_two_branches() {
        let tree = fixtures::figure1_left(1).to_f64();
        let paths = tree.enumerate_paths();
        let e = expected_signature(&paths, 2).unwrap();
        let manual = signature(&paths[0].1, 2)
            .unwrap()
            .scale(&0.5)
            .add(&signature(&paths[1].1, 2).unwrap().scale(&0.5))
            .unwrap();
        assert!(e.max_abs_diff(&manual).unwrap() < 1e-15);
    }

    #[test]
    fn expected_signature_rejects_bad_weights() {
        let path = vec![vec![0.0]];
        assert!(matches!(
            expected_signature(&[(0.7, path)], 2),
            Err(SigError::WeightMismatch(_))
        ));
    }

    #[test]
    fn robust_normalize_scale_factor() {
        // ||s|| = 2, sup = 1 → dilation by e^{-3}
        let mut s = Tensor1::zero(1, 1);
        let c = 2.0f64.sqrt();
        s.set_coeff(&w(&[]), c).unwrap();
        s.set_coeff(&w(&[1]), c).unwrap();
        assert!((s.norm(NormMode::Hilbert) - 2.0).abs() < 1e-12);
        let n = robust_normalize(&s, 1.0, NormMode::Hilbert);
        assert!((n.coeff(&w(&[1])) - c * (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(n.coeff(&w(&[])), c); // degree 0 unchanged
    }

    #[test]
    fn robust_normalize_keeps_unit_degree_zero() {
        let one = Tensor1::<f64>::unit(1, 2);
        let n = robust_normalize(&one, 0.0, NormMode::Hilbert);
        assert_eq!(n.coeff(&w(&[])), 1.0);
        assert!(n.norm(NormMode::Hilbert) <= 1.0 + 1e-12);
    }

    #[test]
    fn robust_normalize_distance_to_unit_is_bounded() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..30 {
            let len = rng.gen_range(1..6);
            let path: Vec<Vec<f64>> = (0..len).map(|_| vec![rng.gen_range(-3.0..3.0)]).collect();
            let s = signature(&path, 4).unwrap();
            let sup = path_sup_norm(&path);
            let lam = (-s.norm(NormMode::Hilbert) - sup).exp();
            let normalized = robust_normalize(&s, sup, NormMode::Hilbert);
            let diff = normalized.sub(&Tensor1::unit(1, 4)).unwrap();
            assert!(diff.norm(NormMode::Hilbert) <= lam * s.norm(NormMode::Hilbert) + 1e-12);
        }
    }

    #[test]
    fn shuffle_identity_on_random_paths() {
        let mut rng = StdRng::seed_from_u64(41);
        let words: Vec<Word> = {
            let mut out = Vec::new();
            for m in 0..=3usize {
                for i in 0..3usize.pow(m as u32) {
                    out.push(Word::from_block_index(2, m, i));
                }
            }
            out
        };
        for _ in 0..5 {
            let len = rng.gen_range(2..5);
            let path: Vec<Vec<f64>> = (0..len)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let s = signature(&path, 4).unwrap();
            for u in &words {
                for v in &words {
                    if u.len() + v.len() > 4 || u.is_empty() || v.is_empty() {
                        continue;
                    }
                    let lhs = s.coeff(u) * s.coeff(v);
                    let rhs: f64 = shuffle_product(u, v)
                        .iter()
                        .map(|(word, mult)| *mult as f64 * s.coeff(word))
                        .sum();
                    assert!(
                        (lhs - rhs).abs() < 1e-10,
                        "u={u:?} v={v:?} lhs={lhs} rhs={rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn distinct_integer_paths_have_distinct_signatures() {
        let mut rng = StdRng::seed_from_u64(97);
        let mut paths: Vec<Vec<Vec<f64>>> = Vec::new();
        while paths.len() < 100 {
            let candidate: Vec<Vec<f64>> =
                (0..4).map(|_| vec![rng.gen_range(-3..=3) as f64]).collect();
            if !paths.contains(&candidate) {
                paths.push(candidate);
            }
        }
        let sigs: Vec<Tensor1<f64>> = paths.iter().map(|p| signature(p, 5).unwrap()).collect();
        for i in 0..sigs.len() {
            for j in (i + 1)..sigs.len() {
                assert!(
                    sigs[i].max_abs_diff(&sigs[j]).unwrap() > 1e-9,
                    "paths {i} and {j} collide"
                );
            }
        }
    }

    #[test]
    fn rational_signature_is_exact() {
        let path = vec![vec![ratio(0, 1)], vec![ratio(1, 2)]];
        let s = signature(&path, 2).unwrap();
        assert_eq!(s.coeff(&w(&[])), BigRational::one());
        assert_eq!(s.coeff(&w(&[1])), ratio(1, 2));
        assert_eq!(s.coeff(&w(&[1, 1])), ratio(1, 8));
        assert_eq!(s.coeff(&w(&[0])), ratio(2, 1));
    }

    #[test]
    fn constant_zero_rank1_path_lifts_to_pure_time() {
        let basis = Basis::get(1, 1, 3).unwrap();
        let path = vec![TensorR::<f64>::zero(basis.clone()); 3];
        let s = rank_signature(&path, 3).unwrap();
        // exp((T+1) τ): three commuting pure time steps
        let expected = exp_rank(&3.0, &TensorR::<f64>::zero(basis), 3).unwrap();
        assert!(s.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn single_entry_rank_path_is_one_exponential() {
        let basis = Basis::get(1, 1, 2).unwrap();
        let mut x0 = TensorR::<f64>::unit(basis.clone());
        x0.set_coeff(&CompositeWord::Letters(w(&[1])), 0.5).unwrap();
        let s = rank_signature(&[x0.clone()], 2).unwrap();
        let mut delta = x0;
        delta
            .set_coeff(&CompositeWord::Letters(w(&[])), 0.0)
            .unwrap();
        let expected = exp_rank(&1.0, &delta, 2).unwrap();
        assert!(s.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn rank2_signature_of_a_signature_path() {
        // lift a scalar path to its running rank-1 signatures, then take
        // the rank-2 signature of that tensor-valued path
        let path = [vec![0.0], vec![1.0], vec![0.5]];
        let lifted: Vec<TensorR<f64>> = (0..path.len())
            .map(|t| TensorR::from_tensor1(&signature(&path[..=t], 2).unwrap()).unwrap())
            .collect();
        let s2 = rank_signature(&lifted, 2).unwrap();
        assert_eq!(s2.rank(), 2);
        // degree-0 coefficient of any signature is 1
        assert!((s2.coeff(&CompositeWord::Seq(vec![])) - 1.0).abs() < 1e-12);
        // level-1 time coefficient counts the outer increments
        assert!(
            (s2.coeff(&CompositeWord::Seq(vec![crate::graded::Gen::Time])) - 3.0).abs() < 1e-12
        );
    }

    #[test]
    fn conditional_process_on_a_chain_is_constant_at_rank_1() {
        let tree = fixtures::chain(&[0.0, 1.0, -0.5, 2.0]);
        let vals = conditional_signature_process(&tree, 1, 3, None).unwrap();
        let full = TensorR::from_tensor1(
            &signature(&[vec![0.0], vec![1.0], vec![-0.5], vec![2.0]], 3).unwrap(),
        )
        .unwrap();
        for v in &vals {
            assert!(v.max_abs_diff(&full).unwrap() < 1e-12);
        }
    }

    #[test]
    fn leaf_values_are_branch_signatures() {
        let tree = fixtures::appendix_a_x().to_f64();
        let vals = conditional_signature_process(&tree, 1, 2, None).unwrap();
        for &leaf in tree.leaves() {
            let path: Vec<Vec<f64>> = tree
                .branch(leaf)
                .iter()
                .map(|&id| tree.node(id).value.clone())
                .collect();
            let expected = TensorR::from_tensor1(&signature(&path, 2).unwrap()).unwrap();
            assert!(vals[leaf].max_abs_diff(&expected).unwrap() < 1e-12);
        }
    }

    /// Averaging the conditional values over the leaves reproduces the
    /// expected signature at every time (tower property).
    #[test]
    fn conditional_values_average_to_the_expected_signature() {
        let tree = fixtures::appendix_a_x().to_f64();
        let vals = conditional_signature_process(&tree, 1, 3, None).unwrap();
        let expected =
            TensorR::from_tensor1(&expected_signature(&tree.enumerate_paths(), 3).unwrap())
                .unwrap();
        for t in 0..=tree.time_horizon() {
            let mut acc = TensorR::zero(vals[0].basis().clone());
            for &leaf in tree.leaves() {
                let atom = tree.ancestor_at_depth(leaf, t);
                acc = acc.add(&vals[atom].scale(&tree.atom_prob(leaf))).unwrap();
            }
            assert!(acc.max_abs_diff(&expected).unwrap() < 1e-12, "t={t}");
        }
    }

    /// The two 16-outcome processes share the law of the rank-1
    /// conditional signature process but differ at rank 2.
    #[test]
    fn appendix_a_rank1_laws_agree_and_rank2_laws_differ() {
        let x = fixtures::appendix_a_x().to_f64();
        let y = fixtures::appendix_a_y().to_f64();

        // law of the conditional-signature path, as a sorted multiset of
        // flattened per-leaf trajectories
        fn law(tree: &FiltrationTree<f64>, vals: &[TensorR<f64>]) -> Vec<Vec<f64>> {
            let mut out: Vec<Vec<f64>> = tree
                .leaves()
                .iter()
                .map(|&leaf| {
                    let mut flat = Vec::new();
                    for &id in &tree.branch(leaf) {
                        flat.extend(vals[id].coeffs().iter().copied());
                    }
                    flat
                })
                .collect();
            out.sort_by(|a, b| a.partial_cmp(b).unwrap());
            out
        }
        fn law_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
            a.iter()
                .zip(b.iter())
                .flat_map(|(x, y)| x.iter().zip(y.iter()))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        }

        let vx = conditional_signature_process(&x, 1, 3, None).unwrap();
        let vy = conditional_signature_process(&y, 1, 3, None).unwrap();
        let gap1 = law_gap(&law(&x, &vx), &law(&y, &vy));
        assert!(gap1 < 1e-12, "rank-1 laws differ by {gap1}");

        let vx2 = conditional_signature_process(&x, 2, 3, None).unwrap();
        let vy2 = conditional_signature_process(&y, 2, 3, None).unwrap();
        let gap2 = law_gap(&law(&x, &vx2), &law(&y, &vy2));
        assert!(gap2 > 1e-6, "rank-2 laws should differ, got {gap2}");
    }

    #[test]
    fn robust_mode_keeps_conditional_values_bounded() {
        let tree = fixtures::appendix_a_x().to_f64();
        let vals = conditional_signature_process(&tree, 1, 3, Some(NormMode::Hilbert)).unwrap();
        for v in &vals {
            assert!(v.norm(NormMode::Hilbert) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn zero_rank_is_rejected() {
        let tree = fixtures::chain(&[0.0, 1.0]);
        assert!(matches!(
            conditional_signature_process(&tree, 0, 2, None),
            Err(SigError::RankTooLow)
        ));
    }

    #[test]
    fn rank_signature_rejects_mixed_algebras() {
        let a = TensorR::<f64>::unit(Basis::get(1, 1, 2).unwrap());
        let b = TensorR::<f64>::unit(Basis::get(1, 2, 2).unwrap());
        assert!(matches!(
            rank_signature(&[a, b], 2),
            Err(SigError::Graded(GradedError::AlgebraMismatch { .. }))
        ));
    }

    #[test]
    fn rational_rank_signature_is_exact() {
        use crate::graded::Gen;
        let basis = Basis::get(1, 1, 2).unwrap();
        let mut x0 = TensorR::<BigRational>::zero(basis.clone());
        x0.set_coeff(&CompositeWord::Letters(w(&[1])), ratio(1, 3))
            .unwrap();
        let mut x1 = TensorR::<BigRational>::zero(basis);
        x1.set_coeff(&CompositeWord::Letters(w(&[1])), ratio(1, 2))
            .unwrap();
        let s = rank_signature(&[x0, x1], 2).unwrap();
        let tau = CompositeWord::Seq(vec![Gen::Time]);
        assert_eq!(s.coeff(&tau), ratio(2, 1));
        let g = CompositeWord::Seq(vec![Gen::Inner(CompositeWord::Letters(w(&[1])))]);
        assert_eq!(s.coeff(&g), ratio(1, 2));
        assert_eq!(s.coeff(&CompositeWord::empty(2)), BigRational::one());
        assert!(!s
            .coeff(&CompositeWord::Seq(vec![Gen::Time, Gen::Time]))
            .is_zero());
    }
}
