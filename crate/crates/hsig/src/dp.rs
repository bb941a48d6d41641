//! Dynamic programs for the expected-signature functionals of rank 0 and
//! 1, a generic recursion for higher ranks, and a brute-force enumeration
//! kept independent of the dynamic programs as a test oracle.
//!
//! The rank-0 value function satisfies `u(leaf) = 1` and
//! `u(a) = Σ_b p(a,b) · exp(1, x_b - x_a) ⊗ u(b)`; the functional is
//! `exp(1, x_root) ⊗ u(root)`. Rank 1 couples that recursion with a second
//! one whose increments are differences of partial-signature-weighted
//! continuations, multiplied in the rank-2 algebra. Both are evaluated
//! iteratively with an explicit stack, so chains of any depth run in
//! constant host-stack space.

use crate::graded::{exp_rank, graded_dim_cumulative, Basis, CompositeWord, GradedError, TensorR};
use crate::process::FiltrationTree;
use crate::sig::{
    conditional_signature_process, rank_signature, robust_signature, signature, SigError,
};
use crate::tensor::{tensor_exp, tensor_product, NormMode, Tensor1, TensorError};
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Coefficient budget for one functional evaluation: basis size times
/// node count. Requests beyond this return [`DpError::Resource`].
pub const DEFAULT_COEFF_BUDGET: u128 = 1 << 26;

/// Leaf cap for the brute-force oracle.
pub const DEFAULT_LEAF_CAP: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum DpError {
    #[error("request needs about {required} coefficients (basis {basis_len} x {nodes} nodes), over the budget of {budget}")]
    Resource {
        required: u128,
        basis_len: u128,
        nodes: usize,
        budget: u128,
    },
    #[error("tree has {leaves} leaves, over the brute-force cap of {cap}")]
    LeafCap { leaves: usize, cap: usize },
    #[error(transparent)]
    Sig(#[from] SigError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// How a functional value was computed.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Dp,
    BruteForce,
    GenericRecursion,
}

/// Work counters reported alongside every result.
#[derive(Copy, Clone, Debug, Default, Serialize, Deserialize)]
pub struct Counters {
    /// Nodes visited by the tree recursion (one visit per node).
    pub node_visits: u64,
    /// Peak depth of the explicit evaluation stack, in edges.
    pub peak_stack_depth: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Value of the rank-`r` expected-signature functional on a tree.
#[derive(Clone, Debug)]
pub struct PhiResult {
    pub rank: usize,
    pub max_degree: usize,
    /// Element of the rank-`r+1` algebra.
    pub value: TensorR<f64>,
    pub provenance: Provenance,
    pub counters: Counters,
}

fn time_augmented(dim: usize, from: &[f64], to: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; dim + 1];
    v[0] = 1.0;
    for (slot, (a, b)) in v[1..].iter_mut().zip(to.iter().zip(from.iter())) {
        *slot = a - b;
    }
    v
}

fn initial_increment(dim: usize, value: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; dim + 1];
    v[0] = 1.0;
    v[1..].copy_from_slice(value);
    v
}

struct Traversal {
    visits: u64,
    peak: usize,
}

/// Rank-0 functional by the one-pass value recursion (explicit stack).
pub fn phi0_dp(tree: &FiltrationTree<f64>, max_degree: usize) -> Result<PhiResult, DpError> {
    let start = Instant::now();
    let dim = tree.dim();

    struct Frame {
        node: usize,
        next_child: usize,
        acc: Tensor1<f64>,
    }

    let mut trav = Traversal { visits: 0, peak: 0 };
    let mut stack = vec![Frame {
        node: tree.root(),
        next_child: 0,
        acc: Tensor1::zero(dim, max_degree),
    }];
    trav.visits += 1;
    let mut root_value: Option<Tensor1<f64>> = None;
    loop {
        trav.peak = trav.peak.max(stack.len().saturating_sub(1));
        let Some(top) = stack.last_mut() else { break };
        let node = tree.node(top.node);
        if top.next_child < node.children.len() {
            let child = node.children[top.next_child];
            top.next_child += 1;
            stack.push(Frame {
                node: child,
                next_child: 0,
                acc: Tensor1::zero(dim, max_degree),
            });
            trav.visits += 1;
            continue;
        }
        let frame = stack.pop().expect("stack is nonempty");
        let value = if node.children.is_empty() {
            Tensor1::unit(dim, max_degree)
        } else {
            frame.acc
        };
        match stack.last_mut() {
            Some(parent) => {
                let p = tree.node(frame.node).prob;
                let step = tensor_exp(
                    &time_augmented(
                        dim,
                        &tree.node(parent.node).value,
                        &tree.node(frame.node).value,
                    ),
                    max_degree,
                );
                parent.acc = parent.acc.add(&tensor_product(&step, &value)?.scale(&p))?;
            }
            None => root_value = Some(value),
        }
    }
    let u_root = root_value.expect("traversal reached the root");
    let head = tensor_exp(
        &initial_increment(dim, &tree.node(tree.root()).value),
        max_degree,
    );
    let value = TensorR::from_tensor1(&tensor_product(&head, &u_root)?)?;
    Ok(PhiResult {
        rank: 0,
        max_degree,
        value,
        provenance: Provenance::Dp,
        counters: Counters {
            node_visits: trav.visits,
            peak_stack_depth: trav.peak,
            elapsed: start.elapsed(),
        },
    })
}

/// Rank-1 functional: a single post-order pass computes both coupled
/// value functions, caching per-node continuations and the partial branch
/// signatures along the active path.
pub fn phi1_dp(tree: &FiltrationTree<f64>, max_degree: usize) -> Result<PhiResult, DpError> {
    let start = Instant::now();
    let dim = tree.dim();
    let rank2 = Basis::get(2, dim, max_degree)?;

    struct Frame {
        node: usize,
        next_child: usize,
        /// partial signature of the branch from the root to this node
        partial_sig: Tensor1<f64>,
        /// (child id, v1, v2) for completed children
        done: Vec<(usize, Tensor1<f64>, TensorR<f64>)>,
    }

    let mut trav = Traversal { visits: 0, peak: 0 };
    let root_sig = tensor_exp(
        &initial_increment(dim, &tree.node(tree.root()).value),
        max_degree,
    );
    let mut stack = vec![Frame {
        node: tree.root(),
        next_child: 0,
        partial_sig: root_sig,
        done: Vec::new(),
    }];
    trav.visits += 1;
    let mut root_value: Option<(Tensor1<f64>, TensorR<f64>)> = None;
    loop {
        trav.peak = trav.peak.max(stack.len().saturating_sub(1));
        let Some(top) = stack.last_mut() else { break };
        let node = tree.node(top.node);
        if top.next_child < node.children.len() {
            let child = node.children[top.next_child];
            top.next_child += 1;
            let step = tensor_exp(
                &time_augmented(dim, &node.value, &tree.node(child).value),
                max_degree,
            );
            let child_sig = tensor_product(&top.partial_sig, &step)?;
            stack.push(Frame {
                node: child,
                next_child: 0,
                partial_sig: child_sig,
                done: Vec::new(),
            });
            trav.visits += 1;
            continue;
        }
        let frame = stack.pop().expect("stack is nonempty");
        let result = if node.children.is_empty() {
            (Tensor1::unit(dim, max_degree), TensorR::unit(rank2.clone()))
        } else {
            // first the plain continuation value
            let mut v1 = Tensor1::zero(dim, max_degree);
            for (child, c1, _) in &frame.done {
                let p = tree.node(*child).prob;
                let step = tensor_exp(
                    &time_augmented(dim, &node.value, &tree.node(*child).value),
                    max_degree,
                );
                v1 = v1.add(&tensor_product(&step, c1)?.scale(&p))?;
            }
            // then the outer one, whose increments difference the
            // conditional signature values along the step
            let here = tensor_product(&frame.partial_sig, &v1)?;
            let mut v2 = TensorR::zero(rank2.clone());
            for (child, c1, c2) in &frame.done {
                let p = tree.node(*child).prob;
                let step = tensor_exp(
                    &time_augmented(dim, &node.value, &tree.node(*child).value),
                    max_degree,
                );
                let child_sig = tensor_product(&frame.partial_sig, &step)?;
                let there = tensor_product(&child_sig, c1)?;
                let delta = TensorR::from_tensor1(&there.sub(&here)?)?;
                let lift = exp_rank(&1.0, &delta, max_degree)?;
                v2 = v2.add(&lift.product(c2)?.scale(&p))?;
            }
            (v1, v2)
        };
        match stack.last_mut() {
            Some(parent) => parent.done.push((frame.node, result.0, result.1)),
            None => root_value = Some(result),
        }
    }
    let (v1_root, v2_root) = root_value.expect("traversal reached the root");
    // initial outer increment: the time-zero conditional signature value,
    // entering through the unit-free generator space
    let x_bar_0 = tensor_product(
        &tensor_exp(
            &initial_increment(dim, &tree.node(tree.root()).value),
            max_degree,
        ),
        &v1_root,
    )?;
    let mut delta0 = TensorR::from_tensor1(&x_bar_0)?;
    delta0.set_coeff(&CompositeWord::empty(1), 0.0)?;
    let head = exp_rank(&1.0, &delta0, max_degree)?;
    let value = head.product(&v2_root)?;
    Ok(PhiResult {
        rank: 1,
        max_degree,
        value,
        provenance: Provenance::Dp,
        counters: Counters {
            node_visits: trav.visits,
            peak_stack_depth: trav.peak,
            elapsed: start.elapsed(),
        },
    })
}

/// Rank-`r` functional through the conditional signature recursion; used
/// for `r >= 2` and whenever robust normalization is requested.
pub fn phi_generic(
    tree: &FiltrationTree<f64>,
    rank: usize,
    max_degree: usize,
    robust: Option<NormMode>,
) -> Result<PhiResult, DpError> {
    let start = Instant::now();
    let per_node = conditional_signature_process(tree, rank + 1, max_degree, robust)?;
    let value = per_node[tree.root()].clone();
    Ok(PhiResult {
        rank,
        max_degree,
        value,
        provenance: Provenance::GenericRecursion,
        counters: Counters {
            node_visits: tree.node_count() as u64 * (rank as u64 + 1),
            peak_stack_depth: tree.time_horizon(),
            elapsed: start.elapsed(),
        },
    })
}

fn check_budget(tree: &FiltrationTree<f64>, rank: usize, max_degree: usize) -> Result<(), DpError> {
    let basis_len = graded_dim_cumulative(rank + 1, tree.dim(), max_degree);
    let required = basis_len.saturating_mul(tree.node_count() as u128);
    if required > DEFAULT_COEFF_BUDGET {
        return Err(DpError::Resource {
            required,
            basis_len,
            nodes: tree.node_count(),
            budget: DEFAULT_COEFF_BUDGET,
        });
    }
    Ok(())
}

/// Rank-`r` expected-signature functional of a validated tree.
///
/// Ranks 0 and 1 run their dynamic programs; higher ranks use the generic
/// recursion. Robust normalization is applied per path signature, which
/// no product recursion can absorb, so it forces the generic route.
pub fn phi(
    tree: &FiltrationTree<f64>,
    rank: usize,
    max_degree: usize,
    robust: Option<NormMode>,
) -> Result<PhiResult, DpError> {
    check_budget(tree, rank, max_degree)?;
    let mut result = if robust.is_some() {
        phi_generic(tree, rank, max_degree, robust)?
    } else {
        match rank {
            0 => phi0_dp(tree, max_degree)?,
            1 => phi1_dp(tree, max_degree)?,
            _ => phi_generic(tree, rank, max_degree, None)?,
        }
    };
    result.rank = rank;
    Ok(result)
}

/// Full-enumeration evaluation of the rank-`r` functional, independent of
/// the dynamic programs: conditional values are rebuilt per atom by direct
/// probability-weighted averaging over the leaves below it.
pub fn brute_force_phi(
    tree: &FiltrationTree<f64>,
    rank: usize,
    max_degree: usize,
    robust: Option<NormMode>,
    leaf_cap: usize,
) -> Result<PhiResult, DpError> {
    let start = Instant::now();
    let leaves = tree.leaves();
    if leaves.len() > leaf_cap {
        return Err(DpError::LeafCap {
            leaves: leaves.len(),
            cap: leaf_cap,
        });
    }
    let leaf_probs: Vec<f64> = leaves.iter().map(|&l| tree.atom_prob(l)).collect();

    // rank-0 conditional "path" per leaf is the value path itself; each
    // higher level averages signatures directly per atom
    let mut lifted: Vec<TensorR<f64>> = leaves
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
        .collect::<Result<_, SigError>>()?;

    for _ in 1..=rank {
        // per-atom direct averages of the current leaf signatures
        let mut per_node: Vec<TensorR<f64>> =
            vec![TensorR::zero(lifted[0].basis().clone()); tree.node_count()];
        for (id, slot) in per_node.iter_mut().enumerate() {
            let depth = tree.node(id).depth;
            let mut acc = TensorR::zero(lifted[0].basis().clone());
            let mut mass = 0.0;
            for (li, &leaf) in leaves.iter().enumerate() {
                if tree.ancestor_at_depth(leaf, depth) == id {
                    acc = acc.add(&lifted[li].scale(&leaf_probs[li]))?;
                    mass += leaf_probs[li];
                }
            }
            if mass > 0.0 {
                *slot = acc.scale(&(1.0 / mass));
            }
        }
        // lift each leaf's conditional path one rank up
        lifted = leaves
            .iter()
            .map(|&leaf| {
                let path: Vec<TensorR<f64>> = tree
                    .branch(leaf)
                    .iter()
                    .map(|&id| per_node[id].clone())
                    .collect();
                let s = rank_signature(&path, max_degree)?;
                Ok(match robust {
                    Some(mode) => {
                        let sup = path.iter().map(|v| v.norm(mode)).fold(0.0, f64::max);
                        s.dilate(&(-s.norm(mode) - sup).exp())
                    }
                    None => s,
                })
            })
            .collect::<Result<_, SigError>>()?;
    }

    let mut value = TensorR::zero(lifted[0].basis().clone());
    for (li, s) in lifted.iter().enumerate() {
        value = value.add(&s.scale(&leaf_probs[li]))?;
    }
    Ok(PhiResult {
        rank,
        max_degree,
        value,
        provenance: Provenance::BruteForce,
        counters: Counters {
            node_visits: (leaves.len() * (tree.time_horizon() + 1)) as u64,
            peak_stack_depth: tree.time_horizon(),
            elapsed: start.elapsed(),
        },
    })
}

/// Runs the rank-0 dynamic program and reports its counters.
pub fn complexity_probe(
    tree: &FiltrationTree<f64>,
    max_degree: usize,
) -> Result<Counters, DpError> {
    Ok(phi0_dp(tree, max_degree)?.counters)
}

/// Single coordinate of the rank-`rank` functional, evaluated directly.
///
/// `word` is a basis word of the rank-`rank+1` algebra. The inner
/// conditional values are computed only up to the largest generator
/// degree (coefficients of a fixed word never depend on higher-degree
/// ones), then the coordinate is a sum over nondecreasing placements of
/// the word's generators onto the path's exponential factors, with a
/// factorial weight per group sharing a factor. This reaches coordinates
/// whose total degree puts the full basis out of memory reach.
pub fn phi_word_coefficient(
    tree: &FiltrationTree<f64>,
    rank: usize,
    word: &CompositeWord,
) -> Result<f64, DpError> {
    // generator list of the outer word: None marks the time letter
    let gens: Vec<Option<CompositeWord>> = match word {
        CompositeWord::Letters(w) => {
            w.0.iter()
                .map(|&l| {
                    if l == crate::tensor::TIME_LETTER {
                        None
                    } else {
                        Some(CompositeWord::Letters(crate::tensor::Word(vec![l])))
                    }
                })
                .collect()
        }
        CompositeWord::Seq(gs) => gs
            .iter()
            .map(|g| match g {
                crate::graded::Gen::Time => None,
                crate::graded::Gen::Inner(w) => Some(w.clone()),
            })
            .collect(),
    };
    if gens.is_empty() {
        return Ok(1.0);
    }
    let inner_degree = gens
        .iter()
        .filter_map(|g| g.as_ref().map(|w| w.degree()))
        .max()
        .unwrap_or(1);

    // per-time generator coefficients of the increments, per leaf
    let horizon = tree.time_horizon();
    let leaf_deltas: Vec<Vec<Vec<f64>>> = if rank == 0 {
        // outer path is the value path itself
        tree.leaves()
            .iter()
            .map(|&leaf| {
                let branch = tree.branch(leaf);
                (0..=horizon)
                    .map(|t| {
                        gens.iter()
                            .map(|g| match g {
                                None => 1.0,
                                Some(CompositeWord::Letters(w)) => {
                                    let coord = w.0[0] as usize - 1;
                                    let here = tree.node(branch[t]).value[coord];
                                    let prev = if t == 0 {
                                        0.0
                                    } else {
                                        tree.node(branch[t - 1]).value[coord]
                                    };
                                    here - prev
                                }
                                Some(other) => panic!("rank-0 generator {other:?}"),
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    } else {
        let per_node = conditional_signature_process(tree, rank, inner_degree, None)?;
        tree.leaves()
            .iter()
            .map(|&leaf| {
                let branch = tree.branch(leaf);
                (0..=horizon)
                    .map(|t| {
                        gens.iter()
                            .map(|g| match g {
                                None => 1.0,
                                Some(w) => {
                                    let here = per_node[branch[t]].coeff(w);
                                    let prev = if t == 0 {
                                        0.0
                                    } else {
                                        per_node[branch[t - 1]].coeff(w)
                                    };
                                    here - prev
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };

    // placement sum: f[i][t] handles generators i.. with factors >= t
    let k = gens.len();
    let mut factorial = vec![1.0; k + 1];
    for j in 1..=k {
        factorial[j] = factorial[j - 1] * j as f64;
    }
    let mut total = 0.0;
    for (li, deltas) in leaf_deltas.iter().enumerate() {
        let mut f = vec![vec![0.0; horizon + 2]; k + 1];
        f[k] = vec![1.0; horizon + 2];
        for i in (0..k).rev() {
            for t in (0..=horizon).rev() {
                let mut acc = f[i][t + 1];
                let mut run = 1.0;
                for j in 1..=(k - i) {
                    run *= deltas[t][i + j - 1];
                    acc += run / factorial[j] * f[i + j][t + 1];
                }
                f[i][t] = acc;
            }
        }
        total += tree.atom_prob(tree.leaves()[li]) * f[0][0];
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sig::expected_signature;

    fn max_diff(a: &PhiResult, b: &PhiResult) -> f64 {
        a.value.max_abs_diff(&b.value).unwrap()
    }

    #[test]
    fn chain_phi0_is_the_path_signature() {
        let tree = fixtures::chain(&[0.0, 1.0, -0.5, 2.0]);
        let phi0 = phi0_dp(&tree, 3).unwrap();
        let s = signature(&[vec![0.0], vec![1.0], vec![-0.5], vec![2.0]], 3).unwrap();
        let expected = TensorR::from_tensor1(&s).unwrap();
        assert!(phi0.value.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn phi0_matches_path_enumeration() {
        let tree = fixtures::figure1_left(4).to_f64();
        let phi0 = phi0_dp(&tree, 3).unwrap();
        let e = expected_signature(&tree.enumerate_paths(), 3).unwrap();
        let expected = TensorR::from_tensor1(&e).unwrap();
        assert!(phi0.value.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn phi0_matches_oracle_on_the_16_outcome_tree() {
        let tree = fixtures::appendix_a_x().to_f64();
        let phi0 = phi0_dp(&tree, 4).unwrap();
        let oracle = brute_force_phi(&tree, 0, 4, None, DEFAULT_LEAF_CAP).unwrap();
        assert!(max_diff(&phi0, &oracle) < 1e-12);
    }

    #[test]
    fn chain_phi1_is_the_rank2_signature_of_a_constant_path() {
        let tree = fixtures::chain(&[0.0, 1.0, 2.0]);
        let phi1 = phi1_dp(&tree, 2).unwrap();
        // one branch: the conditional value at every time is the full
        // signature, so the outer path is constant
        let full =
            TensorR::from_tensor1(&signature(&[vec![0.0], vec![1.0], vec![2.0]], 2).unwrap())
                .unwrap();
        let path = vec![full.clone(), full.clone(), full];
        let expected = rank_signature(&path, 2).unwrap();
        assert!(phi1.value.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn phi1_separates_the_two_stage_examples() {
        // degree 3 is the first level that sees when information arrives:
        // at degree 2 the martingale structure makes the two coincide
        for n in [1, 4, 16] {
            let left = fixtures::figure1_left(n).to_f64();
            let right = fixtures::figure1_right().to_f64();
            let same = phi1_dp(&left, 2).unwrap();
            let same2 = phi1_dp(&right, 2).unwrap();
            assert!(
                max_diff(&same, &same2) < 1e-12,
                "degree 2 cannot separate, n={n}"
            );
            let a = phi1_dp(&left, 3).unwrap();
            let b = phi1_dp(&right, 3).unwrap();
            assert!(max_diff(&a, &b) > 1e-3, "n={n}");
        }
    }

    #[test]
    fn phi1_matches_generic_recursion_on_random_trees() {
        for seed in 0..10u64 {
            let tree = fixtures::random_tree(seed, 4, 3, 1);
            let dp = phi1_dp(&tree, 3).unwrap();
            let generic = phi_generic(&tree, 1, 3, None).unwrap();
            assert!(max_diff(&dp, &generic) < 1e-10, "seed={seed}");
        }
    }

    #[test]
    fn dp_and_oracle_agree_on_random_trees() {
        for seed in 0..25u64 {
            let dim = 1 + (seed % 2) as usize;
            let tree = fixtures::random_tree(seed, 4, 3, dim);
            let m = 2 + (seed % 2) as usize;
            let oracle0 = brute_force_phi(&tree, 0, m, None, DEFAULT_LEAF_CAP).unwrap();
            let dp0 = phi0_dp(&tree, m).unwrap();
            assert!(max_diff(&dp0, &oracle0) < 1e-10, "rank 0 seed={seed}");
            let oracle1 = brute_force_phi(&tree, 1, m, None, DEFAULT_LEAF_CAP).unwrap();
            let dp1 = phi1_dp(&tree, m).unwrap();
            assert!(max_diff(&dp1, &oracle1) < 1e-10, "rank 1 seed={seed}");
        }
    }

    #[test]
    fn brute_force_on_a_chain_is_the_path_signature() {
        let tree = fixtures::chain(&[0.0, -1.0, 2.0]);
        let oracle = brute_force_phi(&tree, 0, 3, None, DEFAULT_LEAF_CAP).unwrap();
        let expected =
            TensorR::from_tensor1(&signature(&[vec![0.0], vec![-1.0], vec![2.0]], 3).unwrap())
                .unwrap();
        assert!(oracle.value.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn brute_force_on_uniform_three_way_root() {
        use crate::process::NodeSpec;
        let third = 1.0 / 3.0;
        let leaf = |v: f64| NodeSpec::new(1.0, vec![v], vec![]);
        let spec = NodeSpec::new(
            1.0,
            vec![0.0],
            vec![
                NodeSpec::new(third, vec![1.0], vec![leaf(2.0)]),
                NodeSpec::new(third, vec![0.0], vec![leaf(-1.0)]),
                NodeSpec::new(third, vec![-1.0], vec![leaf(0.5)]),
            ],
        );
        let tree = crate::process::FiltrationTree::from_spec(2, 1, spec)
            .validated()
            .unwrap();
        let oracle = brute_force_phi(&tree, 0, 3, None, DEFAULT_LEAF_CAP).unwrap();
        let mut manual = Tensor1::zero(1, 3);
        for (p, path) in tree.enumerate_paths() {
            manual = manual.add(&signature(&path, 3).unwrap().scale(&p)).unwrap();
        }
        let expected = TensorR::from_tensor1(&manual).unwrap();
        assert!(oracle.value.max_abs_diff(&expected).unwrap() < 1e-13);
    }

    #[test]
    fn phi_dispatch_is_consistent() {
        let tree = fixtures::appendix_a_x().to_f64();
        let via_phi = phi(&tree, 0, 3, None).unwrap();
        let direct = phi0_dp(&tree, 3).unwrap();
        assert!(max_diff(&via_phi, &direct) < 1e-15);
        assert_eq!(via_phi.provenance, Provenance::Dp);
        let generic = phi(&tree, 2, 2, None).unwrap();
        assert_eq!(generic.provenance, Provenance::GenericRecursion);
        assert_eq!(generic.rank, 2);
        assert_eq!(generic.value.rank(), 3);
    }

    /// The two 16-outcome processes agree at rank 1 at every truncation;
    /// at rank 2 the functional values still coincide for every feasible
    /// truncation (the first separating coordinate has total degree 7; see
    /// the metrics tests for the exact witness), while the rank-2
    /// conditional-law trajectories already differ at degree 3.
    #[test]
    fn rank1_functionals_agree_and_rank2_values_stay_rigid_at_low_degree() {
        let x = fixtures::appendix_a_x().to_f64();
        let y = fixtures::appendix_a_y().to_f64();
        let x1 = phi(&x, 1, 4, None).unwrap();
        let y1 = phi(&y, 1, 4, None).unwrap();
        assert!(max_diff(&x1, &y1) < 1e-10);
        let x2 = phi(&x, 2, 4, None).unwrap();
        let y2 = phi(&y, 2, 4, None).unwrap();
        assert!(max_diff(&x2, &y2) < 1e-10);
    }

    #[test]
    fn degree_zero_coefficient_is_one() {
        for seed in [3u64, 11] {
            let tree = fixtures::random_tree(seed, 4, 3, 1);
            for rank in 0..=2usize {
                let result = phi(&tree, rank, 2, None).unwrap();
                let unit = CompositeWord::empty(rank + 1);
                assert!((result.value.coeff(&unit) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn robust_mode_routes_through_the_generic_recursion_and_matches_oracle() {
        let tree = fixtures::random_tree(7, 4, 2, 1);
        let a = phi(&tree, 1, 2, Some(NormMode::Hilbert)).unwrap();
        assert_eq!(a.provenance, Provenance::GenericRecursion);
        let b = brute_force_phi(&tree, 1, 2, Some(NormMode::Hilbert), DEFAULT_LEAF_CAP).unwrap();
        assert!(max_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn resource_budget_is_enforced_with_an_estimate() {
        let tree = fixtures::random_tree(1, 5, 3, 2);
        let err = phi(&tree, 2, 9, None).unwrap_err();
        match err {
            DpError::Resource {
                required, budget, ..
            } => {
                assert!(required > budget);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn leaf_cap_is_enforced() {
        let tree = fixtures::appendix_a_x().to_f64();
        assert!(matches!(
            brute_force_phi(&tree, 0, 2, None, 4),
            Err(DpError::LeafCap { leaves: 16, cap: 4 })
        ));
    }

    #[test]
    fn probe_counts_nodes_and_depth() {
        // chain with six nodes: six visits, depth five
        let chain = fixtures::chain(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let c = complexity_probe(&chain, 1).unwrap();
        assert_eq!(c.node_visits, 6);
        assert_eq!(c.peak_stack_depth, 5);

        // full binary tree of depth 4: 31 visits
        let x = fixtures::appendix_a_x().to_f64();
        let c = complexity_probe(&x, 1).unwrap();
        assert_eq!(c.node_visits, 31);
        assert_eq!(c.peak_stack_depth, 4);
    }

    #[test]
    fn probe_visits_scale_linearly_with_node_count() {
        // same depth, doubled width
        use crate::process::NodeSpec;
        let make = |width: usize| {
            let children: Vec<NodeSpec<f64>> = (0..width)
                .map(|i| {
                    NodeSpec::new(
                        1.0 / width as f64,
                        vec![i as f64],
                        vec![NodeSpec::new(1.0, vec![0.0], vec![])],
                    )
                })
                .collect();
            crate::process::FiltrationTree::from_spec(2, 1, NodeSpec::new(1.0, vec![0.0], children))
                .validated()
                .unwrap()
        };
        let narrow = complexity_probe(&make(8), 1).unwrap();
        let wide = complexity_probe(&make(16), 1).unwrap();
        assert_eq!(narrow.node_visits, 17);
        assert_eq!(wide.node_visits, 33);
        assert_eq!(narrow.peak_stack_depth, wide.peak_stack_depth);
    }

    /// Perturbing one transition row moves the functional by an amount
    /// proportional to the perturbation.
    #[test]
    fn phi0_is_lipschitz_in_the_transition_probabilities() {
        use crate::process::NodeSpec;
        let make = |delta: f64| {
            let spec = NodeSpec::new(
                1.0,
                vec![0.0],
                vec![
                    NodeSpec::new(
                        0.5 + delta,
                        vec![1.0],
                        vec![NodeSpec::new(1.0, vec![2.0], vec![])],
                    ),
                    NodeSpec::new(
                        0.5 - delta,
                        vec![-1.0],
                        vec![NodeSpec::new(1.0, vec![-2.0], vec![])],
                    ),
                ],
            );
            crate::process::FiltrationTree::from_spec(2, 1, spec)
                .validated()
                .unwrap()
        };
        let base = phi0_dp(&make(0.0), 3).unwrap();
        let slope = |delta: f64| {
            let moved = phi0_dp(&make(delta), 3).unwrap();
            moved
                .value
                .sub(&base.value)
                .unwrap()
                .norm(NormMode::Hilbert)
                / delta
        };
        let s3 = slope(1e-3);
        let s4 = slope(1e-4);
        assert!(s3.is_finite() && s4.is_finite());
        assert!((s3 / s4 - 1.0).abs() < 0.1, "slopes {s3} vs {s4}");
    }
}
