//! Built-in processes used by tests, the CLI `fixtures` command and the
//! worked examples.

use crate::process::{FiltrationTree, NodeSpec};
use crate::scalar::ratio;
use num_rational::BigRational;

/// Leaf values of the first 16-outcome process: times 0..=3 sit at zero,
/// time 4 jumps to 1 or 2 with this pattern over the depth-first leaves.
pub const APPENDIX_A_X4: [i64; 16] = [1, 1, 2, 2, 1, 1, 2, 2, 1, 2, 1, 2, 1, 2, 1, 2];

/// Leaf values of the partner process: same law and same one-step
/// prediction law as the first, but a different information structure.
pub const APPENDIX_A_Y4: [i64; 16] = [1, 1, 2, 2, 1, 2, 1, 2, 1, 1, 2, 2, 1, 2, 1, 2];

fn binary_jump_tree(leaf_values: &[i64; 16]) -> FiltrationTree<BigRational> {
    let half = ratio(1, 2);
    let zero = ratio(0, 1);
    // full binary tree of depth 4, uniform 1/2 branching, values 0 until
    // the jump at the final time
    let mut leaf_iter = leaf_values.iter();
    fn build(
        depth: usize,
        prob: BigRational,
        half: &BigRational,
        zero: &BigRational,
        leaf_iter: &mut std::slice::Iter<'_, i64>,
    ) -> NodeSpec<BigRational> {
        if depth == 4 {
            let v = *leaf_iter.next().expect("16 leaf values");
            return NodeSpec::new(prob, vec![ratio(v, 1)], vec![]);
        }
        let children = vec![
            build(depth + 1, half.clone(), half, zero, leaf_iter),
            build(depth + 1, half.clone(), half, zero, leaf_iter),
        ];
        NodeSpec::new(prob, vec![zero.clone()], children)
    }
    let root = build(0, ratio(1, 1), &half, &zero, &mut leaf_iter);
    FiltrationTree::from_spec(4, 1, root)
        .validated()
        .expect("fixture is valid")
}

/// The 16-outcome process `X` (uniform probability 1/16 per outcome).
pub fn appendix_a_x() -> FiltrationTree<BigRational> {
    binary_jump_tree(&APPENDIX_A_X4)
}

/// The partner process `Y`: indistinguishable from `X` by path law and by
/// one-step prediction law, separated only at rank 2.
pub fn appendix_a_y() -> FiltrationTree<BigRational> {
    binary_jump_tree(&APPENDIX_A_Y4)
}

/// Two-step process that reveals its final direction at time 1 by a move
/// of size `1/n`: values `(0, ±1/n, ±1)`, each branch probability 1/2.
///
/// # Panics
/// Panics when `n == 0`; callers validate first.
pub fn figure1_left(n: u32) -> FiltrationTree<BigRational> {
    assert!(n > 0, "n must be positive");
    let half = ratio(1, 2);
    let mk = |sign: i64| {
        NodeSpec::new(
            half.clone(),
            vec![ratio(sign, n as i64)],
            vec![NodeSpec::new(ratio(1, 1), vec![ratio(sign, 1)], vec![])],
        )
    };
    let root = NodeSpec::new(ratio(1, 1), vec![ratio(0, 1)], vec![mk(1), mk(-1)]);
    FiltrationTree::from_spec(2, 1, root)
        .validated()
        .expect("fixture is valid")
}

/// Two-step process that stays at zero until the final move: values
/// `(0, 0, ±1)`, split at time 2. The weak limit of [`figure1_left`].
pub fn figure1_right() -> FiltrationTree<BigRational> {
    let half = ratio(1, 2);
    let leaf = |sign: i64| NodeSpec::new(half.clone(), vec![ratio(sign, 1)], vec![]);
    let mid = NodeSpec::new(ratio(1, 1), vec![ratio(0, 1)], vec![leaf(1), leaf(-1)]);
    let root = NodeSpec::new(ratio(1, 1), vec![ratio(0, 1)], vec![mid]);
    FiltrationTree::from_spec(2, 1, root)
        .validated()
        .expect("fixture is valid")
}

/// Seeded random tree for oracle comparisons: depth between 2 and
/// `max_depth`, between 1 and `max_branching` children per node, random
/// transition rows and values in `[-1, 1]^dim`.
pub fn random_tree(
    seed: u64,
    max_depth: usize,
    max_branching: usize,
    dim: usize,
) -> FiltrationTree<f64> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let depth = rng.gen_range(2..=max_depth.max(2));
    fn grow(
        rng: &mut StdRng,
        prob: f64,
        dim: usize,
        level: usize,
        depth: usize,
        max_branching: usize,
    ) -> NodeSpec<f64> {
        let value: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if level == depth {
            return NodeSpec::new(prob, value, vec![]);
        }
        let k = rng.gen_range(1..=max_branching);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let children = raw
            .iter()
            .map(|w| grow(rng, w / total, dim, level + 1, depth, max_branching))
            .collect();
        NodeSpec::new(prob, value, children)
    }
    let root = grow(&mut rng, 1.0, dim, 0, depth, max_branching);
    FiltrationTree::from_spec(depth, dim, root)
        .validated()
        .expect("generated tree is valid")
}

/// Deterministic chain through the given one-dimensional values.
pub fn chain(values: &[f64]) -> FiltrationTree<f64> {
    assert!(!values.is_empty());
    let mut spec: Option<NodeSpec<f64>> = None;
    for &v in values.iter().rev() {
        spec = Some(NodeSpec::new(1.0, vec![v], spec.into_iter().collect()));
    }
    FiltrationTree::from_spec(values.len() - 1, 1, spec.unwrap())
        .validated()
        .expect("chain is valid")
}
