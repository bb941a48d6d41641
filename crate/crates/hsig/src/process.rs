//! Finite adapted processes as filtration trees.
//!
//! A tree node at depth `t` is an atom of the time-`t` sigma-algebra; it
//! carries the transition probability from its parent and the process
//! value on that atom. Conditional expectation is probability-weighted
//! averaging below an atom, exact when the scalars are rational.

use crate::scalar::{f64_to_rational, Scalar};
use num_rational::BigRational;
use serde_json::{json, Map, Value};
use std::str::FromStr;
use thiserror::Error;

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode<T> {
    /// Transition probability from the parent (1 at the root).
    pub prob: T,
    /// Process value on the atom, a vector in `R^d`.
    pub value: Vec<T>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub depth: usize,
}

/// Build-side description of a node; see [`FiltrationTree::from_spec`].
#[derive(Clone, Debug)]
pub struct NodeSpec<T> {
    pub prob: T,
    pub value: Vec<T>,
    pub children: Vec<NodeSpec<T>>,
}

impl<T> NodeSpec<T> {
    pub fn new(prob: T, value: Vec<T>, children: Vec<NodeSpec<T>>) -> Self {
        NodeSpec {
            prob,
            value,
            children,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema: {0}")]
    Schema(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("time {time} out of range 0..={horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("map expects {expected} inputs, got {got}")]
    Arity { expected: String, got: usize },
    #[error("leaf values length {got} does not match leaf count {expected}")]
    LeafCount { expected: usize, got: usize },
}

/// One validation finding; `validate` returns all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub node: NodeId,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "node {}: {}", self.node, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationTree<T> {
    time_horizon: usize,
    dim: usize,
    nodes: Vec<TreeNode<T>>,
    leaves: Vec<NodeId>,
    by_depth: Vec<Vec<NodeId>>,
}

impl<T: Scalar> FiltrationTree<T> {
    pub fn from_spec(time_horizon: usize, dim: usize, root: NodeSpec<T>) -> Self {
        fn push<T>(
            nodes: &mut Vec<TreeNode<T>>,
            spec: NodeSpec<T>,
            parent: Option<NodeId>,
            depth: usize,
        ) -> NodeId {
            let id = nodes.len();
            nodes.push(TreeNode {
                prob: spec.prob,
                value: spec.value,
                parent,
                children: Vec::new(),
                depth,
            });
            for child in spec.children {
                let cid = push(nodes, child, Some(id), depth + 1);
                nodes[id].children.push(cid);
            }
            id
        }
        let mut nodes = Vec::new();
        push(&mut nodes, root, None, 0);
        let mut tree = FiltrationTree {
            time_horizon,
            dim,
            nodes,
            leaves: Vec::new(),
            by_depth: Vec::new(),
        };
        tree.rebuild_index();
        tree
    }

    fn rebuild_index(&mut self) {
        self.by_depth = vec![Vec::new(); self.time_horizon + 1];
        self.leaves.clear();
        // nodes are stored in DFS order, so a linear scan keeps that order
        for (id, node) in self.nodes.iter().enumerate() {
            if node.depth < self.by_depth.len() {
                self.by_depth[node.depth].push(id);
            }
            if node.children.is_empty() {
                self.leaves.push(id);
            }
        }
    }

    pub fn time_horizon(&self) -> usize {
        self.time_horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, id: NodeId) -> &TreeNode<T> {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    /// Leaves in depth-first order; the atoms of the finest sigma-algebra.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    /// Atoms of the time-`t` sigma-algebra, in depth-first order.
    pub fn nodes_at_depth(&self, t: usize) -> &[NodeId] {
        &self.by_depth[t]
    }

    /// Node ids from the root down to `leaf`, inclusive.
    pub fn branch(&self, leaf: NodeId) -> Vec<NodeId> {
        let mut path = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Unconditional probability of the atom `id`.
    pub fn atom_prob(&self, id: NodeId) -> T {
        let mut p = self.nodes[id].prob.clone();
        let mut cur = id;
        while let Some(parent) = self.nodes[cur].parent {
            p = p * self.nodes[parent].prob.clone();
            cur = parent;
        }
        p
    }

    /// Checks the structural invariants, pruning zero-probability children
    /// first. Returns every finding rather than the first.
    pub fn validate(&mut self) -> Result<(), Vec<Diagnostic>> {
        self.prune_zero_probability();
        let mut issues = Vec::new();
        if self.nodes[0].prob != T::one() {
            issues.push(Diagnostic {
                node: 0,
                message: format!(
                    "root probability must be 1, got {}",
                    self.nodes[0].prob.to_f64_lossy()
                ),
            });
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if node.value.len() != self.dim {
                issues.push(Diagnostic {
                    node: id,
                    message: format!(
                        "value has {} coordinates, expected {}",
                        node.value.len(),
                        self.dim
                    ),
                });
            }
            if node.value.iter().any(|v| v.is_nan()) || node.prob.is_nan() {
                issues.push(Diagnostic {
                    node: id,
                    message: "NaN value".into(),
                });
            }
            if node.children.is_empty() {
                if node.depth != self.time_horizon {
                    issues.push(Diagnostic {
                        node: id,
                        message: format!(
                            "ragged depth: leaf at depth {}, expected {}",
                            node.depth, self.time_horizon
                        ),
                    });
                }
            } else {
                let sum = node
                    .children
                    .iter()
                    .fold(T::zero(), |acc, &c| acc + self.nodes[c].prob.clone());
                let ok = if T::EXACT {
                    sum == T::one()
                } else {
                    (sum.to_f64_lossy() - 1.0).abs() <= 1e-12
                };
                if !ok {
                    issues.push(Diagnostic {
                        node: id,
                        message: format!("row sum {}", sum.to_f64_lossy()),
                    });
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    /// Consuming variant of [`FiltrationTree::validate`].
    pub fn validated(mut self) -> Result<Self, Vec<Diagnostic>> {
        self.validate()?;
        Ok(self)
    }

    fn prune_zero_probability(&mut self) {
        let keep: Vec<bool> = {
            let mut keep = vec![false; self.nodes.len()];
            let mut stack = vec![0usize];
            while let Some(id) = stack.pop() {
                keep[id] = true;
                for &c in &self.nodes[id].children {
                    if !self.nodes[c].prob.is_zero() {
                        stack.push(c);
                    }
                }
            }
            keep
        };
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut new_nodes = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if keep[id] {
                remap[id] = new_nodes.len();
                new_nodes.push(node.clone());
            }
        }
        for node in new_nodes.iter_mut() {
            node.parent = node.parent.map(|p| remap[p]);
            node.children = node
                .children
                .iter()
                .filter(|&&c| keep[c])
                .map(|&c| remap[c])
                .collect();
        }
        self.nodes = new_nodes;
        self.rebuild_index();
    }

    /// One `(probability, path)` entry per leaf; probabilities multiply
    /// along the branch and sum to one on a validated tree.
    pub fn enumerate_paths(&self) -> Vec<(T, Vec<Vec<T>>)> {
        self.leaves
            .iter()
            .map(|&leaf| {
                let branch = self.branch(leaf);
                let prob = branch
                    .iter()
                    .fold(T::one(), |acc, &id| acc * self.nodes[id].prob.clone());
                let path = branch
                    .iter()
                    .map(|&id| self.nodes[id].value.clone())
                    .collect();
                (prob, path)
            })
            .collect()
    }

    /// For each leaf, its ancestor at depth `t`.
    pub fn ancestor_at_depth(&self, leaf: NodeId, t: usize) -> NodeId {
        let mut cur = leaf;
        while self.nodes[cur].depth > t {
            cur = self.nodes[cur].parent.expect("depth > t implies a parent");
        }
        cur
    }

    pub fn map_values<U: Scalar>(&self, f: impl Fn(&T) -> U) -> FiltrationTree<U> {
        FiltrationTree {
            time_horizon: self.time_horizon,
            dim: self.dim,
            nodes: self
                .nodes
                .iter()
                .map(|n| TreeNode {
                    prob: f(&n.prob),
                    value: n.value.iter().map(&f).collect(),
                    parent: n.parent,
                    children: n.children.clone(),
                    depth: n.depth,
                })
                .collect(),
            leaves: self.leaves.clone(),
            by_depth: self.by_depth.clone(),
        }
    }
}

impl FiltrationTree<BigRational> {
    pub fn to_f64(&self) -> FiltrationTree<f64> {
        self.map_values(|v| v.to_f64_lossy())
    }
}

/// Conditional expectation of per-leaf values given the time-`t` atoms.
///
/// Returns one value per atom, aligned with `tree.nodes_at_depth(t)`. The
/// value at an atom is the probability-weighted average of the leaf values
/// below it, with weights renormalized within the atom.
pub fn cond_exp<T: Scalar>(
    tree: &FiltrationTree<T>,
    leaf_values: &[T],
    t: usize,
) -> Result<Vec<T>, EvalError> {
    if t > tree.time_horizon() {
        return Err(EvalError::TimeOutOfRange {
            time: t,
            horizon: tree.time_horizon(),
        });
    }
    if leaf_values.len() != tree.leaves().len() {
        return Err(EvalError::LeafCount {
            expected: tree.leaves().len(),
            got: leaf_values.len(),
        });
    }
    let per_node = cond_exp_all_nodes(tree, leaf_values);
    Ok(tree
        .nodes_at_depth(t)
        .iter()
        .map(|&id| per_node[id].clone())
        .collect())
}

/// Bottom-up conditional expectation at every node. Rows sum to one on a
/// validated tree, so child-probability weighting is already renormalized.
pub(crate) fn cond_exp_all_nodes<T: Scalar>(tree: &FiltrationTree<T>, leaf_values: &[T]) -> Vec<T> {
    let mut vals = vec![T::zero(); tree.node_count()];
    for (&leaf, v) in tree.leaves().iter().zip(leaf_values.iter()) {
        vals[leaf] = v.clone();
    }
    // children always follow their parent in the arena, so reverse order is
    // a valid bottom-up sweep
    for id in (0..tree.node_count()).rev() {
        let node = tree.node(id);
        if node.children.is_empty() {
            continue;
        }
        let mut acc = T::zero();
        for &c in &node.children {
            acc = acc + tree.node(c).prob.clone() * vals[c].clone();
        }
        vals[id] = acc;
    }
    vals
}

/// Bounded continuous building blocks for adapted functionals. Inputs are
/// flattened scalars (d coordinates per referenced time).
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinMap<T> {
    /// Single input, returned unchanged.
    Identity,
    /// Single input raised to a fixed power.
    Power(u32),
    /// Product of all inputs.
    Product,
    /// `intercept + Σ weights[i] * x[i]`.
    Affine {
        intercept: T,
        weights: Vec<T>,
    },
    Min,
    Max,
    /// Single input clamped into `[lo, hi]`.
    Clamp {
        lo: T,
        hi: T,
    },
}

impl<T: Scalar> BuiltinMap<T> {
    pub fn apply(&self, inputs: &[T]) -> Result<T, EvalError> {
        let need = |n: usize| {
            if inputs.len() == n {
                Ok(())
            } else {
                Err(EvalError::Arity {
                    expected: n.to_string(),
                    got: inputs.len(),
                })
            }
        };
        match self {
            BuiltinMap::Identity => {
                need(1)?;
                Ok(inputs[0].clone())
            }
            BuiltinMap::Power(k) => {
                need(1)?;
                let mut out = T::one();
                for _ in 0..*k {
                    out = out * inputs[0].clone();
                }
                Ok(out)
            }
            BuiltinMap::Product => {
                if inputs.is_empty() {
                    return Err(EvalError::Arity {
                        expected: ">=1".into(),
                        got: 0,
                    });
                }
                Ok(inputs.iter().fold(T::one(), |acc, x| acc * x.clone()))
            }
            BuiltinMap::Affine { intercept, weights } => {
                need(weights.len())?;
                let mut out = intercept.clone();
                for (w, x) in weights.iter().zip(inputs.iter()) {
                    out = out + w.clone() * x.clone();
                }
                Ok(out)
            }
            BuiltinMap::Min | BuiltinMap::Max => {
                if inputs.is_empty() {
                    return Err(EvalError::Arity {
                        expected: ">=1".into(),
                        got: 0,
                    });
                }
                let mut best = inputs[0].clone();
                for x in &inputs[1..] {
                    let better = match self {
                        BuiltinMap::Min => *x < best,
                        _ => *x > best,
                    };
                    if better {
                        best = x.clone();
                    }
                }
                Ok(best)
            }
            BuiltinMap::Clamp { lo, hi } => {
                need(1)?;
                let x = inputs[0].clone();
                Ok(if x < *lo {
                    lo.clone()
                } else if x > *hi {
                    hi.clone()
                } else {
                    x
                })
            }
        }
    }
}

/// Expression tree of coordinate evaluations, bounded continuous
/// combinators and conditional expectations.
#[derive(Clone, Debug, PartialEq)]
pub enum AdaptedFunctional<T> {
    /// `map(X_{t_1}, ..., X_{t_n})` on the flattened coordinates.
    CoordEval {
        times: Vec<usize>,
        map: BuiltinMap<T>,
    },
    /// `map(f_1(X), ..., f_n(X))`.
    Compose {
        map: BuiltinMap<T>,
        children: Vec<AdaptedFunctional<T>>,
    },
    /// `E[f(X) | F_t]`.
    CondExp {
        inner: Box<AdaptedFunctional<T>>,
        time: usize,
    },
}

impl<T> AdaptedFunctional<T> {
    /// Nesting depth of conditional expectations: coordinate evaluations
    /// have rank 0, composition takes the max over children, and each
    /// conditional expectation adds one.
    pub fn rank(&self) -> usize {
        match self {
            AdaptedFunctional::CoordEval { .. } => 0,
            AdaptedFunctional::Compose { children, .. } => {
                children.iter().map(|c| c.rank()).max().unwrap_or(0)
            }
            AdaptedFunctional::CondExp { inner, .. } => inner.rank() + 1,
        }
    }

    /// Largest time index referenced anywhere in the expression.
    pub fn max_time(&self) -> usize {
        match self {
            AdaptedFunctional::CoordEval { times, .. } => times.iter().copied().max().unwrap_or(0),
            AdaptedFunctional::Compose { children, .. } => {
                children.iter().map(|c| c.max_time()).max().unwrap_or(0)
            }
            AdaptedFunctional::CondExp { inner, time } => (*time).max(inner.max_time()),
        }
    }
}

/// Per-leaf values of `af(X)` plus its expectation.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult<T> {
    pub leaf_values: Vec<T>,
    pub expectation: T,
}

/// Evaluates an adapted functional on the tree; exact when the scalars are.
pub fn eval_adapted_functional<T: Scalar>(
    tree: &FiltrationTree<T>,
    af: &AdaptedFunctional<T>,
) -> Result<EvalResult<T>, EvalError> {
    let horizon = tree.time_horizon();
    if af.max_time() > horizon {
        return Err(EvalError::TimeOutOfRange {
            time: af.max_time(),
            horizon,
        });
    }
    let leaf_values = eval_on_leaves(tree, af)?;
    let expectation = tree
        .leaves()
        .iter()
        .zip(leaf_values.iter())
        .fold(T::zero(), |acc, (&leaf, v)| {
            acc + tree.atom_prob(leaf) * v.clone()
        });
    Ok(EvalResult {
        leaf_values,
        expectation,
    })
}

fn eval_on_leaves<T: Scalar>(
    tree: &FiltrationTree<T>,
    af: &AdaptedFunctional<T>,
) -> Result<Vec<T>, EvalError> {
    match af {
        AdaptedFunctional::CoordEval { times, map } => tree
            .leaves()
            .iter()
            .map(|&leaf| {
                let branch = tree.branch(leaf);
                let mut inputs = Vec::with_capacity(times.len() * tree.dim());
                for &t in times {
                    inputs.extend(tree.node(branch[t]).value.iter().cloned());
                }
                map.apply(&inputs)
            })
            .collect(),
        AdaptedFunctional::Compose { map, children } => {
            let evaluated: Vec<Vec<T>> = children
                .iter()
                .map(|c| eval_on_leaves(tree, c))
                .collect::<Result<_, _>>()?;
            (0..tree.leaves().len())
                .map(|i| {
                    let inputs: Vec<T> = evaluated.iter().map(|v| v[i].clone()).collect();
                    map.apply(&inputs)
                })
                .collect()
        }
        AdaptedFunctional::CondExp { inner, time } => {
            let inner_vals = eval_on_leaves(tree, inner)?;
            let per_node = cond_exp_all_nodes(tree, &inner_vals);
            Ok(tree
                .leaves()
                .iter()
                .map(|&leaf| per_node[tree.ancestor_at_depth(leaf, *time)].clone())
                .collect())
        }
    }
}

/// A parsed tree file: float by default, exact when the file used rational
/// strings anywhere.
#[derive(Clone, Debug)]
pub enum ProcessTree {
    Float(FiltrationTree<f64>),
    Exact(FiltrationTree<BigRational>),
}

impl ProcessTree {
    pub fn from_json_str(s: &str) -> Result<Self, ParseError> {
        let value: Value = serde_json::from_str(s)?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self, ParseError> {
        let obj = value
            .as_object()
            .ok_or_else(|| ParseError::Schema("top level must be an object".into()))?;
        let time_horizon = get_usize(obj, "time_horizon")?;
        let dim = get_usize(obj, "dim")?;
        if dim == 0 {
            return Err(ParseError::Schema("dim must be positive".into()));
        }
        let root = obj
            .get("root")
            .ok_or_else(|| ParseError::Schema("missing root".into()))?;
        if uses_rational_strings(root) {
            let spec = parse_node::<BigRational>(root, true)?;
            Ok(ProcessTree::Exact(FiltrationTree::from_spec(
                time_horizon,
                dim,
                spec,
            )))
        } else {
            let spec = parse_node::<f64>(root, true)?;
            Ok(ProcessTree::Float(FiltrationTree::from_spec(
                time_horizon,
                dim,
                spec,
            )))
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ProcessTree::Exact(_))
    }

    /// Float view, converting in exact mode.
    pub fn to_float(&self) -> FiltrationTree<f64> {
        match self {
            ProcessTree::Float(t) => t.clone(),
            ProcessTree::Exact(t) => t.to_f64(),
        }
    }

    pub fn validate(&mut self) -> Result<(), Vec<Diagnostic>> {
        match self {
            ProcessTree::Float(t) => t.validate(),
            ProcessTree::Exact(t) => t.validate(),
        }
    }

    pub fn time_horizon(&self) -> usize {
        match self {
            ProcessTree::Float(t) => t.time_horizon(),
            ProcessTree::Exact(t) => t.time_horizon(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProcessTree::Float(t) => t.dim(),
            ProcessTree::Exact(t) => t.dim(),
        }
    }
}

fn get_usize(obj: &Map<String, Value>, key: &str) -> Result<usize, ParseError> {
    obj.get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| ParseError::Schema(format!("missing or invalid {key}")))
}

fn uses_rational_strings(node: &Value) -> bool {
    match node {
        Value::Object(obj) => {
            if obj.get("prob").map(Value::is_string).unwrap_or(false) {
                return true;
            }
            if let Some(Value::Array(vals)) = obj.get("value") {
                if vals.iter().any(Value::is_string) {
                    return true;
                }
            }
            if let Some(Value::Array(children)) = obj.get("children") {
                return children.iter().any(uses_rational_strings);
            }
            false
        }
        _ => false,
    }
}

/// Scalar parsing and printing for tree files: JSON numbers always work,
/// `"p/q"` strings select exact mode.
trait TreeJsonScalar: Sized {
    fn from_tree_json(v: &Value) -> Result<Self, ParseError>;
    fn to_tree_json(&self) -> Value;
}

impl TreeJsonScalar for f64 {
    fn from_tree_json(v: &Value) -> Result<Self, ParseError> {
        v.as_f64()
            .ok_or_else(|| ParseError::Schema(format!("expected a number, got {v}")))
    }

    fn to_tree_json(&self) -> Value {
        json!(self)
    }
}

impl TreeJsonScalar for BigRational {
    fn from_tree_json(v: &Value) -> Result<Self, ParseError> {
        match v {
            Value::String(s) => BigRational::from_str(s)
                .map_err(|e| ParseError::Schema(format!("bad rational {s:?}: {e}"))),
            Value::Number(_) => {
                let x = v.as_f64().unwrap();
                f64_to_rational(x)
                    .ok_or_else(|| ParseError::Schema(format!("non-finite number {x}")))
            }
            other => Err(ParseError::Schema(format!(
                "expected number or \"p/q\", got {other}"
            ))),
        }
    }

    fn to_tree_json(&self) -> Value {
        // a string keeps the file in exact mode on re-read
        Value::String(self.to_string())
    }
}

fn parse_node<T: Scalar + TreeJsonScalar>(
    value: &Value,
    is_root: bool,
) -> Result<NodeSpec<T>, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| ParseError::Schema("node must be an object".into()))?;
    let prob = match obj.get("prob") {
        None if is_root => T::one(),
        None => return Err(ParseError::Schema("non-root node missing prob".into())),
        Some(p) => {
            let parsed = T::from_tree_json(p)?;
            if is_root && parsed != T::one() {
                return Err(ParseError::Schema("root prob must be 1 or omitted".into()));
            }
            parsed
        }
    };
    let value_vec = obj
        .get("value")
        .and_then(Value::as_array)
        .ok_or_else(|| ParseError::Schema("node missing value array".into()))?
        .iter()
        .map(T::from_tree_json)
        .collect::<Result<Vec<_>, _>>()?;
    let children = match obj.get("children") {
        None => Vec::new(),
        Some(Value::Array(cs)) => cs
            .iter()
            .map(|c| parse_node(c, false))
            .collect::<Result<Vec<_>, _>>()?,
        Some(other) => {
            return Err(ParseError::Schema(format!(
                "children must be an array, got {other}"
            )))
        }
    };
    Ok(NodeSpec {
        prob,
        value: value_vec,
        children,
    })
}

fn node_to_json<T: Scalar + TreeJsonScalar>(tree: &FiltrationTree<T>, id: NodeId) -> Value {
    let node = tree.node(id);
    let mut obj = Map::new();
    if id != tree.root() {
        obj.insert("prob".into(), node.prob.to_tree_json());
    }
    obj.insert(
        "value".into(),
        Value::Array(
            node.value
                .iter()
                .map(TreeJsonScalar::to_tree_json)
                .collect(),
        ),
    );
    if !node.children.is_empty() {
        obj.insert(
            "children".into(),
            Value::Array(
                node.children
                    .iter()
                    .map(|&c| node_to_json(tree, c))
                    .collect(),
            ),
        );
    }
    Value::Object(obj)
}

/// Canonical tree file: `{"time_horizon": T, "dim": d, "root": node}`.
pub fn tree_to_json(tree: &ProcessTree) -> Value {
    match tree {
        ProcessTree::Float(t) => json!({
            "time_horizon": t.time_horizon(),
            "dim": t.dim(),
            "root": node_to_json(t, t.root()),
        }),
        ProcessTree::Exact(t) => json!({
            "time_horizon": t.time_horizon(),
            "dim": t.dim(),
            "root": node_to_json(t, t.root()),
        }),
    }
}
