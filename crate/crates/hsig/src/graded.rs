//! Generic rank-`r` truncated tensor algebra.
//!
//! The rank-1 algebra is the free algebra on the `d + 1` letters of
//! [`crate::tensor`]. For `r >= 2` the algebra is free on one fresh time
//! letter `τ` (degree 1) per level plus every nonempty basis word of the
//! rank-`(r-1)` algebra (degree = its own total degree). Elements are
//! stored densely against an explicitly enumerated, canonically ordered
//! basis: degree-major, then recursive lexicographic with `τ` first.

use crate::scalar::Scalar;
use crate::tensor::{NormMode, Tensor1, Word};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Serialization format tag for tensors (see [`tensor_to_json`]).
pub const TENSOR_FORMAT: &str = "hsig-tensor/1";

/// Generator of a rank-`r` algebra for `r >= 2`: the level-`r` time letter
/// or a nonempty rank-`(r-1)` word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gen {
    Time,
    Inner(CompositeWord),
}

/// A basis word of the rank-`r` algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CompositeWord {
    /// Rank-1 word over the letters `0..=d`.
    Letters(Word),
    /// Rank-`r >= 2` word: a sequence of generators; empty = unit.
    Seq(Vec<Gen>),
}

impl CompositeWord {
    pub fn empty(rank: usize) -> Self {
        if rank == 1 {
            CompositeWord::Letters(Word::empty())
        } else {
            CompositeWord::Seq(Vec::new())
        }
    }

    /// Total degree: word length at rank 1; at higher ranks the sum of
    /// generator degrees, where `τ` has degree 1 and an inner word its own
    /// total degree.
    pub fn degree(&self) -> usize {
        match self {
            CompositeWord::Letters(w) => w.len(),
            CompositeWord::Seq(gens) => gens
                .iter()
                .map(|g| match g {
                    Gen::Time => 1,
                    Gen::Inner(w) => w.degree(),
                })
                .sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            CompositeWord::Letters(w) => w.is_empty(),
            CompositeWord::Seq(gens) => gens.is_empty(),
        }
    }

    /// Concatenation within the same rank.
    pub fn concat(&self, other: &CompositeWord) -> CompositeWord {
        match (self, other) {
            (CompositeWord::Letters(a), CompositeWord::Letters(b)) => {
                CompositeWord::Letters(a.concat(b))
            }
            (CompositeWord::Seq(a), CompositeWord::Seq(b)) => {
                let mut gens = a.clone();
                gens.extend_from_slice(b);
                CompositeWord::Seq(gens)
            }
            _ => panic!("concat of words of different ranks"),
        }
    }
}

impl Ord for Gen {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Gen::Time, Gen::Time) => Ordering::Equal,
            (Gen::Time, Gen::Inner(_)) => Ordering::Less,
            (Gen::Inner(_), Gen::Time) => Ordering::Greater,
            (Gen::Inner(a), Gen::Inner(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Gen {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CompositeWord {
    /// Canonical order: degree-major, then lexicographic on the generator
    /// sequence with the time letter first; inner words recurse.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| match (self, other) {
                (CompositeWord::Letters(a), CompositeWord::Letters(b)) => a.0.cmp(&b.0),
                (CompositeWord::Seq(a), CompositeWord::Seq(b)) => a.cmp(b),
                (CompositeWord::Letters(_), CompositeWord::Seq(_)) => Ordering::Less,
                (CompositeWord::Seq(_), CompositeWord::Letters(_)) => Ordering::Greater,
            })
    }
}

impl PartialOrd for CompositeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GradedError {
    #[error("algebra mismatch: expected rank {expected_rank} dim {expected_dim} degree {expected_degree}, got rank {rank} dim {dim} degree {degree}")]
    AlgebraMismatch {
        expected_rank: usize,
        expected_dim: usize,
        expected_degree: usize,
        rank: usize,
        dim: usize,
        degree: usize,
    },
    #[error("increment has nonzero coefficient {0} on the unit word")]
    InvalidIncrement(f64),
    #[error("basis for rank {rank} dim {dim} degree {degree} needs {required} words, over the cap of {cap}")]
    BasisTooLarge {
        rank: usize,
        dim: usize,
        degree: usize,
        required: u128,
        cap: u128,
    },
    #[error("word not in basis: {0:?}")]
    WordNotInBasis(CompositeWord),
    #[error("malformed tensor json: {0}")]
    Json(String),
}

/// Number of basis words of exact degree `k` in the rank-`r` algebra over
/// `R^d` (with the time augmentation at every level).
///
/// Rank 1 is `(d+1)^k`; rank 2 satisfies the linear recursion
/// `A(k) = (2(d+1)+1) A(k-1) - (d+1) A(k-2)` with `A(0) = 1`,
/// `A(1) = d+2`; higher ranks are counted by convolving compositions
/// against the lower-rank counts.
pub fn graded_dim(rank: usize, dim: usize, k: usize) -> u128 {
    assert!(rank >= 1, "rank must be >= 1");
    match rank {
        1 => ((dim + 1) as u128).pow(k as u32),
        2 => {
            let p = (dim + 1) as u128;
            let mut a_prev = 1u128; // A(0)
            if k == 0 {
                return a_prev;
            }
            let mut a = p + 1; // A(1)
            for _ in 2..=k {
                let next = (2 * p + 1) * a - p * a_prev;
                a_prev = a;
                a = next;
            }
            a
        }
        _ => {
            // generator counts: τ at degree 1 plus the lower-rank words
            let gen_count = |j: usize| graded_dim(rank - 1, dim, j) + if j == 1 { 1 } else { 0 };
            let mut counts = vec![0u128; k + 1];
            counts[0] = 1;
            for total in 1..=k {
                let mut sum = 0u128;
                for first in 1..=total {
                    sum += gen_count(first) * counts[total - first];
                }
                counts[total] = sum;
            }
            counts[k]
        }
    }
}

/// Cumulative count of basis words of degree `<= max_degree`.
pub fn graded_dim_cumulative(rank: usize, dim: usize, max_degree: usize) -> u128 {
    (0..=max_degree).map(|k| graded_dim(rank, dim, k)).sum()
}

/// Degree-`k` dimension of the rank-2 algebra *without* the time
/// augmentation: `(2d)^k / 2` for `k >= 1`.
pub fn rank2_plain_dim(dim: usize, k: usize) -> u128 {
    if k == 0 {
        1
    } else {
        (2 * dim as u128).pow(k as u32) / 2
    }
}

/// Enumerated, canonically ordered basis of a truncated rank-`r` algebra.
#[derive(Debug)]
pub struct Basis {
    rank: usize,
    dim: usize,
    max_degree: usize,
    words: Vec<CompositeWord>,
    index: HashMap<CompositeWord, usize>,
    degrees: Vec<usize>,
    concat_table: OnceLock<Option<Vec<u32>>>,
}

/// Concatenation tables are only materialized for bases up to this size.
const CONCAT_TABLE_LIMIT: usize = 2048;

/// Default cap on enumerated basis sizes; larger requests are refused with
/// [`GradedError::BasisTooLarge`] so callers can surface a resource error.
pub const DEFAULT_BASIS_CAP: u128 = 2_000_000;

const TRUNCATED: u32 = u32::MAX;

impl Basis {
    /// Cached lookup, enumerating on first use. Fails if the basis would
    /// exceed `DEFAULT_BASIS_CAP` words.
    pub fn get(rank: usize, dim: usize, max_degree: usize) -> Result<Arc<Basis>, GradedError> {
        Self::get_capped(rank, dim, max_degree, DEFAULT_BASIS_CAP)
    }

    pub fn get_capped(
        rank: usize,
        dim: usize,
        max_degree: usize,
        cap: u128,
    ) -> Result<Arc<Basis>, GradedError> {
        type Cache = Mutex<HashMap<(usize, usize, usize), Arc<Basis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (rank, dim, max_degree);
        if let Some(b) = cache.lock().unwrap().get(&key) {
            return Ok(b.clone());
        }
        let required = graded_dim_cumulative(rank, dim, max_degree);
        if required > cap {
            return Err(GradedError::BasisTooLarge {
                rank,
                dim,
                degree: max_degree,
                required,
                cap,
            });
        }
        let basis = Arc::new(Self::build(rank, dim, max_degree));
        cache.lock().unwrap().insert(key, basis.clone());
        Ok(basis)
    }

    fn build(rank: usize, dim: usize, max_degree: usize) -> Basis {
        let words = enumerate_words(rank, dim, max_degree);
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let degrees = words.iter().map(|w| w.degree()).collect();
        Basis {
            rank,
            dim,
            max_degree,
            words,
            index,
            degrees,
            concat_table: OnceLock::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[CompositeWord] {
        &self.words
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        self.degrees[idx]
    }

    pub fn index_of(&self, word: &CompositeWord) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Index of `words[i] · words[j]`, or `None` when the product exceeds
    /// the truncation degree.
    fn concat_index(&self, i: usize, j: usize) -> Option<usize> {
        if self.degrees[i] + self.degrees[j] > self.max_degree {
            return None;
        }
        let table = self.concat_table.get_or_init(|| {
            let n = self.len();
            if n > CONCAT_TABLE_LIMIT {
                return None;
            }
            let mut table = vec![TRUNCATED; n * n];
            for a in 0..n {
                for b in 0..n {
                    if self.degrees[a] + self.degrees[b] > self.max_degree {
                        continue;
                    }
                    let w = self.words[a].concat(&self.words[b]);
                    table[a * n + b] = self.index[&w] as u32;
                }
            }
            Some(table)
        });
        match table {
            Some(t) => {
                let v = t[i * self.len() + j];
                (v != TRUNCATED).then_some(v as usize)
            }
            None => {
                let w = self.words[i].concat(&self.words[j]);
                self.index_of(&w)
            }
        }
    }
}

/// All basis words of total degree `<= max_degree`, canonically ordered.
pub fn enumerate_words(rank: usize, dim: usize, max_degree: usize) -> Vec<CompositeWord> {
    let mut words = if rank == 1 {
        let mut out = vec![CompositeWord::Letters(Word::empty())];
        let mut frontier: Vec<Word> = vec![Word::empty()];
        for _ in 1..=max_degree {
            let mut next = Vec::new();
            for w in &frontier {
                for l in 0..=dim as u8 {
                    let mut letters = w.0.clone();
                    letters.push(l);
                    next.push(Word(letters));
                }
            }
            out.extend(next.iter().cloned().map(CompositeWord::Letters));
            frontier = next;
        }
        out
    } else {
        let inner = enumerate_words(rank - 1, dim, max_degree);
        let mut gens: Vec<(Gen, usize)> = vec![(Gen::Time, 1)];
        gens.extend(
            inner
                .into_iter()
                .filter(|w| !w.is_empty())
                .map(|w| (Gen::Inner(w.clone()), w.degree())),
        );
        let mut out = Vec::new();
        let mut stack: Vec<Gen> = Vec::new();
        fn rec(
            gens: &[(Gen, usize)],
            budget: usize,
            stack: &mut Vec<Gen>,
            out: &mut Vec<CompositeWord>,
        ) {
            out.push(CompositeWord::Seq(stack.clone()));
            for (g, deg) in gens {
                if *deg <= budget {
                    stack.push(g.clone());
                    rec(gens, budget - deg, stack, out);
                    stack.pop();
                }
            }
        }
        rec(&gens, max_degree, &mut stack, &mut out);
        out
    };
    words.sort();
    words
}

/// Dense element of a truncated rank-`r` algebra over a shared basis.
#[derive(Clone, Debug)]
pub struct TensorR<T> {
    basis: Arc<Basis>,
    coeffs: Vec<T>,
}

impl<T: PartialEq> PartialEq for TensorR<T> {
    fn eq(&self, other: &Self) -> bool {
        self.basis.rank() == other.basis.rank()
            && self.basis.dim() == other.basis.dim()
            && self.basis.max_degree() == other.basis.max_degree()
            && self.coeffs == other.coeffs
    }
}

impl<T: Scalar> TensorR<T> {
    pub fn zero(basis: Arc<Basis>) -> Self {
        let coeffs = vec![T::zero(); basis.len()];
        TensorR { basis, coeffs }
    }

    pub fn unit(basis: Arc<Basis>) -> Self {
        let mut t = Self::zero(basis);
        t.coeffs[0] = T::one();
        t
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn max_degree(&self) -> usize {
        self.basis.max_degree()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, word: &CompositeWord) -> T {
        match self.basis.index_of(word) {
            Some(i) => self.coeffs[i].clone(),
            None => T::zero(),
        }
    }

    pub fn set_coeff(&mut self, word: &CompositeWord, value: T) -> Result<(), GradedError> {
        let i = self
            .basis
            .index_of(word)
            .ok_or_else(|| GradedError::WordNotInBasis(word.clone()))?;
        self.coeffs[i] = value;
        Ok(())
    }

    fn check_same_algebra(&self, other: &Self) -> Result<(), GradedError> {
        if !Arc::ptr_eq(&self.basis, &other.basis)
            && (self.rank() != other.rank()
                || self.dim() != other.dim()
                || self.max_degree() != other.max_degree())
        {
            return Err(GradedError::AlgebraMismatch {
                expected_rank: self.rank(),
                expected_dim: self.dim(),
                expected_degree: self.max_degree(),
                rank: other.rank(),
                dim: other.dim(),
                degree: other.max_degree(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, GradedError> {
        self.check_same_algebra(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a = a.clone() + b.clone();
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GradedError> {
        self.check_same_algebra(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a = a.clone() - b.clone();
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = c.clone() * factor.clone();
        }
        out
    }

    /// Degree-wise dilation by `lambda`.
    pub fn dilate(&self, lambda: &T) -> Self {
        let mut powers = vec![T::one()];
        for k in 1..=self.max_degree() {
            powers.push(powers[k - 1].clone() * lambda.clone());
        }
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c = c.clone() * powers[self.basis.degree_of(i)].clone();
        }
        out
    }

    /// Concatenation-convolution product, truncated at the degree bound.
    pub fn product(&self, other: &Self) -> Result<Self, GradedError> {
        self.check_same_algebra(other)?;
        let mut out = Self::zero(self.basis.clone());
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                if let Some(k) = self.basis.concat_index(i, j) {
                    out.coeffs[k] = out.coeffs[k].clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    /// Embeds a rank-1 dense tensor; the canonical orders agree.
    pub fn from_tensor1(t: &Tensor1<T>) -> Result<Self, GradedError> {
        let basis = Basis::get(1, t.dim(), t.max_degree())?;
        let coeffs = t.flat_coeffs();
        debug_assert_eq!(coeffs.len(), basis.len());
        Ok(TensorR { basis, coeffs })
    }

    /// Converts a rank-1 element back to the dense representation.
    pub fn to_tensor1(&self) -> Option<Tensor1<T>> {
        if self.rank() != 1 {
            return None;
        }
        let mut out = Tensor1::zero(self.dim(), self.max_degree());
        for (i, c) in self.coeffs.iter().enumerate() {
            if let CompositeWord::Letters(w) = &self.basis.words()[i] {
                out.set_coeff(w, c.clone()).unwrap();
            }
        }
        Some(out)
    }
}

impl TensorR<f64> {
    pub fn norm(&self, mode: NormMode) -> f64 {
        match mode {
            NormMode::Hilbert => self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt(),
            NormMode::LevelL1 => {
                let mut per_degree = vec![0.0; self.max_degree() + 1];
                for (i, c) in self.coeffs.iter().enumerate() {
                    per_degree[self.basis.degree_of(i)] += c * c;
                }
                per_degree.iter().map(|s| s.sqrt()).sum()
            }
        }
    }

    /// Euclidean norm of each degree slice.
    pub fn per_degree_norms(&self) -> Vec<f64> {
        let mut per_degree = vec![0.0; self.max_degree() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            per_degree[self.basis.degree_of(i)] += c * c;
        }
        per_degree.iter().map(|s| s.sqrt()).collect()
    }

    pub fn dot(&self, other: &Self) -> Result<f64, GradedError> {
        self.check_same_algebra(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, GradedError> {
        self.check_same_algebra(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Exponential of the time-augmented increment `(tau_coeff, delta)` where
/// `delta` is a rank-`(r-1)` element with zero coefficient on its unit
/// word. The result lives in rank `r`, truncated at `max_degree`.
pub fn exp_rank<T: Scalar>(
    tau_coeff: &T,
    delta: &TensorR<T>,
    max_degree: usize,
) -> Result<TensorR<T>, GradedError> {
    let unit_coeff = delta.coeff(&CompositeWord::empty(delta.rank()));
    if !unit_coeff.is_negligible() {
        return Err(GradedError::InvalidIncrement(unit_coeff.to_f64_lossy()));
    }
    let basis = Basis::get(delta.rank() + 1, delta.dim(), max_degree)?;
    let mut z = TensorR::zero(basis.clone());
    if max_degree >= 1 {
        z.set_coeff(&CompositeWord::Seq(vec![Gen::Time]), tau_coeff.clone())?;
        for (i, c) in delta.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = &delta.basis().words()[i];
            if w.is_empty() || w.degree() > max_degree {
                continue;
            }
            z.set_coeff(&CompositeWord::Seq(vec![Gen::Inner(w.clone())]), c.clone())?;
        }
    }
    let mut out = TensorR::unit(basis.clone());
    let mut term = TensorR::unit(basis);
    for m in 1..=max_degree {
        term = term.product(&z)?;
        let inv = T::one() / T::from_count(m as u64);
        term = term.scale(&inv);
        out = out.add(&term)?;
    }
    Ok(out)
}

fn word_to_json(word: &CompositeWord) -> Value {
    match word {
        CompositeWord::Letters(w) => {
            Value::Array(w.0.iter().map(|&l| Value::Number(l.into())).collect())
        }
        CompositeWord::Seq(gens) => Value::Array(
            gens.iter()
                .map(|g| match g {
                    Gen::Time => Value::String("t".to_string()),
                    Gen::Inner(w) => word_to_json(w),
                })
                .collect(),
        ),
    }
}

fn word_from_json(value: &Value, rank: usize) -> Result<CompositeWord, GradedError> {
    let items = value
        .as_array()
        .ok_or_else(|| GradedError::Json(format!("word must be an array, got {value}")))?;
    if rank == 1 {
        let mut letters = Vec::with_capacity(items.len());
        for it in items {
            let l = it
                .as_u64()
                .ok_or_else(|| GradedError::Json(format!("letter must be an integer, got {it}")))?;
            letters.push(l as u8);
        }
        Ok(CompositeWord::Letters(Word(letters)))
    } else {
        let mut gens = Vec::with_capacity(items.len());
        for it in items {
            match it {
                Value::String(s) if s == "t" => gens.push(Gen::Time),
                Value::Array(_) => gens.push(Gen::Inner(word_from_json(it, rank - 1)?)),
                other => {
                    return Err(GradedError::Json(format!(
                        "generator must be \"t\" or a word array, got {other}"
                    )))
                }
            }
        }
        Ok(CompositeWord::Seq(gens))
    }
}

/// Serializes a tensor as a flat coefficient array paired with the
/// canonical basis ordering. The layout is versioned by [`TENSOR_FORMAT`].
pub fn tensor_to_json(t: &TensorR<f64>) -> Value {
    json!({
        "format": TENSOR_FORMAT,
        "rank": t.rank(),
        "dim": t.dim(),
        "max_degree": t.max_degree(),
        "basis": t.basis().words().iter().map(word_to_json).collect::<Vec<_>>(),
        "coeffs": t.coeffs(),
    })
}

/// Reads a tensor back; basis entries may appear in any order.
pub fn tensor_from_json(value: &Value) -> Result<TensorR<f64>, GradedError> {
    let format = value["format"]
        .as_str()
        .ok_or_else(|| GradedError::Json("missing format".into()))?;
    if format != TENSOR_FORMAT {
        return Err(GradedError::Json(format!("unsupported format {format}")));
    }
    let rank = value["rank"]
        .as_u64()
        .ok_or_else(|| GradedError::Json("missing rank".into()))? as usize;
    let dim = value["dim"]
        .as_u64()
        .ok_or_else(|| GradedError::Json("missing dim".into()))? as usize;
    let max_degree = value["max_degree"]
        .as_u64()
        .ok_or_else(|| GradedError::Json("missing max_degree".into()))?
        as usize;
    let basis_words = value["basis"]
        .as_array()
        .ok_or_else(|| GradedError::Json("missing basis".into()))?;
    let coeffs = value["coeffs"]
        .as_array()
        .ok_or_else(|| GradedError::Json("missing coeffs".into()))?;
    if basis_words.len() != coeffs.len() {
        return Err(GradedError::Json(format!(
            "basis has {} words but coeffs has {} entries",
            basis_words.len(),
            coeffs.len()
        )));
    }
    let basis = Basis::get(rank, dim, max_degree)?;
    let mut out = TensorR::zero(basis);
    for (wv, cv) in basis_words.iter().zip(coeffs.iter()) {
        let word = word_from_json(wv, rank)?;
        let c = cv
            .as_f64()
            .ok_or_else(|| GradedError::Json(format!("coefficient must be a number, got {cv}")))?;
        out.set_coeff(&word, c)?;
    }
    Ok(out)
}
