//! Truncated rank-1 tensor algebra over `R^(d+1)`.
//!
//! The alphabet has `d + 1` letters: letter `0` is the dedicated time
//! coordinate, letters `1..=d` are the space coordinates. Elements are
//! stored as dense per-degree coefficient blocks in lexicographic word
//! order, so a word of length `m` is addressed by its base-`(d+1)` value.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Index of the time letter in the augmented alphabet.
pub const TIME_LETTER: u8 = 0;

/// A basis word: a finite sequence of letters in `0..=d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Position of the word within its degree block (base-`d+1` value).
    pub fn block_index(&self, dim: usize) -> usize {
        let base = dim + 1;
        self.0
            .iter()
            .fold(0usize, |acc, &l| acc * base + l as usize)
    }

    /// Inverse of [`Word::block_index`] for a word of length `len`.
    pub fn from_block_index(dim: usize, len: usize, mut index: usize) -> Word {
        let base = dim + 1;
        let mut letters = vec![0u8; len];
        for slot in letters.iter_mut().rev() {
            *slot = (index % base) as u8;
            index /= base;
        }
        Word(letters)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TensorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("truncation degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("letter {letter} out of range for dimension {dim}")]
    LetterOutOfRange { letter: u8, dim: usize },
}

/// Norm choices on the truncated algebra.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Euclidean norm of the full coefficient vector (orthonormal word basis).
    #[default]
    Hilbert,
    /// Sum over degrees of the per-degree Euclidean norms.
    LevelL1,
}

/// An element of the truncated tensor algebra, dense by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor1<T> {
    dim: usize,
    max_degree: usize,
    /// `levels[m]` holds the `(d+1)^m` coefficients of degree `m`.
    levels: Vec<Vec<T>>,
}

impl<T: Scalar> Tensor1<T> {
    pub fn zero(dim: usize, max_degree: usize) -> Self {
        let levels = (0..=max_degree)
            .map(|m| vec![T::zero(); (dim + 1).pow(m as u32)])
            .collect();
        Tensor1 {
            dim,
            max_degree,
            levels,
        }
    }

    /// The unit element `1`.
    pub fn unit(dim: usize, max_degree: usize) -> Self {
        let mut t = Self::zero(dim, max_degree);
        t.levels[0][0] = T::one();
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Coefficient of `word`; words longer than the truncation read as zero.
    pub fn coeff(&self, word: &Word) -> T {
        if word.len() > self.max_degree {
            return T::zero();
        }
        self.levels[word.len()][word.block_index(self.dim)].clone()
    }

    pub fn set_coeff(&mut self, word: &Word, value: T) -> Result<(), TensorError> {
        if let Some(&letter) = word.0.iter().find(|&&l| l as usize > self.dim) {
            return Err(TensorError::LetterOutOfRange {
                letter,
                dim: self.dim,
            });
        }
        if word.len() > self.max_degree {
            return Err(TensorError::DegreeMismatch(word.len(), self.max_degree));
        }
        let idx = word.block_index(self.dim);
        self.levels[word.len()][idx] = value;
        Ok(())
    }

    pub fn level(&self, m: usize) -> &[T] {
        &self.levels[m]
    }

    /// All coefficients in canonical (degree-major, lexicographic) order.
    pub fn flat_coeffs(&self) -> Vec<T> {
        self.levels.iter().flat_map(|l| l.iter().cloned()).collect()
    }

    /// Iterates `(word, coefficient)` pairs in canonical order.
    pub fn iter_words(&self) -> impl Iterator<Item = (Word, &T)> + '_ {
        self.levels.iter().enumerate().flat_map(move |(m, block)| {
            block
                .iter()
                .enumerate()
                .map(move |(i, c)| (Word::from_block_index(self.dim, m, i), c))
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<(), TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimMismatch(self.dim, other.dim));
        }
        if self.max_degree != other.max_degree {
            return Err(TensorError::DegreeMismatch(
                self.max_degree,
                other.max_degree,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (lo, lb) in out.levels.iter_mut().zip(other.levels.iter()) {
            for (a, b) in lo.iter_mut().zip(lb.iter()) {
                *a = a.clone() + b.clone();
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (lo, lb) in out.levels.iter_mut().zip(other.levels.iter()) {
            for (a, b) in lo.iter_mut().zip(lb.iter()) {
                *a = a.clone() - b.clone();
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = self.clone();
        for block in out.levels.iter_mut() {
            for c in block.iter_mut() {
                *c = c.clone() * factor.clone();
            }
        }
        out
    }

    /// Degree-wise dilation: the degree-`m` block is scaled by `lambda^m`.
    pub fn dilate(&self, lambda: &T) -> Self {
        let mut out = self.clone();
        let mut power = T::one();
        for block in out.levels.iter_mut() {
            for c in block.iter_mut() {
                *c = c.clone() * power.clone();
            }
            power = power * lambda.clone();
        }
        out
    }

    fn accumulate_product_into(&self, other: &Self, out: &mut Self) {
        let base = self.dim + 1;
        for m in 0..=out.max_degree {
            for i in 0..=m {
                let j = m - i;
                let shift = base.pow(j as u32);
                let (a_block, b_block) = (&self.levels[i], &other.levels[j]);
                let out_block = &mut out.levels[m];
                for (ai, a) in a_block.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let offset = ai * shift;
                    for (bj, b) in b_block.iter().enumerate() {
                        if b.is_zero() {
                            continue;
                        }
                        let slot = &mut out_block[offset + bj];
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
    }
}

/// Tensor convolution product, truncated at the common degree bound.
///
/// The coefficient of a word `w` in the result is the sum of
/// `a[u] * b[v]` over all splittings `w = u·v`.
pub fn tensor_product<T: Scalar>(
    a: &Tensor1<T>,
    b: &Tensor1<T>,
) -> Result<Tensor1<T>, TensorError> {
    a.check_compatible(b)?;
    let mut out = Tensor1::zero(a.dim(), a.max_degree());
    a.accumulate_product_into(b, &mut out);
    Ok(out)
}

/// Tensor exponential of a vector `v` in `R^(d+1)`: the degree-`m` block is
/// `v^(⊗m) / m!`, truncated at `max_degree`.
pub fn tensor_exp<T: Scalar>(v: &[T], max_degree: usize) -> Tensor1<T> {
    let dim = v.len() - 1;
    let mut out = Tensor1::unit(dim, max_degree);
    // levels[m] = outer power of v, divided by m at each step
    let mut prev: Vec<T> = vec![T::one()];
    for m in 1..=max_degree {
        let mut next = vec![T::zero(); (dim + 1).pow(m as u32)];
        let divisor = T::from_count(m as u64);
        for (i, p) in prev.iter().enumerate() {
            for (l, vl) in v.iter().enumerate() {
                next[i * (dim + 1) + l] = p.clone() * vl.clone() / divisor.clone();
            }
        }
        out.levels[m] = next.clone();
        prev = next;
    }
    out
}

impl Tensor1<f64> {
    /// Norm in the requested mode; `hilbert` is the Euclidean norm of the
    /// full coefficient vector, `level_l1` sums per-degree Euclidean norms.
    pub fn norm(&self, mode: NormMode) -> f64 {
        match mode {
            NormMode::Hilbert => self
                .levels
                .iter()
                .flat_map(|b| b.iter())
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt(),
            NormMode::LevelL1 => self
                .levels
                .iter()
                .map(|b| b.iter().map(|c| c * c).sum::<f64>().sqrt())
                .sum(),
        }
    }

    /// Inner product under the orthonormal word basis.
    pub fn dot(&self, other: &Self) -> Result<f64, TensorError> {
        self.check_compatible(other)?;
        Ok(self
            .levels
            .iter()
            .zip(other.levels.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Largest absolute coefficient difference; used by oracle comparisons.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, TensorError> {
        self.check_compatible(other)?;
        Ok(self
            .levels
            .iter()
            .zip(other.levels.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Shuffle product of two words: every interleaving of `u` and `v` with
/// multiplicity. Returned as a word-to-multiplicity map.
pub fn shuffle_product(u: &Word, v: &Word) -> BTreeMap<Word, u64> {
    fn go(u: &[u8], v: &[u8], acc: &mut Vec<u8>, out: &mut BTreeMap<Word, u64>) {
        if u.is_empty() && v.is_empty() {
            *out.entry(Word(acc.clone())).or_insert(0) += 1;
            return;
        }
        if let Some((&h, rest)) = u.split_first() {
            acc.push(h);
            go(rest, v, acc, out);
            acc.pop();
        }
        if let Some((&h, rest)) = v.split_first() {
            acc.push(h);
            go(u, rest, acc, out);
            acc.pop();
        }
    }
    let mut out = BTreeMap::new();
    go(&u.0, &v.0, &mut Vec::new(), &mut out);
    out
}
