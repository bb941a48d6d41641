//! Semi-metrics between adapted processes, the signature kernel of
//! normalized path signatures, and the induced maximum mean discrepancy
//! between path samples.

use crate::dp::{phi, DpError};
use crate::process::FiltrationTree;
use crate::sig::{robust_signature, SigError, SignatureConfig};
use crate::tensor::{NormMode, Tensor1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("state-space dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("samples must be nonempty")]
    EmptySample,
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Sig(#[from] SigError),
}

/// Distance between two processes at one rank and truncation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceReport {
    pub rank: usize,
    pub max_degree: usize,
    pub normalized: bool,
    pub norm: NormMode,
    pub value: f64,
    /// Euclidean norm of the difference per total degree; the reported
    /// value aggregates these according to the norm mode.
    pub per_degree: Vec<f64>,
}

/// Rank-`r` semi-metric: the norm of the difference of the rank-`r`
/// functionals of the two trees at a shared truncation.
pub fn adapted_distance(
    a: &FiltrationTree<f64>,
    b: &FiltrationTree<f64>,
    rank: usize,
    config: &SignatureConfig,
) -> Result<DistanceReport, MetricError> {
    if a.dim() != b.dim() {
        return Err(MetricError::DimMismatch(a.dim(), b.dim()));
    }
    let robust = config.normalize.then_some(config.norm);
    let phi_a = phi(a, rank, config.max_degree, robust)?;
    let phi_b = phi(b, rank, config.max_degree, robust)?;
    let diff = phi_a.value.sub(&phi_b.value).map_err(DpError::from)?;
    Ok(DistanceReport {
        rank,
        max_degree: config.max_degree,
        normalized: config.normalize,
        norm: config.norm,
        value: diff.norm(config.norm),
        per_degree: diff.per_degree_norms(),
    })
}

/// Signature kernel: inner product of robust-normalized signatures,
/// recentered so that the unit contribution drops out.
pub fn sig_kernel(x: &[Vec<f64>], y: &[Vec<f64>], max_degree: usize) -> Result<f64, MetricError> {
    if x.first().map(Vec::len) != y.first().map(Vec::len) {
        return Err(MetricError::DimMismatch(
            x.first().map(Vec::len).unwrap_or(0),
            y.first().map(Vec::len).unwrap_or(0),
        ));
    }
    let sx = robust_signature(x, max_degree, NormMode::Hilbert)?;
    let sy = robust_signature(y, max_degree, NormMode::Hilbert)?;
    Ok(sx.dot(&sy).map_err(SigError::from)? - 1.0)
}

/// Mean of the robust-normalized signatures of a sample.
fn mean_robust_signature(
    samples: &[Vec<Vec<f64>>],
    max_degree: usize,
) -> Result<Tensor1<f64>, MetricError> {
    let first = samples.first().ok_or(MetricError::EmptySample)?;
    let dim = first[0].len();
    let mut acc = Tensor1::zero(dim, max_degree);
    let weight = 1.0 / samples.len() as f64;
    for path in samples {
        acc = acc
            .add(&robust_signature(path, max_degree, NormMode::Hilbert)?.scale(&weight))
            .map_err(SigError::from)?;
    }
    Ok(acc)
}

/// Maximum mean discrepancy between two path samples: the norm of the
/// difference of their empirical robust expected signatures. Equals the
/// kernel V-statistic form built from [`sig_kernel`].
pub fn mmd(
    samples_a: &[Vec<Vec<f64>>],
    samples_b: &[Vec<Vec<f64>>],
    max_degree: usize,
) -> Result<f64, MetricError> {
    let ma = mean_robust_signature(samples_a, max_degree)?;
    let mb = mean_robust_signature(samples_b, max_degree)?;
    Ok(ma.sub(&mb).map_err(SigError::from)?.norm(NormMode::Hilbert))
}
