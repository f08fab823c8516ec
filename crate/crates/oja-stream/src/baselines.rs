//! Comparison estimators: the O(d^2)-memory batch method (empirical mean
//! plus eigensolve) and the block power method. The constant-step Oja run
//! serves as the Alecton-like baseline and lives in `oja`.

use crate::error::{OjaError, Result};
use crate::linalg::{normalize, sin_sq, sym_eig_top2, DenseMatrix, SymMatrix, UnitVector, Vector};
use crate::model::StreamDistribution;
use crate::oja::initial_iterate;

/// Batch estimate: accumulate the empirical mean of n samples, symmetrize
/// it (samples may be asymmetric), eigensolve, and report the top
/// eigenvector plus its sin^2 error against the stream's v1.
///
/// This is deliberately the O(d^2)-memory non-streaming reference.
pub fn batch_topvec(dist: &StreamDistribution, n: u64, seed: u64) -> Result<(UnitVector, f64)> {
    if n < 1 {
        return Err(OjaError::InvalidParameter("need n >= 1".into()));
    }
    let d = dist.dim();
    let mut sampler = dist.sampler(seed);
    let mut acc = DenseMatrix::zeros(d, d);
    for _ in 0..n {
        sampler.next_sample().add_into(&mut acc, 1.0);
    }
    acc.scale(1.0 / n as f64);
    let sigma_hat = SymMatrix::symmetrize(&acc)?;
    let (_, _, w) = sym_eig_top2(&sigma_hat)?;
    let err = sin_sq(&w, &dist.ground_truth().v1);
    Ok((w, err))
}

/// Block power method: split the stream into `num_blocks` blocks of size
/// floor(n / num_blocks), and per block apply one power-iteration step with
/// the block's empirical mean, w <- normalize((1/T) sum_i A_i w), computed
/// streaming (O(d) memory for rank-one samples). Leftover samples are
/// discarded. w0 is uniform on the sphere from `seed`.
pub fn block_power(
    dist: &StreamDistribution,
    n: u64,
    num_blocks: u64,
    seed: u64,
) -> Result<(UnitVector, f64)> {
    if num_blocks < 1 || n < num_blocks {
        return Err(OjaError::EmptyBlock { n, num_blocks });
    }
    let block_size = n / num_blocks;
    let (mut w, rng) = initial_iterate(dist, seed);
    let mut sampler = dist.sampler_from(rng);
    for _ in 0..num_blocks {
        let mut acc = Vector::zeros(dist.dim());
        for _ in 0..block_size {
            let a = sampler.next_sample();
            let aw = a.apply(w.as_vector())?;
            acc.axpy(1.0, &aw);
        }
        acc.scale(1.0 / block_size as f64);
        w = normalize(&acc)?;
    }
    let err = sin_sq(&w, &dist.ground_truth().v1);
    Ok((w, err))
}

/// Default block count for a stream of length n: ceil(log2 n), clamped to
/// at least 1. Exposed as a CLI knob; the harness sweeps it.
pub fn default_num_blocks(n: u64) -> u64 {
    if n <= 1 {
        return 1;
    }
    let bits = 64 - (n - 1).leading_zeros() as u64;
    bits.max(1)
}
