//! The per-sample Oja update with per-step normalization, the three
//! provably convergent beta/step-size parametrizations, and a seeded
//! single-pass runner.
//!
//! The update is w <- normalize(w + eta_i A_i w). Normalizing every step
//! changes only the scale of the iterate, never its direction (the
//! operator-view equivalence test pins this), and keeps the recursion
//! safely inside f64 range for any stream length.

use crate::error::{OjaError, Result};
use crate::linalg::{normalize, rayleigh, sin_sq, DenseMatrix, UnitVector};
use crate::model::{GroundTruth, ModelBounds, Sample, StreamDistribution};
use crate::rng::RngState;

/// Step-size schedule: either the decaying form
/// eta_i = alpha / (gap * (beta + i)) or a constant step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Decaying { alpha: f64, beta: f64, gap: f64 },
    Constant { eta: f64 },
}

/// beta for the log-d schedule:
/// 40 max( M log d / gap, (V + lambda1^2) log^2 d / gap^2 ), natural log.
pub fn beta_thm12(m: f64, v: f64, lambda1: f64, gap: f64, d: usize) -> Result<f64> {
    if gap <= 0.0 {
        return Err(OjaError::DegenerateGap { gap });
    }
    if d < 2 {
        return Err(OjaError::InvalidParameter(format!(
            "need d >= 2, got {d}"
        )));
    }
    let log_d = (d as f64).ln();
    let first = m * log_d / gap;
    let second = (v + lambda1 * lambda1) * log_d * log_d / (gap * gap);
    Ok(40.0 * first.max(second))
}

/// beta for the constant-alpha (alpha = 6) schedule:
/// 720 max( M / gap, (V + lambda1^2) / gap^2 ).
pub fn beta_thm13(m: f64, v: f64, lambda1: f64, gap: f64) -> Result<f64> {
    if gap <= 0.0 {
        return Err(OjaError::DegenerateGap { gap });
    }
    let first = m / gap;
    let second = (v + lambda1 * lambda1) / (gap * gap);
    Ok(720.0 * first.max(second))
}

/// beta for the general (alpha, delta) schedule:
/// 20 max( M alpha / gap, (V + lambda1^2) alpha^2 / (gap^2 ln(1 + delta/100)) ).
pub fn beta_thm41(m: f64, v: f64, lambda1: f64, gap: f64, alpha: f64, delta: f64) -> Result<f64> {
    if gap <= 0.0 {
        return Err(OjaError::DegenerateGap { gap });
    }
    if alpha <= 0.5 {
        return Err(OjaError::BadAlpha { alpha });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(OjaError::InvalidParameter(format!(
            "need 0 < delta < 1, got {delta}"
        )));
    }
    let first = m * alpha / gap;
    let second =
        (v + lambda1 * lambda1) * alpha * alpha / (gap * gap * (1.0 + delta / 100.0).ln());
    Ok(20.0 * first.max(second))
}

impl StepSchedule {
    pub fn decaying(alpha: f64, beta: f64, gap: f64) -> Result<Self> {
        if alpha <= 0.5 {
            return Err(OjaError::BadAlpha { alpha });
        }
        if beta <= 0.0 || !beta.is_finite() {
            return Err(OjaError::InvalidParameter(format!(
                "need beta > 0, got {beta}"
            )));
        }
        if gap <= 0.0 {
            return Err(OjaError::DegenerateGap { gap });
        }
        Ok(StepSchedule::Decaying { alpha, beta, gap })
    }

    pub fn constant(eta: f64) -> Result<Self> {
        if eta <= 0.0 || !eta.is_finite() {
            return Err(OjaError::InvalidParameter(format!(
                "need eta > 0, got {eta}"
            )));
        }
        Ok(StepSchedule::Constant { eta })
    }

    /// The log-d schedule for a given stream.
    pub fn thm12(bounds: &ModelBounds, truth: &GroundTruth, d: usize) -> Result<Self> {
        let beta = beta_thm12(bounds.m_bound, bounds.v_bound, truth.lambda1, truth.gap, d)?;
        Self::decaying((d as f64).ln(), beta, truth.gap)
    }

    /// The alpha = 6 schedule.
    pub fn thm13(bounds: &ModelBounds, truth: &GroundTruth) -> Result<Self> {
        let beta = beta_thm13(bounds.m_bound, bounds.v_bound, truth.lambda1, truth.gap)?;
        Self::decaying(6.0, beta, truth.gap)
    }

    /// The general (alpha, delta) schedule.
    pub fn thm41(bounds: &ModelBounds, truth: &GroundTruth, alpha: f64, delta: f64) -> Result<Self> {
        let beta = beta_thm41(
            bounds.m_bound,
            bounds.v_bound,
            truth.lambda1,
            truth.gap,
            alpha,
            delta,
        )?;
        Self::decaying(alpha, beta, truth.gap)
    }

    /// Step size for sample index i (the first sample uses i = 1).
    pub fn eta(&self, i: u64) -> f64 {
        debug_assert!(i >= 1);
        match self {
            StepSchedule::Decaying { alpha, beta, gap } => alpha / (gap * (beta + i as f64)),
            StepSchedule::Constant { eta } => *eta,
        }
    }

    /// Materialize eta_1 ... eta_n.
    pub fn etas(&self, n: u64) -> Vec<f64> {
        (1..=n).map(|i| self.eta(i)).collect()
    }
}

/// One Oja step: normalize(w + eta A w) for a dense sample.
pub fn oja_step(w: &UnitVector, a: &DenseMatrix, eta: f64) -> Result<UnitVector> {
    oja_step_sample(w, &Sample::Dense(a.clone()), eta)
}

/// One Oja step on a sample in its native representation.
pub fn oja_step_sample(w: &UnitVector, a: &Sample, eta: f64) -> Result<UnitVector> {
    let mut v = w.as_vector().clone();
    a.accumulate_apply(&mut v, eta)?;
    normalize(&v)
}

/// Outcome of a single-pass run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub w_final: UnitVector,
    pub sin_sq_final: f64,
    pub rayleigh_final: f64,
    pub n: u64,
    pub seed: u64,
    /// (i, sin^2(w_i, v1)) at the requested indices; the last entry is
    /// always (n, sin_sq_final).
    pub checkpoints: Vec<(u64, f64)>,
}

/// Single-pass Oja run: w0 uniform on the sphere from `seed`, then n
/// per-sample updates with the schedule's step sizes. Memory stays O(d)
/// for rank-one streams; the only d x d state ever held is the current
/// dense sample for dense replay streams.
pub fn oja_run(
    dist: &StreamDistribution,
    schedule: &StepSchedule,
    n: u64,
    seed: u64,
    checkpoint_grid: &[u64],
) -> Result<RunResult> {
    if n < 1 {
        return Err(OjaError::InvalidParameter("need n >= 1".into()));
    }
    let grid = validate_grid(checkpoint_grid, n)?;
    let truth = dist.ground_truth();
    let mut rng = RngState::new(seed);
    let mut w = rng.unit_sphere(dist.dim());
    let mut sampler = dist.sampler_from(rng);
    let mut checkpoints = Vec::with_capacity(grid.len() + 1);
    let mut next_grid = 0usize;
    for i in 1..=n {
        let a = sampler.next_sample();
        w = oja_step_sample(&w, &a, schedule.eta(i))?;
        if next_grid < grid.len() && grid[next_grid] == i {
            checkpoints.push((i, sin_sq(&w, &truth.v1)));
            next_grid += 1;
        }
    }
    let sin_sq_final = sin_sq(&w, &truth.v1);
    if checkpoints.last().map(|&(i, _)| i) != Some(n) {
        checkpoints.push((n, sin_sq_final));
    }
    let rayleigh_final = rayleigh(&w, &truth.sigma);
    Ok(RunResult {
        w_final: w,
        sin_sq_final,
        rayleigh_final,
        n,
        seed,
        checkpoints,
    })
}

fn validate_grid(grid: &[u64], n: u64) -> Result<Vec<u64>> {
    let mut g: Vec<u64> = grid.to_vec();
    g.sort_unstable();
    g.dedup();
    if let Some(&bad) = g.iter().find(|&&i| i < 1 || i > n) {
        return Err(OjaError::InvalidParameter(format!(
            "checkpoint {bad} outside [1, {n}]"
        )));
    }
    Ok(g)
}

/// Uniform initial iterate for a given run seed, exposed so baselines and
/// diagnostics can share the initialization convention.
pub fn initial_iterate(dist: &StreamDistribution, seed: u64) -> (UnitVector, RngState) {
    let mut rng = RngState::new(seed);
    let w0 = rng.unit_sphere(dist.dim());
    (w0, rng)
}

/// Explicitly form B_n = (I + eta_n A_n) ... (I + eta_1 A_1) on the same
/// sample stream a run with this seed would see. Desk-scale diagnostic for
/// the operator view of the recursion.
pub fn operator_product(
    dist: &StreamDistribution,
    schedule: &StepSchedule,
    n: u64,
    seed: u64,
) -> Result<(DenseMatrix, UnitVector)> {
    let d = dist.dim();
    let mut rng = RngState::new(seed);
    let w0 = rng.unit_sphere(d);
    let mut sampler = dist.sampler_from(rng);
    let mut b = DenseMatrix::identity(d);
    for i in 1..=n {
        let a = sampler.next_sample();
        a.apply_left(&mut b, schedule.eta(i))?;
    }
    Ok((b, w0))
}
