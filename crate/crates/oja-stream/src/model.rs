//! Sample-stream distributions with exact ground truth.
//!
//! Every distribution here satisfies the streaming model contract:
//! E[A_i] = Sigma (symmetric PSD), ||A_i - Sigma|| <= M almost surely, and
//! the second moments of A_i - Sigma are bounded by V in spectral norm.
//! Each kind exposes its closed-form Sigma, top eigenpair, and certified
//! (possibly conservative) M and V, so schedules and bound evaluators can
//! run on oracle values rather than estimates.

use std::sync::Arc;

use crate::error::{OjaError, Result};
use crate::linalg::{
    normalize, spectral_norm, spectral_norm_sym, sym_eig_top2, DenseMatrix, SymMatrix, UnitVector,
    Vector,
};
use crate::replay::ReplaySource;
use crate::rng::RngState;

/// Exact spectrum data for a stream: Sigma, its top two eigenvalues, the
/// top eigenvector, and the spectral gap lambda1 - lambda2.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub sigma: SymMatrix,
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: UnitVector,
    pub gap: f64,
}

/// Concentration parameters of the stream: M bounds ||A - Sigma|| almost
/// surely, V bounds both second moments, and v_bar = V + lambda1^2.
#[derive(Debug, Clone, Copy)]
pub struct ModelBounds {
    pub m_bound: f64,
    pub v_bound: f64,
    pub v_bar: f64,
}

#[derive(Debug, Clone)]
pub enum DistributionKind {
    /// The basis-spike stream: A = x x^T with x = e_1 with probability 1/d
    /// and x = sigma e_j with probability 1/d for each j in {2, ..., d}.
    /// Sigma = ((1 - sigma^2)/d) e_1 e_1^T + (sigma^2/d) I.
    BasisSpike { d: usize, sigma_param: f64 },
    /// A = x x^T with x = D s for a fixed nonnegative diagonal D and a
    /// uniform +/-1 sign vector s. Sigma = D^2.
    BoundedFeature { diag: Vec<f64> },
    /// Replays recorded samples from a file, cycling past the end.
    Replay { source: Arc<ReplaySource> },
}

/// A stream distribution descriptor plus its derived ground truth and
/// bounds. Immutable and cheap to share across trial workers.
#[derive(Debug, Clone)]
pub struct StreamDistribution {
    kind: DistributionKind,
    truth: GroundTruth,
    bounds: ModelBounds,
}

/// One sample A_i. Rank-one forms never materialize the d x d matrix.
#[derive(Debug, Clone)]
pub enum Sample {
    /// scale^2 * e_index e_index^T (a rank-one on a basis direction).
    Basis { d: usize, index: usize, scale: f64 },
    /// x x^T for a dense factor x.
    RankOne(Vector),
    /// An arbitrary dense (possibly asymmetric) matrix.
    Dense(DenseMatrix),
}

impl Sample {
    pub fn dim(&self) -> usize {
        match self {
            Sample::Basis { d, .. } => *d,
            Sample::RankOne(x) => x.dim(),
            Sample::Dense(m) => m.rows(),
        }
    }

    /// A v without materializing A for rank-one forms.
    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        match self {
            Sample::Basis { d, index, scale } => {
                if v.dim() != *d {
                    return Err(OjaError::DimensionMismatch {
                        expected: *d,
                        got: v.dim(),
                    });
                }
                let mut out = Vector::zeros(*d);
                out.as_mut_slice()[*index] = scale * scale * v.as_slice()[*index];
                Ok(out)
            }
            Sample::RankOne(x) => {
                if v.dim() != x.dim() {
                    return Err(OjaError::DimensionMismatch {
                        expected: x.dim(),
                        got: v.dim(),
                    });
                }
                let c = x.dot(v);
                let mut out = x.clone();
                out.scale(c);
                Ok(out)
            }
            Sample::Dense(m) => m.apply(v),
        }
    }

    /// w += eta * (A w), in place; the Oja update direction.
    pub fn accumulate_apply(&self, w: &mut Vector, eta: f64) -> Result<()> {
        match self {
            Sample::Basis { d, index, scale } => {
                if w.dim() != *d {
                    return Err(OjaError::DimensionMismatch {
                        expected: *d,
                        got: w.dim(),
                    });
                }
                let ws = w.as_mut_slice();
                ws[*index] += eta * scale * scale * ws[*index];
                Ok(())
            }
            Sample::RankOne(x) => {
                if w.dim() != x.dim() {
                    return Err(OjaError::DimensionMismatch {
                        expected: x.dim(),
                        got: w.dim(),
                    });
                }
                let c = eta * x.dot(w);
                w.axpy(c, x);
                Ok(())
            }
            Sample::Dense(m) => {
                let aw = m.apply(w)?;
                w.axpy(eta, &aw);
                Ok(())
            }
        }
    }

    /// B <- (I + eta A) B, the operator-product accumulation.
    pub fn apply_left(&self, b: &mut DenseMatrix, eta: f64) -> Result<()> {
        let d = b.rows();
        if self.dim() != d {
            return Err(OjaError::DimensionMismatch {
                expected: d,
                got: self.dim(),
            });
        }
        match self {
            Sample::Basis { index, scale, .. } => {
                let c = eta * scale * scale;
                for j in 0..b.cols() {
                    let v = b.get(*index, j);
                    b.set(*index, j, v + c * v);
                }
                Ok(())
            }
            Sample::RankOne(x) => {
                // row update: B += eta x (x^T B)
                let xt_b = b.apply_transpose(x)?;
                b.add_outer(eta, x.as_slice(), xt_b.as_slice());
                Ok(())
            }
            Sample::Dense(m) => {
                let mut prod = DenseMatrix::zeros(d, b.cols());
                for i in 0..d {
                    for k in 0..d {
                        let a_ik = m.get(i, k);
                        if a_ik == 0.0 {
                            continue;
                        }
                        for j in 0..b.cols() {
                            let v = prod.get(i, j);
                            prod.set(i, j, v + a_ik * b.get(k, j));
                        }
                    }
                }
                b.add_scaled(eta, &prod);
                Ok(())
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Sample::Basis { d, index, scale } => {
                let mut m = DenseMatrix::zeros(*d, *d);
                m.set(*index, *index, scale * scale);
                m
            }
            Sample::RankOne(x) => {
                let mut m = DenseMatrix::zeros(x.dim(), x.dim());
                m.add_outer(1.0, x.as_slice(), x.as_slice());
                m
            }
            Sample::Dense(m) => m.clone(),
        }
    }

    /// Accumulate this sample into a running dense sum (for batch means).
    pub fn add_into(&self, acc: &mut DenseMatrix, weight: f64) {
        match self {
            Sample::Basis { index, scale, .. } => {
                let v = acc.get(*index, *index);
                acc.set(*index, *index, v + weight * scale * scale);
            }
            Sample::RankOne(x) => acc.add_outer(weight, x.as_slice(), x.as_slice()),
            Sample::Dense(m) => acc.add_scaled(weight, m),
        }
    }
}

impl StreamDistribution {
    pub fn basis_spike(d: usize, sigma_param: f64) -> Result<Self> {
        if d < 2 {
            return Err(OjaError::InvalidParameter(format!(
                "basis spike needs d >= 2, got {d}"
            )));
        }
        if !(sigma_param > 0.0 && sigma_param < 1.0) {
            return Err(OjaError::InvalidParameter(format!(
                "basis spike needs 0 < sigma < 1, got {sigma_param}"
            )));
        }
        let df = d as f64;
        let s2 = sigma_param * sigma_param;
        let mut sigma = SymMatrix::zeros(d);
        sigma.set(0, 0, 1.0 / df);
        for j in 1..d {
            sigma.set(j, j, s2 / df);
        }
        let truth = GroundTruth {
            sigma,
            lambda1: 1.0 / df,
            lambda2: s2 / df,
            v1: UnitVector::basis(d, 0),
            gap: (1.0 - s2) / df,
        };
        // M = 1 + 1/d bounds ||A|| + ||Sigma||; V = 1/d is the stream's
        // second-moment bound. Both are certified, slightly conservative.
        let bounds = ModelBounds {
            m_bound: 1.0 + 1.0 / df,
            v_bound: 1.0 / df,
            v_bar: 1.0 / df + 1.0 / (df * df),
        };
        Ok(StreamDistribution {
            kind: DistributionKind::BasisSpike { d, sigma_param },
            truth,
            bounds,
        })
    }

    pub fn bounded_feature(diag: Vec<f64>) -> Result<Self> {
        let d = diag.len();
        if d < 2 {
            return Err(OjaError::InvalidParameter(format!(
                "bounded feature needs d >= 2, got {d}"
            )));
        }
        if diag.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(OjaError::InvalidParameter(
                "bounded feature needs finite nonnegative diagonal entries".into(),
            ));
        }
        if diag.iter().all(|&x| x == 0.0) {
            return Err(OjaError::InvalidParameter(
                "bounded feature needs at least one positive entry".into(),
            ));
        }
        let squares: Vec<f64> = diag.iter().map(|x| x * x).collect();
        let sigma = SymMatrix::diag(&squares);
        let mut sorted = squares.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let lambda1 = sorted[0];
        let lambda2 = sorted[1];
        let top = squares
            .iter()
            .position(|&x| x == lambda1)
            .expect("max exists");
        let truth = GroundTruth {
            sigma,
            lambda1,
            lambda2,
            v1: UnitVector::basis(d, top),
            gap: lambda1 - lambda2,
        };
        // Every sample sits at the same spectral distance from Sigma:
        // A - Sigma = u u^T - D^2 with u = D s, and conjugating by
        // diag(s) maps it to dd^T - D^2 independently of the signs. So
        // M is exactly ||dd^T - D^2||, and the second moment is exactly
        // diagonal with entries d_i^2 (S - d_i^2), S = sum d_k^2.
        let mut dev = DenseMatrix::zeros(d, d);
        dev.add_outer(1.0, &diag, &diag);
        for i in 0..d {
            dev.set(i, i, dev.get(i, i) - squares[i]);
        }
        let m_bound = spectral_norm_sym(&SymMatrix::symmetrize(&dev)?)?;
        let s_total: f64 = squares.iter().sum();
        let v_bound = squares
            .iter()
            .map(|&q| q * (s_total - q))
            .fold(0.0f64, f64::max);
        let bounds = ModelBounds {
            m_bound,
            v_bound,
            v_bar: v_bound + lambda1 * lambda1,
        };
        Ok(StreamDistribution {
            kind: DistributionKind::BoundedFeature { diag },
            truth,
            bounds,
        })
    }

    /// Wrap a replay source. Ground truth and bounds come from the file's
    /// declared block when present (unchecked, per the replay contract);
    /// otherwise they are derived from the recorded samples themselves.
    pub fn replay(source: ReplaySource) -> Result<Self> {
        let d = source.dim();
        if source.len() == 0 {
            return Err(OjaError::Replay("replay source has no samples".into()));
        }
        // Mean of all recorded samples, symmetrized.
        let mut acc = DenseMatrix::zeros(d, d);
        for i in 0..source.len() {
            source.sample(i).add_into(&mut acc, 1.0);
        }
        acc.scale(1.0 / source.len() as f64);
        let sigma = SymMatrix::symmetrize(&acc)?;

        let truth;
        let bounds;
        if let Some(decl) = source.declared() {
            let v1 = normalize(&Vector::from_vec(decl.v1.clone()))?;
            truth = GroundTruth {
                sigma,
                lambda1: decl.lambda1,
                lambda2: decl.lambda2,
                v1,
                gap: decl.lambda1 - decl.lambda2,
            };
            bounds = ModelBounds {
                m_bound: decl.m_bound,
                v_bound: decl.v_bound,
                v_bar: decl.v_bound + decl.lambda1 * decl.lambda1,
            };
        } else {
            let (lambda1, lambda2, v1) = sym_eig_top2(&sigma)?;
            let mut m_bound = 0.0f64;
            let mut left = SymMatrix::zeros(d);
            let mut right = SymMatrix::zeros(d);
            for i in 0..source.len() {
                let dev = deviation(&source.sample(i), &sigma);
                m_bound = m_bound.max(spectral_norm(&dev)?);
                left.add_scaled(1.0 / source.len() as f64, &dev.gram());
                right.add_scaled(1.0 / source.len() as f64, &dev.gram_transpose());
            }
            let v_bound = spectral_norm_sym(&left)?.max(spectral_norm_sym(&right)?);
            truth = GroundTruth {
                sigma,
                lambda1,
                lambda2,
                v1,
                gap: lambda1 - lambda2,
            };
            bounds = ModelBounds {
                m_bound,
                v_bound,
                v_bar: v_bound + lambda1 * lambda1,
            };
        }
        Ok(StreamDistribution {
            kind: DistributionKind::Replay {
                source: Arc::new(source),
            },
            truth,
            bounds,
        })
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.truth.v1.dim()
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn bounds(&self) -> &ModelBounds {
        &self.bounds
    }

    /// A per-run sample stream. Random kinds draw from the seeded RNG;
    /// replay kinds walk the recorded samples in order, cycling.
    pub fn sampler(&self, seed: u64) -> Sampler<'_> {
        Sampler {
            dist: self,
            rng: RngState::new(seed),
            step: 0,
        }
    }

    pub(crate) fn sampler_from(&self, rng: RngState) -> Sampler<'_> {
        Sampler {
            dist: self,
            rng,
            step: 0,
        }
    }

    /// Validate the stream against its own declared M and V over `trials`
    /// fresh samples.
    pub fn empirical_check(&self, trials: usize, seed: u64) -> Result<CheckReport> {
        self.empirical_check_against(self.bounds, trials, seed)
    }

    /// Same as `empirical_check` but against caller-supplied bounds, so a
    /// corrupted or user-declared bound can be interrogated.
    pub fn empirical_check_against(
        &self,
        bounds: ModelBounds,
        trials: usize,
        seed: u64,
    ) -> Result<CheckReport> {
        if trials < 100 {
            return Err(OjaError::InvalidParameter(format!(
                "empirical check needs trials >= 100, got {trials}"
            )));
        }
        let d = self.dim();
        let sigma = &self.truth.sigma;
        let mut sampler = self.sampler(seed);
        let mut max_dev = 0.0f64;
        let mut mean = DenseMatrix::zeros(d, d);
        let mut left = SymMatrix::zeros(d);
        let mut right = SymMatrix::zeros(d);
        let w = 1.0 / trials as f64;
        for _ in 0..trials {
            let a = sampler.next_sample();
            let dev = deviation(&a, sigma);
            max_dev = max_dev.max(spectral_norm(&dev)?);
            a.add_into(&mut mean, w);
            left.add_scaled(w, &dev.gram());
            right.add_scaled(w, &dev.gram_transpose());
        }
        for i in 0..d {
            for j in 0..d {
                mean.set(i, j, mean.get(i, j) - sigma.get(i, j));
            }
        }
        let mean_dev = spectral_norm(&mean)?;
        let second_moment_left = spectral_norm_sym(&left)?;
        let second_moment_right = spectral_norm_sym(&right)?;
        // Strict float comparison of two routes to the same quantity needs
        // a sliver of rounding headroom.
        let m_tol = bounds.m_bound * (1.0 + 1e-9) + 1e-12;
        let v_tol = bounds.v_bound * (1.0 + 5.0 / (trials as f64).sqrt()) + 1e-12;
        Ok(CheckReport {
            trials,
            max_dev,
            second_moment_left,
            second_moment_right,
            mean_dev,
            m_bound: bounds.m_bound,
            v_bound: bounds.v_bound,
            m_violation: max_dev > m_tol,
            v_violation: second_moment_left > v_tol || second_moment_right > v_tol,
        })
    }
}

fn deviation(a: &Sample, sigma: &SymMatrix) -> DenseMatrix {
    let d = sigma.dim();
    let mut dev = a.to_dense();
    for i in 0..d {
        for j in 0..d {
            dev.set(i, j, dev.get(i, j) - sigma.get(i, j));
        }
    }
    dev
}

/// Per-run sampling state: a distribution reference, a private RNG, and a
/// step counter (used by replay cycling).
pub struct Sampler<'a> {
    dist: &'a StreamDistribution,
    rng: RngState,
    step: u64,
}

impl Sampler<'_> {
    pub fn next_sample(&mut self) -> Sample {
        let step = self.step;
        self.step += 1;
        match self.dist.kind() {
            DistributionKind::BasisSpike { d, sigma_param } => {
                let j = self.rng.next_below(*d);
                if j == 0 {
                    Sample::Basis {
                        d: *d,
                        index: 0,
                        scale: 1.0,
                    }
                } else {
                    Sample::Basis {
                        d: *d,
                        index: j,
                        scale: *sigma_param,
                    }
                }
            }
            DistributionKind::BoundedFeature { diag } => {
                let d = diag.len();
                let mut x = Vec::with_capacity(d);
                let mut bits = 0u64;
                for (i, &di) in diag.iter().enumerate() {
                    if i % 64 == 0 {
                        bits = self.rng.next_u64();
                    }
                    let s = if bits & 1 == 1 { 1.0 } else { -1.0 };
                    bits >>= 1;
                    x.push(di * s);
                }
                Sample::RankOne(Vector::from_vec(x))
            }
            DistributionKind::Replay { source } => {
                source.sample((step % source.len() as u64) as usize)
            }
        }
    }
}

/// Result of an empirical model check over fresh samples.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub trials: usize,
    pub max_dev: f64,
    pub second_moment_left: f64,
    pub second_moment_right: f64,
    pub mean_dev: f64,
    pub m_bound: f64,
    pub v_bound: f64,
    pub m_violation: bool,
    pub v_violation: bool,
}

impl CheckReport {
    pub fn violated(&self) -> bool {
        self.m_violation || self.v_violation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sin_sq, sym_eig};

    #[test]
    fn basis_spike_ground_truth_closed_form() {
        let dist = StreamDistribution::basis_spike(10, 0.5).unwrap();
        let t = dist.ground_truth();
        assert!((t.lambda1 - 0.1).abs() < 1e-15);
        assert!((t.lambda2 - 0.025).abs() < 1e-15);
        assert!((t.gap - 0.075).abs() < 1e-15);
        assert_eq!(t.v1.as_slice()[0], 1.0);
        let b = dist.bounds();
        assert!(b.v_bound <= 0.1 + 1e-15);
        assert!((b.v_bar - (b.v_bound + t.lambda1 * t.lambda1)).abs() <= 1e-12);
    }

    #[test]
    fn bounded_feature_ground_truth() {
        let dist = StreamDistribution::bounded_feature(vec![2.0, 1.0]).unwrap();
        let t = dist.ground_truth();
        assert_eq!(t.lambda1, 4.0);
        assert_eq!(t.lambda2, 1.0);
        assert_eq!(t.sigma.get(0, 0), 4.0);
        assert_eq!(t.sigma.get(1, 1), 1.0);
        assert_eq!(t.sigma.get(0, 1), 0.0);
        assert_eq!(t.v1.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn bounded_feature_deterministic_stream_has_zero_bounds() {
        let dist = StreamDistribution::bounded_feature(vec![1.0, 0.0]).unwrap();
        let b = dist.bounds();
        assert!(b.m_bound.abs() < 1e-12);
        assert!(b.v_bound.abs() < 1e-12);
        let report = dist.empirical_check(200, 3).unwrap();
        assert!(report.max_dev < 1e-12);
        assert!(report.mean_dev < 1e-12);
        assert!(!report.violated());
    }

    #[test]
    fn basis_spike_samples_are_single_spikes() {
        let dist = StreamDistribution::basis_spike(4, 0.5).unwrap();
        let mut sampler = dist.sampler(11);
        for _ in 0..200 {
            let a = sampler.next_sample().to_dense();
            let mut nonzero = Vec::new();
            for i in 0..4 {
                for j in 0..4 {
                    if a.get(i, j) != 0.0 {
                        nonzero.push((i, j, a.get(i, j)));
                    }
                }
            }
            assert_eq!(nonzero.len(), 1);
            let (i, j, v) = nonzero[0];
            assert_eq!(i, j);
            assert!(v == 1.0 || v == 0.25, "diagonal spike is {v}");
        }
    }

    #[test]
    fn bounded_feature_signs_fill_the_matrix() {
        let dist = StreamDistribution::bounded_feature(vec![1.0, 1.0]).unwrap();
        let mut sampler = dist.sampler(5);
        for _ in 0..100 {
            let a = sampler.next_sample().to_dense();
            assert_eq!(a.get(0, 0), 1.0);
            assert_eq!(a.get(1, 1), 1.0);
            assert_eq!(a.get(0, 1).abs(), 1.0);
            assert_eq!(a.get(0, 1), a.get(1, 0));
        }
    }

    #[test]
    fn basis_spike_e1_frequency_near_half_in_d2() {
        let dist = StreamDistribution::basis_spike(2, 0.5).unwrap();
        let mut sampler = dist.sampler(17);
        let n = 100_000;
        let mut hits = 0usize;
        for _ in 0..n {
            if let Sample::Basis { index: 0, .. } = sampler.next_sample() {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn monte_carlo_mean_matches_sigma() {
        let dist = StreamDistribution::basis_spike(10, 0.5).unwrap();
        let t = dist.ground_truth();
        let trials = 1_000_000usize;
        let mut sampler = dist.sampler(29);
        // Entrywise mean and sum of squares (samples are diagonal here but
        // the accumulators stay generic).
        let d = 10;
        let mut sum = DenseMatrix::zeros(d, d);
        let mut sumsq = DenseMatrix::zeros(d, d);
        for _ in 0..trials {
            let a = sampler.next_sample().to_dense();
            for i in 0..d {
                for j in 0..d {
                    let x = a.get(i, j);
                    if x != 0.0 {
                        sum.set(i, j, sum.get(i, j) + x);
                        sumsq.set(i, j, sumsq.get(i, j) + x * x);
                    }
                }
            }
        }
        let nf = trials as f64;
        let m_bound = dist.bounds().m_bound;
        for i in 0..d {
            for j in 0..d {
                let mean = sum.get(i, j) / nf;
                let var = (sumsq.get(i, j) / nf - mean * mean).max(0.0);
                let se = (var / nf).sqrt();
                let err = (mean - t.sigma.get(i, j)).abs();
                assert!(
                    err <= 3.0 * se + 1e-15,
                    "entry ({i},{j}): err {err} vs 3 se {}",
                    3.0 * se
                );
                assert!(err <= 5.0 * m_bound / nf.sqrt());
            }
        }
    }

    #[test]
    fn sample_deviation_stays_below_m_bound() {
        let dist = StreamDistribution::basis_spike(10, 0.5).unwrap();
        let sigma = &dist.ground_truth().sigma;
        let m = dist.bounds().m_bound;
        let mut sampler = dist.sampler(31);
        for _ in 0..100_000 {
            let dev = deviation(&sampler.next_sample(), sigma);
            let norm = spectral_norm(&dev).unwrap();
            assert!(norm <= m + 1e-12, "deviation {norm} vs M {m}");
        }
    }

    #[test]
    fn ground_truth_agrees_with_eigensolver() {
        for dist in [
            StreamDistribution::basis_spike(8, 0.3).unwrap(),
            StreamDistribution::bounded_feature(vec![1.5, 1.0, 0.25]).unwrap(),
        ] {
            let t = dist.ground_truth();
            let (l1, l2, v1) = sym_eig_top2(&t.sigma).unwrap();
            assert!((l1 - t.lambda1).abs() <= 1e-9);
            assert!((l2 - t.lambda2).abs() <= 1e-9);
            assert!(sin_sq(&v1, &t.v1) <= 1e-18);
        }
    }

    #[test]
    fn ground_truth_sigma_is_psd_and_consistent() {
        let dist = StreamDistribution::basis_spike(6, 0.7).unwrap();
        let t = dist.ground_truth();
        let eig = sym_eig(&t.sigma).unwrap();
        assert!(eig.values.iter().all(|&l| l >= -1e-10));
        assert!((t.gap - (t.lambda1 - t.lambda2)).abs() <= 1e-15);
        let mut residual = t.sigma.apply(t.v1.as_vector());
        residual.axpy(-t.lambda1, t.v1.as_vector());
        assert!(residual.norm() <= 1e-9);
    }

    #[test]
    fn empirical_check_passes_on_honest_bounds() {
        let dist = StreamDistribution::basis_spike(5, 0.5).unwrap();
        let report = dist.empirical_check(10_000, 41).unwrap();
        assert!(!report.violated(), "{report:?}");
    }

    #[test]
    fn empirical_check_flags_corrupted_m() {
        let dist = StreamDistribution::basis_spike(5, 0.5).unwrap();
        let mut corrupted = *dist.bounds();
        corrupted.m_bound = 0.0;
        let report = dist.empirical_check_against(corrupted, 500, 43).unwrap();
        assert!(report.m_violation);
    }

    #[test]
    fn equal_seeds_equal_sample_sequences() {
        let dist = StreamDistribution::bounded_feature(vec![1.0, 0.5, 0.25]).unwrap();
        let mut a = dist.sampler(123);
        let mut b = dist.sampler(123);
        for _ in 0..500 {
            let (x, y) = (a.next_sample().to_dense(), b.next_sample().to_dense());
            assert_eq!(x.as_slice(), y.as_slice());
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(StreamDistribution::basis_spike(1, 0.5).is_err());
        assert!(StreamDistribution::basis_spike(4, 1.0).is_err());
        assert!(StreamDistribution::basis_spike(4, 0.0).is_err());
        assert!(StreamDistribution::bounded_feature(vec![1.0]).is_err());
        assert!(StreamDistribution::bounded_feature(vec![-1.0, 1.0]).is_err());
        assert!(StreamDistribution::bounded_feature(vec![0.0, 0.0]).is_err());
    }
}
