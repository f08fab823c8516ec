//! Confidence boosting: run independent copies of the streaming estimator
//! and return the geometric median of the (sign-aligned) solutions,
//! projected back to the sphere.

use rayon::prelude::*;

use crate::error::{OjaError, Result};
use crate::linalg::{normalize, sin_sq, UnitVector, Vector};
use crate::model::StreamDistribution;
use crate::oja::{oja_run, StepSchedule};
use crate::rng::split_seed;

/// Flip each vector to have nonnegative inner product with the first one.
/// Eigenvector estimates are sign-ambiguous; without alignment, antipodal
/// successes would cancel in the median.
pub fn align_signs(ws: &[UnitVector]) -> Vec<UnitVector> {
    let mut out = Vec::with_capacity(ws.len());
    for (i, w) in ws.iter().enumerate() {
        if i > 0 && w.dot(&ws[0]) < 0.0 {
            out.push(w.negated());
        } else {
            out.push(w.clone());
        }
    }
    out
}

const WEISZFELD_SINGULARITY: f64 = 1e-12;

/// Geometric median by Weiszfeld iteration, initialized at the
/// coordinate-wise mean. If an iterate lands within 1e-12 (relative to the
/// point spread) of an input point, that point is returned, which is the
/// standard handling of the iteration's singularity.
pub fn geometric_median(points: &[Vector], tol: f64, max_iter: usize) -> Result<Vector> {
    if points.is_empty() {
        return Err(OjaError::InvalidParameter(
            "geometric median needs at least one point".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(OjaError::InvalidParameter(format!(
            "need tol > 0, got {tol}"
        )));
    }
    let d = points[0].dim();
    for p in points {
        if p.dim() != d {
            return Err(OjaError::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
    }
    let mut mean = Vector::zeros(d);
    for p in points {
        mean.axpy(1.0 / points.len() as f64, p);
    }
    // Scale of the cloud, for relative tolerances.
    let scale = points
        .iter()
        .map(|p| {
            let mut diff = p.clone();
            diff.axpy(-1.0, &mean);
            diff.norm()
        })
        .fold(0.0f64, f64::max)
        .max(1e-30);

    let mut x = mean;
    for _ in 0..max_iter {
        let mut weight_sum = 0.0;
        let mut next = Vector::zeros(d);
        let mut hit = None;
        for p in points {
            let mut diff = p.clone();
            diff.axpy(-1.0, &x);
            let dist = diff.norm();
            if dist <= WEISZFELD_SINGULARITY * scale {
                hit = Some(p.clone());
                break;
            }
            let w = 1.0 / dist;
            weight_sum += w;
            next.axpy(w, p);
        }
        if let Some(p) = hit {
            return Ok(p);
        }
        next.scale(1.0 / weight_sum);
        let mut step = next.clone();
        step.axpy(-1.0, &x);
        let moved = step.norm();
        x = next;
        if moved <= tol * scale {
            return Ok(x);
        }
    }
    Err(OjaError::MaxIterExceeded {
        iters: max_iter,
        best: x.as_slice().to_vec(),
    })
}

pub const MEDIAN_TOL: f64 = 1e-10;
pub const MEDIAN_MAX_ITER: usize = 1000;

/// Run `copies` independent streaming estimates with seeds derived from
/// `seed`, sign-align them, take the geometric median, and project back to
/// the sphere. Odd `copies` recommended.
pub fn boosted_estimate(
    dist: &StreamDistribution,
    schedule: &StepSchedule,
    n: u64,
    copies: usize,
    seed: u64,
) -> Result<(UnitVector, f64)> {
    if copies < 1 {
        return Err(OjaError::InvalidParameter("need copies >= 1".into()));
    }
    let runs: Vec<Result<UnitVector>> = (0..copies)
        .into_par_iter()
        .map(|c| Ok(oja_run(dist, schedule, n, split_seed(seed, c as u64), &[])?.w_final))
        .collect();
    let mut ws = Vec::with_capacity(copies);
    for r in runs {
        ws.push(r?);
    }
    let aligned = align_signs(&ws);
    let points: Vec<Vector> = aligned.iter().map(|w| w.as_vector().clone()).collect();
    let median = match geometric_median(&points, MEDIAN_TOL, MEDIAN_MAX_ITER) {
        Ok(m) => m,
        Err(OjaError::MaxIterExceeded { best, .. }) => Vector::from_vec(best),
        Err(e) => return Err(e),
    };
    let w = normalize(&median)?;
    let err = sin_sq(&w, &dist.ground_truth().v1);
    Ok((w, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::replay::ReplaySource;

    fn unit(xs: Vec<f64>) -> UnitVector {
        normalize(&Vector::from_vec(xs)).unwrap()
    }

    #[test]
    fn align_signs_examples() {
        let v = unit(vec![1.0, 2.0, 2.0]);
        let flipped = align_signs(&[v.clone(), v.negated()]);
        assert_eq!(flipped[0].as_slice(), v.as_slice());
        assert_eq!(flipped[1].as_slice(), v.as_slice());

        let single = align_signs(&[v.clone()]);
        assert_eq!(single[0].as_slice(), v.as_slice());

        let u = unit(vec![1.0, 0.1]);
        let w = unit(vec![1.0, -0.1]);
        let kept = align_signs(&[u.clone(), w.clone()]);
        assert_eq!(kept[0].as_slice(), u.as_slice());
        assert_eq!(kept[1].as_slice(), w.as_slice());
    }

    #[test]
    fn median_of_identical_points() {
        let p = Vector::from_vec(vec![1.0, 2.0]);
        let m = geometric_median(&[p.clone(), p.clone(), p.clone()], 1e-10, 100).unwrap();
        assert_eq!(m.as_slice(), p.as_slice());
    }

    #[test]
    fn median_of_two_points_is_their_mean() {
        let a = Vector::from_vec(vec![0.0, 0.0]);
        let b = Vector::from_vec(vec![2.0, 0.0]);
        let m = geometric_median(&[a, b], 1e-10, 100).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn median_of_right_triangle_matches_grid_search() {
        // Oracle first: a two-stage brute-force grid search over [0, 1]^2
        // localizes the minimizer of the summed distances to ~1e-4.
        let pts = vec![
            Vector::from_vec(vec![0.0, 0.0]),
            Vector::from_vec(vec![1.0, 0.0]),
            Vector::from_vec(vec![0.0, 1.0]),
        ];
        let objective = |x: f64, y: f64| -> f64 {
            pts.iter()
                .map(|p| {
                    let dx = x - p.as_slice()[0];
                    let dy = y - p.as_slice()[1];
                    (dx * dx + dy * dy).sqrt()
                })
                .sum()
        };
        let mut best = (0.0, 0.0, f64::INFINITY);
        for i in 0..=100 {
            for j in 0..=100 {
                let (x, y) = (i as f64 / 100.0, j as f64 / 100.0);
                let o = objective(x, y);
                if o < best.2 {
                    best = (x, y, o);
                }
            }
        }
        let (cx, cy, _) = best;
        let mut fine = (cx, cy, f64::INFINITY);
        for i in -200..=200 {
            for j in -200..=200 {
                let (x, y) = (cx + i as f64 * 1e-4, cy + j as f64 * 1e-4);
                let o = objective(x, y);
                if o < fine.2 {
                    fine = (x, y, o);
                }
            }
        }
        // The oracle localizes the known symmetric minimizer near
        // (0.2113, 0.2113).
        assert!((fine.0 - 0.2113).abs() < 1e-3);
        assert!((fine.1 - 0.2113).abs() < 1e-3);

        let m = geometric_median(&pts, 1e-10, 1000).unwrap();
        assert!((m.as_slice()[0] - fine.0).abs() <= 1e-3);
        assert!((m.as_slice()[1] - fine.1).abs() <= 1e-3);
    }

    #[test]
    fn median_never_worsens_the_mean_objective() {
        let mut rng = crate::rng::RngState::new(303);
        for _ in 0..20 {
            let pts: Vec<Vector> = (0..7)
                .map(|_| Vector::from_vec((0..3).map(|_| rng.next_f64() * 4.0 - 2.0).collect()))
                .collect();
            let mut mean = Vector::zeros(3);
            for p in &pts {
                mean.axpy(1.0 / 7.0, p);
            }
            let obj = |x: &Vector| -> f64 {
                pts.iter()
                    .map(|p| {
                        let mut diff = p.clone();
                        diff.axpy(-1.0, x);
                        diff.norm()
                    })
                    .sum()
            };
            let m = geometric_median(&pts, 1e-10, 1000).unwrap();
            assert!(obj(&m) <= obj(&mean) + 1e-9);
        }
    }

    fn constant_dist() -> StreamDistribution {
        let m = DenseMatrix::diag(&[2.0, 1.0, 0.5]);
        StreamDistribution::replay(ReplaySource::from_dense(3, &[m]).unwrap()).unwrap()
    }

    #[test]
    fn one_copy_is_a_single_run() {
        let dist = StreamDistribution::basis_spike(6, 0.5).unwrap();
        let sched = StepSchedule::thm13(dist.bounds(), dist.ground_truth()).unwrap();
        let (w, err) = boosted_estimate(&dist, &sched, 200, 1, 19).unwrap();
        let single = oja_run(&dist, &sched, 200, split_seed(19, 0), &[]).unwrap();
        assert_eq!(err, single.sin_sq_final);
        // Median of one point is that point; projection leaves it unit.
        assert!(sin_sq(&w, &single.w_final) <= 1e-24);
    }

    #[test]
    fn deterministic_copies_return_their_common_answer() {
        let dist = constant_dist();
        let sched = StepSchedule::constant(0.1).unwrap();
        let (w, err) = boosted_estimate(&dist, &sched, 300, 5, 11).unwrap();
        assert!(err <= 1e-10, "sin^2 = {err}");
        assert!((w.as_vector().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn boosted_output_is_sign_flip_invariant() {
        // Flipping any subset of copies changes nothing after alignment.
        let dist = StreamDistribution::basis_spike(8, 0.5).unwrap();
        let sched = StepSchedule::thm13(dist.bounds(), dist.ground_truth()).unwrap();
        let ws: Vec<UnitVector> = (0..5)
            .map(|c| {
                oja_run(&dist, &sched, 400, split_seed(23, c), &[])
                    .unwrap()
                    .w_final
            })
            .collect();
        let median_of = |ws: &[UnitVector]| -> f64 {
            let aligned = align_signs(ws);
            let pts: Vec<Vector> = aligned.iter().map(|w| w.as_vector().clone()).collect();
            let m = geometric_median(&pts, 1e-10, 1000).unwrap();
            sin_sq(
                &normalize(&m).unwrap(),
                &dist.ground_truth().v1,
            )
        };
        let base = median_of(&ws);
        for mask in 1..(1u32 << 5) {
            let flipped: Vec<UnitVector> = ws
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    if mask & (1 << i) != 0 {
                        w.negated()
                    } else {
                        w.clone()
                    }
                })
                .collect();
            let err = median_of(&flipped);
            assert!(
                (err - base).abs() <= 1e-12,
                "mask {mask}: {err} vs {base}"
            );
        }
    }
}
