//! Experiment harness: seeded trial ensembles, CSV emission, summary
//! statistics, the lemma verification driver, and the bound table.
//!
//! Determinism contract: identical config plus master seed produce
//! byte-identical CSV apart from the wall_time_ns column. Trials derive
//! their seeds from (master_seed, trial_index, n_index) only, results are
//! collected into an index-ordered buffer, and every reduction is a
//! sequential fold, so the output is independent of worker count and
//! scheduling.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{batch_topvec, block_power};
use crate::boost::boosted_estimate;
use crate::config::{AlgoSpec, ExperimentConfig, ScheduleSpec};
use crate::error::{OjaError, Result};
use crate::linalg::{rayleigh, DenseMatrix, UnitVector};
use crate::model::StreamDistribution;
use crate::oja::{oja_run, StepSchedule};
use crate::rng::mix64;
use crate::theory::{
    bernstein_wedin_bound, main1_bound, mc_lemma51, mc_lemma52, mc_lemma53, mc_lemma54,
    mc_one_step_pm, step_cap, thm41_bound, McVerdict,
};

const TRIAL_MIX: u64 = 0x9E37_79B9_7F4A_7C15;
const GRID_MIX: u64 = 0xBF58_476D_1CE4_E5B9;

/// Deterministic per-trial seed from the master seed and the trial's
/// coordinates in the experiment grid.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64, n_index: u64) -> u64 {
    mix64(master_seed ^ trial_index.wrapping_mul(TRIAL_MIX) ^ n_index.wrapping_mul(GRID_MIX))
}

pub const CSV_MAGIC: &str = "# oja-stream v1";
pub const CSV_HEADER: &str = "algorithm,d,n,trial_index,seed,sin_sq,rayleigh,wall_time_ns";

/// One completed trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: String,
    pub d: usize,
    pub n: u64,
    pub trial_index: usize,
    pub seed: u64,
    pub sin_sq: f64,
    pub rayleigh: f64,
    pub wall_time_ns: u128,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.16e},{:.16e},{}",
            self.algorithm,
            self.d,
            self.n,
            self.trial_index,
            self.seed,
            self.sin_sq,
            self.rayleigh,
            self.wall_time_ns
        )
    }

    pub fn from_csv(line: &str) -> Result<ResultRow> {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 8 {
            return Err(OjaError::InvalidParameter(format!(
                "CSV row has {} fields, expected 8",
                parts.len()
            )));
        }
        let parse_err = |field: &str| OjaError::InvalidParameter(format!("bad field '{field}'"));
        Ok(ResultRow {
            algorithm: parts[0].to_string(),
            d: parts[1].parse().map_err(|_| parse_err(parts[1]))?,
            n: parts[2].parse().map_err(|_| parse_err(parts[2]))?,
            trial_index: parts[3].parse().map_err(|_| parse_err(parts[3]))?,
            seed: parts[4].parse().map_err(|_| parse_err(parts[4]))?,
            sin_sq: parts[5].parse().map_err(|_| parse_err(parts[5]))?,
            rayleigh: parts[6].parse().map_err(|_| parse_err(parts[6]))?,
            wall_time_ns: parts[7].parse().map_err(|_| parse_err(parts[7]))?,
        })
    }
}

/// A checkpointed trajectory point (only emitted for the oja algorithm).
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRow {
    pub algorithm: String,
    pub d: usize,
    pub n: u64,
    pub trial_index: usize,
    pub i: u64,
    pub sin_sq: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub checkpoints: Vec<CheckpointRow>,
    pub summary: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub algorithm: String,
    pub d: usize,
    pub n: u64,
    pub trials: usize,
    pub median_sin_sq: f64,
    pub p25_sin_sq: f64,
    pub p75_sin_sq: f64,
    pub frac_le_thm11: Option<f64>,
    pub frac_le_thm41: Option<f64>,
    pub frac_le_main1: Option<f64>,
}

fn algo_name(algo: &AlgoSpec) -> &'static str {
    match algo {
        AlgoSpec::Oja => "oja",
        AlgoSpec::Batch => "batch",
        AlgoSpec::BlockPower => "block_power",
        AlgoSpec::Boosted => "boosted",
    }
}

/// Linear-interpolation quantile of a sorted slice (the common "type 7"
/// convention).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[n - 1]
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

fn install_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(f)
}

/// Execute the configured estimator over n_grid x trials.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let dist = cfg.distribution()?;
    let schedule = match cfg.algo {
        AlgoSpec::Oja | AlgoSpec::Boosted => Some(cfg.step_schedule(&dist)?),
        _ => None,
    };
    let mut warnings = Vec::new();
    if let (ScheduleSpec::Thm13, Some(StepSchedule::Decaying { beta, .. })) =
        (&cfg.schedule, &schedule)
    {
        // The alpha = 6 guarantee assumes n > beta^1.2 d^0.1; report the
        // regime as a warning, never an error.
        let threshold = beta.powf(1.2) * (dist.dim() as f64).powf(0.1);
        for &n in &cfg.n_grid {
            if (n as f64) <= threshold {
                warnings.push(format!(
                    "n = {n} is below the alpha=6 schedule precondition n > beta^1.2 d^0.1 = {threshold:.1}"
                ));
            }
        }
    }

    struct TrialOutcome {
        row: ResultRow,
        checkpoints: Vec<CheckpointRow>,
    }

    let tasks: Vec<(usize, u64, usize)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(n_index, &n)| (0..cfg.trials).map(move |t| (n_index, n, t)))
        .collect();

    let dist_ref = &dist;
    let sched_ref = schedule.as_ref();
    let run_one = |&(n_index, n, trial): &(usize, u64, usize)| -> Result<TrialOutcome> {
        let seed = derive_trial_seed(cfg.master_seed, trial as u64, n_index as u64);
        let start = Instant::now();
        let name = algo_name(&cfg.algo).to_string();
        let (sin_sq, ray, cps) = match cfg.algo {
            AlgoSpec::Oja => {
                let grid: Vec<u64> = cfg.checkpoints.iter().copied().filter(|&i| i <= n).collect();
                let res = oja_run(dist_ref, sched_ref.expect("schedule"), n, seed, &grid)?;
                let cps = if cfg.checkpoints.is_empty() {
                    Vec::new()
                } else {
                    res.checkpoints
                        .iter()
                        .map(|&(i, s)| CheckpointRow {
                            algorithm: name.clone(),
                            d: dist_ref.dim(),
                            n,
                            trial_index: trial,
                            i,
                            sin_sq: s,
                        })
                        .collect()
                };
                (res.sin_sq_final, res.rayleigh_final, cps)
            }
            AlgoSpec::Batch => {
                let (w, err) = batch_topvec(dist_ref, n, seed)?;
                (err, ray_of(dist_ref, &w), Vec::new())
            }
            AlgoSpec::BlockPower => {
                let (w, err) = block_power(dist_ref, n, cfg.effective_num_blocks(n), seed)?;
                (err, ray_of(dist_ref, &w), Vec::new())
            }
            AlgoSpec::Boosted => {
                let (w, err) =
                    boosted_estimate(dist_ref, sched_ref.expect("schedule"), n, cfg.copies, seed)?;
                (err, ray_of(dist_ref, &w), Vec::new())
            }
        };
        Ok(TrialOutcome {
            row: ResultRow {
                algorithm: name,
                d: dist_ref.dim(),
                n,
                trial_index: trial,
                seed,
                sin_sq,
                rayleigh: ray,
                wall_time_ns: start.elapsed().as_nanos(),
            },
            checkpoints: cps,
        })
    };

    let outcomes: Vec<Result<TrialOutcome>> =
        install_pool(cfg.workers, || tasks.par_iter().map(run_one).collect());

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut checkpoints = Vec::new();
    for o in outcomes {
        let o = o?;
        rows.push(o.row);
        checkpoints.extend(o.checkpoints);
    }

    let summary = summarize(cfg, &dist, schedule.as_ref(), &rows)?;
    Ok(RunOutput {
        rows,
        checkpoints,
        summary,
        warnings,
    })
}

fn ray_of(dist: &StreamDistribution, w: &UnitVector) -> f64 {
    rayleigh(w, &dist.ground_truth().sigma)
}

fn summarize(
    cfg: &ExperimentConfig,
    dist: &StreamDistribution,
    schedule: Option<&StepSchedule>,
    rows: &[ResultRow],
) -> Result<Vec<SummaryRow>> {
    let truth = dist.ground_truth();
    let bounds = dist.bounds();
    let mut out = Vec::new();
    for &n in &cfg.n_grid {
        let mut errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.sin_sq)
            .collect();
        if errs.is_empty() {
            continue;
        }
        errs.sort_by(f64::total_cmp);
        let frac_below = |bound: f64| -> f64 {
            errs.iter().filter(|&&e| e <= bound).count() as f64 / errs.len() as f64
        };

        let thm11 = if truth.gap > 0.0 {
            bernstein_wedin_bound(
                bounds.v_bound,
                bounds.m_bound,
                truth.gap,
                dist.dim(),
                cfg.delta,
                n,
            )
            .ok()
            .map(|r| frac_below(r.value))
        } else {
            None
        };
        let (thm41, main1) = match schedule {
            Some(StepSchedule::Decaying { alpha, beta, .. }) => {
                let t41 = thm41_bound(
                    bounds.v_bound,
                    truth.gap,
                    dist.dim(),
                    *alpha,
                    *beta,
                    n,
                    cfg.delta,
                    cfg.c_const,
                )
                .ok()
                .map(|r| frac_below(r.value));
                let etas = schedule.expect("decaying").etas(n);
                let m1 = main1_bound(
                    &etas,
                    truth.lambda1,
                    truth.lambda2,
                    bounds.v_bound,
                    bounds.v_bar,
                    dist.dim(),
                    cfg.delta,
                    cfg.c_const,
                )
                .ok()
                .map(|r| frac_below(r.value));
                (t41, m1)
            }
            _ => (None, None),
        };
        out.push(SummaryRow {
            algorithm: algo_name(&cfg.algo).to_string(),
            d: dist.dim(),
            n,
            trials: errs.len(),
            median_sin_sq: quantile(&errs, 0.5),
            p25_sin_sq: quantile(&errs, 0.25),
            p75_sin_sq: quantile(&errs, 0.75),
            frac_le_thm11: thm11,
            frac_le_thm41: thm41,
            frac_le_main1: main1,
        });
    }
    Ok(out)
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_MAGIC}");
    let _ = writeln!(s, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(s, "{}", r.to_csv());
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line == CSV_HEADER || line.trim().is_empty() {
            continue;
        }
        rows.push(ResultRow::from_csv(line)?);
    }
    Ok(rows)
}

fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_MAGIC} summary");
    let _ = writeln!(
        s,
        "algorithm,d,n,trials,median_sin_sq,p25_sin_sq,p75_sin_sq,frac_le_thm11,frac_le_thm41,frac_le_main1"
    );
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
    for r in summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{},{},{}",
            r.algorithm,
            r.d,
            r.n,
            r.trials,
            r.median_sin_sq,
            r.p25_sin_sq,
            r.p75_sin_sq,
            opt(r.frac_le_thm11),
            opt(r.frac_le_thm41),
            opt(r.frac_le_main1),
        );
    }
    s
}

fn checkpoint_csv(rows: &[CheckpointRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_MAGIC} checkpoints");
    let _ = writeln!(s, "algorithm,d,n,trial_index,i,sin_sq");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.16e}",
            r.algorithm, r.d, r.n, r.trial_index, r.i, r.sin_sq
        );
    }
    s
}

/// Path of the summary file next to an output CSV: results.csv ->
/// results.summary.csv.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn checkpoints_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.checkpoints.csv"))
}

/// Run the experiment and write the CSV artifacts. Returns the output for
/// further inspection.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let output = run_experiment(cfg)?;
    if let Some(out) = &cfg.out {
        std::fs::write(out, rows_to_csv(&output.rows))?;
        std::fs::write(summary_path(out), summary_csv(&output.summary))?;
        if !output.checkpoints.is_empty() {
            std::fs::write(checkpoints_path(out), checkpoint_csv(&output.checkpoints))?;
        }
    } else {
        print!("{}", rows_to_csv(&output.rows));
    }
    Ok(output)
}

/// One row of the verification table.
#[derive(Debug)]
pub struct VerifyRow {
    pub name: String,
    pub seed: u64,
    pub outcome: VerifyOutcome,
}

#[derive(Debug)]
pub enum VerifyOutcome {
    Verdict {
        verdict: McVerdict,
        min_c_cal: Option<f64>,
    },
    HypothesisViolated(String),
    Failed(String),
}

impl VerifyRow {
    pub fn passed(&self) -> bool {
        matches!(
            &self.outcome,
            VerifyOutcome::Verdict { verdict, .. } if verdict.pass
        )
    }
}

/// Drive the Monte Carlo verifiers: the four moment checks on the
/// configured stream, the one-step power method tail check, and the
/// empirical model check.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Vec<VerifyRow>> {
    let dist = cfg.distribution()?;
    let truth = dist.ground_truth();
    let bounds = dist.bounds();
    let seed = cfg.master_seed;

    // alpha = 6 schedule truncated to the master-bound step cap, then
    // scaled by eta_scale (a deliberately inflated scale exercises the
    // hypothesis guards).
    let sched = StepSchedule::thm13(bounds, truth)?;
    let cap = step_cap(bounds, truth);
    let etas: Vec<f64> = sched
        .etas(cfg.t_steps as u64)
        .into_iter()
        .map(|e| e.min(cap) * cfg.eta_scale)
        .collect();

    let mut rows = Vec::new();
    let lemmas: [(&str, fn(&StreamDistribution, &[f64], usize, u64) -> Result<McVerdict>); 4] = [
        ("lemma_bb_spectral_growth", mc_lemma51),
        ("lemma_orthogonal_trace", mc_lemma52),
        ("lemma_aligned_lower", mc_lemma53),
        ("lemma_aligned_second_moment", mc_lemma54),
    ];
    for (name, f) in lemmas {
        let outcome = match f(&dist, &etas, cfg.verify_trials, seed) {
            Ok(verdict) => VerifyOutcome::Verdict {
                verdict,
                min_c_cal: None,
            },
            Err(e @ OjaError::HypothesisViolated { .. }) => {
                VerifyOutcome::HypothesisViolated(e.to_string())
            }
            Err(e) => VerifyOutcome::Failed(e.to_string()),
        };
        rows.push(VerifyRow {
            name: name.into(),
            seed,
            outcome,
        });
    }

    // One-step power method on the spiked diagonal reference matrix.
    let mut diag = vec![1.0; dist.dim()];
    diag[0] = cfg.b_top;
    let b = DenseMatrix::diag(&diag);
    let v1 = UnitVector::basis(dist.dim(), 0);
    let outcome = match mc_one_step_pm(&b, &v1, cfg.delta, cfg.pm_trials, seed, cfg.c_cal) {
        Ok(rep) => VerifyOutcome::Verdict {
            verdict: rep.verdict,
            min_c_cal: Some(rep.min_c_cal),
        },
        Err(e) => VerifyOutcome::Failed(e.to_string()),
    };
    rows.push(VerifyRow {
        name: "one_step_power_method".into(),
        seed,
        outcome,
    });

    // Empirical model check: max deviation and second moments vs M, V.
    let outcome = match dist.empirical_check(cfg.check_trials.max(100), seed) {
        Ok(rep) => {
            let pass = !rep.violated();
            VerifyOutcome::Verdict {
                verdict: McVerdict {
                    estimate: rep.max_dev,
                    bound: rep.m_bound,
                    trials: rep.trials,
                    std_error: 0.0,
                    pass,
                },
                min_c_cal: None,
            }
        }
        Err(e) => VerifyOutcome::Failed(e.to_string()),
    };
    rows.push(VerifyRow {
        name: "model_conditions".into(),
        seed,
        outcome,
    });
    Ok(rows)
}

pub fn format_verify_table(rows: &[VerifyRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<28} {:>14} {:>14} {:>12} {:>8}  seed",
        "check", "estimate", "bound", "std_error", "pass"
    );
    for r in rows {
        match &r.outcome {
            VerifyOutcome::Verdict { verdict, min_c_cal } => {
                let extra = min_c_cal
                    .map(|c| format!("  min_c_cal={c:.3}"))
                    .unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{:<28} {:>14.6e} {:>14.6e} {:>12.3e} {:>8} {}{}",
                    r.name,
                    verdict.estimate,
                    verdict.bound,
                    verdict.std_error,
                    if verdict.pass { "pass" } else { "FAIL" },
                    r.seed,
                    extra
                );
            }
            VerifyOutcome::HypothesisViolated(msg) => {
                let _ = writeln!(s, "{:<28} hypothesis violated: {}", r.name, msg);
            }
            VerifyOutcome::Failed(msg) => {
                let _ = writeln!(s, "{:<28} error: {}", r.name, msg);
            }
        }
    }
    s
}

/// One row of the bound table.
#[derive(Debug)]
pub struct BoundRow {
    pub name: &'static str,
    pub n: u64,
    pub value: Option<f64>,
    pub status: String,
    pub terms: Vec<(String, f64)>,
}

/// Evaluate every bound over the config's n_grid.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    let dist = cfg.distribution()?;
    let truth = dist.ground_truth();
    let bounds = dist.bounds();
    let schedule = cfg.step_schedule(&dist)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        match bernstein_wedin_bound(
            bounds.v_bound,
            bounds.m_bound,
            truth.gap,
            dist.dim(),
            cfg.delta,
            n,
        ) {
            Ok(rep) => rows.push(BoundRow {
                name: "batch_bernstein_wedin",
                n,
                value: Some(rep.value),
                status: "ok".into(),
                terms: rep.terms.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            }),
            Err(e) => rows.push(BoundRow {
                name: "batch_bernstein_wedin",
                n,
                value: None,
                status: e.to_string(),
                terms: Vec::new(),
            }),
        }

        if let StepSchedule::Decaying { alpha, beta, .. } = schedule {
            match thm41_bound(
                bounds.v_bound,
                truth.gap,
                dist.dim(),
                alpha,
                beta,
                n,
                cfg.delta,
                cfg.c_const,
            ) {
                Ok(rep) => rows.push(BoundRow {
                    name: "decaying_schedule",
                    n,
                    value: Some(rep.value),
                    status: "ok".into(),
                    terms: rep.terms.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                }),
                Err(e @ OjaError::InsufficientSamples { .. }) => rows.push(BoundRow {
                    name: "decaying_schedule",
                    n,
                    value: None,
                    status: format!("flagged: {e}"),
                    terms: Vec::new(),
                }),
                Err(e) => return Err(e),
            }
        }

        let etas = schedule.etas(n);
        match main1_bound(
            &etas,
            truth.lambda1,
            truth.lambda2,
            bounds.v_bound,
            bounds.v_bar,
            dist.dim(),
            cfg.delta,
            cfg.c_const,
        ) {
            Ok(rep) => rows.push(BoundRow {
                name: "master_bound",
                n,
                value: Some(rep.value),
                status: "ok".into(),
                terms: rep.terms.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            }),
            Err(e @ OjaError::NonpositiveQ { .. }) => rows.push(BoundRow {
                name: "master_bound",
                n,
                value: None,
                status: format!("flagged: {e}"),
                terms: Vec::new(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

pub fn format_bound_table(rows: &[BoundRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<24} {:>10} {:>14}  terms / status", "bound", "n", "value");
    for r in rows {
        match r.value {
            Some(v) => {
                let terms: Vec<String> =
                    r.terms.iter().map(|(k, x)| format!("{k}={x:.4e}")).collect();
                let _ = writeln!(
                    s,
                    "{:<24} {:>10} {:>14.6e}  {}",
                    r.name,
                    r.n,
                    v,
                    terms.join(" ")
                );
            }
            None => {
                let _ = writeln!(s, "{:<24} {:>10} {:>14}  {}", r.name, r.n, "-", r.status);
            }
        }
    }
    s
}

/// Model-condition check driver for the check-model subcommand.
pub fn run_check_model(cfg: &ExperimentConfig) -> Result<crate::model::CheckReport> {
    let dist = cfg.distribution()?;
    dist.empirical_check(cfg.check_trials.max(100), cfg.master_seed)
}

pub fn format_check_report(rep: &crate::model::CheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "trials                {}", rep.trials);
    let _ = writeln!(s, "max ||A - Sigma||     {:.6e} (M = {:.6e})", rep.max_dev, rep.m_bound);
    let _ = writeln!(
        s,
        "second moment (left)  {:.6e} (V = {:.6e})",
        rep.second_moment_left, rep.v_bound
    );
    let _ = writeln!(s, "second moment (right) {:.6e}", rep.second_moment_right);
    let _ = writeln!(s, "||mean(A) - Sigma||   {:.6e}", rep.mean_dev);
    let _ = writeln!(
        s,
        "verdict               {}",
        if rep.violated() { "VIOLATION" } else { "ok" }
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn derived_seeds_differ_across_indices() {
        let mut rng = crate::rng::RngState::new(1);
        for _ in 0..10_000 {
            let s = rng.next_u64();
            assert_ne!(derive_trial_seed(s, 0, 0), derive_trial_seed(s, 1, 0));
            assert_ne!(derive_trial_seed(s, 0, 0), derive_trial_seed(s, 0, 1));
        }
    }

    #[test]
    fn changing_master_seed_changes_every_trial_seed() {
        for trial in 0..50 {
            for n_index in 0..4 {
                assert_ne!(
                    derive_trial_seed(11, trial, n_index),
                    derive_trial_seed(12, trial, n_index)
                );
            }
        }
    }

    #[test]
    fn derive_trial_seed_golden_value() {
        // Golden value frozen from the first run of this implementation;
        // any change to the mixing constants shows up here.
        assert_eq!(derive_trial_seed(0, 0, 0), 0);
        assert_eq!(derive_trial_seed(0x5EED_0001, 3, 2), 6252218406768631525);
    }

    #[test]
    fn csv_rows_round_trip() {
        let row = ResultRow {
            algorithm: "oja".into(),
            d: 20,
            n: 1024,
            trial_index: 7,
            seed: 0xdeadbeef,
            sin_sq: 0.123456789012345678,
            rayleigh: 0.05,
            wall_time_ns: 123456789,
        };
        let line = row.to_csv();
        let back = ResultRow::from_csv(&line).unwrap();
        assert_eq!(row, back);
        // 17 significant digits preserve f64 exactly.
        assert_eq!(row.sin_sq.to_bits(), back.sin_sq.to_bits());
    }

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig::from_str_body(
            "kind = basis_spike\nd = 6\nsigma = 0.5\nalgo = oja\nschedule = thm13\n\
             n_grid = (64, 128)\ntrials = 4\nmaster_seed = 5\n",
        )
        .unwrap()
    }

    #[test]
    fn run_is_deterministic_and_worker_independent() {
        let mut cfg = small_cfg();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let strip = |rows: &[ResultRow]| -> Vec<String> {
            rows.iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.wall_time_ns = 0;
                    r.to_csv()
                })
                .collect()
        };
        assert_eq!(strip(&a.rows), strip(&b.rows));

        cfg.workers = 2;
        let c = run_experiment(&cfg).unwrap();
        assert_eq!(strip(&a.rows), strip(&c.rows));
    }

    #[test]
    fn single_trial_matches_direct_library_call() {
        let cfg = ExperimentConfig::from_str_body(
            "kind = basis_spike\nd = 6\nsigma = 0.5\nalgo = oja\nschedule = thm13\n\
             n_grid = (128,)\ntrials = 1\nmaster_seed = 9\n",
        )
        .unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        let dist = cfg.distribution().unwrap();
        let sched = cfg.step_schedule(&dist).unwrap();
        let seed = derive_trial_seed(9, 0, 0);
        let direct = crate::oja::oja_run(&dist, &sched, 128, seed, &[]).unwrap();
        assert_eq!(out.rows[0].sin_sq, direct.sin_sq_final);
        assert_eq!(out.rows[0].rayleigh, direct.rayleigh_final);
        assert_eq!(out.rows[0].seed, seed);
    }

    #[test]
    fn summary_has_one_row_per_n() {
        let cfg = small_cfg();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.summary.len(), 2);
        for s in &out.summary {
            assert!(s.p25_sin_sq <= s.median_sin_sq);
            assert!(s.median_sin_sq <= s.p75_sin_sq);
        }
    }

    #[test]
    fn verify_suite_passes_on_default_stream() {
        let cfg = ExperimentConfig::from_str_body(
            "kind = basis_spike\nd = 8\nsigma = 0.5\nmaster_seed = 21\nt = 200\n\
             verify_trials = 400\npm_trials = 2000\ncheck_trials = 1000\n",
        )
        .unwrap();
        let rows = run_verify(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.passed(), "{} failed: {:?}", r.name, r.outcome);
        }
    }

    #[test]
    fn verify_surfaces_hypothesis_violations_per_row() {
        let cfg = ExperimentConfig::from_str_body(
            "kind = basis_spike\nd = 8\nsigma = 0.5\nmaster_seed = 21\nt = 50\n\
             verify_trials = 200\npm_trials = 2000\ncheck_trials = 500\neta_scale = 1e6\n",
        )
        .unwrap();
        let rows = run_verify(&cfg).unwrap();
        let violated = rows
            .iter()
            .filter(|r| matches!(r.outcome, VerifyOutcome::HypothesisViolated(_)))
            .count();
        assert!(violated >= 2, "expected violated lemma rows");
        assert!(rows.iter().any(|r| !r.passed()));
    }

    #[test]
    fn bounds_table_is_monotone_in_n() {
        let cfg = ExperimentConfig::from_str_body(
            "kind = basis_spike\nd = 10\nsigma = 0.5\nschedule = thm12\n\
             n_grid = (1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072)\n",
        )
        .unwrap();
        let rows = run_bounds(&cfg).unwrap();
        let series: Vec<f64> = rows
            .iter()
            .filter(|r| r.name == "batch_bernstein_wedin")
            .map(|r| r.value.unwrap())
            .collect();
        assert!(series.windows(2).all(|w| w[1] < w[0]));
        // The decaying-schedule bound is flagged, not errored, when n <= beta.
        let flagged = rows
            .iter()
            .filter(|r| r.name == "decaying_schedule" && r.value.is_none())
            .count();
        let ok: Vec<f64> = rows
            .iter()
            .filter(|r| r.name == "decaying_schedule")
            .filter_map(|r| r.value)
            .collect();
        assert!(flagged >= 1, "small n should be flagged as below beta");
        assert!(ok.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
