//! Seeded randomized campaigns over one scenario.
//!
//! Trial `t` draws everything from stream `t` of the campaign seed, so the
//! records (and their CSV rendering) depend only on `(config, seed)`, never on
//! thread count or scheduling.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    evaluate_mixed, evaluate_mixed_detector, evaluate_pure, DualityReport, Scenario, Tolerances,
};
use crate::error::{Error, Result};
use crate::random::{
    sample_detectors, sample_interaction, sample_mixed, sample_pure, Seed, GENERATOR,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub scenario: Scenario,
    pub trials: usize,
    pub seed: Seed,
    /// Fixed path count; drawn per trial when `None`.
    pub n: Option<usize>,
    /// Fixed detector dimension; drawn from `n..=2n` when `None`.
    pub detector_dim: Option<usize>,
    /// Fixed quanton rank (mixed scenarios); drawn from `1..=n` when `None`.
    pub rank: Option<usize>,
    pub tolerances: Tolerances,
}

impl CampaignConfig {
    pub fn new(scenario: Scenario, trials: usize, seed: Seed) -> Self {
        Self {
            scenario,
            trials,
            seed,
            n: None,
            detector_dim: None,
            rank: None,
            tolerances: Tolerances::default(),
        }
    }

    fn max_paths(&self) -> usize {
        match self.scenario {
            Scenario::MixedMixed => 6,
            _ => 8,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument(
                "a campaign needs at least one trial".into(),
            ));
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
            }
            if let Some(rank) = self.rank {
                if rank == 0 || rank > n {
                    return Err(Error::InvalidArgument(format!(
                        "rank must lie in 1..={n}, got {rank}"
                    )));
                }
            }
        }
        if self.detector_dim == Some(0) {
            return Err(Error::InvalidArgument(
                "detector dimension must be positive".into(),
            ));
        }
        if self.rank == Some(0) {
            return Err(Error::InvalidArgument("rank must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the campaign CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub trial: u64,
    pub seed: Seed,
    pub scenario: Scenario,
    pub n: usize,
    pub detector_dim: usize,
    pub rank: usize,
    pub detector_rank: usize,
    pub report: DualityReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: u64,
    pub seed: Seed,
}

/// Aggregate statistics; independent of evaluation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub scenario: Scenario,
    pub trials: usize,
    pub seed: Seed,
    pub generator: String,
    pub tolerances: Tolerances,
    pub violations: usize,
    pub violating: Vec<Violation>,
    pub max_abs_duality_sum: f64,
    pub mean_abs_duality_sum: f64,
    /// Largest `C + D_Q - 1`; must stay below the relation tolerance.
    pub max_duality_sum: f64,
    /// Smallest `1 - C - D_Q` observed.
    pub min_gap: f64,
    pub max_slack_identity: f64,
    pub mean_slack_identity: f64,
    pub min_slack: f64,
    pub min_psd_margin: Option<f64>,
    pub min_coherence_bound_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub records: Vec<InstanceRecord>,
    pub summary: CampaignSummary,
}

fn pick<R: Rng>(fixed: Option<usize>, lo: usize, hi: usize, rng: &mut R) -> usize {
    fixed.unwrap_or_else(|| rng.random_range(lo..=hi))
}

fn run_instance(cfg: &CampaignConfig, trial: u64) -> Result<InstanceRecord> {
    let mut rng = cfg.seed.stream(trial);
    let n = pick(cfg.n, 2, cfg.max_paths(), &mut rng);
    let dim = pick(cfg.detector_dim, n, 2 * n, &mut rng);
    let tol = &cfg.tolerances;
    let (rank, detector_rank, report) = match cfg.scenario {
        Scenario::PurePure => {
            let q = sample_pure(n, &mut rng)?;
            let d = sample_detectors(n, dim, &mut rng)?;
            (1, 1, evaluate_pure(&q, &d, tol)?)
        }
        Scenario::MixedPure => {
            let rank = pick(cfg.rank, 1, n, &mut rng).min(n);
            let q = sample_mixed(n, rank, &mut rng)?;
            let d = sample_detectors(n, dim, &mut rng)?;
            (rank, 1, evaluate_mixed(&q, &d, tol)?)
        }
        Scenario::MixedMixed => {
            let rank = pick(cfg.rank, 1, n, &mut rng).min(n);
            let detector_rank = rng.random_range(1..=dim);
            let q = sample_mixed(n, rank, &mut rng)?;
            let m = sample_interaction(n, dim, detector_rank, &mut rng)?;
            (rank, detector_rank, evaluate_mixed_detector(&q, &m, tol)?)
        }
    };
    Ok(InstanceRecord {
        trial,
        seed: cfg.seed,
        scenario: cfg.scenario,
        n,
        detector_dim: dim,
        rank,
        detector_rank,
        report,
    })
}

fn summarize(cfg: &CampaignConfig, records: &[InstanceRecord]) -> CampaignSummary {
    let count = records.len() as f64;
    let reports = || records.iter().map(|r| &r.report);
    let abs_sums: Vec<f64> = reports()
        .map(|r| r.relation_residuals.duality_sum.abs())
        .collect();
    let identities: Vec<f64> = reports()
        .map(|r| r.relation_residuals.slack_identity.unwrap_or(0.0))
        .collect();
    let min_opt = |f: fn(&DualityReport) -> Option<f64>| reports().filter_map(f).reduce(f64::min);
    let violating: Vec<Violation> = records
        .iter()
        .filter(|r| !r.report.passed())
        .map(|r| Violation {
            trial: r.trial,
            seed: r.seed,
        })
        .collect();
    CampaignSummary {
        scenario: cfg.scenario,
        trials: records.len(),
        seed: cfg.seed,
        generator: GENERATOR.to_owned(),
        tolerances: cfg.tolerances,
        violations: violating.len(),
        violating,
        max_abs_duality_sum: abs_sums.iter().copied().fold(0.0, f64::max),
        mean_abs_duality_sum: abs_sums.iter().sum::<f64>() / count,
        max_duality_sum: reports()
            .map(|r| r.relation_residuals.duality_sum)
            .fold(f64::NEG_INFINITY, f64::max),
        min_gap: reports()
            .map(DualityReport::gap)
            .fold(f64::INFINITY, f64::min),
        max_slack_identity: identities.iter().copied().fold(0.0, f64::max),
        mean_slack_identity: identities.iter().sum::<f64>() / count,
        min_slack: reports().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        min_psd_margin: min_opt(|r| r.relation_residuals.psd_margin_min),
        min_coherence_bound_margin: min_opt(|r| r.relation_residuals.coherence_bound_margin),
    }
}

/// Runs `cfg.trials` independent seeded instances on the current rayon pool.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Campaign> {
    cfg.validate()?;
    let records = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_instance(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &records);
    Ok(Campaign { records, summary })
}

pub const CSV_HEADER: &str = "trial,seed,scenario,n,detector_dim,rank,detector_rank,coherence,distinguishability,slack,duality_sum,slack_identity,psd_margin_min,coherence_bound_margin,passed";

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// One row per instance, floats with 17 significant digits, `.` as decimal separator.
pub fn write_records_csv<W: Write>(records: &[InstanceRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let rep = &r.report;
        let res = &rep.relation_residuals;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{}",
            r.trial,
            r.seed.0,
            r.scenario,
            r.n,
            r.detector_dim,
            r.rank,
            r.detector_rank,
            rep.coherence,
            rep.distinguishability,
            rep.slack,
            res.duality_sum,
            opt(res.slack_identity),
            opt(res.psd_margin_min),
            opt(res.coherence_bound_margin),
            rep.passed(),
        )?;
    }
    Ok(())
}
