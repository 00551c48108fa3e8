//! Evaluation of the coherence / distinguishability duality relations.
//!
//! Three scenarios are covered:
//!
//! | scenario      | quanton | detector | relation checked                 |
//! |---------------|---------|----------|----------------------------------|
//! | `pure_pure`   | pure    | pure     | `C + D_Q = 1`                    |
//! | `mixed_pure`  | mixed   | pure     | `C + D_Q + slack = 1`, `C + D_Q <= 1` |
//! | `mixed_mixed` | mixed   | mixed    | `C' <= bound`, `C' + D_Q' <= 1`  |
//!
//! Coherence is always measured on the reduced quanton state produced by the
//! state pipeline (partial trace or the trace formula), while
//! distinguishability and slack come from closed forms over the overlaps,
//! so each relation compares two independent computations.

mod campaign;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{scan_visibility, DEFAULT_GRID_POINTS};
use crate::measures::{
    coherence_bound_mixed_detector, coherence_normalized, distinguishability_mixed,
    distinguishability_mixed_detector, distinguishability_pure, psd_margin_min, slack,
    slack_mixed_detector,
};
use crate::states::{
    branch_overlaps, joint_mixed, reduce_quanton, reduce_quanton_mixed_detector, DetectorSet,
    MixedDetectorInteraction, MixedQuanton, PureQuanton,
};

pub use campaign::{
    run_campaign, write_records_csv, Campaign, CampaignConfig, CampaignSummary, InstanceRecord,
    Violation,
};

/// Relation names used as keys of [`DualityReport::verdict`].
pub mod relation {
    pub const DUALITY_EQUALITY: &str = "duality_equality";
    pub const DUALITY_INEQUALITY: &str = "duality_inequality";
    pub const SLACK_IDENTITY: &str = "slack_identity";
    pub const SLACK_NONNEGATIVE: &str = "slack_nonnegative";
    pub const PSD_MARGIN: &str = "psd_margin";
    pub const COHERENCE_BOUND: &str = "coherence_bound";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    PurePure,
    MixedPure,
    MixedMixed,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::PurePure,
        Scenario::MixedPure,
        Scenario::MixedMixed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::PurePure => "pure_pure",
            Scenario::MixedPure => "mixed_pure",
            Scenario::MixedMixed => "mixed_mixed",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown scenario '{s}' (expected pure_pure, mixed_pure or mixed_mixed)"
                ))
            })
    }
}

/// Tolerances applied to the verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Equalities and `<= 1` inequalities between C, D_Q and slack.
    pub relation: f64,
    /// Sign conditions: slack, principal-submatrix margin and coherence-bound margin.
    pub margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            relation: 1e-9,
            margin: 1e-10,
        }
    }
}

/// Residuals of every relation that applies to the scenario.
///
/// `duality_sum` is the signed `C + D_Q - 1`; the others are `None` where
/// they do not apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub duality_sum: f64,
    /// `|C + D_Q + slack - 1|` (with the coherence bound in place of `C'` for mixed detectors).
    pub slack_identity: Option<f64>,
    /// `min_{i≠j} √(ρ_ii ρ_jj) - |ρ_ij|` of the initial quanton state.
    pub psd_margin_min: Option<f64>,
    /// `bound - C'`
    pub coherence_bound_margin: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl Verdict {
    fn at_most(residual: f64, tolerance: f64) -> Self {
        Self {
            passed: residual <= tolerance,
            residual,
            tolerance,
        }
    }

    fn at_least(value: f64, tolerance: f64) -> Self {
        Self {
            passed: value >= -tolerance,
            residual: value,
            tolerance,
        }
    }
}

/// Everything computed for one configuration. Serializes to the stable JSON report schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub scenario: Scenario,
    pub n: usize,
    pub coherence: f64,
    pub distinguishability: f64,
    pub slack: f64,
    pub visibility: Option<f64>,
    pub coherence_bound: Option<f64>,
    pub relation_residuals: Residuals,
    pub verdict: BTreeMap<String, Verdict>,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.verdict.values().all(|v| v.passed)
    }

    /// `1 - C - D_Q`
    pub fn gap(&self) -> f64 {
        -self.relation_residuals.duality_sum
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        self.visibility = Some(visibility);
        self
    }
}

/// Pure quanton, pure detectors: `C + D_Q = 1`.
pub fn evaluate_pure(q: &PureQuanton, d: &DetectorSet, tol: &Tolerances) -> Result<DualityReport> {
    let reduced = reduce_quanton(
        &joint_mixed(&MixedQuanton::from_pure(q), d)?,
        q.n(),
        d.dim(),
    )?;
    let coherence = coherence_normalized(reduced.rho())?;
    let distinguishability = distinguishability_pure(q, d)?;
    let sum = coherence + distinguishability - 1.0;
    let mut verdict = BTreeMap::new();
    verdict.insert(
        relation::DUALITY_EQUALITY.to_owned(),
        Verdict::at_most(sum.abs(), tol.relation),
    );
    Ok(DualityReport {
        scenario: Scenario::PurePure,
        n: q.n(),
        coherence,
        distinguishability,
        slack: 0.0,
        visibility: None,
        coherence_bound: None,
        relation_residuals: Residuals {
            duality_sum: sum,
            slack_identity: Some(sum.abs()),
            psd_margin_min: None,
            coherence_bound_margin: None,
        },
        verdict,
    })
}

/// Mixed quanton, pure detectors: `C + D_Q + slack = 1` with `slack >= 0`.
pub fn evaluate_mixed(
    q: &MixedQuanton,
    d: &DetectorSet,
    tol: &Tolerances,
) -> Result<DualityReport> {
    let reduced = reduce_quanton(&joint_mixed(q, d)?, q.n(), d.dim())?;
    let coherence = coherence_normalized(reduced.rho())?;
    let distinguishability = distinguishability_mixed(q, d.gram())?;
    let slack = slack(q, d.gram())?;
    let psd_margin = psd_margin_min(q.rho());
    let sum = coherence + distinguishability - 1.0;
    let identity = (coherence + distinguishability + slack - 1.0).abs();
    let mut verdict = BTreeMap::new();
    verdict.insert(
        relation::SLACK_IDENTITY.to_owned(),
        Verdict::at_most(identity, tol.relation),
    );
    verdict.insert(
        relation::SLACK_NONNEGATIVE.to_owned(),
        Verdict::at_least(slack, tol.margin),
    );
    verdict.insert(
        relation::PSD_MARGIN.to_owned(),
        Verdict::at_least(psd_margin, tol.margin),
    );
    verdict.insert(
        relation::DUALITY_INEQUALITY.to_owned(),
        Verdict::at_most(sum, tol.relation),
    );
    Ok(DualityReport {
        scenario: Scenario::MixedPure,
        n: q.n(),
        coherence,
        distinguishability,
        slack,
        visibility: None,
        coherence_bound: None,
        relation_residuals: Residuals {
            duality_sum: sum,
            slack_identity: Some(identity),
            psd_margin_min: Some(psd_margin),
            coherence_bound_margin: None,
        },
        verdict,
    })
}

/// Mixed quanton, mixed detector: `C' <= bound` and `C' + D_Q' <= 1`.
pub fn evaluate_mixed_detector(
    q: &MixedQuanton,
    m: &MixedDetectorInteraction,
    tol: &Tolerances,
) -> Result<DualityReport> {
    let reduced = reduce_quanton_mixed_detector(q, m)?;
    let coherence = coherence_normalized(reduced.rho())?;
    let branches = branch_overlaps(m)?;
    let bound = coherence_bound_mixed_detector(q, &branches)?;
    let distinguishability = distinguishability_mixed_detector(q, &branches)?;
    let slack = slack_mixed_detector(q, &branches)?;
    let psd_margin = psd_margin_min(q.rho());
    let sum = coherence + distinguishability - 1.0;
    let identity = (bound + distinguishability + slack - 1.0).abs();
    let bound_margin = bound - coherence;
    let mut verdict = BTreeMap::new();
    verdict.insert(
        relation::COHERENCE_BOUND.to_owned(),
        Verdict::at_least(bound_margin, tol.margin),
    );
    verdict.insert(
        relation::DUALITY_INEQUALITY.to_owned(),
        Verdict::at_most(sum, tol.relation),
    );
    verdict.insert(
        relation::SLACK_IDENTITY.to_owned(),
        Verdict::at_most(identity, tol.relation),
    );
    verdict.insert(
        relation::SLACK_NONNEGATIVE.to_owned(),
        Verdict::at_least(slack, tol.margin),
    );
    verdict.insert(
        relation::PSD_MARGIN.to_owned(),
        Verdict::at_least(psd_margin, tol.margin),
    );
    Ok(DualityReport {
        scenario: Scenario::MixedMixed,
        n: q.n(),
        coherence,
        distinguishability,
        slack,
        visibility: None,
        coherence_bound: Some(bound),
        relation_residuals: Residuals {
            duality_sum: sum,
            slack_identity: Some(identity),
            psd_margin_min: Some(psd_margin),
            coherence_bound_margin: Some(bound_margin),
        },
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Quanton {
    Pure(PureQuanton),
    Mixed(MixedQuanton),
}

impl Quanton {
    pub fn n(&self) -> usize {
        match self {
            Quanton::Pure(q) => q.n(),
            Quanton::Mixed(q) => q.n(),
        }
    }
}

/// Evaluates the quanton against the uniform-overlap detector family at each `γ`.
///
/// Reports for `n <= 3` carry the scanned fringe visibility.
pub fn sweep_overlap(
    quanton: &Quanton,
    gammas: &[f64],
    tol: &Tolerances,
) -> Result<Vec<DualityReport>> {
    if gammas.is_empty() {
        return Err(Error::InvalidArgument(
            "overlap sweep needs at least one gamma".into(),
        ));
    }
    if let Some(&g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: g,
            range: "[0, 1]",
        });
    }
    if gammas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "gammas must be sorted ascending".into(),
        ));
    }
    let n = quanton.n();
    gammas
        .iter()
        .map(|&gamma| {
            let d = DetectorSet::uniform_overlap(n, gamma)?;
            let mixed = match quanton {
                Quanton::Pure(q) => MixedQuanton::from_pure(q),
                Quanton::Mixed(q) => q.clone(),
            };
            let report = match quanton {
                Quanton::Pure(q) => evaluate_pure(q, &d, tol)?,
                Quanton::Mixed(q) => evaluate_mixed(q, &d, tol)?,
            };
            if n <= 3 {
                let reduced = reduce_quanton(&joint_mixed(&mixed, &d)?, n, d.dim())?;
                let v = scan_visibility(&reduced, DEFAULT_GRID_POINTS)?.visibility;
                Ok(report.with_visibility(v))
            } else {
                Ok(report)
            }
        })
        .collect()
}

/// Whether `C` is nondecreasing and `D_Q` nonincreasing along a sweep, up to `slack`.
pub fn is_complementary(reports: &[DualityReport], slack: f64) -> bool {
    reports.windows(2).all(|w| {
        w[1].coherence >= w[0].coherence - slack
            && w[1].distinguishability <= w[0].distinguishability + slack
    })
}
