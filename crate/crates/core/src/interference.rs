//! Far-field n-slit fringes and their visibility.
//!
//! Path `i` picks up phase `e^{i·i·θ}` at screen phase `θ`, so the intensity
//! of a reduced quanton state `ρ̃` is the trigonometric polynomial
//! `I(θ) = Σ_ij ρ̃_ij e^{i(i-j)θ}`, normalized so that its mean over a period
//! is the total probability 1.

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measures::{coherence_normalized, distinguishability_pure, egy_distinguishability};
use crate::states::{
    entangle_pure, joint_mixed, reduce_quanton, DetectorSet, MixedQuanton, PureQuanton,
};

pub const MIN_GRID_POINTS: usize = 256;
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Phase resolution of the extremum refinement.
const PHASE_RESOLUTION: f64 = 1e-12;
/// Patterns whose extremes differ by less than this are flat.
const FLAT_PATTERN: f64 = 1e-12;
/// Local extrema refined per direction.
const MAX_REFINED: usize = 16;

/// Intensity samples over one period plus the extracted extrema and visibility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub phases: Vec<f64>,
    pub intensities: Vec<f64>,
    pub i_max: f64,
    pub i_min: f64,
    pub visibility: f64,
}

impl FringeScan {
    /// `theta,intensity` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,intensity")?;
        for (theta, intensity) in self.phases.iter().zip(&self.intensities) {
            writeln!(out, "{theta:.16e},{intensity:.16e}")?;
        }
        Ok(())
    }
}

/// `I(θ) = Σ_ij ρ̃_ij e^{i(i-j)θ}`, clamped at zero.
pub fn intensity(rho: &MixedQuanton, theta: f64) -> f64 {
    let n = rho.n();
    let phases: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, k as f64 * theta))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for (j, ph) in phases.iter().enumerate() {
            row += rho.get(i, j) * ph.conj();
        }
        acc += phases[i] * row;
    }
    acc.re.max(0.0)
}

fn ternary<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, maximize: bool) -> (f64, f64) {
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    while hi - lo > PHASE_RESOLUTION {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if better(f(m1), f(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let theta = 0.5 * (lo + hi);
    (theta, f(theta))
}

/// Samples `I(θ)` on a uniform grid and refines the extrema by ternary search.
pub fn scan_visibility(rho: &MixedQuanton, grid_points: usize) -> Result<FringeScan> {
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid_points must be at least {MIN_GRID_POINTS}, got {grid_points}"
        )));
    }
    let step = TAU / grid_points as f64;
    let phases: Vec<f64> = (0..grid_points).map(|k| k as f64 * step).collect();
    let intensities: Vec<f64> = phases.iter().map(|&t| intensity(rho, t)).collect();

    let grid_max = intensities
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let grid_min = intensities.iter().copied().fold(f64::INFINITY, f64::min);
    if grid_max - grid_min < FLAT_PATTERN {
        return Ok(FringeScan {
            phases,
            intensities,
            i_max: grid_max,
            i_min: grid_min,
            visibility: 0.0,
        });
    }

    let f = |t: f64| intensity(rho, t);
    let refine = |maximize: bool| {
        let mut candidates: Vec<usize> = (0..grid_points)
            .filter(|&k| {
                let prev = intensities[(k + grid_points - 1) % grid_points];
                let next = intensities[(k + 1) % grid_points];
                let here = intensities[k];
                if maximize {
                    here >= prev && here > next
                } else {
                    here <= prev && here < next
                }
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            let ord = intensities[a].total_cmp(&intensities[b]);
            if maximize {
                ord.reverse()
            } else {
                ord
            }
        });
        candidates.truncate(MAX_REFINED);
        let mut best = if maximize { grid_max } else { grid_min };
        for k in candidates {
            let (_, value) = ternary(f, phases[k] - step, phases[k] + step, maximize);
            best = if maximize {
                best.max(value)
            } else {
                best.min(value)
            };
        }
        best
    };
    let i_max = refine(true);
    let i_min = refine(false);
    let visibility = if i_max - i_min < FLAT_PATTERN || i_max + i_min <= 0.0 {
        0.0
    } else {
        (i_max - i_min) / (i_max + i_min)
    };
    Ok(FringeScan {
        phases,
        intensities,
        i_max,
        i_min,
        visibility,
    })
}

/// Two equally probable paths: visibility, coherence and distinguishability side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSlitReport {
    pub visibility: f64,
    /// `|⟨d_1|d_2⟩|`
    pub coherence: f64,
    pub distinguishability: f64,
    /// `D` with `D_Q = 1 - √(1 - D²)`.
    pub egy_distinguishability: f64,
    /// `|V - C|`
    pub visibility_residual: f64,
    /// `|V + D_Q - 1|`
    pub duality_residual: f64,
    /// `|V² + D² - 1|`
    pub egy_residual: f64,
}

fn reduced_state(q: &PureQuanton, d: &DetectorSet) -> Result<MixedQuanton> {
    let psi = entangle_pure(q, d)?;
    reduce_quanton(&ComplexMatrix::outer(&psi, &psi), q.n(), d.dim())
}

pub fn check_two_slit_relation(q: &PureQuanton, d: &DetectorSet) -> Result<TwoSlitReport> {
    check_two_slit_relation_with_grid(q, d, DEFAULT_GRID_POINTS)
}

pub fn check_two_slit_relation_with_grid(
    q: &PureQuanton,
    d: &DetectorSet,
    grid_points: usize,
) -> Result<TwoSlitReport> {
    if q.n() != 2 || d.n() != 2 {
        return Err(Error::InvalidArgument(
            "two-slit relation needs exactly 2 paths".into(),
        ));
    }
    let half = std::f64::consts::FRAC_1_SQRT_2;
    if q.amplitudes()
        .iter()
        .any(|c| (c.norm() - half).abs() > 1e-10)
    {
        return Err(Error::InvalidArgument(
            "two-slit relation holds for equally probable paths only".into(),
        ));
    }
    let scan = scan_visibility(&reduced_state(q, d)?, grid_points)?;
    let visibility = scan.visibility;
    let coherence = d.gram()[(0, 1)].norm();
    let distinguishability = distinguishability_pure(q, d)?;
    let egy = egy_distinguishability(distinguishability)?;
    Ok(TwoSlitReport {
        visibility,
        coherence,
        distinguishability,
        egy_distinguishability: egy,
        visibility_residual: (visibility - coherence).abs(),
        duality_residual: (visibility + distinguishability - 1.0).abs(),
        egy_residual: (visibility * visibility + egy * egy - 1.0).abs(),
    })
}

/// Three equally probable paths with a common real overlap `γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeSlitReport {
    pub gamma: f64,
    pub coherence: f64,
    pub visibility: f64,
    pub distinguishability: f64,
    /// `2V / (3 - V)`
    pub coherence_from_visibility: f64,
    /// `|C - 2V/(3-V)|`
    pub coherence_residual: f64,
    /// `|D_Q + 2V/(3-V) - 1|`
    pub duality_residual: f64,
    /// `3γ / (2 + γ)`
    pub closed_form_visibility: f64,
    pub closed_form_residual: f64,
}

pub fn check_three_slit_relation(gamma: f64) -> Result<ThreeSlitReport> {
    check_three_slit_relation_with_grid(gamma, DEFAULT_GRID_POINTS)
}

pub fn check_three_slit_relation_with_grid(
    gamma: f64,
    grid_points: usize,
) -> Result<ThreeSlitReport> {
    let q = PureQuanton::equal(3)?;
    let d = DetectorSet::uniform_overlap(3, gamma)?;
    let reduced = reduce_quanton(&joint_mixed(&MixedQuanton::from_pure(&q), &d)?, 3, d.dim())?;
    let coherence = coherence_normalized(reduced.rho())?;
    let visibility = scan_visibility(&reduced, grid_points)?.visibility;
    let distinguishability = distinguishability_pure(&q, &d)?;
    let predicted = 2.0 * visibility / (3.0 - visibility);
    let closed_form = 3.0 * gamma / (2.0 + gamma);
    Ok(ThreeSlitReport {
        gamma,
        coherence,
        visibility,
        distinguishability,
        coherence_from_visibility: predicted,
        coherence_residual: (coherence - predicted).abs(),
        duality_residual: (distinguishability + predicted - 1.0).abs(),
        closed_form_visibility: closed_form,
        closed_form_residual: (visibility - closed_form).abs(),
    })
}
