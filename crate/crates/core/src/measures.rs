//! Scalar quantifiers of wave and particle behaviour.
//!
//! Wave side: the l1 coherence `Σ_{i≠j} |ρ_ij|` and its normalized form
//! `C = l1 / (n - 1)`. Particle side: the path distinguishability `D_Q`,
//! defined as the upper bound on the success probability of unambiguous
//! discrimination of the detector states,
//! `1 - (1/(n-1)) Σ_{i≠j} √(p_i p_j) |⟨d_i|d_j⟩|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, DEFAULT_TOL};
use crate::states::{BranchOverlaps, DetectorSet, MixedQuanton, PureQuanton};

/// Values outside `[0, 1]` by at most this much are rounding dust and get clamped.
pub const CLAMP_SLACK: f64 = 1e-9;

fn clamp_unit(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() || !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        });
    }
    Ok(value.clamp(0.0, 1.0))
}

fn check_unit_input(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn normalizer(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "normalized quantities need n >= 2, got {n}"
        )));
    }
    Ok(1.0 / (n - 1) as f64)
}

fn check_gram(gram: &ComplexMatrix, n: usize) -> Result<()> {
    if !gram.is_square() || gram.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "overlap matrix",
            expected: n,
            actual: gram.rows(),
        });
    }
    Ok(())
}

/// `Σ_{i≠j} w_ij |gram_ij|` with `w_ij = √(p_i p_j)`.
fn overlap_sum(probs: &[f64], gram: &ComplexMatrix) -> f64 {
    let n = probs.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += (probs[i] * probs[j]).max(0.0).sqrt() * gram[(i, j)].norm();
            }
        }
    }
    acc
}

/// `Σ_{i≠j} |ρ_ij| |gram_ij|`
fn coherence_overlap_sum(q: &MixedQuanton, gram: &ComplexMatrix) -> f64 {
    let n = q.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += q.get(i, j).norm() * gram[(i, j)].norm();
            }
        }
    }
    acc
}

/// C, D_Q and the slack that closes `C + D_Q + slack = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityQuantities {
    pub coherence: f64,
    pub distinguishability: f64,
    pub slack: f64,
    pub n: usize,
}

impl DualityQuantities {
    /// Closed-form quantities for a mixed quanton marked by pure detector states.
    pub fn mixed(q: &MixedQuanton, d: &DetectorSet) -> Result<Self> {
        if q.n() != d.n() {
            return Err(Error::DimensionMismatch {
                context: "path count",
                expected: q.n(),
                actual: d.n(),
            });
        }
        let scale = normalizer(q.n())?;
        Ok(Self {
            coherence: clamp_unit("coherence", scale * coherence_overlap_sum(q, d.gram()))?,
            distinguishability: distinguishability_mixed(q, d.gram())?,
            slack: slack(q, d.gram())?,
            n: q.n(),
        })
    }

    pub fn total(&self) -> f64 {
        self.coherence + self.distinguishability + self.slack
    }
}

/// `Σ_{i≠j} |ρ_ij|`
pub fn coherence_l1(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += rho.get(i, j).norm();
            }
        }
    }
    acc
}

/// `Σ_{i≠j} |ρ_ij| / (n - 1)`, in `[0, 1]`.
pub fn coherence_normalized(rho: &DensityMatrix) -> Result<f64> {
    let scale = normalizer(rho.dim())?;
    clamp_unit("normalized coherence", coherence_l1(rho) * scale)
}

/// Upper bound on the success probability of unambiguously discriminating
/// states with Gram matrix `gram` prepared with probabilities `probs`.
pub fn uqsd_bound(probs: &[f64], gram: &ComplexMatrix) -> Result<f64> {
    let n = probs.len();
    let scale = normalizer(n)?;
    check_gram(gram, n)?;
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidProbabilities(format!(
            "negative or non-finite probability {p}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidProbabilities(format!(
            "probabilities sum to {total}"
        )));
    }
    let hermiticity = gram.hermiticity_defect();
    if hermiticity > DEFAULT_TOL {
        return Err(Error::NotHermitian(hermiticity));
    }
    if let Some(i) = (0..n).find(|&i| (gram[(i, i)].re - 1.0).abs() > DEFAULT_TOL) {
        return Err(Error::NotNormalized {
            what: "discriminated state",
            deviation: (gram[(i, i)].re - 1.0).abs(),
        });
    }
    clamp_unit("uqsd bound", 1.0 - scale * overlap_sum(probs, gram))
}

/// `D_Q = 1 - (1/(n-1)) Σ_{i≠j} |c_i||c_j| |⟨d_i|d_j⟩|`
pub fn distinguishability_pure(q: &PureQuanton, d: &DetectorSet) -> Result<f64> {
    if q.n() != d.n() {
        return Err(Error::DimensionMismatch {
            context: "path count",
            expected: q.n(),
            actual: d.n(),
        });
    }
    uqsd_bound(&q.probabilities(), d.gram())
}

/// `D_Q = 1 - (1/(n-1)) Σ_{i≠j} √(ρ_ii ρ_jj) |gram_ij|`
pub fn distinguishability_mixed(q: &MixedQuanton, gram: &ComplexMatrix) -> Result<f64> {
    check_gram(gram, q.n())?;
    let scale = normalizer(q.n())?;
    clamp_unit(
        "distinguishability",
        1.0 - scale * overlap_sum(&q.probabilities(), gram),
    )
}

/// `(1/(n-1)) Σ_{i≠j} (√(ρ_ii ρ_jj) - |ρ_ij|) |gram_ij|`, nonnegative for valid states.
pub fn slack(q: &MixedQuanton, gram: &ComplexMatrix) -> Result<f64> {
    check_gram(gram, q.n())?;
    let scale = normalizer(q.n())?;
    let probs = q.probabilities();
    Ok(scale * (overlap_sum(&probs, gram) - coherence_overlap_sum(q, gram)))
}

fn check_branches(q: &MixedQuanton, b: &BranchOverlaps) -> Result<()> {
    if b.is_empty() {
        return Err(Error::InvalidArgument("no detector branches".into()));
    }
    for g in &b.branch_grams {
        check_gram(g, q.n())?;
    }
    Ok(())
}

/// `D_Q' = Σ_k r_k D_Q^k` over the spectral branches of the detector.
pub fn distinguishability_mixed_detector(q: &MixedQuanton, b: &BranchOverlaps) -> Result<f64> {
    check_branches(q, b)?;
    let scale = normalizer(q.n())?;
    let probs = q.probabilities();
    let averaged: f64 = b.iter().map(|(r, g)| r * overlap_sum(&probs, g)).sum();
    clamp_unit("distinguishability", 1.0 - scale * averaged)
}

/// `(1/(n-1)) Σ_k r_k Σ_{i≠j} |ρ_ij| |⟨d_ki|d_kj⟩|`, an upper bound on `C'`.
pub fn coherence_bound_mixed_detector(q: &MixedQuanton, b: &BranchOverlaps) -> Result<f64> {
    check_branches(q, b)?;
    let scale = normalizer(q.n())?;
    Ok(scale
        * b.iter()
            .map(|(r, g)| r * coherence_overlap_sum(q, g))
            .sum::<f64>())
}

/// Branch-averaged slack: `1 - bound - D_Q'` in closed form.
pub fn slack_mixed_detector(q: &MixedQuanton, b: &BranchOverlaps) -> Result<f64> {
    check_branches(q, b)?;
    let scale = normalizer(q.n())?;
    let probs = q.probabilities();
    Ok(scale
        * b.iter()
            .map(|(r, g)| r * (overlap_sum(&probs, g) - coherence_overlap_sum(q, g)))
            .sum::<f64>())
}

/// `min_{i≠j} (√(ρ_ii ρ_jj) - |ρ_ij|)`; nonnegative because every 2×2 principal submatrix is PSD.
pub fn psd_margin_min(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let d = rho.diagonal();
    let mut worst = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.min((d[i] * d[j]).max(0.0).sqrt() - rho.get(i, j).norm());
            }
        }
    }
    worst
}

/// Two-state bound for equal priors: `1 - |⟨d_1|d_2⟩|`.
pub fn idp_limit(overlap: f64) -> Result<f64> {
    check_unit_input("overlap", overlap)?;
    Ok(1.0 - overlap)
}

/// Converts `D_Q` to the two-path distinguishability `D` via `D_Q = 1 - √(1 - D²)`.
pub fn egy_distinguishability(dq: f64) -> Result<f64> {
    check_unit_input("distinguishability", dq)?;
    Ok((dq * (2.0 - dq)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{validate_density, ComplexVector};
    use crate::states::{joint_mixed, reduce_quanton, uniform_overlap_gram};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn density(rows: usize, entries: &[f64]) -> DensityMatrix {
        validate_density(
            &ComplexMatrix::from_real_rows(rows, rows, entries).unwrap(),
            DEFAULT_TOL,
        )
        .unwrap()
    }

    fn two_detectors(overlap: f64) -> DetectorSet {
        let s = (1.0 - overlap * overlap).sqrt();
        DetectorSet::new(vec![
            ComplexVector::from_real(&[1.0, 0.0]).unwrap(),
            ComplexVector::from_real(&[overlap, s]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn l1_coherence_examples() {
        let third = 1.0 / 3.0;
        assert!((coherence_l1(&density(3, &[third; 9])) - 2.0).abs() < 1e-15);
        assert_eq!(
            coherence_l1(&density(3, &[0.2, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.5])),
            0.0
        );
        assert!((coherence_l1(&density(2, &[0.5, 0.3, 0.3, 0.5])) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn normalized_coherence_of_maximally_coherent_states() {
        for n in 2..9 {
            let rho = DensityMatrix::pure(
                &ComplexVector::from_real(&vec![1.0 / (n as f64).sqrt(); n]).unwrap(),
            )
            .unwrap();
            assert!((coherence_normalized(&rho).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(
            coherence_normalized(&DensityMatrix::maximally_mixed(4).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn normalized_coherence_after_uniform_overlap() {
        let q = MixedQuanton::from_pure(&PureQuanton::equal(3).unwrap());
        let d = DetectorSet::uniform_overlap(3, 0.5).unwrap();
        let r = reduce_quanton(&joint_mixed(&q, &d).unwrap(), 3, 3).unwrap();
        // (1/2) * 6 * (1/3) * 0.5
        assert!((coherence_normalized(r.rho()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalized_coherence_needs_two_paths() {
        let rho = density(1, &[1.0]);
        assert!(coherence_normalized(&rho).is_err());
    }

    #[test]
    fn uqsd_bound_examples() {
        assert_eq!(
            uqsd_bound(&[0.2, 0.3, 0.5], &ComplexMatrix::identity(3)).unwrap(),
            1.0
        );
        let g = ComplexMatrix::from_real_rows(2, 2, &[1.0, 0.6, 0.6, 1.0]).unwrap();
        assert!((uqsd_bound(&[0.5, 0.5], &g).unwrap() - 0.4).abs() < 1e-15);
        let g3 = uniform_overlap_gram(3, 0.5).unwrap();
        let third = 1.0 / 3.0;
        assert!((uqsd_bound(&[third; 3], &g3).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uqsd_bound_rejects_bad_probabilities() {
        let g = ComplexMatrix::identity(2);
        assert!(matches!(
            uqsd_bound(&[1.2, -0.2], &g),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(matches!(
            uqsd_bound(&[0.5, 0.6], &g),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(matches!(
            uqsd_bound(&[0.5, 0.5], &ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn uqsd_bound_rejects_large_violations() {
        // not a Gram matrix: overlaps larger than one push the bound far below zero
        let g = ComplexMatrix::from_real_rows(2, 2, &[1.0, 1.5, 1.5, 1.0]).unwrap();
        assert!(matches!(
            uqsd_bound(&[0.5, 0.5], &g),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn pure_distinguishability_examples() {
        let q = PureQuanton::equal(3).unwrap();
        assert_eq!(
            distinguishability_pure(&q, &DetectorSet::uniform_overlap(3, 0.0).unwrap()).unwrap(),
            1.0
        );
        let q2 = PureQuanton::equal(2).unwrap();
        let same = DetectorSet::new(vec![ComplexVector::basis(2, 0); 2]).unwrap();
        assert!(distinguishability_pure(&q2, &same).unwrap().abs() < 1e-15);
        assert!((distinguishability_pure(&q2, &two_detectors(0.6)).unwrap() - 0.4).abs() < 1e-15);
        assert!(
            distinguishability_pure(&q2, &DetectorSet::uniform_overlap(3, 0.1).unwrap()).is_err()
        );
    }

    #[test]
    fn mixed_distinguishability_examples() {
        let amps = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let q = PureQuanton::new(amps).unwrap();
        let d = two_detectors(0.3);
        let mixed = MixedQuanton::from_pure(&q);
        let a = distinguishability_mixed(&mixed, d.gram()).unwrap();
        let b = distinguishability_pure(&q, &d).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert_eq!(
            distinguishability_mixed(&mixed, &ComplexMatrix::identity(2)).unwrap(),
            1.0
        );
    }

    #[test]
    fn mixed_distinguishability_matches_loop_evaluation() {
        let rho = density(3, &[0.5, 0.1, 0.05, 0.1, 0.3, 0.02, 0.05, 0.02, 0.2]);
        let q = MixedQuanton::new(rho).unwrap();
        let gamma = 0.35;
        let g = uniform_overlap_gram(3, gamma).unwrap();
        let p: [f64; 3] = [0.5, 0.3, 0.2];
        let mut sum = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    sum += (p[i] * p[j]).sqrt() * gamma;
                }
            }
        }
        let expected = 1.0 - sum / 2.0;
        assert!((distinguishability_mixed(&q, &g).unwrap() - expected).abs() < 1e-14);
    }

    fn two_branches(n: usize, weights: (f64, f64), overlaps: (f64, f64)) -> BranchOverlaps {
        BranchOverlaps {
            weights: vec![weights.0, weights.1],
            branch_grams: vec![
                uniform_overlap_gram(n, overlaps.0).unwrap(),
                uniform_overlap_gram(n, overlaps.1).unwrap(),
            ],
        }
    }

    #[test]
    fn mixed_detector_distinguishability_examples() {
        let q = MixedQuanton::new(density(
            3,
            &[0.5, 0.1, 0.05, 0.1, 0.3, 0.02, 0.05, 0.02, 0.2],
        ))
        .unwrap();
        let g = uniform_overlap_gram(3, 0.4).unwrap();
        let single = BranchOverlaps {
            weights: vec![1.0],
            branch_grams: vec![g.clone()],
        };
        assert!(
            (distinguishability_mixed_detector(&q, &single).unwrap()
                - distinguishability_mixed(&q, &g).unwrap())
            .abs()
                < 1e-15
        );
        let identity = two_branches(3, (0.6, 0.4), (0.0, 0.0));
        assert_eq!(
            distinguishability_mixed_detector(&q, &identity).unwrap(),
            1.0
        );

        let b = two_branches(3, (0.7, 0.3), (0.2, 0.8));
        let p = q.probabilities();
        let mut root_sum = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    root_sum += (p[i] * p[j]).sqrt();
                }
            }
        }
        let expected = 1.0 - root_sum * (0.7 * 0.2 + 0.3 * 0.8) / 2.0;
        assert!((distinguishability_mixed_detector(&q, &b).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn coherence_bound_examples() {
        let q = MixedQuanton::new(density(
            3,
            &[0.5, 0.1, 0.05, 0.1, 0.3, 0.02, 0.05, 0.02, 0.2],
        ))
        .unwrap();
        let d = DetectorSet::uniform_overlap(3, 0.45).unwrap();
        let single = BranchOverlaps {
            weights: vec![1.0],
            branch_grams: vec![d.gram().clone()],
        };
        let reduced = reduce_quanton(&joint_mixed(&q, &d).unwrap(), 3, 3).unwrap();
        let c = coherence_normalized(reduced.rho()).unwrap();
        assert!((coherence_bound_mixed_detector(&q, &single).unwrap() - c).abs() < 1e-12);
        assert_eq!(
            coherence_bound_mixed_detector(&q, &two_branches(3, (0.5, 0.5), (0.0, 0.0))).unwrap(),
            0.0
        );
    }

    #[test]
    fn idp_and_egy() {
        assert_eq!(idp_limit(0.0).unwrap(), 1.0);
        assert_eq!(idp_limit(1.0).unwrap(), 0.0);
        assert!((idp_limit(0.6).unwrap() - 0.4).abs() < 1e-15);
        assert!(idp_limit(1.1).is_err());
        assert_eq!(egy_distinguishability(0.0).unwrap(), 0.0);
        assert_eq!(egy_distinguishability(1.0).unwrap(), 1.0);
        let d = egy_distinguishability(0.4).unwrap();
        assert!((d - 0.8).abs() < 1e-15);
        assert!((0.6f64.powi(2) + d * d - 1.0).abs() < 1e-15);
        assert!(egy_distinguishability(-0.1).is_err());
    }

    #[test]
    fn slack_vanishes_for_pure_quantons() {
        let q = MixedQuanton::from_pure(&PureQuanton::equal(4).unwrap());
        let g = uniform_overlap_gram(4, 0.3).unwrap();
        assert!(slack(&q, &g).unwrap().abs() < 1e-15);
        let quantities =
            DualityQuantities::mixed(&q, &DetectorSet::uniform_overlap(4, 0.3).unwrap()).unwrap();
        assert!((quantities.total() - 1.0).abs() < 1e-12);
    }

    fn arb_density(n: usize) -> impl Strategy<Value = DensityMatrix> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_filter_map(
            "degenerate",
            move |v| {
                let entries: Vec<Complex64> =
                    v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                let g = ComplexMatrix::from_row_major(n, n, &entries).unwrap();
                let gg = g.matmul(&g.adjoint()).unwrap();
                let tr = gg.trace().re;
                (tr > 1e-6).then(|| {
                    validate_density(&gg.scale(Complex64::new(1.0 / tr, 0.0)), DEFAULT_TOL).unwrap()
                })
            },
        )
    }

    proptest! {
        #[test]
        fn normalized_coherence_in_unit_interval(rho in (2usize..9).prop_flat_map(arb_density)) {
            let c = coherence_normalized(&rho).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
        }

        #[test]
        fn uqsd_bound_nonincreasing_in_overlap(
            n in 2usize..7,
            raw in prop::collection::vec(0.01..1.0f64, 7),
            g1 in 0.0..1.0f64,
            g2 in 0.0..1.0f64,
        ) {
            let total: f64 = raw[..n].iter().sum();
            let probs: Vec<f64> = raw[..n].iter().map(|p| p / total).collect();
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let a = uqsd_bound(&probs, &uniform_overlap_gram(n, lo).unwrap()).unwrap();
            let b = uqsd_bound(&probs, &uniform_overlap_gram(n, hi).unwrap()).unwrap();
            prop_assert!(a >= b - 1e-15);
        }
    }
}
