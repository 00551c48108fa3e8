//! Interferometer configurations: quanton states, which-path detectors and
//! the quanton-detector state after the controlled-unitary interaction.
//!
//! The path states are the computational basis `e_0, …, e_{n-1}` of an
//! `n`-dimensional space. Detector overlaps use `G_ij = ⟨d_i|d_j⟩`, so the
//! reduced quanton state has entries `ρ_ij ⟨d_j|d_i⟩ = ρ_ij conj(G_ij)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigen, partial_trace_second, validate_density, ComplexMatrix, ComplexVector,
    DensityMatrix, DEFAULT_TOL, MAX_DIM,
};

/// Spectral branches of a mixed detector lighter than this are dropped.
pub const BRANCH_WEIGHT_CUTOFF: f64 = 1e-12;

fn check_paths(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "an interferometer needs at least 2 paths, got {n}"
        )));
    }
    Ok(())
}

fn check_composite(n: usize, dim: usize) -> Result<()> {
    let total = n.saturating_mul(dim);
    if total > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: total,
            max: MAX_DIM,
        });
    }
    Ok(())
}

fn path_mismatch(expected: usize, actual: usize) -> Error {
    Error::DimensionMismatch {
        context: "path count",
        expected,
        actual,
    }
}

/// Pure superposition `Σ c_i |ψ_i⟩` over `n ≥ 2` paths.
#[derive(Clone, Debug, PartialEq)]
pub struct PureQuanton {
    amplitudes: ComplexVector,
}

impl PureQuanton {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_paths(amplitudes.len())?;
        let amplitudes = ComplexVector::new(amplitudes)?;
        let deviation = (amplitudes.norm() - 1.0).abs();
        if deviation > DEFAULT_TOL {
            return Err(Error::NotNormalized {
                what: "quanton amplitudes",
                deviation,
            });
        }
        Ok(Self { amplitudes })
    }

    /// Equal-amplitude superposition `(1/√n) Σ |ψ_i⟩`.
    pub fn equal(n: usize) -> Result<Self> {
        check_paths(n)?;
        let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Self::new(vec![a; n])
    }

    pub fn n(&self) -> usize {
        self.amplitudes.dim()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// Path probabilities `|c_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Quanton in a general mixed state over the path basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedQuanton {
    rho: DensityMatrix,
}

impl MixedQuanton {
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        check_paths(rho.dim())?;
        Ok(Self { rho })
    }

    pub fn from_pure(q: &PureQuanton) -> Self {
        Self {
            rho: DensityMatrix::pure(q.amplitudes()).expect("pure quanton is normalized"),
        }
    }

    pub fn n(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho.get(i, j)
    }

    /// Path probabilities `ρ_ii`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.rho.diagonal()
    }
}

/// `n` normalized (not necessarily orthogonal) detector states and their Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorSet {
    vectors: Vec<ComplexVector>,
    gram: ComplexMatrix,
}

impl DetectorSet {
    pub fn new(vectors: Vec<ComplexVector>) -> Result<Self> {
        check_paths(vectors.len())?;
        let dim = vectors[0].dim();
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "detector dimension",
                    expected: dim,
                    actual: v.dim(),
                });
            }
            let deviation = (v.norm() - 1.0).abs();
            if deviation > DEFAULT_TOL {
                return Err(Error::NotNormalized {
                    what: "detector state",
                    deviation,
                });
            }
        }
        check_composite(vectors.len(), dim)?;
        let n = vectors.len();
        let gram = ComplexMatrix::from_fn(n, n, |i, j| vectors[i].inner(&vectors[j]));
        Ok(Self { vectors, gram })
    }

    /// Detector states realizing a prescribed Gram matrix, embedded in `dim` dimensions.
    ///
    /// The Gram matrix is factorized through its eigendecomposition as
    /// `G = L L†`, so singular (rank-deficient) Gram matrices work too.
    /// Vector `i` is the complex conjugate of row `i` of `L`.
    pub fn from_gram(gram: &ComplexMatrix, dim: usize) -> Result<Self> {
        let n = gram.rows();
        if !gram.is_square() {
            return Err(Error::NotSquare {
                rows: gram.rows(),
                cols: gram.cols(),
            });
        }
        check_paths(n)?;
        if dim < n {
            return Err(Error::InvalidArgument(format!(
                "detector dimension {dim} is smaller than the number of paths {n}"
            )));
        }
        check_composite(n, dim)?;
        let hermiticity = gram.hermiticity_defect();
        if hermiticity > DEFAULT_TOL {
            return Err(Error::NotHermitian(hermiticity));
        }
        let (values, vectors) = hermitian_eigen(gram)?;
        let min = values.last().copied().unwrap_or(0.0);
        if min < -DEFAULT_TOL {
            return Err(Error::NotPsd(min));
        }
        let roots: Vec<f64> = values.iter().map(|&x| x.max(0.0).sqrt()).collect();
        let detectors = (0..n)
            .map(|i| {
                let mut entries = vec![Complex64::new(0.0, 0.0); dim];
                for (k, (root, v)) in roots.iter().zip(&vectors).enumerate() {
                    entries[k] = (v[i] * root).conj();
                }
                ComplexVector::new(entries)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(detectors)
    }

    /// Symmetric family with every pairwise overlap equal to `gamma`, in `n` dimensions.
    pub fn uniform_overlap(n: usize, gamma: f64) -> Result<Self> {
        Self::from_gram(&uniform_overlap_gram(n, gamma)?, n)
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    /// `G_ij = ⟨d_i|d_j⟩`
    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    /// Applies the same unitary to every detector state; overlaps are unchanged.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<Self> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| u.apply(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }
}

/// `(1 - γ) I + γ J`
pub fn uniform_overlap_gram(n: usize, gamma: f64) -> Result<ComplexMatrix> {
    check_paths(n)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, 1]",
        });
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(if i == j { 1.0 } else { gamma }, 0.0)
    }))
}

/// Initial detector state and the path-conditioned unitaries `U_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedDetectorInteraction {
    rho_d: DensityMatrix,
    unitaries: Vec<ComplexMatrix>,
}

impl MixedDetectorInteraction {
    pub fn new(rho_d: DensityMatrix, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        check_paths(unitaries.len())?;
        let dim = rho_d.dim();
        check_composite(unitaries.len(), dim)?;
        for (index, u) in unitaries.iter().enumerate() {
            if !u.is_square() || u.rows() != dim {
                return Err(Error::DimensionMismatch {
                    context: "interaction unitary",
                    expected: dim,
                    actual: u.rows(),
                });
            }
            let deviation = u.unitarity_defect();
            if deviation > DEFAULT_TOL {
                return Err(Error::NotUnitary { index, deviation });
            }
        }
        Ok(Self { rho_d, unitaries })
    }

    pub fn n(&self) -> usize {
        self.unitaries.len()
    }

    pub fn dim(&self) -> usize {
        self.rho_d.dim()
    }

    pub fn rho_d(&self) -> &DensityMatrix {
        &self.rho_d
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    /// `Tr(U_i ρ_d U_j†)`
    pub fn branch_trace(&self, i: usize, j: usize) -> Complex64 {
        // Tr(U_i ρ_d U_j†) = Tr(U_j† U_i ρ_d)
        let left = self.unitaries[j]
            .adjoint()
            .matmul(&self.unitaries[i])
            .expect("square");
        left.matmul(self.rho_d.matrix()).expect("square").trace()
    }

    /// For a pure `ρ_d = |d⟩⟨d|`, the detector states `U_i|d⟩`.
    pub fn induced_detectors(&self) -> Result<DetectorSet> {
        let purity = self.rho_d.purity();
        if (purity - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidArgument(format!(
                "detector state is not pure (purity {purity})"
            )));
        }
        let (_, vectors) = hermitian_eigen(self.rho_d.matrix())?;
        let d = &vectors[0];
        let states = self
            .unitaries
            .iter()
            .map(|u| u.apply(d))
            .collect::<Result<Vec<_>>>()?;
        DetectorSet::new(states)
    }
}

/// Spectral weights `r_k` of `ρ_d` and the per-branch overlaps `⟨d_ki|d_kj⟩`, `|d_ki⟩ = U_i|d_k⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchOverlaps {
    pub weights: Vec<f64>,
    pub branch_grams: Vec<ComplexMatrix>,
}

impl BranchOverlaps {
    pub fn n(&self) -> usize {
        self.branch_grams.first().map_or(0, ComplexMatrix::rows)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ComplexMatrix)> {
        self.weights.iter().copied().zip(&self.branch_grams)
    }
}

/// `Σ_i c_i (e_i ⊗ |d_i⟩)`
pub fn entangle_pure(q: &PureQuanton, d: &DetectorSet) -> Result<ComplexVector> {
    if q.n() != d.n() {
        return Err(path_mismatch(q.n(), d.n()));
    }
    let dim = d.dim();
    let mut entries = Vec::with_capacity(q.n() * dim);
    for (c, v) in q.amplitudes().iter().zip(d.vectors()) {
        entries.extend(v.iter().map(|x| c * x));
    }
    ComplexVector::new(entries)
}

/// `Σ_ij ρ_ij (E_ij ⊗ |d_i⟩⟨d_j|)`
pub fn joint_mixed(q: &MixedQuanton, d: &DetectorSet) -> Result<ComplexMatrix> {
    if q.n() != d.n() {
        return Err(path_mismatch(q.n(), d.n()));
    }
    let dim = d.dim();
    let vs = d.vectors();
    Ok(ComplexMatrix::from_fn(q.n() * dim, q.n() * dim, |r, c| {
        let (i, k) = (r / dim, r % dim);
        let (j, l) = (c / dim, c % dim);
        q.get(i, j) * vs[i][k] * vs[j][l].conj()
    }))
}

/// `Σ_ij ρ_ij (E_ij ⊗ U_i ρ_d U_j†)`
pub fn joint_mixed_detector(
    q: &MixedQuanton,
    m: &MixedDetectorInteraction,
) -> Result<ComplexMatrix> {
    if q.n() != m.n() {
        return Err(path_mismatch(q.n(), m.n()));
    }
    let n = q.n();
    let dim = m.dim();
    let blocks: Vec<Vec<ComplexMatrix>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    m.unitaries[i]
                        .matmul(m.rho_d.matrix())
                        .and_then(|x| x.matmul(&m.unitaries[j].adjoint()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::from_fn(n * dim, n * dim, |r, c| {
        let (i, k) = (r / dim, r % dim);
        let (j, l) = (c / dim, c % dim);
        q.get(i, j) * blocks[i][j][(k, l)]
    }))
}

/// Reduced quanton state: the detector factor of a `(n·dim)`-sided joint state traced out.
pub fn reduce_quanton(joint: &ComplexMatrix, n: usize, dim: usize) -> Result<MixedQuanton> {
    let reduced = partial_trace_second(joint, n, dim)?;
    MixedQuanton::new(validate_density(&reduced, DEFAULT_TOL)?)
}

/// Reduced quanton state with entries `ρ_ij Tr(U_i ρ_d U_j†)`.
pub fn reduce_quanton_mixed_detector(
    q: &MixedQuanton,
    m: &MixedDetectorInteraction,
) -> Result<MixedQuanton> {
    if q.n() != m.n() {
        return Err(path_mismatch(q.n(), m.n()));
    }
    let n = q.n();
    let reduced = ComplexMatrix::from_fn(n, n, |i, j| q.get(i, j) * m.branch_trace(i, j));
    MixedQuanton::new(validate_density(&reduced, DEFAULT_TOL)?)
}

/// Spectral branches of `ρ_d` with their Gram matrices under the interaction.
pub fn branch_overlaps(m: &MixedDetectorInteraction) -> Result<BranchOverlaps> {
    let terms = linalg::spectral_decompose(m.rho_d())?;
    let mut weights = Vec::new();
    let mut branch_grams = Vec::new();
    for (r, d) in terms {
        if r < BRANCH_WEIGHT_CUTOFF {
            continue;
        }
        let states = m
            .unitaries()
            .iter()
            .map(|u| u.apply(&d))
            .collect::<Result<Vec<_>>>()?;
        let n = states.len();
        weights.push(r);
        branch_grams.push(ComplexMatrix::from_fn(n, n, |i, j| {
            states[i].inner(&states[j])
        }));
    }
    Ok(BranchOverlaps {
        weights,
        branch_grams,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tensor;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_quanton() -> PureQuanton {
        let raw = [c(0.3, 0.2), c(-0.5, 0.1), c(0.1, -0.7)];
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        PureQuanton::new(raw.iter().map(|z| z / norm).collect()).unwrap()
    }

    fn sample_detectors() -> DetectorSet {
        let raw = [
            vec![c(1.0, 0.0), c(0.2, 0.3), c(0.0, -0.4), c(0.1, 0.0)],
            vec![c(0.5, 0.5), c(-0.3, 0.0), c(0.2, 0.2), c(0.0, 0.9)],
            vec![c(0.0, 0.1), c(0.8, -0.2), c(0.3, 0.0), c(-0.6, 0.1)],
        ];
        DetectorSet::new(
            raw.into_iter()
                .map(|v| ComplexVector::new(v).unwrap().normalized().unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn sample_mixed() -> MixedQuanton {
        let m = ComplexMatrix::from_row_major(
            3,
            3,
            &[
                c(0.5, 0.0),
                c(0.1, 0.15),
                c(-0.05, 0.02),
                c(0.1, -0.15),
                c(0.3, 0.0),
                c(0.04, 0.0),
                c(-0.05, -0.02),
                c(0.04, 0.0),
                c(0.2, 0.0),
            ],
        )
        .unwrap();
        MixedQuanton::new(validate_density(&m, DEFAULT_TOL).unwrap()).unwrap()
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn orthonormal_detectors_give_bell_state() {
        let q = PureQuanton::equal(2).unwrap();
        let d =
            DetectorSet::new(vec![ComplexVector::basis(2, 0), ComplexVector::basis(2, 1)]).unwrap();
        let psi = entangle_pure(&q, &d).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected = ComplexVector::from_real(&[s, 0.0, 0.0, s]).unwrap();
        assert!(psi.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn identical_detectors_factorize() {
        let q = sample_quanton();
        let d0 = sample_detectors().vectors()[1].clone();
        let d = DetectorSet::new(vec![d0.clone(); 3]).unwrap();
        let psi = entangle_pure(&q, &d).unwrap();
        for i in 0..3 {
            for k in 0..4 {
                assert!((psi[i * 4 + k] - q.amplitudes()[i] * d0[k]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn entangled_state_is_normalized() {
        let psi = entangle_pure(&sample_quanton(), &sample_detectors()).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_count_mismatch_is_rejected() {
        let err = entangle_pure(&PureQuanton::equal(2).unwrap(), &sample_detectors()).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                context: "path count",
                ..
            }
        ));
        let q = MixedQuanton::from_pure(&PureQuanton::equal(4).unwrap());
        assert!(joint_mixed(&q, &sample_detectors()).is_err());
    }

    #[test]
    fn joint_mixed_of_pure_matches_projector() {
        let q = sample_quanton();
        let d = sample_detectors();
        let psi = entangle_pure(&q, &d).unwrap();
        let joint = joint_mixed(&MixedQuanton::from_pure(&q), &d).unwrap();
        assert!(joint.max_abs_diff(&ComplexMatrix::outer(&psi, &psi)) < 1e-15);
    }

    #[test]
    fn joint_mixed_of_diagonal_is_separable_mixture() {
        let rho = ComplexMatrix::from_real_diagonal(&[0.2, 0.5, 0.3]);
        let q = MixedQuanton::new(validate_density(&rho, DEFAULT_TOL).unwrap()).unwrap();
        let d = sample_detectors();
        let joint = joint_mixed(&q, &d).unwrap();
        let mut expected = ComplexMatrix::zeros(12, 12).into_dmatrix();
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = rho[(i, i)].re;
            let proj = ComplexMatrix::outer(&d.vectors()[i], &d.vectors()[i]);
            expected += tensor(&ComplexMatrix::from_real_diagonal(&e), &proj)
                .unwrap()
                .into_dmatrix();
        }
        assert!(joint.max_abs_diff(&ComplexMatrix::from_dmatrix(expected).unwrap()) < 1e-15);
    }

    #[test]
    fn joint_mixed_is_a_density_matrix() {
        let joint = joint_mixed(&sample_mixed(), &sample_detectors()).unwrap();
        validate_density(&joint, DEFAULT_TOL).unwrap();
    }

    #[test]
    fn orthogonal_detectors_destroy_coherence() {
        let q = sample_mixed();
        let d = DetectorSet::uniform_overlap(3, 0.0).unwrap();
        let r = reduce_quanton(&joint_mixed(&q, &d).unwrap(), 3, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { q.get(i, i) } else { c(0.0, 0.0) };
                assert!((r.get(i, j) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn identical_detectors_leave_state_unchanged() {
        let q = sample_mixed();
        let d0 = sample_detectors().vectors()[0].clone();
        let d = DetectorSet::new(vec![d0; 3]).unwrap();
        let r = reduce_quanton(&joint_mixed(&q, &d).unwrap(), 3, 4).unwrap();
        assert!(r.rho().matrix().max_abs_diff(q.rho().matrix()) < 1e-12);
    }

    #[test]
    fn reduced_entries_follow_conjugated_gram() {
        let q = sample_mixed();
        let d = sample_detectors();
        let r = reduce_quanton(&joint_mixed(&q, &d).unwrap(), 3, 4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = q.get(i, j) * d.gram()[(i, j)].conj();
                assert!((r.get(i, j) - expected).norm() < 1e-10);
            }
            assert!((r.get(i, i) - q.get(i, i)).norm() < 1e-12);
        }
    }

    #[test]
    fn equal_unitaries_leave_state_unchanged() {
        let u = pauli_x();
        let rho_d = validate_density(
            &ComplexMatrix::from_real_rows(2, 2, &[0.7, 0.2, 0.2, 0.3]).unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        let m = MixedDetectorInteraction::new(rho_d, vec![u.clone(), u.clone(), u]).unwrap();
        let q = sample_mixed();
        let r = reduce_quanton_mixed_detector(&q, &m).unwrap();
        assert!(r.rho().matrix().max_abs_diff(q.rho().matrix()) < 1e-15);
    }

    #[test]
    fn flip_on_maximally_mixed_detector_kills_coherence() {
        let m = MixedDetectorInteraction::new(
            DensityMatrix::maximally_mixed(2).unwrap(),
            vec![ComplexMatrix::identity(2), pauli_x()],
        )
        .unwrap();
        assert!(m.branch_trace(0, 1).norm() < 1e-15);
        let q = MixedQuanton::from_pure(&PureQuanton::equal(2).unwrap());
        let r = reduce_quanton_mixed_detector(&q, &m).unwrap();
        assert!(r.get(0, 1).norm() < 1e-15);
        assert!((r.get(0, 0).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_detector_matches_detector_set_path() {
        let d = ComplexVector::from_real(&[0.6, 0.8]).unwrap();
        let theta: f64 = 0.7;
        let rot = ComplexMatrix::from_row_major(
            2,
            2,
            &[
                c(theta.cos(), 0.0),
                c(0.0, -theta.sin()),
                c(0.0, -theta.sin()),
                c(theta.cos(), 0.0),
            ],
        )
        .unwrap();
        let phase = ComplexMatrix::from_row_major(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
        )
        .unwrap();
        let m = MixedDetectorInteraction::new(
            DensityMatrix::pure(&d).unwrap(),
            vec![ComplexMatrix::identity(2), rot, phase],
        )
        .unwrap();
        let q = sample_mixed();
        let via_trace = reduce_quanton_mixed_detector(&q, &m).unwrap();
        let induced = m.induced_detectors().unwrap();
        let via_joint = reduce_quanton(&joint_mixed(&q, &induced).unwrap(), 3, 2).unwrap();
        assert!(
            via_trace
                .rho()
                .matrix()
                .max_abs_diff(via_joint.rho().matrix())
                < 1e-10
        );
    }

    #[test]
    fn mixed_detector_joint_reduces_to_trace_formula() {
        let rho_d = validate_density(
            &ComplexMatrix::from_row_major(
                2,
                2,
                &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)],
            )
            .unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        let h = 1.0 / 2f64.sqrt();
        let hadamard = ComplexMatrix::from_real_rows(2, 2, &[h, h, h, -h]).unwrap();
        let m = MixedDetectorInteraction::new(
            rho_d,
            vec![ComplexMatrix::identity(2), pauli_x(), hadamard],
        )
        .unwrap();
        let q = sample_mixed();
        let joint = joint_mixed_detector(&q, &m).unwrap();
        validate_density(&joint, DEFAULT_TOL).unwrap();
        let brute = reduce_quanton(&joint, 3, 2).unwrap();
        let direct = reduce_quanton_mixed_detector(&q, &m).unwrap();
        assert!(brute.rho().matrix().max_abs_diff(direct.rho().matrix()) < 1e-12);
    }

    #[test]
    fn non_unitary_interaction_is_rejected() {
        let bad = ComplexMatrix::from_real_rows(2, 2, &[1.0, 0.1, 0.0, 1.0]).unwrap();
        let err = MixedDetectorInteraction::new(
            DensityMatrix::maximally_mixed(2).unwrap(),
            vec![ComplexMatrix::identity(2), bad],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotUnitary { index: 1, .. }));
    }

    #[test]
    fn pure_detector_has_single_branch() {
        let m = MixedDetectorInteraction::new(
            DensityMatrix::pure(&ComplexVector::basis(3, 1)).unwrap(),
            vec![ComplexMatrix::identity(3); 2],
        )
        .unwrap();
        let b = branch_overlaps(&m).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_flip_branches_have_opposite_overlaps() {
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let m = MixedDetectorInteraction::new(
            DensityMatrix::maximally_mixed(2).unwrap(),
            vec![ComplexMatrix::identity(2), z],
        )
        .unwrap();
        let b = branch_overlaps(&m).unwrap();
        assert_eq!(b.len(), 2);
        let mut offdiag: Vec<f64> = b.branch_grams.iter().map(|g| g[(0, 1)].re).collect();
        offdiag.sort_by(f64::total_cmp);
        assert!((offdiag[0] + 1.0).abs() < 1e-12 && (offdiag[1] - 1.0).abs() < 1e-12);
        for g in &b.branch_grams {
            assert!((g[(0, 0)].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_flip_on_diagonal_mixture_gives_plus_minus_one() {
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let rho_d = validate_density(
            &ComplexMatrix::from_real_diagonal(&[0.5 + 1e-3, 0.5 - 1e-3]),
            DEFAULT_TOL,
        )
        .unwrap();
        let m = MixedDetectorInteraction::new(rho_d, vec![ComplexMatrix::identity(2), z]).unwrap();
        let b = branch_overlaps(&m).unwrap();
        assert!((b.branch_grams[0][(0, 1)].re - 1.0).abs() < 1e-12);
        assert!((b.branch_grams[1][(0, 1)].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_weights_sum_to_one() {
        let rho_d = validate_density(
            &ComplexMatrix::from_row_major(
                3,
                3,
                &[
                    c(0.4, 0.0),
                    c(0.1, 0.1),
                    c(0.0, 0.05),
                    c(0.1, -0.1),
                    c(0.35, 0.0),
                    c(-0.02, 0.0),
                    c(0.0, -0.05),
                    c(-0.02, 0.0),
                    c(0.25, 0.0),
                ],
            )
            .unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        let m = MixedDetectorInteraction::new(rho_d, vec![ComplexMatrix::identity(3); 2]).unwrap();
        let b = branch_overlaps(&m).unwrap();
        assert!((b.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_supports_imply_vanishing_cross_traces() {
        // ρ_d supported on a 2-dimensional block; each U_i shifts it onto its own block
        let n = 3;
        let block = 2;
        let dim = n * block;
        let mut diag = vec![0.0; dim];
        diag[0] = 0.65;
        diag[1] = 0.35;
        let rho_d =
            validate_density(&ComplexMatrix::from_real_diagonal(&diag), DEFAULT_TOL).unwrap();
        let shift = |s: usize| {
            ComplexMatrix::from_fn(dim, dim, |r, col| {
                if r == (col + s * block) % dim {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            })
        };
        let m = MixedDetectorInteraction::new(rho_d, (0..n).map(shift).collect()).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let a = m.unitaries()[i]
                    .matmul(m.rho_d().matrix())
                    .unwrap()
                    .matmul(&m.unitaries()[i].adjoint())
                    .unwrap();
                let b = m.unitaries()[j]
                    .matmul(m.rho_d().matrix())
                    .unwrap()
                    .matmul(&m.unitaries()[j].adjoint())
                    .unwrap();
                assert!(a.matmul(&b).unwrap().trace().norm() < 1e-15);
                assert!(m.branch_trace(i, j).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn from_gram_reproduces_overlaps() {
        let d = DetectorSet::uniform_overlap(3, 0.5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.5 };
                assert!((d.gram()[(i, j)] - c(expected, 0.0)).norm() < 1e-10);
            }
        }
        let singular = DetectorSet::uniform_overlap(4, 1.0).unwrap();
        for v in singular.vectors() {
            assert!(v.max_abs_diff(&singular.vectors()[0]) < 1e-10);
        }
        assert!(DetectorSet::uniform_overlap(3, 1.5).is_err());
        assert!(DetectorSet::from_gram(&uniform_overlap_gram(3, 0.5).unwrap(), 2).is_err());
    }
}
