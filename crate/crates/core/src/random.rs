//! Reproducible random instances.
//!
//! All randomness flows from [`Seed`]. A seed expands into a ChaCha20 stream
//! (`rand_chacha`, seeded with `seed_from_u64`); instance `k` of a campaign
//! draws from stream number `k` of the same key, so instances are independent
//! of each other and of evaluation order.
//!
//! The `sample_*` functions take any [`Rng`]; the `random_*` wrappers take a
//! seed directly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    validate_density, ComplexMatrix, ComplexVector, DensityMatrix, DEFAULT_TOL, MAX_DIM,
};
use crate::states::{
    uniform_overlap_gram, DetectorSet, MixedDetectorInteraction, MixedQuanton, PureQuanton,
};

/// Name of the pseudorandom generator behind every [`Seed`].
pub const GENERATOR: &str = "chacha20-rand_chacha-0.9/seed_from_u64/stream=instance";

pub type InstanceRng = ChaCha20Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Stream 0.
    pub fn rng(self) -> InstanceRng {
        self.stream(0)
    }

    pub fn stream(self, index: u64) -> InstanceRng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    (0..dim).map(|_| complex_gaussian(rng)).collect()
}

/// Haar-random unit vector.
pub fn sample_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexVector> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    loop {
        let v = ComplexVector::new(gaussian_vector(dim, rng))?;
        // a zero draw has probability zero; skip it rather than dividing by it
        if v.norm() > 1e-150 {
            return v.normalized();
        }
    }
}

pub fn sample_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureQuanton> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let v = sample_unit_vector(n, rng)?;
    PureQuanton::new(v.as_slice().to_vec())
}

/// Ginibre density matrix `G G† / Tr(G G†)` with `G` of shape `n × rank`.
pub fn sample_density<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "density dimension {n} out of range"
        )));
    }
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!(
            "rank must lie in 1..={n}, got {rank}"
        )));
    }
    let g = ComplexMatrix::from_row_major(n, rank, &gaussian_vector(n * rank, rng))?;
    let gg = g.matmul(&g.adjoint())?;
    let trace = gg.trace().re;
    validate_density(&gg.scale(Complex64::new(1.0 / trace, 0.0)), DEFAULT_TOL)
}

pub fn sample_mixed<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<MixedQuanton> {
    MixedQuanton::new(sample_density(n, rank, rng)?)
}

/// Haar unitary from the QR factorization of a Ginibre matrix, with the
/// diagonal of `R` made real-positive.
pub fn sample_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "unitary dimension {dim} out of range"
        )));
    }
    let g = ComplexMatrix::from_row_major(dim, dim, &gaussian_vector(dim * dim, rng))?;
    let qr = g.into_dmatrix().qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    ComplexMatrix::from_dmatrix(q)
}

/// `n` independent Haar-random detector states in `dim` dimensions.
pub fn sample_detectors<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<DetectorSet> {
    let vectors = (0..n)
        .map(|_| sample_unit_vector(dim, rng))
        .collect::<Result<Vec<_>>>()?;
    DetectorSet::new(vectors)
}

/// Detector states with every pairwise overlap equal to `gamma`, randomly rotated in `dim` dimensions.
pub fn sample_uniform_overlap_detectors<R: Rng + ?Sized>(
    n: usize,
    gamma: f64,
    dim: usize,
    rng: &mut R,
) -> Result<DetectorSet> {
    let base = DetectorSet::from_gram(&uniform_overlap_gram(n, gamma)?, dim)?;
    base.rotated(&sample_unitary(dim, rng)?)
}

/// Mixed detector of the given rank with independent Haar unitaries per path.
pub fn sample_interaction<R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<MixedDetectorInteraction> {
    let rho_d = sample_density(dim, rank, rng)?;
    let unitaries = (0..n)
        .map(|_| sample_unitary(dim, rng))
        .collect::<Result<Vec<_>>>()?;
    MixedDetectorInteraction::new(rho_d, unitaries)
}

pub fn random_pure(n: usize, seed: Seed) -> Result<PureQuanton> {
    sample_pure(n, &mut seed.rng())
}

pub fn random_density(n: usize, rank: usize, seed: Seed) -> Result<MixedQuanton> {
    sample_mixed(n, rank, &mut seed.rng())
}

pub fn uniform_overlap_detectors(
    n: usize,
    gamma: f64,
    dim: usize,
    seed: Seed,
) -> Result<DetectorSet> {
    sample_uniform_overlap_detectors(n, gamma, dim, &mut seed.rng())
}

pub fn haar_unitary(dim: usize, seed: Seed) -> Result<ComplexMatrix> {
    sample_unitary(dim, &mut seed.rng())
}
