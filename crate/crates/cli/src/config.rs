use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use duality_lab::duality::{Scenario, Tolerances};
use duality_lab::Complex64;
use serde::Deserialize;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_GAMMA_STEP: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Run options. Every field is optional so that flags can be layered over a
/// config file; the same struct is used for both sources.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Number of paths.
    #[arg(long)]
    pub n: Option<usize>,
    /// pure_pure, mixed_pure or mixed_mixed.
    #[arg(long)]
    pub scenario: Option<Scenario>,
    /// Number of campaign instances.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Uniform detector overlap in [0, 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub gamma_start: Option<f64>,
    #[arg(long)]
    pub gamma_stop: Option<f64>,
    #[arg(long)]
    pub gamma_step: Option<f64>,
    /// Explicit comma-separated overlap values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub gammas: Option<Vec<f64>>,
    /// Rank of a random mixed quanton.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Dimension of the detector space.
    #[arg(long)]
    pub detector_dim: Option<usize>,
    /// Phase samples per fringe period (at least 256).
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Output file (campaign: path stem for the CSV and JSON pair).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Relation tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Path amplitudes, e.g. "0.6,0.8" or "1,0:1" (re or re:im), normalized on read.
    #[arg(long)]
    pub amplitudes: Option<String>,
}

impl Options {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `self` win over those in `fallback`.
    pub fn over(self, fallback: Options) -> Options {
        Options {
            n: self.n.or(fallback.n),
            scenario: self.scenario.or(fallback.scenario),
            trials: self.trials.or(fallback.trials),
            seed: self.seed.or(fallback.seed),
            gamma: self.gamma.or(fallback.gamma),
            gamma_start: self.gamma_start.or(fallback.gamma_start),
            gamma_stop: self.gamma_stop.or(fallback.gamma_stop),
            gamma_step: self.gamma_step.or(fallback.gamma_step),
            gammas: self.gammas.or(fallback.gammas),
            rank: self.rank.or(fallback.rank),
            detector_dim: self.detector_dim.or(fallback.detector_dim),
            grid_points: self.grid_points.or(fallback.grid_points),
            output: self.output.or(fallback.output),
            format: self.format.or(fallback.format),
            tolerance: self.tolerance.or(fallback.tolerance),
            amplitudes: self.amplitudes.or(fallback.amplitudes),
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario.unwrap_or(Scenario::PurePure)
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        let relation = self.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(relation.is_finite() && relation > 0.0) {
            bail!("tolerance must be a positive finite number, got {relation}");
        }
        Ok(Tolerances {
            relation,
            ..Tolerances::default()
        })
    }

    pub fn gamma(&self) -> Result<Option<f64>> {
        match self.gamma {
            Some(g) if !(0.0..=1.0).contains(&g) => bail!("gamma must lie in [0, 1], got {g}"),
            g => Ok(g),
        }
    }

    pub fn amplitudes(&self) -> Result<Option<Vec<Complex64>>> {
        let Some(text) = &self.amplitudes else {
            return Ok(None);
        };
        let amps = text
            .split(',')
            .map(|tok| parse_complex(tok.trim()))
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = self.n {
            if n != amps.len() {
                bail!("--n {n} disagrees with {} amplitudes", amps.len());
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            bail!("amplitudes must be finite and not all zero");
        }
        Ok(Some(amps.into_iter().map(|a| a / norm).collect()))
    }

    /// Path count from `--n`, the amplitude list, or 2.
    pub fn paths(&self) -> Result<usize> {
        let n = match (self.n, self.amplitudes()?) {
            (Some(n), _) => n,
            (None, Some(a)) => a.len(),
            (None, None) => 2,
        };
        if n < 2 {
            bail!("need at least two paths, got n = {n}");
        }
        Ok(n)
    }

    /// Overlap values for a sweep: `--gammas`, a single `--gamma`, or the
    /// inclusive range `gamma_start..=gamma_stop` in steps of `gamma_step`.
    pub fn gamma_values(&self) -> Result<Vec<f64>> {
        let ranged =
            self.gamma_start.is_some() || self.gamma_stop.is_some() || self.gamma_step.is_some();
        let explicit = usize::from(self.gammas.is_some())
            + usize::from(self.gamma.is_some())
            + usize::from(ranged);
        if explicit > 1 {
            bail!("give only one of --gammas, --gamma or a --gamma-start/--gamma-stop/--gamma-step range");
        }
        let values = if let Some(g) = &self.gammas {
            g.clone()
        } else if let Some(g) = self.gamma {
            vec![g]
        } else {
            let start = self.gamma_start.unwrap_or(0.0);
            let stop = self.gamma_stop.unwrap_or(1.0);
            let step = self.gamma_step.unwrap_or(DEFAULT_GAMMA_STEP);
            gamma_range(start, stop, step)?
        };
        if values.is_empty() {
            bail!("empty gamma range");
        }
        if let Some(g) = values.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            bail!("gamma values must lie in [0, 1], got {g}");
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            bail!("gamma values must be ascending");
        }
        Ok(values)
    }
}

fn parse_complex(tok: &str) -> Result<Complex64> {
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("invalid amplitude component '{s}'"))
    };
    match tok.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(tok)?, 0.0)),
    }
}

fn gamma_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if ![start, stop, step].iter().all(|x| x.is_finite()) {
        bail!("gamma range must be finite");
    }
    if step <= 0.0 {
        bail!("gamma step must be positive, got {step}");
    }
    if stop < start {
        bail!("empty gamma range: stop {stop} < start {start}");
    }
    // absorb rounding so that 0..1 step 0.1 yields exactly 11 points
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            if k + 1 == count && (start + k as f64 * step - stop).abs() < 1e-9 {
                stop
            } else {
                start + k as f64 * step
            }
        })
        .collect())
}
