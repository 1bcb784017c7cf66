//! Monte Carlo sweeps: Bloch-sphere sampling, minimum-fidelity curves, disorder
//! histograms and threshold crossings.
//!
//! Sample `i` of a sweep draws from a ChaCha8 stream keyed by `(seed, i)`, so results
//! do not depend on thread count or scheduling.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{eps_max, min_f_zz};
use crate::builder::{realize_errors, BondErrors, ChainSpec, ErrorModel};
use crate::error::{Error, Result};
use crate::gates::InteractionKind;
use crate::numeric::bisect;
use crate::statevec::BlochOrientation;
use crate::teleport::{effective_channel, teleport_fidelity, teleport_with_errors, TeleportOptions};

pub const DEFAULT_MIN_CURVE_SAMPLES: usize = 5000;
pub const DEFAULT_HISTOGRAM_SAMPLES: usize = 20000;
pub const DEFAULT_BIN_WIDTH: f64 = 0.005;
/// Fidelities above `1 - UNITY_TOL` count towards `unity_mass`.
pub const UNITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Grid values are uniform errors `epsilon`.
    Uniform,
    /// Grid values are standard deviations `sigma` of per-bond Gaussian errors.
    Gaussian,
}

fn default_bin_width() -> f64 {
    DEFAULT_BIN_WIDTH
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: InteractionKind,
    pub ns: Vec<usize>,
    pub mode: SweepMode,
    pub grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSweep(m));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.ns.is_empty() || self.grid.is_empty() {
            return bad("n list and parameter grid must be nonempty".into());
        }
        for &n in &self.ns {
            ChainSpec::new(self.kind, n, ErrorModel::uniform(0.0))?;
        }
        if self.grid.iter().any(|g| !g.is_finite()) {
            return bad("grid values must be finite".into());
        }
        if self.mode == SweepMode::Gaussian && self.grid.iter().any(|&g| g < 0.0) {
            return bad("sigma values must be non-negative".into());
        }
        if !(self.bin_width > 0.0 && self.bin_width <= 0.5) {
            return bad(format!("bin width must lie in (0, 0.5], got {}", self.bin_width));
        }
        Ok(())
    }

    fn expect_mode(&self, mode: SweepMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::InvalidSweep(format!("this sweep needs {mode:?} mode, got {:?}", self.mode)));
        }
        self.validate()
    }
}

/// Generator for sample `index` of a sweep seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `theta0 = arccos(1 - 2u)`, `phi0 = 2 pi v`.
pub fn bloch_from_uniforms(u: f64, v: f64) -> BlochOrientation {
    let theta0 = (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos();
    let phi0 = (TAU * v).rem_euclid(TAU);
    BlochOrientation { theta0, phi0 }
}

pub fn sample_bloch_uniform<R: Rng + ?Sized>(rng: &mut R) -> BlochOrientation {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    bloch_from_uniforms(u, v)
}

fn sample_directions(seed: u64, samples: usize) -> Vec<BlochOrientation> {
    (0..samples as u64).into_par_iter().map(|i| sample_bloch_uniform(&mut sample_rng(seed, i))).collect()
}

fn uniform_fidelity(kind: InteractionKind, n: usize, epsilon: f64, r: BlochOrientation) -> Result<f64> {
    let spec = ChainSpec::new(kind, n, ErrorModel::uniform(epsilon))?;
    Ok(teleport_fidelity(&spec, r)?.weighted_fidelity)
}

/// Direction in the x-z plane used as the exact minimum anchor for ZZ and XY.
pub fn xz_anchor() -> BlochOrientation {
    BlochOrientation::plus_x()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinCurveRow {
    pub kind: InteractionKind,
    pub n: usize,
    pub epsilon: f64,
    pub samples: usize,
    pub sampled_min: f64,
    /// Fidelity at `r = +x`, on the `r . y = 0` circle.
    pub anchor_xz: f64,
    pub anchor_plus_y: f64,
    pub anchor_minus_y: f64,
    /// Minimum over the sphere of the reconstructed Bloch channel.
    pub channel_min: f64,
    /// `(1 + cos^(N-1)(pi eps / 2)) / 2` for ZZ and XY.
    pub closed_form: Option<f64>,
}

pub fn min_fidelity_curve(config: &SweepConfig) -> Result<Vec<MinCurveRow>> {
    config.expect_mode(SweepMode::Uniform)?;
    let dirs = sample_directions(config.seed, config.samples);
    let mut rows = Vec::new();
    for &n in &config.ns {
        for &eps in &config.grid {
            let fs = dirs
                .par_iter()
                .map(|&r| uniform_fidelity(config.kind, n, eps, r))
                .collect::<Result<Vec<f64>>>()?;
            let sampled_min = fs.iter().copied().fold(f64::INFINITY, f64::min);
            let errors = BondErrors(vec![eps; n - 1]);
            let channel_min = effective_channel(config.kind, &errors)?.min_fidelity().0;
            rows.push(MinCurveRow {
                kind: config.kind,
                n,
                epsilon: eps,
                samples: config.samples,
                sampled_min,
                anchor_xz: uniform_fidelity(config.kind, n, eps, xz_anchor())?,
                anchor_plus_y: uniform_fidelity(config.kind, n, eps, BlochOrientation::plus_y())?,
                anchor_minus_y: uniform_fidelity(config.kind, n, eps, BlochOrientation::minus_y())?,
                channel_min,
                closed_form: (config.kind != InteractionKind::Cp).then(|| min_f_zz(n, eps)),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramStats {
    pub kind: InteractionKind,
    pub n: usize,
    pub sigma: f64,
    pub samples: usize,
    pub bin_width: f64,
    /// Bin `k` is centred on `k * bin_width` and spans half a width either side.
    pub centers: Vec<f64>,
    pub counts: Vec<u64>,
    pub mode_bin: usize,
    pub mode_center: f64,
    /// Smallest bin centre whose count is at least half the mode count.
    pub lower_half_max_fidelity: f64,
    /// Fraction of samples with `F > 1 - 1e-9`.
    pub unity_mass: f64,
    /// Samples with `|F - 1| <= 1e-12`.
    pub exact_unity_count: u64,
    pub mean: f64,
    pub min: f64,
}

impl HistogramStats {
    pub fn from_values(kind: InteractionKind, n: usize, sigma: f64, bin_width: f64, values: &[f64]) -> Self {
        let nbins = (1.0 / bin_width).round() as usize + 1;
        let centers: Vec<f64> = (0..nbins).map(|k| k as f64 * bin_width).collect();
        let mut counts = vec![0u64; nbins];
        for &f in values {
            let k = (f / bin_width).round().clamp(0.0, (nbins - 1) as f64) as usize;
            counts[k] += 1;
        }
        let (mode_bin, &mode_count) = counts.iter().enumerate().max_by_key(|&(k, c)| (c, std::cmp::Reverse(k))).unwrap();
        let half = counts.iter().position(|&c| 2 * c >= mode_count).unwrap_or(mode_bin);
        let total = values.len().max(1) as f64;
        HistogramStats {
            kind,
            n,
            sigma,
            samples: values.len(),
            bin_width,
            mode_bin,
            mode_center: centers[mode_bin],
            lower_half_max_fidelity: centers[half],
            unity_mass: values.iter().filter(|&&f| f > 1.0 - UNITY_TOL).count() as f64 / total,
            exact_unity_count: values.iter().filter(|&&f| (f - 1.0).abs() <= 1e-12).count() as u64,
            mean: values.iter().sum::<f64>() / total,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            centers,
            counts,
        }
    }
}

/// Fresh direction and fresh Gaussian bond errors for one histogram sample.
pub fn disorder_sample(kind: InteractionKind, n: usize, sigma: f64, seed: u64, index: u64) -> Result<f64> {
    let mut rng = sample_rng(seed, index);
    let r = sample_bloch_uniform(&mut rng);
    let spec = ChainSpec::new(kind, n, ErrorModel::gaussian(sigma, rng.next_u64()))?;
    let errors = realize_errors(&spec)?;
    Ok(teleport_with_errors(kind, r, &errors, &TeleportOptions::default())?.weighted_fidelity)
}

pub fn disorder_histogram(config: &SweepConfig) -> Result<Vec<HistogramStats>> {
    config.expect_mode(SweepMode::Gaussian)?;
    let mut out = Vec::new();
    for &n in &config.ns {
        for &sigma in &config.grid {
            let values = (0..config.samples as u64)
                .into_par_iter()
                .map(|i| disorder_sample(config.kind, n, sigma, config.seed, i))
                .collect::<Result<Vec<f64>>>()?;
            out.push(HistogramStats::from_values(config.kind, n, sigma, config.bin_width, &values));
        }
    }
    Ok(out)
}

/// Exact minimum fidelity used for the threshold search.
pub fn min_fidelity_at(kind: InteractionKind, n: usize, epsilon: f64) -> Result<f64> {
    match kind {
        InteractionKind::Zz | InteractionKind::Xy => uniform_fidelity(kind, n, epsilon, xz_anchor()),
        InteractionKind::Cp => Ok(effective_channel(kind, &BondErrors(vec![epsilon; n - 1]))?.min_fidelity().0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdCrossing {
    pub kind: InteractionKind,
    pub n: usize,
    /// First `epsilon` in `(0, 1]` where the minimum fidelity reaches `2/3`; `None` if it never does.
    pub epsilon: Option<f64>,
    /// `|Min(F) - 2/3|` at the crossing.
    pub residual: Option<f64>,
    /// `(2/pi) arccos(3^(1/(1-N)))`, reported for every kind.
    pub eps_max_formula: f64,
}

pub const THRESHOLD_SCAN_STEP: f64 = 0.005;

pub fn threshold_crossing(kind: InteractionKind, n: usize) -> Result<ThresholdCrossing> {
    ChainSpec::new(kind, n, ErrorModel::uniform(0.0))?;
    let target = 2.0 / 3.0;
    let g = |e: f64| min_fidelity_at(kind, n, e).map(|f| f - target);
    let steps = (1.0 / THRESHOLD_SCAN_STEP).round() as usize;
    let mut prev = (0.0, g(0.0)?);
    let mut bracket = None;
    for k in 1..=steps {
        let e = k as f64 * THRESHOLD_SCAN_STEP;
        let v = g(e)?;
        if v <= 0.0 {
            bracket = Some((prev.0, e));
            break;
        }
        prev = (e, v);
    }
    let mut crossing = ThresholdCrossing { kind, n, epsilon: None, residual: None, eps_max_formula: eps_max(n) };
    if let Some((lo, hi)) = bracket {
        let mut failure = None;
        let root = bisect(
            |e| match g(e) {
                Ok(v) => v,
                Err(err) => {
                    failure = Some(err);
                    0.0
                }
            },
            lo,
            hi,
            1e-13,
        );
        if let Some(err) = failure {
            return Err(err);
        }
        if let Some(e) = root {
            crossing.residual = Some(g(e)?.abs());
            crossing.epsilon = Some(e);
        }
    }
    Ok(crossing)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlochMapRow {
    pub theta0: f64,
    pub phi0: f64,
    /// `F r`, so the distance from the origin is the fidelity.
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub fidelity: f64,
}

pub fn bloch_map(kind: InteractionKind, n: usize, epsilon: f64, samples: usize, seed: u64) -> Result<Vec<BlochMapRow>> {
    if samples == 0 {
        return Err(Error::InvalidSweep("samples must be at least 1".into()));
    }
    ChainSpec::new(kind, n, ErrorModel::uniform(epsilon))?;
    sample_directions(seed, samples)
        .into_par_iter()
        .map(|r| {
            let f = uniform_fidelity(kind, n, epsilon, r)?;
            let [x, y, z] = r.unit_vector();
            Ok(BlochMapRow { theta0: r.theta0, phi0: r.phi0, x: f * x, y: f * y, z: f * z, fidelity: f })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn inverse_cdf_example() {
        let r = bloch_from_uniforms(0.5, 0.0);
        assert!((r.theta0 - FRAC_PI_2).abs() < 1e-15 && r.phi0 == 0.0);
    }

    #[test]
    fn sample_streams_are_reproducible_and_distinct() {
        let a = sample_bloch_uniform(&mut sample_rng(9, 3));
        assert_eq!(a, sample_bloch_uniform(&mut sample_rng(9, 3)));
        assert_ne!(a, sample_bloch_uniform(&mut sample_rng(9, 4)));
    }

    #[test]
    fn histogram_of_perfect_runs() {
        let h = HistogramStats::from_values(InteractionKind::Cp, 3, 0.0, 0.005, &[1.0; 10]);
        assert_eq!(h.lower_half_max_fidelity, 1.0);
        assert_eq!(h.unity_mass, 1.0);
        assert_eq!(h.counts.iter().sum::<u64>(), 10);
    }

    #[test]
    fn half_max_edge() {
        let mut v = vec![0.9; 10];
        v.extend(vec![0.8; 5]);
        v.extend(vec![0.7; 4]);
        let h = HistogramStats::from_values(InteractionKind::Zz, 3, 0.1, 0.005, &v);
        assert!((h.mode_center - 0.9).abs() < 1e-12);
        assert!((h.lower_half_max_fidelity - 0.8).abs() < 1e-12);
        assert!(h.lower_half_max_fidelity <= h.mode_center);
    }

    #[test]
    fn config_validation() {
        let mut c = SweepConfig {
            kind: InteractionKind::Zz,
            ns: vec![3],
            mode: SweepMode::Uniform,
            grid: vec![0.1],
            samples: 1,
            seed: 0,
            bin_width: DEFAULT_BIN_WIDTH,
        };
        assert!(c.validate().is_ok());
        c.ns = vec![4];
        assert!(c.validate().is_err());
        c.ns = vec![3];
        c.samples = 0;
        assert!(c.validate().is_err());
    }
}
