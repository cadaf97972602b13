//! Photon-counting layer: Poisson coincidence histograms from a model
//! waveform, normalization back to g², and the Cauchy–Schwarz witness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::CorrelationWaveform;

/// Detection chain applied to the ideal rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// Quantum/collection efficiency on the Stokes arm.
    pub efficiency_s: f64,
    /// Quantum/collection efficiency on the anti-Stokes arm.
    pub efficiency_as: f64,
    /// Histogram bin width in seconds.
    pub bin_width_s: f64,
    /// Total acquisition time in seconds.
    pub acquisition_s: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            efficiency_s: 0.7,
            efficiency_as: 0.4,
            bin_width_s: 0.2e-9,
            acquisition_s: 600.0,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("efficiency_s", self.efficiency_s),
            ("efficiency_as", self.efficiency_as),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if !(self.bin_width_s > 0.0) || !(self.acquisition_s > 0.0) {
            return Err(Error::InvalidParameter(
                "bin width and acquisition time must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn pair_efficiency(&self) -> f64 {
        self.efficiency_s * self.efficiency_as
    }
}

/// A simulated (or measured) coincidence histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Bin centers in seconds.
    pub tau_s: Vec<f64>,
    pub counts: Vec<u64>,
    /// Expected counts per bin before the Poisson draw.
    pub expected: Vec<f64>,
    pub detection: DetectionParams,
    pub seed: u64,
}

/// Draw a Poisson histogram from a model coincidence-rate waveform.
///
/// `waveform.g2` must already carry rate units of pairs/second at each τ
/// (including any accidental background). Each bin uses its own ChaCha
/// stream keyed by the bin index, so the draw for a given (seed, bin) does
/// not depend on bin order or count.
pub fn simulate_histogram(
    rate: &CorrelationWaveform,
    tau_s: &[f64],
    detection: &DetectionParams,
    seed: u64,
) -> Result<Histogram> {
    detection.validate()?;
    if tau_s.len() != rate.g2.len() {
        return Err(Error::InvalidParameter(
            "tau grid and rate waveform lengths differ".into(),
        ));
    }
    let gain = detection.pair_efficiency() * detection.bin_width_s * detection.acquisition_s;
    let mut counts = Vec::with_capacity(tau_s.len());
    let mut expected = Vec::with_capacity(tau_s.len());
    for (i, &r) in rate.g2.iter().enumerate() {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rate must be finite and nonnegative, got {r} at bin {i}"
            )));
        }
        let mean = r * gain;
        expected.push(mean);
        if mean == 0.0 {
            counts.push(0);
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let draw = Poisson::new(mean)
            .map_err(|_| Error::Numerical(format!("invalid Poisson mean {mean}")))?
            .sample(&mut rng);
        counts.push(draw as u64);
    }
    Ok(Histogram {
        tau_s: tau_s.to_vec(),
        counts,
        expected,
        detection: *detection,
        seed,
    })
}

/// Background estimate and normalized g² recovered from a histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedG2 {
    pub tau_s: Vec<f64>,
    pub g2: Vec<f64>,
    /// Mean accidental counts per bin estimated from the trailing window.
    pub background: f64,
}

/// Fraction of the trailing τ range used for the accidental floor.
const BACKGROUND_WINDOW: f64 = 0.20;

/// Normalize counts to g²(τ) = counts / background using the trailing 20%
/// of the τ range as the accidental estimate.
pub fn normalize_to_g2(hist: &Histogram) -> Result<NormalizedG2> {
    let n = hist.counts.len();
    if n < 10 {
        return Err(Error::InvalidParameter(
            "histogram too short to estimate a background".into(),
        ));
    }
    let start = ((n as f64) * (1.0 - BACKGROUND_WINDOW)) as usize;
    let tail = &hist.counts[start..];
    let background = tail.iter().sum::<u64>() as f64 / tail.len() as f64;
    if background <= 0.0 {
        return Err(Error::NoSignal(
            "trailing window holds no counts; cannot normalize".into(),
        ));
    }
    Ok(NormalizedG2 {
        tau_s: hist.tau_s.clone(),
        g2: hist.counts.iter().map(|&c| c as f64 / background).collect(),
        background,
    })
}

/// Cauchy–Schwarz witness R2 = [g²_{s,as}]² / (g²_{s,s} g²_{as,as}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchySchwarz {
    pub r2: f64,
    /// True when the classical bound R2 <= 1 is violated.
    pub violation: bool,
    pub peak_cross: f64,
    pub g_ss: f64,
    pub g_asas: f64,
}

/// Evaluate the witness from a normalized cross-correlation peak and the
/// two auto-correlation values (thermal arms give 2 each).
pub fn cauchy_schwarz(peak_cross: f64, g_ss: f64, g_asas: f64) -> Result<CauchySchwarz> {
    if !(g_ss > 0.0) || !(g_asas > 0.0) {
        return Err(Error::InvalidParameter(
            "auto-correlations must be positive".into(),
        ));
    }
    if !(peak_cross >= 0.0) {
        return Err(Error::InvalidParameter(
            "cross-correlation peak must be nonnegative".into(),
        ));
    }
    let r2 = peak_cross * peak_cross / (g_ss * g_asas);
    Ok(CauchySchwarz {
        r2,
        violation: r2 > 1.0,
        peak_cross,
        g_ss,
        g_asas,
    })
}

/// Witness straight from a normalized histogram, assuming thermal arms.
pub fn cauchy_schwarz_from_histogram(norm: &NormalizedG2) -> Result<CauchySchwarz> {
    let peak = norm.g2.iter().cloned().fold(0.0, f64::max);
    cauchy_schwarz(peak, 2.0, 2.0)
}
