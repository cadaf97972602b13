//! Biphoton wavefunction synthesis and the closed-form Glauber correlation
//! waveforms, plus the entangled-channel coefficients.
//!
//! The spectral transform ψ(τ) = (L/2π) ∫ dδ κ(δ) Φ(δ) e^{-iδτ} is taken
//! with the eigenvalue pair mapped to the lower half-plane (the photon
//! detuning convention δ = -eig(H_eff)), which is what makes the analytic
//! Θ(τ) causality come out of the contour closure.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigensystem::EigenPair;
use crate::error::{Error, Result};
use crate::propagation::PhaseMatching;
use crate::susceptibility::{ComplexSpectrum, SpectrumAxis};

/// How a correlation waveform was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformMethod {
    NumericTransform,
    Eq3,
    Eq4,
    S34GroupDelay,
    EpLimit,
}

impl std::fmt::Display for WaveformMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WaveformMethod::NumericTransform => "numeric_transform",
            WaveformMethod::Eq3 => "eq3",
            WaveformMethod::Eq4 => "eq4",
            WaveformMethod::S34GroupDelay => "s34_group_delay",
            WaveformMethod::EpLimit => "ep_limit",
        };
        f.write_str(s)
    }
}

/// G²(τ) on a τ grid. τ and rates share the internal unit system
/// (1/Γ41 and Γ41) unless the caller has converted at the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationWaveform {
    pub tau_grid: Vec<f64>,
    pub g2: Vec<f64>,
    pub method: WaveformMethod,
    /// Parameter snapshot for CSV comment headers.
    pub descriptor: String,
    /// For the numeric transform: max |ψ(τ<0)| / max |ψ(τ>=0)| before the
    /// causal truncation zeroed the negative-τ leakage.
    pub acausal_leakage: Option<f64>,
}

impl CorrelationWaveform {
    pub fn peak(&self) -> f64 {
        self.g2.iter().cloned().fold(0.0, f64::max)
    }

    /// Peak-normalized copy; no-op on an all-zero waveform.
    pub fn normalized(&self) -> CorrelationWaveform {
        let p = self.peak();
        if p == 0.0 {
            return self.clone();
        }
        CorrelationWaveform {
            g2: self.g2.iter().map(|v| v / p).collect(),
            ..self.clone()
        }
    }
}

/// Nonlinear coupling spectrum κ(δ) together with the constant-κ surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSpectrum {
    pub delta_grid: Vec<f64>,
    pub values: Vec<C64>,
    /// Constant-κ surrogate for the group-delay regime.
    pub kappa0: f64,
}

impl KappaSpectrum {
    /// Two-pole coupling spectrum with the eigenvalue pair mapped to the
    /// lower half-plane: κ(δ) = scale / ((δ + δ+)(δ + δ-)).
    pub fn two_pole(delta_grid: &[f64], pair: &EigenPair, scale: f64) -> Self {
        let values = delta_grid
            .iter()
            .map(|&d| {
                let z = C64::new(d, 0.0);
                scale / ((z + pair.delta_plus) * (z + pair.delta_minus))
            })
            .collect();
        KappaSpectrum {
            delta_grid: delta_grid.to_vec(),
            values,
            kappa0: scale,
        }
    }

    /// Constant coupling κ0 on a grid (group-delay regime surrogate).
    pub fn constant(delta_grid: &[f64], kappa0: f64) -> Self {
        KappaSpectrum {
            delta_grid: delta_grid.to_vec(),
            values: vec![C64::new(kappa0, 0.0); delta_grid.len()],
            kappa0,
        }
    }

    /// κ(δ) = -i (√(ω_S ω_AS)/2c) χ(3)(δ) E1 E2, with the susceptibility
    /// reflected onto the lower-half-plane pole convention (`mirror`), which
    /// requires a symmetric grid.
    pub fn from_chi3(
        chi3: &ComplexSpectrum,
        omega_geom_over_2c: f64,
        e1_amp: f64,
        e2_amp: f64,
        mirror: bool,
    ) -> Result<Self> {
        chi3.validate()?;
        if chi3.axis != SpectrumAxis::RealDelta {
            return Err(Error::InvalidParameter(
                "kappa requires a real-axis chi3 spectrum".into(),
            ));
        }
        let scale = C64::new(0.0, -1.0) * omega_geom_over_2c * e1_amp * e2_amp;
        let mut values: Vec<C64> = chi3.values.iter().map(|v| scale * v).collect();
        if mirror {
            let n = chi3.delta_grid.len();
            let asym = (chi3.delta_grid[0] + chi3.delta_grid[n - 1]).abs();
            let span = chi3.delta_grid[n - 1] - chi3.delta_grid[0];
            if asym > 1e-9 * span {
                return Err(Error::InvalidParameter(
                    "mirrored kappa requires a symmetric delta grid".into(),
                ));
            }
            values.reverse();
        }
        Ok(KappaSpectrum {
            delta_grid: chi3.delta_grid.clone(),
            values,
            kappa0: values_scale(&chi3.values) * omega_geom_over_2c * e1_amp * e2_amp,
        })
    }
}

fn values_scale(values: &[C64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Fraction of the grid tapered at each edge before the transform.
const TAPER_FRACTION: f64 = 0.05;

/// Discrete spectral transform of κΦ to |ψ(τ)|², causally truncated.
///
/// A raised-cosine taper over the outer 5% of the δ grid suppresses
/// truncation ringing. Negative-τ samples are zeroed; the leakage that was
/// removed is reported on the waveform as a diagnostic.
pub fn synthesize_numeric(
    kappa: &KappaSpectrum,
    phi: &ComplexSpectrum,
    tau_grid: &[f64],
    cell_length: f64,
) -> Result<CorrelationWaveform> {
    let grid = &kappa.delta_grid;
    let n = grid.len();
    if n < 2 {
        return Err(Error::InvalidParameter("kappa grid too small".into()));
    }
    if phi.delta_grid.len() != n
        || grid
            .iter()
            .zip(&phi.delta_grid)
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::InvalidParameter(
            "kappa and phi must share one delta grid".into(),
        ));
    }
    let step = grid[1] - grid[0];
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step {
            return Err(Error::InvalidParameter(
                "numeric synthesis requires a uniform delta grid".into(),
            ));
        }
    }
    let tau_max = tau_grid.iter().cloned().fold(0.0, f64::max);
    if tau_max > 0.0 && step > std::f64::consts::PI / tau_max {
        return Err(Error::Resolution(format!(
            "delta grid spacing {step} exceeds pi/tau_max = {}",
            std::f64::consts::PI / tau_max
        )));
    }
    // Tapered product spectrum.
    let taper_len = ((n as f64 * TAPER_FRACTION) as usize).max(1);
    let mut product: Vec<C64> = kappa
        .values
        .iter()
        .zip(&phi.values)
        .map(|(k, p)| k * p)
        .collect();
    for i in 0..taper_len {
        let w = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / taper_len as f64).cos());
        product[i] *= w;
        product[n - 1 - i] *= w;
    }
    let scale = cell_length / (2.0 * std::f64::consts::PI) * step;
    let psi_at = |tau: f64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (d, v) in grid.iter().zip(&product) {
            let phase = C64::from_polar(1.0, -d * tau);
            acc += v * phase;
        }
        acc * scale
    };
    let mut g2 = Vec::with_capacity(tau_grid.len());
    let mut peak_pos = 0.0_f64;
    let mut peak_neg = 0.0_f64;
    for &tau in tau_grid {
        let a = psi_at(tau).norm();
        if tau >= 0.0 {
            peak_pos = peak_pos.max(a);
            g2.push(a * a);
        } else {
            peak_neg = peak_neg.max(a);
            g2.push(0.0);
        }
    }
    let leakage = if peak_pos > 0.0 {
        peak_neg / peak_pos
    } else {
        0.0
    };
    Ok(CorrelationWaveform {
        tau_grid: tau_grid.to_vec(),
        g2,
        method: WaveformMethod::NumericTransform,
        descriptor: format!("n_delta={n}, leakage={leakage:.3e}"),
        acausal_leakage: Some(leakage),
    })
}

/// Strong-regime closed form:
/// G²(τ) = W1 e^{-2τΓ_eff/W_D} [1 - cos(Ω_e τ/W_D)] Θ(τ).
pub fn g2_eq3(
    tau_grid: &[f64],
    w1: f64,
    gamma_eff: f64,
    omega_e: C64,
    w_d: f64,
) -> Result<CorrelationWaveform> {
    if omega_e.im.abs() > 1e-9 * (1.0 + omega_e.norm()) {
        return Err(Error::WrongRegime(format!(
            "eq3 needs a real splitting, got omega_e = {omega_e}"
        )));
    }
    let om = omega_e.re;
    let g2 = tau_grid
        .iter()
        .map(|&t| {
            if t < 0.0 {
                0.0
            } else {
                w1 * (-2.0 * t * gamma_eff / w_d).exp() * (1.0 - (om * t / w_d).cos())
            }
        })
        .collect();
    Ok(CorrelationWaveform {
        tau_grid: tau_grid.to_vec(),
        g2,
        method: WaveformMethod::Eq3,
        descriptor: format!("w1={w1}, gamma_eff={gamma_eff}, omega_e={om}, w_d={w_d}"),
        acausal_leakage: None,
    })
}

/// Weak-regime closed form in the canonical two-exponential reading:
/// G²(τ) = (W1/|Ω_e|²) [e^{-Γ_e- τ/W_D} - e^{-Γ_e+ τ/W_D}]² Θ(τ)
/// with Γ_e± = Γ_eff ± |Ω_e|/2.
///
/// The verbatim printed exponent (Ω_e in place of |Ω_e|/2) grows without
/// bound whenever |Ω_e| > Γ_eff and is available behind `verbatim`.
pub fn g2_eq4(
    tau_grid: &[f64],
    w1: f64,
    gamma_eff: f64,
    splitting_abs: f64,
    w_d: f64,
) -> Result<CorrelationWaveform> {
    g2_eq4_with(tau_grid, w1, gamma_eff, splitting_abs, w_d, false)
}

pub fn g2_eq4_with(
    tau_grid: &[f64],
    w1: f64,
    gamma_eff: f64,
    splitting_abs: f64,
    w_d: f64,
    verbatim: bool,
) -> Result<CorrelationWaveform> {
    let half = if verbatim {
        splitting_abs
    } else {
        0.5 * splitting_abs
    };
    let g_minus = gamma_eff - half;
    if !verbatim && g_minus <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma_e_minus = {g_minus} <= 0: unphysical growth"
        )));
    }
    let g_plus = gamma_eff + half;
    let norm = if splitting_abs > 0.0 {
        w1 / (splitting_abs * splitting_abs)
    } else {
        w1
    };
    let g2 = tau_grid
        .iter()
        .map(|&t| {
            if t < 0.0 {
                0.0
            } else {
                let d = (-g_minus * t / w_d).exp() - (-g_plus * t / w_d).exp();
                norm * d * d
            }
        })
        .collect();
    Ok(CorrelationWaveform {
        tau_grid: tau_grid.to_vec(),
        g2,
        method: WaveformMethod::Eq4,
        descriptor: format!(
            "w1={w1}, gamma_eff={gamma_eff}, splitting={splitting_abs}, w_d={w_d}, verbatim={verbatim}"
        ),
        acausal_leakage: None,
    })
}

/// General two-pole residue form valid for any complex splitting:
/// G²(τ) = W1 |e^{iδ+ τ/W_D} - e^{iδ- τ/W_D}|² Θ(τ).
///
/// Reduces to the strong-regime oscillation for a real splitting and to the
/// weak-regime two-exponential difference for an imaginary one; in between
/// (Δ3 ≠ 0) it gives an oscillation whose minima no longer touch zero.
pub fn g2_two_pole(tau_grid: &[f64], w1: f64, pair: &EigenPair, w_d: f64) -> CorrelationWaveform {
    let g2 = tau_grid
        .iter()
        .map(|&t| {
            if t < 0.0 {
                0.0
            } else {
                let s = t / w_d;
                let a = (C64::new(0.0, 1.0) * pair.delta_plus * s).exp();
                let b = (C64::new(0.0, 1.0) * pair.delta_minus * s).exp();
                w1 * (a - b).norm_sqr()
            }
        })
        .collect();
    CorrelationWaveform {
        tau_grid: tau_grid.to_vec(),
        g2,
        method: WaveformMethod::NumericTransform,
        descriptor: format!(
            "two_pole, delta_plus={}, delta_minus={}, w_d={w_d}",
            pair.delta_plus, pair.delta_minus
        ),
        acausal_leakage: None,
    }
}

/// Group-delay regime single exponential:
/// G²(τ) = W1 κ0² v_g² e^{-2 α v_g τ / W_D} Θ(τ).
///
/// α v_g carries 1/s; the caller supplies τ in the matching unit.
pub fn g2_group_delay(
    tau_grid: &[f64],
    w1: f64,
    kappa0: f64,
    pm: &PhaseMatching,
    w_d: f64,
    time_unit_s: f64,
) -> Result<CorrelationWaveform> {
    if !(pm.alpha > 0.0) || !(pm.v_g > 0.0) {
        return Err(Error::InvalidParameter(
            "group-delay waveform needs alpha > 0 and v_g > 0".into(),
        ));
    }
    let rate = 2.0 * pm.alpha * pm.v_g * time_unit_s / w_d;
    let amp = w1 * kappa0 * kappa0 * pm.v_g * pm.v_g;
    let g2 = tau_grid
        .iter()
        .map(|&t| if t < 0.0 { 0.0 } else { amp * (-rate * t).exp() })
        .collect();
    Ok(CorrelationWaveform {
        tau_grid: tau_grid.to_vec(),
        g2,
        method: WaveformMethod::S34GroupDelay,
        descriptor: format!("w1={w1}, kappa0={kappa0}, alpha={}, v_g={}", pm.alpha, pm.v_g),
        acausal_leakage: None,
    })
}

/// Coalesced-eigenstate reference shape τ² e^{-2Γ_eff τ/W_D}, the common
/// Ω_e → 0 limit of the strong- and weak-regime forms.
pub fn ep_limit(tau_grid: &[f64], w1: f64, gamma_eff: f64, w_d: f64) -> CorrelationWaveform {
    let g2 = tau_grid
        .iter()
        .map(|&t| {
            if t < 0.0 {
                0.0
            } else {
                w1 * t * t * (-2.0 * gamma_eff * t / w_d).exp()
            }
        })
        .collect();
    CorrelationWaveform {
        tau_grid: tau_grid.to_vec(),
        g2,
        method: WaveformMethod::EpLimit,
        descriptor: format!("w1={w1}, gamma_eff={gamma_eff}, w_d={w_d}"),
        acausal_leakage: None,
    }
}

/// Average coincidence rate R_cc(τ) = G²(τ) + R_S R_AS.
pub fn coincidence_rate(
    waveform: &CorrelationWaveform,
    r_s: f64,
    r_as: f64,
) -> Result<CorrelationWaveform> {
    if r_s < 0.0 || r_as < 0.0 {
        return Err(Error::InvalidParameter(
            "singles rates must be nonnegative".into(),
        ));
    }
    let bg = r_s * r_as;
    Ok(CorrelationWaveform {
        g2: waveform.g2.iter().map(|v| v + bg).collect(),
        descriptor: format!("{}, background={bg}", waveform.descriptor),
        ..waveform.clone()
    })
}

/// One coherent channel of the frequency-entangled state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Offset of the signal/anti-Stokes frequency pair from center.
    pub frequency_offset: f64,
    pub linewidth: f64,
    /// Amplitude coefficient N_j (real, nonnegative).
    pub amplitude: f64,
}

/// Multi-channel frequency-entangled state coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub channels: Vec<Channel>,
    pub dimension: usize,
}

/// Input to [`channel_state`].
pub enum ChannelInput<'a> {
    Pair(&'a EigenPair, f64),
    /// Triple channel energies and the configurable third-channel weight N3.
    Triple(&'a [C64; 3], f64, f64),
}

/// Entangled-channel coefficients from eigenvalue channels.
///
/// For the two-channel state normalization and destructive interference
/// force N1 = N2 = 1/√2; at the EP the dimension collapses to one. The
/// three-channel weights split the remaining norm evenly between the first
/// two channels, with N3 configurable.
pub fn channel_state(input: ChannelInput<'_>) -> Result<ChannelState> {
    match input {
        ChannelInput::Pair(pair, ep_tolerance) => {
            if pair.splitting_abs() < ep_tolerance {
                return Ok(ChannelState {
                    channels: vec![Channel {
                        frequency_offset: pair.delta_plus.re,
                        linewidth: pair.delta_plus.im,
                        amplitude: 1.0,
                    }],
                    dimension: 1,
                });
            }
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            let half = 0.5 * pair.omega_e;
            let channels = vec![
                Channel {
                    frequency_offset: half.re,
                    linewidth: pair.delta_plus.im,
                    amplitude: inv_sqrt2,
                },
                Channel {
                    frequency_offset: -half.re,
                    linewidth: pair.delta_minus.im,
                    amplitude: inv_sqrt2,
                },
            ];
            Ok(ChannelState {
                channels,
                dimension: 2,
            })
        }
        ChannelInput::Triple(roots, n3, _ep_tolerance) => {
            if !(0.0..=1.0).contains(&n3) {
                return Err(Error::InvalidParameter(format!(
                    "N3 must lie in [0, 1], got {n3}"
                )));
            }
            let n12 = ((1.0 - n3 * n3) / 2.0).sqrt();
            let amps = [n12, n12, n3];
            let channels = roots
                .iter()
                .zip(amps)
                .map(|(r, a)| Channel {
                    frequency_offset: r.re,
                    linewidth: r.im,
                    amplitude: a,
                })
                .collect();
            Ok(ChannelState {
                channels,
                dimension: 3,
            })
        }
    }
}

impl ChannelState {
    pub fn norm_sq(&self) -> f64 {
        self.channels.iter().map(|c| c.amplitude * c.amplitude).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensystem::{eigenvalues, EP_TOLERANCE};
    use crate::params::{FieldParams, SystemParams};
    use crate::susceptibility::symmetric_grid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn sys() -> SystemParams {
        SystemParams::default()
    }

    fn pair(omega3: f64) -> EigenPair {
        eigenvalues(
            &sys(),
            &FieldParams {
                omega3,
                ..FieldParams::default()
            },
        )
        .unwrap()
    }

    fn tau_grid(max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 * max / (n - 1) as f64).collect()
    }

    /// Least-squares scale matching, then relative L2 error.
    fn l2_error_after_scale(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let den: f64 = a.iter().map(|x| x * x).sum();
        let s = num / den;
        let err: f64 = a.iter().zip(b).map(|(x, y)| (s * x - y).powi(2)).sum();
        let norm: f64 = b.iter().map(|y| y * y).sum();
        (err / norm).sqrt()
    }

    #[test]
    fn eq3_zero_at_origin_and_zero_spacing() {
        let p = pair(3.0);
        let om = p.omega_e.re;
        let taus = tau_grid(20.0, 4001);
        let w = g2_eq3(&taus, 1.0, 0.6, p.omega_e, 1.0).unwrap();
        assert_eq!(w.g2[0], 0.0);
        // Interior zeros at 2π n / Ω_e.
        let period = 2.0 * std::f64::consts::PI / om;
        for n in 1..=3 {
            let t = n as f64 * period;
            let idx = taus.iter().position(|&x| x >= t).unwrap();
            assert!(w.g2[idx] < 1e-4 * w.peak());
        }
    }

    #[test]
    fn eq3_interior_zero_count() {
        let p = pair(3.0);
        let om = p.omega_e.re;
        let t_end = 17.3;
        let taus = tau_grid(t_end, 20000);
        let w = g2_eq3(&taus, 1.0, 0.6, p.omega_e, 1.0).unwrap();
        let expected = (om * t_end / (2.0 * std::f64::consts::PI)).floor() as usize;
        // Count minima that touch zero.
        let mut zeros = 0;
        for i in 1..taus.len() - 1 {
            if w.g2[i] < w.g2[i - 1] && w.g2[i] <= w.g2[i + 1] && w.g2[i] < 1e-6 * w.peak() {
                zeros += 1;
            }
        }
        assert_eq!(zeros, expected);
    }

    #[test]
    fn eq3_envelope_decay_per_period() {
        let p = pair(3.0);
        let om = p.omega_e.re;
        let gamma = 0.6;
        let taus = tau_grid(30.0, 60001);
        let w = g2_eq3(&taus, 1.0, gamma, p.omega_e, 1.0).unwrap();
        let period = 2.0 * std::f64::consts::PI / om;
        // Peak near the middle of each period.
        let peak_in = |t0: f64, t1: f64| {
            taus.iter()
                .zip(&w.g2)
                .filter(|(t, _)| **t >= t0 && **t < t1)
                .map(|(_, g)| *g)
                .fold(0.0, f64::max)
        };
        let p1 = peak_in(0.0, period);
        let p2 = peak_in(period, 2.0 * period);
        let expect = (-4.0 * std::f64::consts::PI * gamma / om).exp();
        assert_relative_eq!(p2 / p1, expect, max_relative = 1e-3);
    }

    #[test]
    fn eq3_rejects_complex_splitting() {
        let taus = tau_grid(5.0, 10);
        assert!(g2_eq3(&taus, 1.0, 0.6, C64::new(0.3, 0.4), 1.0).is_err());
    }

    #[test]
    fn eq4_maximum_position() {
        let p = pair(0.4);
        let taus = tau_grid(15.0, 150001);
        let w = g2_eq4(&taus, 1.0, 0.6, p.splitting_abs(), 1.0).unwrap();
        assert_eq!(w.g2[0], 0.0);
        let (gp, gm) = (p.gamma_e_plus.unwrap(), p.gamma_e_minus.unwrap());
        let t_star = (gp / gm).ln() / (gp - gm);
        assert_relative_eq!(t_star, 1.902, max_relative = 1e-3);
        let imax = w
            .g2
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_abs_diff_eq!(taus[imax], t_star, epsilon = 1e-3);
    }

    #[test]
    fn eq4_asymptotic_log_slope() {
        let p = pair(0.4);
        let taus = tau_grid(60.0, 6001);
        let w = g2_eq4(&taus, 1.0, 0.6, p.splitting_abs(), 1.0).unwrap();
        let gm = p.gamma_e_minus.unwrap();
        let (i, j) = (5000, 5500);
        let slope = (w.g2[j].ln() - w.g2[i].ln()) / (taus[j] - taus[i]);
        assert_relative_eq!(slope, -2.0 * gm, max_relative = 1e-2);
    }

    #[test]
    fn eq4_rejects_unphysical_growth() {
        assert!(g2_eq4(&tau_grid(5.0, 10), 1.0, 0.6, 1.3, 1.0).is_err());
    }

    #[test]
    fn eq4_verbatim_equals_canonical_with_halved_splitting() {
        let taus = tau_grid(10.0, 101);
        let a = g2_eq4_with(&taus, 1.0, 0.6, 0.3, 1.0, true).unwrap();
        let mut b = g2_eq4_with(&taus, 1.0, 0.6, 0.6, 1.0, false).unwrap();
        // Identical exponents; only the 1/|Ω_e|² prefactor differs (by 4).
        for v in &mut b.g2 {
            *v *= 4.0;
        }
        for (x, y) in a.g2.iter().zip(&b.g2) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn ep_limit_peak_position() {
        let taus = tau_grid(10.0, 100001);
        let w = ep_limit(&taus, 1.0, 0.6, 1.0);
        let imax = w
            .g2
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_abs_diff_eq!(taus[imax], 1.0 / 0.6, epsilon = 1e-3);
    }

    #[test]
    fn ep_continuity_of_both_closed_forms() {
        let taus = tau_grid(12.0, 2401);
        let reference = ep_limit(&taus, 1.0, 0.6, 1.0).normalized();
        let eq3 = g2_eq3(&taus, 1.0, 0.6, C64::new(1e-4, 0.0), 1.0)
            .unwrap()
            .normalized();
        let eq4 = g2_eq4(&taus, 1.0, 0.6, 1e-4, 1.0).unwrap().normalized();
        for w in [&eq3, &eq4] {
            let linf = w
                .g2
                .iter()
                .zip(&reference.g2)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(linf < 1e-3, "L-inf after normalization = {linf}");
        }
    }

    #[test]
    fn numeric_transform_matches_eq3() {
        let p = pair(3.0);
        let grid = symmetric_grid(80.0, 16384);
        let kappa = KappaSpectrum::two_pole(&grid, &p, 1.0);
        let phi = ComplexSpectrum {
            delta_grid: grid.clone(),
            values: vec![C64::new(1.0, 0.0); grid.len()],
            axis: SpectrumAxis::RealDelta,
        };
        let taus = tau_grid(12.0, 1200);
        let numeric = synthesize_numeric(&kappa, &phi, &taus, 0.07).unwrap();
        let closed = g2_eq3(&taus, 1.0, 0.6, p.omega_e, 1.0).unwrap();
        let err = l2_error_after_scale(&numeric.g2, &closed.g2);
        assert!(err < 0.02, "relative L2 error = {err}");
    }

    #[test]
    fn numeric_transform_matches_eq4() {
        let p = pair(0.4);
        let grid = symmetric_grid(80.0, 16384);
        let kappa = KappaSpectrum::two_pole(&grid, &p, 1.0);
        let phi = ComplexSpectrum {
            delta_grid: grid.clone(),
            values: vec![C64::new(1.0, 0.0); grid.len()],
            axis: SpectrumAxis::RealDelta,
        };
        let taus = tau_grid(25.0, 1200);
        let numeric = synthesize_numeric(&kappa, &phi, &taus, 0.07).unwrap();
        let closed = g2_eq4(&taus, 1.0, 0.6, p.splitting_abs(), 1.0).unwrap();
        let err = l2_error_after_scale(&numeric.g2, &closed.g2);
        assert!(err < 0.02, "relative L2 error = {err}");
    }

    #[test]
    fn numeric_transform_zero_kappa() {
        let grid = symmetric_grid(10.0, 256);
        let kappa = KappaSpectrum::constant(&grid, 0.0);
        let phi = ComplexSpectrum {
            delta_grid: grid.clone(),
            values: vec![C64::new(1.0, 0.0); grid.len()],
            axis: SpectrumAxis::RealDelta,
        };
        let w = synthesize_numeric(&kappa, &phi, &tau_grid(5.0, 50), 0.07).unwrap();
        assert!(w.g2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn numeric_transform_causality() {
        let p = pair(3.0);
        let grid = symmetric_grid(80.0, 8192);
        let kappa = KappaSpectrum::two_pole(&grid, &p, 1.0);
        let phi = ComplexSpectrum {
            delta_grid: grid.clone(),
            values: vec![C64::new(1.0, 0.0); grid.len()],
            axis: SpectrumAxis::RealDelta,
        };
        let taus: Vec<f64> = (-200..1000).map(|i| i as f64 * 0.01).collect();
        let w = synthesize_numeric(&kappa, &phi, &taus, 0.07).unwrap();
        for (t, g) in taus.iter().zip(&w.g2) {
            if *t < 0.0 {
                assert_eq!(*g, 0.0);
            }
        }
        assert!(w.acausal_leakage.unwrap() < 0.01);
    }

    #[test]
    fn numeric_transform_rejects_nonuniform_grid() {
        let grid = vec![0.0, 1.0, 3.0];
        let kappa = KappaSpectrum::constant(&grid, 1.0);
        let phi = ComplexSpectrum {
            delta_grid: grid,
            values: vec![C64::new(1.0, 0.0); 3],
            axis: SpectrumAxis::RealDelta,
        };
        assert!(matches!(
            synthesize_numeric(&kappa, &phi, &[0.0, 1.0], 0.07),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn numeric_transform_nyquist_guard() {
        let grid = symmetric_grid(10.0, 16);
        let kappa = KappaSpectrum::constant(&grid, 1.0);
        let phi = ComplexSpectrum {
            delta_grid: grid.clone(),
            values: vec![C64::new(1.0, 0.0); grid.len()],
            axis: SpectrumAxis::RealDelta,
        };
        assert!(matches!(
            synthesize_numeric(&kappa, &phi, &[0.0, 100.0], 0.07),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn two_pole_reduces_to_eq3_and_eq4() {
        let taus = tau_grid(15.0, 1501);
        // Strong regime: two_pole carries an extra residue factor of 2.
        let ps = pair(3.0);
        let general = g2_two_pole(&taus, 0.5, &ps, 1.0);
        let eq3 = g2_eq3(&taus, 1.0, 0.6, ps.omega_e, 1.0).unwrap();
        for (a, b) in general.g2.iter().zip(&eq3.g2) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
        }
        // Weak regime: eq4 carries 1/|Ω_e|².
        let pw = pair(0.4);
        let s2 = pw.splitting_abs() * pw.splitting_abs();
        let general = g2_two_pole(&taus, 1.0 / s2, &pw, 1.0);
        let eq4 = g2_eq4(&taus, 1.0, 0.6, pw.splitting_abs(), 1.0).unwrap();
        for (a, b) in general.g2.iter().zip(&eq4.g2) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_pole_detuned_minima_lift_off_zero() {
        let p = eigenvalues(
            &sys(),
            &FieldParams {
                omega3: 0.62,
                delta3: 4.0,
                ..FieldParams::default()
            },
        )
        .unwrap();
        let taus = tau_grid(10.0, 10001);
        let w = g2_two_pole(&taus, 1.0, &p, 1.0).normalized();
        // First interior minimum after the first peak stays well above zero.
        let mut first_min = None;
        let mut seen_peak = false;
        for i in 1..taus.len() - 1 {
            if w.g2[i] > w.g2[i - 1] && w.g2[i] >= w.g2[i + 1] && w.g2[i] > 0.3 {
                seen_peak = true;
            }
            if seen_peak && w.g2[i] < w.g2[i - 1] && w.g2[i] <= w.g2[i + 1] {
                first_min = Some(w.g2[i]);
                break;
            }
        }
        let m = first_min.expect("detuned waveform should still oscillate");
        assert!(m > 0.02, "minimum {m} should not touch zero");
    }

    #[test]
    fn coincidence_rate_background() {
        let taus = tau_grid(5.0, 11);
        let w = g2_eq3(&taus, 0.0, 0.6, C64::new(1.0, 0.0), 1.0).unwrap();
        let r = coincidence_rate(&w, 2.0, 3.0).unwrap();
        assert!(r.g2.iter().all(|&v| v == 6.0));
        let id = coincidence_rate(&w, 0.0, 5.0).unwrap();
        assert_eq!(id.g2, w.g2);
    }

    #[test]
    fn scale_covariance() {
        let p = pair(3.0);
        let taus = tau_grid(10.0, 101);
        let a = g2_eq3(&taus, 1.0, 0.6, p.omega_e, 1.0).unwrap();
        let b = g2_eq3(&taus, 2.0, 0.6, p.omega_e, 1.0).unwrap();
        for (x, y) in a.g2.iter().zip(&b.g2) {
            assert_eq!(*y, 2.0 * x);
        }
    }

    #[test]
    fn channel_state_strong_regime() {
        let p = pair(3.0);
        let st = channel_state(ChannelInput::Pair(&p, EP_TOLERANCE)).unwrap();
        assert_eq!(st.dimension, 2);
        for c in &st.channels {
            assert_relative_eq!(c.amplitude, std::f64::consts::FRAC_1_SQRT_2);
        }
        assert_relative_eq!(st.norm_sq(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            st.channels[0].frequency_offset - st.channels[1].frequency_offset,
            p.omega_e.re,
            max_relative = 1e-12
        );
    }

    #[test]
    fn channel_state_collapses_at_ep() {
        let p = pair(0.8);
        let st = channel_state(ChannelInput::Pair(&p, EP_TOLERANCE)).unwrap();
        assert_eq!(st.dimension, 1);
    }

    #[test]
    fn channel_state_triple_normalized() {
        let roots = [
            C64::new(-2.0, 0.6),
            C64::new(0.0, 1.0),
            C64::new(2.0, 0.6),
        ];
        let st = channel_state(ChannelInput::Triple(&roots, 0.5, EP_TOLERANCE)).unwrap();
        assert_eq!(st.dimension, 3);
        assert_relative_eq!(st.norm_sq(), 1.0, max_relative = 1e-12);
    }
}
