//! Slow-light and phase-matching quantities: group velocity, EIT loss,
//! complex wavenumber mismatch, the longitudinal detuning function Φ, and
//! the phase-matching bandwidth.
//!
//! The wavenumber follows the linear model k_AS = k_AS0 + δ/v_g + iα; the
//! printed remark that the real part of k_AS is Raman gain is not carried
//! beyond this linear structure.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{FieldParams, SystemParams, SPEED_OF_LIGHT};
use crate::susceptibility::{ComplexSpectrum, SpectrumAxis};

/// Both routes to the phase-matching bandwidth, Γ41 units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    /// 2π v_g / L, converted to Γ41 units.
    pub exact: f64,
    /// π |Ω3|² / (OD Γ41), the printed approximation; the regime classifier
    /// consumes this one by default.
    pub approx: f64,
}

/// Phase-matching bundle for a fixed parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatching {
    /// Group velocity of the anti-Stokes photon, m/s.
    pub v_g: f64,
    /// EIT loss coefficient, 1/m.
    pub alpha: f64,
    /// Central wavenumber, 1/m.
    pub k_as0: f64,
    /// Cell length, m.
    pub cell_length: f64,
    /// Γ41 in rad/s, for converting δ between unit systems.
    gamma41_rad_s: f64,
    gamma41: f64,
    pub bandwidth: Bandwidth,
    /// When set, Φ(δ) ≡ 1 (the nonlinear-response regimes, where the
    /// longitudinal detuning function is negligible).
    pub bypass: bool,
}

/// Group velocity of the anti-Stokes field, m/s. The coupling convention
/// `g2_factor` is applied to |Ω3|² as everywhere else.
pub fn group_velocity(
    sys: &SystemParams,
    fields: &FieldParams,
    g2_factor: f64,
    w_d_factor: f64,
) -> Result<f64> {
    sys.validate()?;
    fields.validate()?;
    let g = sys.gamma41_rad_s();
    // Work in rad/s.
    let om_sq = g2_factor * (fields.omega3 * g).powi(2);
    let g41 = g;
    let g21 = sys.gamma21() / sys.gamma41 * g;
    let c2 = fields.c2_const.re * g * g;
    let den_core = om_sq + c2 - g21 * g21;
    if den_core.abs() < 1e-30 {
        return Err(Error::SingularParameter(
            "group-velocity denominator |Ω3|² + c2 - Γ21² vanishes".into(),
        ));
    }
    let k14 = sys.k_as0();
    let num = 2.0 * k14 * sys.cell_length * SPEED_OF_LIGHT * (om_sq - g41 * g21).powi(2);
    let den = sys.omega14() * sys.od * g41 * w_d_factor * den_core;
    Ok(num / den)
}

/// EIT loss coefficient α = 2 N σ14 Γ41 Γ21 / (g²|Ω3|² + 4 Γ41 Γ21), 1/m.
pub fn absorption_alpha(sys: &SystemParams, fields: &FieldParams, g2_factor: f64) -> Result<f64> {
    sys.validate()?;
    fields.validate()?;
    let om_sq = g2_factor * fields.omega3 * fields.omega3;
    let g41 = sys.gamma41;
    let g21 = sys.gamma21();
    Ok(2.0 * sys.atomic_density * sys.sigma14() * g41 * g21 / (om_sq + 4.0 * g41 * g21))
}

/// Phase-matching bandwidth, Γ41 units, via both routes.
pub fn bandwidth(sys: &SystemParams, fields: &FieldParams, g2_factor: f64) -> Result<Bandwidth> {
    let v_g = group_velocity(sys, fields, g2_factor, 1.0)?;
    let exact = 2.0 * std::f64::consts::PI * v_g / sys.cell_length / sys.gamma41_rad_s()
        * sys.gamma41;
    let approx =
        std::f64::consts::PI * fields.omega3 * fields.omega3 / (sys.od * sys.gamma41);
    Ok(Bandwidth { exact, approx })
}

impl PhaseMatching {
    pub fn new(sys: &SystemParams, fields: &FieldParams, g2_factor: f64) -> Result<Self> {
        let v_g = group_velocity(sys, fields, g2_factor, 1.0)?;
        let alpha = absorption_alpha(sys, fields, g2_factor)?;
        let bw = bandwidth(sys, fields, g2_factor)?;
        Ok(PhaseMatching {
            v_g,
            alpha,
            k_as0: sys.k_as0(),
            cell_length: sys.cell_length,
            gamma41_rad_s: sys.gamma41_rad_s(),
            gamma41: sys.gamma41,
            bandwidth: bw,
            bypass: false,
        })
    }

    pub fn with_bypass(mut self) -> Self {
        self.bypass = true;
        self
    }

    /// Complex wavenumber mismatch Δk(δ) = δ/v_g + iα, 1/m. δ in Γ41 units.
    pub fn dk(&self, delta: f64) -> C64 {
        let delta_rad_s = delta / self.gamma41 * self.gamma41_rad_s;
        C64::new(delta_rad_s / self.v_g, self.alpha)
    }

    /// Longitudinal detuning function Φ(δ) = sinc(ΔkL/2) e^{-iΔkL/2}.
    pub fn phi_at(&self, delta: f64) -> Result<C64> {
        if self.bypass {
            return Ok(C64::new(1.0, 0.0));
        }
        if !(self.v_g > 0.0) {
            return Err(Error::SingularParameter(
                "phi requires v_g > 0 (or the bypass flag)".into(),
            ));
        }
        let z = self.dk(delta) * (self.cell_length / 2.0);
        if z.im.abs() > 700.0 {
            return Err(Error::Numerical(format!(
                "overflow evaluating phi: alpha*L/2 = {}",
                z.im
            )));
        }
        let i = C64::new(0.0, 1.0);
        Ok(complex_sinc(z) * (-i * z).exp())
    }

    /// Φ over a δ grid (Γ41 units).
    pub fn phi(&self, delta_grid: &[f64]) -> Result<ComplexSpectrum> {
        let values = delta_grid
            .iter()
            .map(|&d| self.phi_at(d))
            .collect::<Result<Vec<_>>>()?;
        let spec = ComplexSpectrum {
            delta_grid: delta_grid.to_vec(),
            values,
            axis: SpectrumAxis::RealDelta,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Entire-function sinc(z) = sin(z)/z; series below |z| = 1e-2 to avoid
/// cancellation at small mismatch.
pub fn complex_sinc(z: C64) -> C64 {
    if z.norm() < 1e-2 {
        let z2 = z * z;
        C64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}
