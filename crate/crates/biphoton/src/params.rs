//! Physical constants, unit conventions, and the thermal-velocity model.
//!
//! All angular frequencies are expressed internally as multiples of the
//! decoherence rate `gamma41`; times are in units of 1/`gamma41`.
//! Conversion to MHz and ns happens only at the I/O boundary, through
//! [`SystemParams::rate_to_mhz`] and friends.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of 85Rb, kg.
pub const MASS_RB85: f64 = 84.911_789_738 * AMU;

/// Atomic, geometric, and thermal constants of the vapor-cell system.
///
/// `gamma41` is the internal unit of angular frequency and is 1.0 unless a
/// caller deliberately rescales; `gamma41_mhz` carries the physical value
/// Γ41/2π in MHz for conversions at the I/O boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub gamma41: f64,
    /// Γ21/Γ41.
    pub gamma21_ratio: f64,
    /// Γ31/Γ41.
    pub gamma31_ratio: f64,
    /// Γ11/Γ41. Appears in published figure captions but in no implemented
    /// equation; stored for completeness and otherwise unused.
    pub gamma11_ratio: f64,
    /// Γ41/2π in MHz.
    pub gamma41_mhz: f64,
    /// Optical depth, N σ14 L.
    pub od: f64,
    /// Cell length, m.
    pub cell_length: f64,
    /// Cell temperature, K.
    pub temperature: f64,
    /// Atomic mass, kg.
    pub atomic_mass: f64,
    /// Atomic density, 1/m^3.
    pub atomic_density: f64,
    /// λ14, m.
    pub wavelength14: f64,
    /// μ14 in C·m. When absent, σ14 is derived from OD = N σ14 L.
    pub dipole14: Option<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            gamma41: 1.0,
            gamma21_ratio: 0.2,
            gamma31_ratio: 1.0,
            gamma11_ratio: 0.4,
            gamma41_mhz: 6.0,
            od: 6.8,
            cell_length: 0.07,
            temperature: 333.15,
            atomic_mass: MASS_RB85,
            atomic_density: 2.5e17,
            wavelength14: 780.0e-9,
            dipole14: None,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma41", self.gamma41),
            ("gamma21_ratio", self.gamma21_ratio),
            ("gamma31_ratio", self.gamma31_ratio),
            ("gamma41_mhz", self.gamma41_mhz),
            ("od", self.od),
            ("cell_length", self.cell_length),
            ("temperature", self.temperature),
            ("atomic_mass", self.atomic_mass),
            ("atomic_density", self.atomic_density),
            ("wavelength14", self.wavelength14),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if self.gamma11_ratio < 0.0 {
            return Err(Error::InvalidParameter(
                "gamma11_ratio must be nonnegative".into(),
            ));
        }
        if let Some(mu) = self.dipole14 {
            if !(mu > 0.0) {
                return Err(Error::InvalidParameter(
                    "dipole14 must be strictly positive when given".into(),
                ));
            }
            // With both μ14 and (N, L, OD) specified, the two routes to σ14
            // must agree.
            let sigma = self.sigma14_from_dipole(mu);
            let od = self.atomic_density * sigma * self.cell_length;
            let rel = ((od - self.od) / self.od).abs();
            if rel > 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "N*sigma14*L = {od} disagrees with od = {} (relative {rel:.3e})",
                    self.od
                )));
            }
        }
        Ok(())
    }

    /// Γ21 in internal units.
    pub fn gamma21(&self) -> f64 {
        self.gamma21_ratio * self.gamma41
    }

    /// Γ31 in internal units.
    pub fn gamma31(&self) -> f64 {
        self.gamma31_ratio * self.gamma41
    }

    /// Γ_eff = (Γ41 + Γ21)/2.
    pub fn gamma_eff(&self) -> f64 {
        0.5 * (self.gamma41 + self.gamma21())
    }

    /// Γ_diff = (Γ41 - Γ21)/2.
    pub fn gamma_diff(&self) -> f64 {
        0.5 * (self.gamma41 - self.gamma21())
    }

    /// Physical Γ41 as an angular rate, rad/s.
    pub fn gamma41_rad_s(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.gamma41_mhz * 1e6
    }

    /// Convert a rate in internal Γ41 units to a linear frequency in MHz.
    pub fn rate_to_mhz(&self, rate: f64) -> f64 {
        rate / self.gamma41 * self.gamma41_mhz
    }

    /// Convert a linear frequency in MHz to internal Γ41 units.
    pub fn rate_from_mhz(&self, mhz: f64) -> f64 {
        mhz / self.gamma41_mhz * self.gamma41
    }

    /// Convert a time in internal 1/Γ41 units to ns.
    pub fn time_to_ns(&self, t: f64) -> f64 {
        t * self.gamma41 / self.gamma41_rad_s() * 1e9
    }

    /// Convert a time in ns to internal 1/Γ41 units.
    pub fn time_from_ns(&self, ns: f64) -> f64 {
        ns * 1e-9 * self.gamma41_rad_s() / self.gamma41
    }

    /// Central wavenumber of the |1>-|4> transition, 1/m.
    pub fn k_as0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength14
    }

    /// Resonance angular frequency ω14, rad/s.
    pub fn omega14(&self) -> f64 {
        SPEED_OF_LIGHT * self.k_as0()
    }

    fn sigma14_from_dipole(&self, mu: f64) -> f64 {
        2.0 * std::f64::consts::PI * mu * mu
            / (EPSILON_0 * HBAR * self.wavelength14 * self.gamma41_rad_s())
    }

    /// On-resonance absorption cross section σ14, m^2. Derived from the
    /// dipole moment when available, otherwise from OD = N σ14 L.
    pub fn sigma14(&self) -> f64 {
        match self.dipole14 {
            Some(mu) => self.sigma14_from_dipole(mu),
            None => self.od / (self.atomic_density * self.cell_length),
        }
    }

    /// Most probable thermal speed, √(2 k_B T / m), m/s.
    pub fn most_probable_speed(&self) -> f64 {
        (2.0 * K_B * self.temperature / self.atomic_mass).sqrt()
    }
}

/// Driving-field parameters, in internal Γ41 units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    /// Rabi frequency Ω3 of the dressing beam.
    pub omega3: f64,
    /// Detuning Δ3.
    pub delta3: f64,
    /// Rabi frequency Ω2 of the coupling beam.
    pub omega2: f64,
    /// Detuning Δ2.
    pub delta2: f64,
    /// Detuning Δ1 of the pump.
    pub delta1: f64,
    /// Constant d2 standing in for the E2 dressing contribution.
    pub d2_const: C64,
    /// Constant c2 ∝ |Ω2| in the linear susceptibility.
    pub c2_const: C64,
    /// Field amplitudes entering the nonlinear coupling κ. Arbitrary units;
    /// only the overall scale is affected.
    pub e1_amp: f64,
    pub e2_amp: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            omega3: 0.8,
            delta3: 0.0,
            omega2: 0.0,
            delta2: 0.0,
            delta1: 52.0,
            d2_const: C64::new(0.0, 0.0),
            c2_const: C64::new(0.0, 0.0),
            e1_amp: 1.0,
            e2_amp: 1.0,
        }
    }
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        if self.omega3 < 0.0 || !self.omega3.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega3 must be >= 0, got {}",
                self.omega3
            )));
        }
        if self.omega2 < 0.0 || !self.omega2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega2 must be >= 0, got {}",
                self.omega2
            )));
        }
        Ok(())
    }
}

/// Which printed form of the 1D velocity distribution to evaluate.
///
/// The published radical carries a v^2 inside the square root, which is not
/// normalized and vanishes at v = 0; the standard normalized 1D Gaussian is
/// the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxwellForm {
    Normalized,
    PrintedRadical,
}

impl Default for MaxwellForm {
    fn default() -> Self {
        MaxwellForm::Normalized
    }
}

/// 1D Maxwell-Boltzmann probability density, s/m.
pub fn maxwell_boltzmann_pdf(v: f64, params: &SystemParams) -> Result<f64> {
    maxwell_boltzmann_pdf_with(v, params, MaxwellForm::Normalized)
}

pub fn maxwell_boltzmann_pdf_with(
    v: f64,
    params: &SystemParams,
    form: MaxwellForm,
) -> Result<f64> {
    if !(params.temperature > 0.0) || !(params.atomic_mass > 0.0) {
        return Err(Error::InvalidParameter(
            "temperature and atomic mass must be strictly positive".into(),
        ));
    }
    let m = params.atomic_mass;
    let kt = K_B * params.temperature;
    let arg = -m * v * v / (2.0 * kt);
    let value = match form {
        MaxwellForm::Normalized => (m / (2.0 * std::f64::consts::PI * kt)).sqrt() * arg.exp(),
        MaxwellForm::PrintedRadical => {
            (m * v * v / (2.0 * std::f64::consts::PI * kt)).sqrt() * arg.exp()
        }
    };
    Ok(value)
}

/// Doppler FWHM of a transition at `wavelength`, Hz: √(8 ln2 k_B T / m)/λ.
pub fn doppler_width_fwhm(params: &SystemParams, wavelength: f64) -> Result<f64> {
    params.validate()?;
    if !(wavelength > 0.0) {
        return Err(Error::InvalidParameter(
            "wavelength must be strictly positive".into(),
        ));
    }
    let w = (8.0 * std::f64::consts::LN_2 * K_B * params.temperature / params.atomic_mass).sqrt();
    Ok(w / wavelength)
}

/// Square-root calibration from beam power to Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiCalibration {
    /// Reference power, mW.
    pub p_ref_mw: f64,
    /// Rabi frequency at the reference power, Γ41 units.
    pub omega_ref: f64,
}

impl Default for RabiCalibration {
    fn default() -> Self {
        // Anchored to the observed coalescence: 1 mW maps to 0.8 Γ41.
        RabiCalibration {
            p_ref_mw: 1.0,
            omega_ref: 0.8,
        }
    }
}

/// Ω = omega_ref · √(P / P_ref).
pub fn power_to_rabi(power_mw: f64, calib: &RabiCalibration) -> Result<f64> {
    if power_mw < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "power must be >= 0, got {power_mw}"
        )));
    }
    if !(calib.p_ref_mw > 0.0) {
        return Err(Error::InvalidParameter(
            "reference power must be strictly positive".into(),
        ));
    }
    Ok(calib.omega_ref * (power_mw / calib.p_ref_mw).sqrt())
}

/// Gauss-Hermite quadrature of the thermal velocity average.
///
/// The Maxwell-Boltzmann weight is exactly Gaussian, so
/// ∫ f(v) g(v) dv = (1/√π) Σ w_i g(u t_i) with u the most probable speed.
/// With `enabled = false` every average reduces bit-for-bit to the v = 0
/// integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DopplerModel {
    pub n_nodes: usize,
    pub enabled: bool,
    /// √(2 k_B T / m), m/s.
    pub most_probable_speed: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
}

impl DopplerModel {
    pub fn new(params: &SystemParams, n_nodes: usize, enabled: bool) -> Result<Self> {
        if n_nodes < 1 {
            return Err(Error::InvalidParameter(
                "quadrature node count must be >= 1".into(),
            ));
        }
        params.validate()?;
        let (nodes, weights) = gauss_hermite(n_nodes)?;
        Ok(DopplerModel {
            n_nodes,
            enabled,
            most_probable_speed: params.most_probable_speed(),
            nodes,
            weights,
        })
    }

    pub fn disabled() -> Self {
        DopplerModel {
            n_nodes: 1,
            enabled: false,
            most_probable_speed: 0.0,
            nodes: vec![0.0],
            weights: vec![std::f64::consts::PI.sqrt()],
        }
    }

    /// Normalized weights; they sum to 1 to within quadrature accuracy.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let s = std::f64::consts::PI.sqrt();
        self.weights.iter().map(|w| w / s).collect()
    }

    /// Thermal average of a complex-valued function of atom velocity.
    pub fn average<F>(&self, mut integrand: F) -> Result<C64>
    where
        F: FnMut(f64) -> C64,
    {
        if !self.enabled {
            return Ok(integrand(0.0));
        }
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let mut acc = C64::new(0.0, 0.0);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let v = self.most_probable_speed * t;
            let val = integrand(v);
            if !val.re.is_finite() || !val.im.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite integrand at quadrature node v = {v} m/s"
                )));
            }
            acc += w * val;
        }
        Ok(acc * inv_sqrt_pi)
    }
}

/// Nodes and weights of n-point Gauss-Hermite quadrature (weight e^{-t^2}).
///
/// Newton iteration on the Hermite recurrence; weights sum to √π.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const MAX_ITER: usize = 64;
    const EPS: f64 = 1e-15;
    let pim4 = 0.751_125_544_464_943; // π^{-1/4}
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        // Initial guesses follow the usual asymptotic estimates.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS * (1.0 + z.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Gauss-Hermite node {i} of {n} did not converge"
            )));
        }
        // Positive roots in the low slots so later initial guesses can
        // reference them; mirrored partners fill from the top.
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        let w = 2.0 / (pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}
