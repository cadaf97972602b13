//! TOML configuration with sections `[atom]`, `[fields]`, `[doppler]`,
//! `[numerics]`. Every key mirrors a parameter-struct field; unknown keys
//! are rejected with the offending key named. Flat `section.key=value`
//! overrides are merged on top of the file.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{
    DopplerModel, FieldParams, MaxwellForm, RabiCalibration, SystemParams,
};
use crate::susceptibility::ChiOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomSection {
    pub gamma21_ratio: f64,
    pub gamma31_ratio: f64,
    pub gamma11_ratio: f64,
    pub gamma41_mhz: f64,
    pub od: f64,
    pub cell_length: f64,
    pub temperature: f64,
    pub atomic_mass: f64,
    pub atomic_density: f64,
    pub wavelength14: f64,
    pub dipole14: Option<f64>,
}

impl Default for AtomSection {
    fn default() -> Self {
        let s = SystemParams::default();
        AtomSection {
            gamma21_ratio: s.gamma21_ratio,
            gamma31_ratio: s.gamma31_ratio,
            gamma11_ratio: s.gamma11_ratio,
            gamma41_mhz: s.gamma41_mhz,
            od: s.od,
            cell_length: s.cell_length,
            temperature: s.temperature,
            atomic_mass: s.atomic_mass,
            atomic_density: s.atomic_density,
            wavelength14: s.wavelength14,
            dipole14: s.dipole14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldsSection {
    pub omega3: f64,
    pub delta3: f64,
    pub omega2: f64,
    pub delta2: f64,
    pub delta1: f64,
    pub d2_const: C64,
    pub c2_const: C64,
    pub e1_amp: f64,
    pub e2_amp: f64,
    /// Power→Rabi calibration anchor (reference power in mW).
    pub p_ref_mw: f64,
    /// Rabi frequency at the reference power (Γ41 units).
    pub omega_ref: f64,
}

impl Default for FieldsSection {
    fn default() -> Self {
        let f = FieldParams::default();
        let c = RabiCalibration::default();
        FieldsSection {
            omega3: f.omega3,
            delta3: f.delta3,
            omega2: f.omega2,
            delta2: f.delta2,
            delta1: f.delta1,
            d2_const: f.d2_const,
            c2_const: f.c2_const,
            e1_amp: f.e1_amp,
            e2_amp: f.e2_amp,
            p_ref_mw: c.p_ref_mw,
            omega_ref: c.omega_ref,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DopplerSection {
    pub enabled: bool,
    pub n_nodes: usize,
    pub maxwell_form: MaxwellForm,
}

impl Default for DopplerSection {
    fn default() -> Self {
        DopplerSection {
            enabled: false,
            n_nodes: 64,
            maxwell_form: MaxwellForm::Normalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    /// Coupling convention: |Ω3|² coefficient in the susceptibility
    /// denominators. 0.25 aligns the poles with the eigenvalue pair; 1.0
    /// restores the bare printed forms.
    pub g2_factor: f64,
    /// Apply per-field first-order Doppler shifts to the detunings.
    pub shift_fields: bool,
    /// Spectrum grid: number of δ samples and half-span (Γ41 units).
    pub n_delta: usize,
    pub delta_span: f64,
    /// Waveform grid: number of τ samples and maximum delay (ns).
    pub n_tau: usize,
    pub tau_max_ns: f64,
    /// Trailing fraction of the τ range used as the accidental floor.
    pub background_window: f64,
    /// Bins to mask after the rising onset when fitting.
    pub mask_initial_bins: usize,
    /// Use the verbatim weak-regime exponent instead of the canonical one.
    pub eq4_verbatim: bool,
    /// Splitting magnitude below which a pair counts as coalesced.
    pub ep_tolerance: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            g2_factor: 0.25,
            shift_fields: false,
            n_delta: 2001,
            delta_span: 40.0,
            n_tau: 2000,
            tau_max_ns: 400.0,
            background_window: 0.2,
            mask_initial_bins: 0,
            eq4_verbatim: false,
            ep_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub atom: AtomSection,
    pub fields: FieldsSection,
    pub doppler: DopplerSection,
    pub numerics: NumericsSection,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Config> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Merge one flat `section.key=value` override on top of this config.
    /// The value side uses TOML literal syntax; bare words are retried as
    /// strings so `maxwell_form=standard` works without quoting.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{pair}' is not key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let parse = |v: &str| -> Option<toml::Table> {
            format!("{key} = {v}").parse::<toml::Table>().ok()
        };
        let patch = parse(value)
            .or_else(|| parse(&format!("\"{}\"", value.replace('"', "\\\""))))
            .ok_or_else(|| Error::Config(format!("cannot parse override value '{value}'")))?;
        let mut doc = match toml::Value::try_from(self.clone()) {
            Ok(toml::Value::Table(t)) => t,
            Ok(_) => unreachable!("config serializes to a table"),
            Err(e) => return Err(Error::Config(e.to_string())),
        };
        merge(&mut doc, patch);
        let next: Config = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| {
                Error::Config(format!("override '{key}': {}", e.message()))
            })?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.system()?.validate()?;
        self.field_params().validate()?;
        let n = &self.numerics;
        if !(n.g2_factor > 0.0) {
            return Err(Error::Config("numerics.g2_factor must be positive".into()));
        }
        if n.n_delta < 2 || n.n_tau < 2 {
            return Err(Error::Config(
                "numerics.n_delta and numerics.n_tau must be at least 2".into(),
            ));
        }
        if !(n.delta_span > 0.0) || !(n.tau_max_ns > 0.0) {
            return Err(Error::Config(
                "numerics.delta_span and numerics.tau_max_ns must be positive".into(),
            ));
        }
        if !(n.background_window > 0.0 && n.background_window < 1.0) {
            return Err(Error::Config(
                "numerics.background_window must lie in (0, 1)".into(),
            ));
        }
        if !(n.ep_tolerance > 0.0) {
            return Err(Error::Config("numerics.ep_tolerance must be positive".into()));
        }
        if self.doppler.n_nodes == 0 {
            return Err(Error::Config("doppler.n_nodes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SystemParams> {
        let a = &self.atom;
        let s = SystemParams {
            gamma41: 1.0,
            gamma21_ratio: a.gamma21_ratio,
            gamma31_ratio: a.gamma31_ratio,
            gamma11_ratio: a.gamma11_ratio,
            gamma41_mhz: a.gamma41_mhz,
            od: a.od,
            cell_length: a.cell_length,
            temperature: a.temperature,
            atomic_mass: a.atomic_mass,
            atomic_density: a.atomic_density,
            wavelength14: a.wavelength14,
            dipole14: a.dipole14,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn field_params(&self) -> FieldParams {
        let f = &self.fields;
        FieldParams {
            omega3: f.omega3,
            delta3: f.delta3,
            omega2: f.omega2,
            delta2: f.delta2,
            delta1: f.delta1,
            d2_const: f.d2_const,
            c2_const: f.c2_const,
            e1_amp: f.e1_amp,
            e2_amp: f.e2_amp,
        }
    }

    pub fn calibration(&self) -> RabiCalibration {
        RabiCalibration {
            p_ref_mw: self.fields.p_ref_mw,
            omega_ref: self.fields.omega_ref,
        }
    }

    pub fn doppler_model(&self) -> Result<DopplerModel> {
        let sys = self.system()?;
        DopplerModel::new(&sys, self.doppler.n_nodes, self.doppler.enabled)
    }

    pub fn chi_options(&self) -> ChiOptions {
        ChiOptions {
            g2_factor: self.numerics.g2_factor,
            shift_fields: self.numerics.shift_fields,
            ..ChiOptions::default()
        }
    }
}

/// Recursive table merge: patch wins, nested tables merge key-wise.
fn merge(base: &mut toml::Table, patch: toml::Table) {
    for (k, v) in patch {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
