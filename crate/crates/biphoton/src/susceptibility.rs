//! EIT non-Hermitian term d_EIT, Doppler-averaged third-order susceptibility
//! χ(3), linear susceptibility χ(1), and the imaginary-basis diagnostic.
//!
//! Internally every evaluator works on the (possibly complex) argument
//! x = W_D δ. The embedded EIT denominator is always cleared algebraically,
//! so pole crossings never surface as errors. The coupling-convention
//! constant `g2_factor` defaults to 1/4, which makes the zeros of d_EIT
//! coincide exactly with the closed-form eigenvalues; setting it to 1
//! restores the verbatim printed susceptibility forms.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigensystem::eigenvalues_unchecked;
use crate::error::{Error, Result};
use crate::params::{DopplerModel, FieldParams, SystemParams, SPEED_OF_LIGHT};

/// Whether a spectrum was evaluated on the real δ axis or at δ_Im = iδ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumAxis {
    RealDelta,
    ImaginaryDelta,
}

/// A sampled complex-valued function of the eigenenergy offset δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub delta_grid: Vec<f64>,
    pub values: Vec<C64>,
    pub axis: SpectrumAxis,
}

impl ComplexSpectrum {
    pub fn validate(&self) -> Result<()> {
        if self.delta_grid.len() != self.values.len() {
            return Err(Error::InvalidParameter(
                "spectrum grid and values differ in length".into(),
            ));
        }
        if self.delta_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "spectrum grid must be strictly increasing".into(),
            ));
        }
        if self
            .values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Numerical("non-finite spectrum value".into()));
        }
        Ok(())
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Evaluation options shared by the susceptibility evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiOptions {
    /// Coupling convention on |Ω|²; 1/4 aligns susceptibility poles with the
    /// closed-form eigenvalues, 1.0 is the verbatim printed form.
    pub g2_factor: f64,
    /// Overall complex prefactor (dipole/density constants); arbitrary scale.
    pub prefactor: C64,
    /// Apply per-field Doppler shifts Δ_iD(v) = Δ_i - (v/c) ω_i. Off by
    /// default for the co-propagating configuration; the W_D factor on δ is
    /// always applied.
    pub shift_fields: bool,
    /// Fold the E2 double-dressing channel into d_EIT.
    pub double_dressing: bool,
}

impl Default for ChiOptions {
    fn default() -> Self {
        ChiOptions {
            g2_factor: 0.25,
            prefactor: C64::new(1.0, 0.0),
            shift_fields: false,
            double_dressing: false,
        }
    }
}

fn w_d(v: f64) -> f64 {
    1.0 + v / SPEED_OF_LIGHT
}

/// Per-field optical angular frequencies used for the optional Doppler
/// shifts, in internal Γ41 units.
fn optical_frequency(sys: &SystemParams) -> f64 {
    sys.omega14() / sys.gamma41_rad_s() * sys.gamma41
}

fn shifted_detuning(sys: &SystemParams, delta: f64, v: f64, opts: &ChiOptions) -> f64 {
    if opts.shift_fields {
        delta - v / SPEED_OF_LIGHT * optical_frequency(sys)
    } else {
        delta
    }
}

/// EIT-based non-Hermitian term,
/// d_EIT = Γ21 + iW_Dδ + g²|Ω3|²/(Γ41 + iW_Dδ + iΔ_3D).
///
/// Evaluated through the cleared-denominator quadratic, whose roots are the
/// eigenvalue pair; a pole of the embedded denominator therefore yields a
/// large finite ratio rather than an error.
pub fn d_eit(
    delta: f64,
    sys: &SystemParams,
    fields: &FieldParams,
    w_d_factor: f64,
    opts: &ChiOptions,
) -> C64 {
    d_eit_complex(C64::new(delta, 0.0), sys, fields, w_d_factor, fields.delta3, opts)
}

/// d_EIT at a complex argument. Used by the imaginary-basis machinery and
/// for consistency checks against the closed-form eigenvalues (d_EIT
/// vanishes exactly at δ±).
pub fn d_eit_at(
    delta: C64,
    sys: &SystemParams,
    fields: &FieldParams,
    w_d_factor: f64,
    opts: &ChiOptions,
) -> C64 {
    d_eit_complex(delta, sys, fields, w_d_factor, fields.delta3, opts)
}

/// d_EIT at complex argument; `delta3d` is the (possibly Doppler-shifted) E3
/// detuning.
fn d_eit_complex(
    delta: C64,
    sys: &SystemParams,
    fields: &FieldParams,
    w_d_factor: f64,
    delta3d: f64,
    opts: &ChiOptions,
) -> C64 {
    let x = w_d_factor * delta;
    let i = C64::new(0.0, 1.0);
    let den = sys.gamma41 + i * x + i * delta3d;
    let numer = (sys.gamma21() + i * x) * den
        + opts.g2_factor * fields.omega3 * fields.omega3;
    numer / den
}

/// Cleared-fraction reciprocal of d_EIT (numerator, denominator), optionally
/// with the E2 double-dressing channel folded in. χ(3) divides by d_EIT, so
/// working with (den, numer) keeps embedded poles harmless.
fn d_eit_cleared(
    delta: C64,
    sys: &SystemParams,
    fields: &FieldParams,
    w_d_factor: f64,
    delta3d: f64,
    delta2d: f64,
    opts: &ChiOptions,
) -> (C64, C64) {
    let x = w_d_factor * delta;
    let i = C64::new(0.0, 1.0);
    let den = sys.gamma41 + i * x + i * delta3d;
    let numer =
        (sys.gamma21() + i * x) * den + opts.g2_factor * fields.omega3 * fields.omega3;
    if !opts.double_dressing || fields.omega2 == 0.0 {
        return (numer, den);
    }
    // Double dressing: couple the upper branch to the E2 channel at
    // a_d = -Δ2 - Δ3/2 + iΓ41. numer = -(x - δ+)(x - δ-), so the cubic
    // becomes [(x - δ+)(x - a_d) - g²|Ω2|²](x - δ-) over den·(x - a_d).
    let pair = eigenvalues_unchecked(sys, fields.omega3, delta3d);
    let a_d = C64::new(-delta2d - 0.5 * delta3d, sys.gamma41);
    let coupling = opts.g2_factor * fields.omega2 * fields.omega2;
    let cubic = ((x - pair.delta_plus) * (x - a_d) - coupling) * (x - pair.delta_minus);
    (-cubic, den * (x - a_d))
}

fn chi3_integrand(
    delta: C64,
    v: f64,
    sys: &SystemParams,
    fields: &FieldParams,
    opts: &ChiOptions,
) -> C64 {
    let wd = w_d(v);
    let i = C64::new(0.0, 1.0);
    let delta1d = shifted_detuning(sys, fields.delta1, v, opts);
    let delta2d = shifted_detuning(sys, fields.delta2, v, opts);
    let delta3d = shifted_detuning(sys, fields.delta3, v, opts);
    let (numer, den) = d_eit_cleared(delta, sys, fields, wd, delta3d, delta2d, opts);
    let first = sys.gamma31() + i * delta1d;
    let last = sys.gamma41 + i * delta2d + i * wd * delta + fields.d2_const;
    opts.prefactor * den / (first * numer * last)
}

fn chi1_integrand(
    delta: C64,
    v: f64,
    sys: &SystemParams,
    fields: &FieldParams,
    opts: &ChiOptions,
) -> C64 {
    let wd = w_d(v);
    let i = C64::new(0.0, 1.0);
    let delta3d = shifted_detuning(sys, fields.delta3, v, opts);
    let x = wd * delta;
    let upper = x - i * sys.gamma21() - i * delta3d;
    let lower = (x - i * sys.gamma41) * upper
        - opts.g2_factor * fields.omega3 * fields.omega3
        - fields.c2_const;
    -opts.prefactor * upper / lower
}

fn evaluate_spectrum<F>(
    delta_grid: &[f64],
    doppler: &DopplerModel,
    axis: SpectrumAxis,
    mut integrand: F,
) -> Result<ComplexSpectrum>
where
    F: FnMut(C64, f64) -> C64,
{
    if delta_grid.is_empty() {
        return Err(Error::InvalidParameter("empty delta grid".into()));
    }
    if delta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "delta grid must be strictly increasing".into(),
        ));
    }
    let mut values = Vec::with_capacity(delta_grid.len());
    for &d in delta_grid {
        let arg = match axis {
            SpectrumAxis::RealDelta => C64::new(d, 0.0),
            SpectrumAxis::ImaginaryDelta => C64::new(0.0, d),
        };
        let val = doppler.average(|v| integrand(arg, v))?;
        values.push(val);
    }
    let spec = ComplexSpectrum {
        delta_grid: delta_grid.to_vec(),
        values,
        axis,
    };
    spec.validate()?;
    Ok(spec)
}

/// Doppler-averaged third-order susceptibility on a δ grid.
pub fn chi3(
    delta_grid: &[f64],
    sys: &SystemParams,
    fields: &FieldParams,
    doppler: &DopplerModel,
    opts: &ChiOptions,
) -> Result<ComplexSpectrum> {
    sys.validate()?;
    fields.validate()?;
    evaluate_spectrum(delta_grid, doppler, SpectrumAxis::RealDelta, |d, v| {
        chi3_integrand(d, v, sys, fields, opts)
    })
}

/// Doppler-averaged linear susceptibility on a δ grid.
pub fn chi1(
    delta_grid: &[f64],
    sys: &SystemParams,
    fields: &FieldParams,
    doppler: &DopplerModel,
    opts: &ChiOptions,
) -> Result<ComplexSpectrum> {
    sys.validate()?;
    fields.validate()?;
    evaluate_spectrum(delta_grid, doppler, SpectrumAxis::RealDelta, |d, v| {
        chi1_integrand(d, v, sys, fields, opts)
    })
}

/// Which susceptibility an imaginary-basis request re-evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Chi1,
    Chi3,
}

/// Re-evaluate a susceptibility at δ_Im = iδ over the given (real) grid.
///
/// Operates by analytic re-evaluation at the imaginary argument, never by
/// transforming already-sampled real-axis values.
pub fn to_imaginary_basis(
    kind: SpectrumKind,
    delta_grid: &[f64],
    sys: &SystemParams,
    fields: &FieldParams,
    doppler: &DopplerModel,
    opts: &ChiOptions,
) -> Result<ComplexSpectrum> {
    sys.validate()?;
    fields.validate()?;
    match kind {
        SpectrumKind::Chi3 => {
            evaluate_spectrum(delta_grid, doppler, SpectrumAxis::ImaginaryDelta, |d, v| {
                chi3_integrand(d, v, sys, fields, opts)
            })
        }
        SpectrumKind::Chi1 => {
            evaluate_spectrum(delta_grid, doppler, SpectrumAxis::ImaginaryDelta, |d, v| {
                chi1_integrand(d, v, sys, fields, opts)
            })
        }
    }
}

/// Uniform grid of `n` points over [-span, span].
pub fn symmetric_grid(span: f64, n: usize) -> Vec<f64> {
    let step = 2.0 * span / (n as f64 - 1.0);
    (0..n).map(|i| -span + i as f64 * step).collect()
}
