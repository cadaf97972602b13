//! CSV emit/parse for every tabular artifact. Writers and readers are
//! inverse up to float formatting (12 significant digits), so any emitted
//! file parses back through this module.

use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use crate::counting::{DetectionParams, Histogram};
use crate::eigensystem::SweepPoint;
use crate::error::{Error, Result};
use crate::susceptibility::{ComplexSpectrum, SpectrumAxis};
use crate::waveform::{CorrelationWaveform, WaveformMethod};

/// 12-significant-digit formatting used by all writers.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::InvalidParameter(format!("line {line_no}: bad float '{}'", field.trim()))
    })
}

fn split_row(line: &str, expected: usize, line_no: usize) -> Result<Vec<&str>> {
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "line {line_no}: expected {expected} columns, got {}",
            cols.len()
        )));
    }
    Ok(cols)
}

pub const SWEEP_HEADER: &str = "omega3,delta3,re_dplus,im_dplus,re_dminus,im_dminus";

pub fn write_sweep_csv<W: Write>(mut w: W, points: &[SweepPoint]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            sig12(p.omega3),
            sig12(p.delta3),
            sig12(p.delta_plus.re),
            sig12(p.delta_plus.im),
            sig12(p.delta_minus.re),
            sig12(p.delta_minus.im),
        )?;
    }
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(r: R) -> Result<Vec<SweepPoint>> {
    let mut lines = r.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if line.starts_with('#') || line.trim().is_empty() {
                    continue;
                }
                break line;
            }
            None => return Err(Error::InvalidParameter("empty sweep CSV".into())),
        }
    };
    if header.trim() != SWEEP_HEADER {
        return Err(Error::InvalidParameter(format!(
            "bad sweep header '{}'",
            header.trim()
        )));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let c = split_row(&line, 6, i + 1)?;
        out.push(SweepPoint {
            omega3: parse_f64(c[0], i + 1)?,
            delta3: parse_f64(c[1], i + 1)?,
            delta_plus: C64::new(parse_f64(c[2], i + 1)?, parse_f64(c[3], i + 1)?),
            delta_minus: C64::new(parse_f64(c[4], i + 1)?, parse_f64(c[5], i + 1)?),
        });
    }
    Ok(out)
}

pub fn write_spectrum_csv<W: Write>(mut w: W, s: &ComplexSpectrum) -> Result<()> {
    s.validate()?;
    let header = match s.axis {
        SpectrumAxis::RealDelta => "delta,re,im",
        SpectrumAxis::ImaginaryDelta => "delta_im,re,im",
    };
    writeln!(w, "{header}")?;
    for (d, v) in s.delta_grid.iter().zip(&s.values) {
        writeln!(w, "{},{},{}", sig12(*d), sig12(v.re), sig12(v.im))?;
    }
    Ok(())
}

pub fn read_spectrum_csv<R: BufRead>(r: R) -> Result<ComplexSpectrum> {
    let mut delta_grid = Vec::new();
    let mut values = Vec::new();
    let mut axis = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if axis.is_none() {
            axis = Some(match t {
                "delta,re,im" => SpectrumAxis::RealDelta,
                "delta_im,re,im" => SpectrumAxis::ImaginaryDelta,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "bad spectrum header '{other}'"
                    )))
                }
            });
            continue;
        }
        let c = split_row(t, 3, i + 1)?;
        delta_grid.push(parse_f64(c[0], i + 1)?);
        values.push(C64::new(parse_f64(c[1], i + 1)?, parse_f64(c[2], i + 1)?));
    }
    let axis = axis.ok_or_else(|| Error::InvalidParameter("empty spectrum CSV".into()))?;
    let s = ComplexSpectrum {
        delta_grid,
        values,
        axis,
    };
    s.validate()?;
    Ok(s)
}

/// Waveform CSV: metadata comment line, then `tau_ns,g2`. `tau_scale_ns`
/// converts the waveform's τ grid into nanoseconds.
pub fn write_waveform_csv<W: Write>(
    mut w: W,
    wf: &CorrelationWaveform,
    tau_scale_ns: f64,
) -> Result<()> {
    writeln!(w, "# method={}, {}", wf.method, wf.descriptor)?;
    writeln!(w, "tau_ns,g2")?;
    for (t, g) in wf.tau_grid.iter().zip(&wf.g2) {
        writeln!(w, "{},{}", sig12(t * tau_scale_ns), sig12(*g))?;
    }
    Ok(())
}

/// Reads a waveform CSV; the returned τ grid is in nanoseconds.
pub fn read_waveform_csv<R: BufRead>(r: R) -> Result<CorrelationWaveform> {
    let mut method = WaveformMethod::NumericTransform;
    let mut descriptor = String::new();
    let mut saw_header = false;
    let mut tau = Vec::new();
    let mut g2 = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(meta) = t.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(m) = meta.strip_prefix("method=") {
                let (name, rest) = m.split_once(',').unwrap_or((m, ""));
                method = parse_method(name.trim())?;
                descriptor = rest.trim().to_string();
            }
            continue;
        }
        if !saw_header {
            if t != "tau_ns,g2" {
                return Err(Error::InvalidParameter(format!(
                    "bad waveform header '{t}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let c = split_row(t, 2, i + 1)?;
        tau.push(parse_f64(c[0], i + 1)?);
        g2.push(parse_f64(c[1], i + 1)?);
    }
    if !saw_header {
        return Err(Error::InvalidParameter("empty waveform CSV".into()));
    }
    Ok(CorrelationWaveform {
        tau_grid: tau,
        g2,
        method,
        descriptor,
        acausal_leakage: None,
    })
}

fn parse_method(name: &str) -> Result<WaveformMethod> {
    Ok(match name {
        "numeric_transform" => WaveformMethod::NumericTransform,
        "eq3" => WaveformMethod::Eq3,
        "eq4" => WaveformMethod::Eq4,
        "s34_group_delay" => WaveformMethod::S34GroupDelay,
        "ep_limit" => WaveformMethod::EpLimit,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown waveform method '{other}'"
            )))
        }
    })
}

pub fn write_histogram_csv<W: Write>(mut w: W, h: &Histogram) -> Result<()> {
    writeln!(
        w,
        "# seed={}, bin_width_s={}, acquisition_s={}, efficiency_s={}, efficiency_as={}",
        h.seed,
        sig12(h.detection.bin_width_s),
        sig12(h.detection.acquisition_s),
        sig12(h.detection.efficiency_s),
        sig12(h.detection.efficiency_as),
    )?;
    writeln!(w, "tau_ns,counts")?;
    for (t, c) in h.tau_s.iter().zip(&h.counts) {
        writeln!(w, "{},{c}", sig12(t * 1e9))?;
    }
    Ok(())
}

/// Reads a histogram CSV. Detection metadata is restored from the comment
/// header when present and left at defaults for external lab files.
pub fn read_histogram_csv<R: BufRead>(r: R) -> Result<Histogram> {
    let mut detection = DetectionParams::default();
    let mut seed = 0u64;
    let mut saw_header = false;
    let mut tau_s = Vec::new();
    let mut counts = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(meta) = t.strip_prefix('#') {
            for item in meta.split(',') {
                if let Some((k, v)) = item.trim().split_once('=') {
                    match k.trim() {
                        "seed" => seed = v.trim().parse().unwrap_or(0),
                        "bin_width_s" => {
                            detection.bin_width_s = parse_f64(v, i + 1)?;
                        }
                        "acquisition_s" => {
                            detection.acquisition_s = parse_f64(v, i + 1)?;
                        }
                        "efficiency_s" => {
                            detection.efficiency_s = parse_f64(v, i + 1)?;
                        }
                        "efficiency_as" => {
                            detection.efficiency_as = parse_f64(v, i + 1)?;
                        }
                        _ => {}
                    }
                }
            }
            continue;
        }
        if !saw_header {
            if t != "tau_ns,counts" {
                return Err(Error::InvalidParameter(format!(
                    "bad histogram header '{t}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let c = split_row(t, 2, i + 1)?;
        tau_s.push(parse_f64(c[0], i + 1)? * 1e-9);
        let n: f64 = parse_f64(c[1], i + 1)?;
        if n < 0.0 || n.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "line {}: counts must be nonnegative integers",
                i + 1
            )));
        }
        counts.push(n as u64);
    }
    if !saw_header {
        return Err(Error::InvalidParameter("empty histogram CSV".into()));
    }
    Ok(Histogram {
        tau_s,
        counts,
        expected: Vec::new(),
        detection,
        seed,
    })
}

/// key=value report lines (deterministic order as given).
pub fn write_report<W: Write>(mut w: W, entries: &[(String, String)]) -> Result<()> {
    for (k, v) in entries {
        writeln!(w, "{k}={v}")?;
    }
    Ok(())
}

pub fn read_report<R: BufRead>(r: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("report line '{t}' is not key=value"))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
