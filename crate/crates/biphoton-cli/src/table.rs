//! CSV schema for the 2D double-dressing channel surface, matching the
//! writer/reader round-trip contract of the core `io` module.

use std::io::{BufRead, Write};

use biphoton::{Error, Result};
use num_complex::Complex64 as C64;

pub const CHANNELS_HEADER: &str = "omega2,omega3,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3";

/// One grid point of the doubly dressed surface; channels sorted by real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub omega2: f64,
    pub omega3: f64,
    pub channels: [C64; 3],
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_channels_csv<W: Write>(mut w: W, points: &[ChannelPoint]) -> Result<()> {
    writeln!(w, "{CHANNELS_HEADER}")?;
    for p in points {
        let c = p.channels;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            sig12(p.omega2),
            sig12(p.omega3),
            sig12(c[0].re),
            sig12(c[0].im),
            sig12(c[1].re),
            sig12(c[1].im),
            sig12(c[2].re),
            sig12(c[2].im),
        )?;
    }
    Ok(())
}

pub fn read_channels_csv<R: BufRead>(r: R) -> Result<Vec<ChannelPoint>> {
    let mut saw_header = false;
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !saw_header {
            if t != CHANNELS_HEADER {
                return Err(Error::InvalidParameter(format!(
                    "bad channels header '{t}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = t.split(',').collect();
        if cols.len() != 8 {
            return Err(Error::InvalidParameter(format!(
                "line {}: expected 8 columns, got {}",
                i + 1,
                cols.len()
            )));
        }
        let mut vals = [0.0f64; 8];
        for (v, c) in vals.iter_mut().zip(&cols) {
            *v = c.trim().parse::<f64>().map_err(|_| {
                Error::InvalidParameter(format!("line {}: bad float '{}'", i + 1, c.trim()))
            })?;
        }
        out.push(ChannelPoint {
            omega2: vals[0],
            omega3: vals[1],
            channels: [
                C64::new(vals[2], vals[3]),
                C64::new(vals[4], vals[5]),
                C64::new(vals[6], vals[7]),
            ],
        });
    }
    if !saw_header {
        return Err(Error::InvalidParameter("empty channels CSV".into()));
    }
    Ok(out)
}
