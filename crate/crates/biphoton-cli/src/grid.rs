//! `start:stop[:step]` range arguments. A bare number is a one-point grid;
//! `a:b` defaults to 50 steps; `a:b:s` is inclusive of both endpoints.

use biphoton::{Error, Result};

/// Parse a range argument into a strictly increasing grid.
pub fn parse_range(arg: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = arg.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad range component '{s}' in '{arg}'")))
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b] => {
            let (a, b) = (num(a)?, num(b)?);
            build(arg, a, b, (b - a) / 50.0)
        }
        [a, b, s] => {
            let (a, b) = (num(a)?, num(b)?);
            build(arg, a, b, num(s)?)
        }
        _ => Err(Error::Config(format!(
            "range '{arg}' must be value, start:stop, or start:stop:step"
        ))),
    }
}

fn build(arg: &str, start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop <= start {
        return Err(Error::Config(format!(
            "range '{arg}' needs stop > start and step > 0"
        )));
    }
    // Half-step tolerance so 0:2:0.01 lands exactly on 201 points.
    let n = ((stop - start) / step + 0.5).floor() as usize + 1;
    if n > 2_000_000 {
        return Err(Error::Config(format!("range '{arg}' has {n} points")));
    }
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}
