//! Eigenvalue extraction from correlation waveforms: weighted least squares
//! against the closed-form shapes, with small-sample-corrected information
//! criterion model selection, plus the regime shape classifier.
//!
//! The optimizer contract is fixed: multi-start grid over the nonlinear
//! parameters, Nelder–Mead simplex refinement, then damped Gauss–Newton
//! polish on the profiled residuals. The linear parameters (amplitude and
//! background) are always profiled out analytically, which is what makes
//! count-space and normalized-space fits agree to machine precision.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::counting::{Histogram, NormalizedG2};
use crate::eigensystem::EigenPair;
use crate::error::{Error, Result};
use crate::waveform::CorrelationWaveform;

/// Closed-form model shapes available to the fitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// Strong-regime oscillation e^{-2Γτ}(1 - cos Ω_e τ).
    Eq3,
    /// Weak-regime two-exponential difference squared.
    Eq4Canonical,
    /// Group-delay single exponential.
    S34SingleExp,
    /// Coalesced-pair shape τ² e^{-2Γτ}.
    EpLimit,
}

impl FitModel {
    pub fn all() -> [FitModel; 4] {
        [
            FitModel::Eq3,
            FitModel::Eq4Canonical,
            FitModel::S34SingleExp,
            FitModel::EpLimit,
        ]
    }

    /// Number of nonlinear shape parameters (Γ_eff, splitting, τ0 subset).
    fn n_nonlinear(self) -> usize {
        match self {
            FitModel::Eq3 | FitModel::Eq4Canonical => 3,
            FitModel::S34SingleExp | FitModel::EpLimit => 2,
        }
    }

    fn has_splitting(self) -> bool {
        matches!(self, FitModel::Eq3 | FitModel::Eq4Canonical)
    }
}

impl std::fmt::Display for FitModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FitModel::Eq3 => "eq3",
            FitModel::Eq4Canonical => "eq4_canonical",
            FitModel::S34SingleExp => "s34_single_exp",
            FitModel::EpLimit => "ep_limit",
        };
        f.write_str(s)
    }
}

/// Fitted parameter set. `splitting` is |Ω_e| (0 for single-channel models);
/// `tau0` absorbs the trigger/binning offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub w1: f64,
    pub gamma_eff: f64,
    pub splitting: f64,
    pub background: f64,
    pub tau0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: FitParams,
    /// 1-σ uncertainties from the scaled inverse normal matrix.
    pub uncertainty: FitParams,
    /// Weighted residual sum of squares.
    pub chi2: f64,
    pub n_points: usize,
    pub n_params: usize,
    /// Small-sample-corrected information criterion score.
    pub aicc: f64,
    /// Score gap to the runner-up model (infinite for a single-model fit).
    pub selection_margin: f64,
    /// Set when the winning margin is below [`AMBIGUITY_MARGIN`].
    pub ambiguous: bool,
    /// Eigenvalue pair implied by (Γ_eff, splitting) under the fitted model.
    pub derived: DerivedPair,
}

/// Eigenvalues reconstructed from a fit (on-resonance convention Δ3 = 0,
/// so they satisfy the trace/determinant identities by construction).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedPair {
    pub delta_plus: C64,
    pub delta_minus: C64,
}

impl DerivedPair {
    pub fn to_eigen_pair(&self) -> EigenPair {
        let omega_e = self.delta_plus - self.delta_minus;
        let imaginary = omega_e.re.abs() <= 1e-9 * (1.0 + omega_e.norm());
        let gamma_eff = 0.5 * (self.delta_plus.im + self.delta_minus.im);
        let (gp, gm) = if imaginary {
            (
                Some(gamma_eff + 0.5 * omega_e.norm()),
                Some(gamma_eff - 0.5 * omega_e.norm()),
            )
        } else {
            (None, None)
        };
        EigenPair {
            delta_plus: self.delta_plus,
            delta_minus: self.delta_minus,
            omega_e,
            gamma_e_plus: gp,
            gamma_e_minus: gm,
        }
    }
}

fn derive_pair(model: FitModel, gamma_eff: f64, splitting: f64) -> DerivedPair {
    match model {
        FitModel::Eq3 => DerivedPair {
            delta_plus: C64::new(0.5 * splitting, gamma_eff),
            delta_minus: C64::new(-0.5 * splitting, gamma_eff),
        },
        FitModel::Eq4Canonical => DerivedPair {
            delta_plus: C64::new(0.0, gamma_eff + 0.5 * splitting),
            delta_minus: C64::new(0.0, gamma_eff - 0.5 * splitting),
        },
        FitModel::S34SingleExp | FitModel::EpLimit => DerivedPair {
            delta_plus: C64::new(0.0, gamma_eff),
            delta_minus: C64::new(0.0, gamma_eff),
        },
    }
}

/// AICc gaps below this are reported as ambiguous rather than decided.
pub const AMBIGUITY_MARGIN: f64 = 2.0;

const CONVERGENCE_TOL: f64 = 1e-8;
const SIMPLEX_MAX_ITER: usize = 400;
const POLISH_MAX_ITER: usize = 200;

/// Fit input: τ samples, values, and inverse-variance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FitData {
    pub tau: Vec<f64>,
    pub y: Vec<f64>,
    pub weight: Vec<f64>,
}

impl FitData {
    /// Poisson-weighted counts; `time_scale` multiplies the stored τ axis
    /// (e.g. Γ41 in rad/s to go from seconds to internal units).
    pub fn from_histogram(hist: &Histogram, time_scale: f64) -> FitData {
        FitData {
            tau: hist.tau_s.iter().map(|&t| t * time_scale).collect(),
            y: hist.counts.iter().map(|&c| c as f64).collect(),
            weight: hist
                .counts
                .iter()
                .map(|&c| 1.0 / (c as f64).max(1.0))
                .collect(),
        }
    }

    /// Normalized curve with weights propagated from the count statistics,
    /// so the nonlinear parameters match the count-space fit exactly.
    pub fn from_normalized(norm: &NormalizedG2, time_scale: f64) -> FitData {
        let bg = norm.background;
        FitData {
            tau: norm.tau_s.iter().map(|&t| t * time_scale).collect(),
            y: norm.g2.clone(),
            weight: norm
                .g2
                .iter()
                .map(|&g| bg * bg / (g * bg).max(1.0))
                .collect(),
        }
    }

    /// Noise-free model curve with unit weights.
    pub fn from_waveform(w: &CorrelationWaveform) -> FitData {
        FitData {
            tau: w.tau_grid.clone(),
            y: w.g2.clone(),
            weight: vec![1.0; w.g2.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub models: Vec<FitModel>,
    /// Bins to zero-weight right after the rising onset (detector rise
    /// artifacts near τ = 0 are not modeled).
    pub mask_initial_bins: usize,
    /// Additional random restarts after the deterministic grid fails.
    pub max_restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            models: FitModel::all().to_vec(),
            mask_initial_bins: 0,
            max_restarts: 2,
        }
    }
}

/// Model shape (amplitude- and background-free) at shifted time t.
fn shape(model: FitModel, gamma: f64, split: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let env = (-2.0 * gamma * t).exp();
    match model {
        FitModel::Eq3 => env * (1.0 - (split * t).cos()),
        FitModel::Eq4Canonical => {
            let d = (-(gamma - 0.5 * split) * t).exp() - (-(gamma + 0.5 * split) * t).exp();
            d * d
        }
        FitModel::S34SingleExp => env,
        FitModel::EpLimit => t * t * env,
    }
}

/// Profiled weighted least squares for y ≈ a·f + b. Returns (a, b, chi2)
/// with a clamped nonnegative.
fn profile_linear(data: &FitData, f: &[f64]) -> (f64, f64, f64) {
    let (mut sff, mut sf, mut sfy, mut sw, mut swy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..f.len() {
        let w = data.weight[i];
        sff += w * f[i] * f[i];
        sf += w * f[i];
        sfy += w * f[i] * data.y[i];
        sw += w;
        swy += w * data.y[i];
    }
    let det = sff * sw - sf * sf;
    let (mut a, b);
    if det.abs() < 1e-300 {
        a = 0.0;
        b = if sw > 0.0 { swy / sw } else { 0.0 };
    } else {
        a = (sfy * sw - sf * swy) / det;
        if a < 0.0 {
            a = 0.0;
        }
        // Re-profile b at the (possibly clamped) a.
        let bb = if sw > 0.0 { (swy - a * sf) / sw } else { 0.0 };
        return finish(data, f, a, bb);
    }
    finish(data, f, a, b)
}

fn finish(data: &FitData, f: &[f64], a: f64, b: f64) -> (f64, f64, f64) {
    let mut chi2 = 0.0;
    for i in 0..f.len() {
        let r = data.y[i] - a * f[i] - b;
        chi2 += data.weight[i] * r * r;
    }
    (a, b, chi2)
}

/// Objective for the nonlinear parameters; linear parameters profiled out.
/// θ layout: [ln Γ, splitting-code, τ0] (splitting-code absent for 2-param
/// models; for Eq4 it encodes s = 2Γ·σ(code) to respect s < 2Γ).
struct Objective<'a> {
    data: &'a FitData,
    model: FitModel,
    tau_span: f64,
    shape_buf: std::cell::RefCell<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

impl<'a> Objective<'a> {
    fn decode(&self, theta: &[f64]) -> (f64, f64, f64) {
        let gamma = theta[0].exp();
        let (split, tau0) = if self.model.has_splitting() {
            let s = match self.model {
                FitModel::Eq3 => theta[1].exp(),
                FitModel::Eq4Canonical => 2.0 * gamma * sigmoid(theta[1]),
                _ => unreachable!(),
            };
            (s, theta[2])
        } else {
            (0.0, theta[1])
        };
        (gamma, split, tau0)
    }

    fn encode(&self, gamma: f64, split: f64, tau0: f64) -> Vec<f64> {
        let g = gamma.max(1e-12).ln();
        if self.model.has_splitting() {
            let sc = match self.model {
                FitModel::Eq3 => split.max(1e-12).ln(),
                FitModel::Eq4Canonical => logit(split / (2.0 * gamma)),
                _ => unreachable!(),
            };
            vec![g, sc, tau0]
        } else {
            vec![g, tau0]
        }
    }

    /// chi2 with linear parameters profiled; +inf for out-of-bounds τ0.
    fn eval(&self, theta: &[f64]) -> (f64, f64, f64) {
        let (gamma, split, tau0) = self.decode(theta);
        if !gamma.is_finite()
            || !split.is_finite()
            || tau0.abs() > 0.5 * self.tau_span
            || gamma > 1e6
        {
            return (f64::MAX, 0.0, 0.0);
        }
        let mut buf = self.shape_buf.borrow_mut();
        buf.clear();
        buf.extend(
            self.data
                .tau
                .iter()
                .map(|&t| shape(self.model, gamma, split, t - tau0)),
        );
        let (a, b, chi2) = profile_linear(self.data, &buf);
        (chi2, a, b)
    }
}

/// Nelder–Mead on `obj`, returning the best vertex.
fn nelder_mead(obj: &Objective<'_>, start: &[f64], step: f64) -> Vec<f64> {
    let n = start.len();
    let mut verts: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| obj.eval(v).0).collect();
    for _ in 0..SIMPLEX_MAX_ITER {
        // Order vertices.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let best = idx[0];
        let worst = idx[n];
        let second_worst = idx[n - 1];
        // Convergence on parameter spread.
        let spread = (0..n)
            .map(|j| (verts[best][j] - verts[worst][j]).abs())
            .fold(0.0, f64::max);
        if spread < CONVERGENCE_TOL {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| {
                idx[..n].iter().map(|&k| verts[k][j]).sum::<f64>() / n as f64
            })
            .collect();
        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + (centroid[j] - verts[worst][j]))
            .collect();
        let fr = obj.eval(&reflect).0;
        if fr < vals[best] {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - verts[worst][j]))
                .collect();
            let fe = obj.eval(&expand).0;
            if fe < fr {
                verts[worst] = expand;
                vals[worst] = fe;
            } else {
                verts[worst] = reflect;
                vals[worst] = fr;
            }
        } else if fr < vals[second_worst] {
            verts[worst] = reflect;
            vals[worst] = fr;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 0.5 * (verts[worst][j] - centroid[j]))
                .collect();
            let fc = obj.eval(&contract).0;
            if fc < vals[worst] {
                verts[worst] = contract;
                vals[worst] = fc;
            } else {
                // Shrink toward best.
                let b = verts[best].clone();
                for k in 0..=n {
                    if k == best {
                        continue;
                    }
                    for j in 0..n {
                        verts[k][j] = b[j] + 0.5 * (verts[k][j] - b[j]);
                    }
                    vals[k] = obj.eval(&verts[k]).0;
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap())
        .unwrap();
    verts.swap_remove(best)
}

/// Damped Gauss–Newton polish on the profiled chi2; finite-difference
/// gradient/curvature in the transformed coordinates.
fn polish(obj: &Objective<'_>, start: &[f64]) -> (Vec<f64>, bool) {
    let n = start.len();
    let mut theta = start.to_vec();
    let mut chi2 = obj.eval(&theta).0;
    let mut lambda = 1e-3;
    let h = 1e-6;
    for _ in 0..POLISH_MAX_ITER {
        // Gradient and Hessian by central differences on chi2.
        let mut grad = vec![0.0; n];
        let mut hess = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[i] += h;
            tm[i] -= h;
            let fp = obj.eval(&tp).0;
            let fm = obj.eval(&tm).0;
            grad[i] = (fp - fm) / (2.0 * h);
            hess[i][i] = (fp - 2.0 * chi2 + fm) / (h * h);
        }
        for i in 0..n {
            for j in i + 1..n {
                let mut tpp = theta.clone();
                tpp[i] += h;
                tpp[j] += h;
                let mut tpm = theta.clone();
                tpm[i] += h;
                tpm[j] -= h;
                let mut tmp = theta.clone();
                tmp[i] -= h;
                tmp[j] += h;
                let mut tmm = theta.clone();
                tmm[i] -= h;
                tmm[j] -= h;
                let v = (obj.eval(&tpp).0 - obj.eval(&tpm).0 - obj.eval(&tmp).0
                    + obj.eval(&tmm).0)
                    / (4.0 * h * h);
                hess[i][j] = v;
                hess[j][i] = v;
            }
        }
        let mut improved = false;
        for _ in 0..12 {
            // Solve (H + λ diag(H)) step = -grad.
            let mut a = hess.clone();
            for i in 0..n {
                let d = a[i][i].abs().max(1e-12);
                a[i][i] += lambda * d;
            }
            if let Some(step) = solve_dense(&a, &grad) {
                let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t - s).collect();
                let c = obj.eval(&cand).0;
                if c.is_finite() && c <= chi2 {
                    let rel = theta
                        .iter()
                        .zip(&cand)
                        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
                        .fold(0.0, f64::max);
                    theta = cand;
                    let old = chi2;
                    chi2 = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    if rel < CONVERGENCE_TOL || (old - chi2) < 1e-14 * (1.0 + chi2) {
                        return (theta, true);
                    }
                    break;
                }
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !improved {
            // Stationary under damping: converged as far as curvature allows.
            return (theta, true);
        }
    }
    (theta, false)
}

/// Gaussian elimination with partial pivoting; None on singular systems.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.clone()).collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Crude scale estimates driving the multi-start grid.
struct Estimates {
    background: f64,
    /// Sample scatter of the trailing window; the data-driven noise scale.
    tail_std: f64,
    peak: f64,
    tau_peak: f64,
    gamma0: f64,
    tau_span: f64,
}

fn estimate(data: &FitData) -> Estimates {
    let n = data.y.len();
    let tail_start = (n as f64 * 0.8) as usize;
    let tail = &data.y[tail_start..];
    let background = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
    let tail_std = (tail
        .iter()
        .map(|&y| (y - background) * (y - background))
        .sum::<f64>()
        / (tail.len().saturating_sub(1)).max(1) as f64)
        .sqrt();
    let (mut peak, mut tau_peak) = (f64::MIN, data.tau[0]);
    for (t, y) in data.tau.iter().zip(&data.y) {
        if *y > peak {
            peak = *y;
            tau_peak = *t;
        }
    }
    let tau_span = data.tau[n - 1] - data.tau[0];
    // Tail log-slope of the excess over background gives a decay scale.
    let mid = n / 2;
    let mut gamma0 = 1.0 / tau_span.max(1e-300);
    let e_mid: f64 = (data.y[mid..mid + (n / 10).max(1)]
        .iter()
        .sum::<f64>()
        / (n / 10).max(1) as f64
        - background)
        .max(1e-12);
    let q1 = n / 4;
    let e_q1: f64 = (data.y[q1..q1 + (n / 10).max(1)]
        .iter()
        .sum::<f64>()
        / (n / 10).max(1) as f64
        - background)
        .max(1e-12);
    let dt = data.tau[mid] - data.tau[q1];
    if dt > 0.0 && e_q1 > e_mid {
        gamma0 = ((e_q1 / e_mid).ln() / (2.0 * dt)).max(gamma0);
    }
    Estimates {
        background,
        tail_std,
        peak,
        tau_peak,
        gamma0,
        tau_span,
    }
}

fn fit_single_model(data: &FitData, model: FitModel, est: &Estimates) -> Option<FitResult> {
    let obj = Objective {
        data,
        model,
        tau_span: est.tau_span,
        shape_buf: std::cell::RefCell::new(Vec::with_capacity(data.tau.len())),
    };
    let gamma_starts = [est.gamma0 * 0.5, est.gamma0, est.gamma0 * 2.0];
    let tau_peak = (est.tau_peak - data.tau[0]).max(1e-6 * est.tau_span);
    let split_starts: Vec<f64> = match model {
        // First oscillation maximum of 1 - cos at t = π/Ω.
        FitModel::Eq3 => vec![
            std::f64::consts::PI / tau_peak,
            0.5 * std::f64::consts::PI / tau_peak,
            2.0 * std::f64::consts::PI / tau_peak,
        ],
        FitModel::Eq4Canonical => vec![0.3, 0.7, 1.2],
        _ => vec![0.0],
    };
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for &g in &gamma_starts {
        for &sc in &split_starts {
            let split = match model {
                FitModel::Eq3 => sc,
                FitModel::Eq4Canonical => (sc * 2.0 * g).min(1.98 * g),
                _ => 0.0,
            };
            let start = obj.encode(g, split, 0.0);
            let refined = nelder_mead(&obj, &start, 0.3);
            let (polished, converged) = polish(&obj, &refined);
            let chi2 = obj.eval(&polished).0;
            if chi2.is_finite()
                && best.as_ref().map_or(true, |(_, c, _)| chi2 < *c)
            {
                best = Some((polished, chi2, converged));
            }
        }
    }
    let (theta, chi2, converged) = best?;
    let (gamma, split, tau0) = obj.decode(&theta);
    let (w1, background, _) = {
        let buf: Vec<f64> = data
            .tau
            .iter()
            .map(|&t| shape(model, gamma, split, t - tau0))
            .collect();
        profile_linear(data, &buf)
    };
    let n_params = model.n_nonlinear() + 2;
    let n = data.y.len();
    let k = n_params as f64;
    let aicc = chi2 + 2.0 * k + 2.0 * k * (k + 1.0) / (n as f64 - k - 1.0);
    let uncertainty = covariance_uncertainty(data, model, w1, gamma, split, background, tau0, chi2);
    Some(FitResult {
        model,
        params: FitParams {
            w1,
            gamma_eff: gamma,
            splitting: split,
            background,
            tau0,
        },
        uncertainty,
        chi2,
        n_points: n,
        n_params,
        aicc: if converged { aicc } else { aicc + 1e6 },
        selection_margin: f64::INFINITY,
        ambiguous: false,
        derived: derive_pair(model, gamma, split),
    })
}

/// 1-σ uncertainties from the inverse Gauss–Newton normal matrix in natural
/// parameters, scaled by the reduced chi2.
#[allow(clippy::too_many_arguments)]
fn covariance_uncertainty(
    data: &FitData,
    model: FitModel,
    w1: f64,
    gamma: f64,
    split: f64,
    background: f64,
    tau0: f64,
    chi2: f64,
) -> FitParams {
    let free: Vec<usize> = if model.has_splitting() {
        vec![0, 1, 2, 3, 4]
    } else {
        vec![0, 1, 3, 4]
    };
    let p = [w1, gamma, split, background, tau0];
    let n = data.y.len();
    let npar = free.len();
    let model_at = |p: &[f64; 5], t: f64| p[0] * shape(model, p[1], p[2], t - p[4]) + p[3];
    // J^T W J over finite-difference sensitivities.
    let mut jtj = vec![vec![0.0; npar]; npar];
    let mut sens = vec![vec![0.0; n]; npar];
    for (c, &pi) in free.iter().enumerate() {
        let h = 1e-6 * (1.0 + p[pi].abs());
        let mut pp = p;
        let mut pm = p;
        pp[pi] += h;
        pm[pi] -= h;
        for (i, &t) in data.tau.iter().enumerate() {
            sens[c][i] = (model_at(&pp, t) - model_at(&pm, t)) / (2.0 * h);
        }
    }
    for a in 0..npar {
        for b in a..npar {
            let mut s = 0.0;
            for i in 0..n {
                s += data.weight[i] * sens[a][i] * sens[b][i];
            }
            jtj[a][b] = s;
            jtj[b][a] = s;
        }
    }
    let dof = (n.saturating_sub(npar)).max(1) as f64;
    let scale = (chi2 / dof).max(1e-300);
    let mut out = [0.0; 5];
    // Diagonal of the inverse via one solve per unit vector.
    for (c, &pi) in free.iter().enumerate() {
        let mut e = vec![0.0; npar];
        e[c] = 1.0;
        let var = solve_dense(&jtj, &e).map(|x| x[c]).unwrap_or(f64::NAN);
        out[pi] = if var.is_finite() && var > 0.0 {
            (var * scale).sqrt()
        } else {
            // Degenerate direction: report a scale-level uncertainty.
            p[pi].abs().max(1e-6)
        };
    }
    FitParams {
        w1: out[0],
        gamma_eff: out[1],
        splitting: out[2],
        background: out[3],
        tau0: out[4],
    }
}

/// Fit a waveform against the requested model set and select the best model
/// by the corrected information criterion.
pub fn fit_waveform(data: &FitData, options: &FitOptions) -> Result<FitResult> {
    if data.tau.len() != data.y.len() || data.y.len() != data.weight.len() {
        return Err(Error::InvalidParameter("fit data lengths differ".into()));
    }
    if data.y.len() < 50 {
        return Err(Error::InvalidParameter(format!(
            "need at least 50 bins, got {}",
            data.y.len()
        )));
    }
    if options.models.is_empty() {
        return Err(Error::InvalidParameter("empty model set".into()));
    }
    let mut data = data.clone();
    let est = estimate(&data);
    // Signal significance of the peak over the trailing window, measured
    // against the data's own tail scatter (works for counts and for
    // arbitrarily scaled normalized curves alike).
    if (est.peak - est.background) <= 5.0 * est.tail_std {
        return Err(Error::NoSignal(format!(
            "peak excess {:.3} below 5 tail sigma ({:.3})",
            est.peak - est.background,
            5.0 * est.tail_std
        )));
    }
    if options.mask_initial_bins > 0 {
        // Onset = first bin significantly above background.
        let onset = data.y.iter().enumerate().find_map(|(i, &y)| {
            let s = 1.0 / data.weight[i].max(1e-300).sqrt();
            (y > est.background + 3.0 * s).then_some(i)
        });
        if let Some(i0) = onset {
            for i in i0..(i0 + options.mask_initial_bins).min(data.y.len()) {
                data.weight[i] = 0.0;
            }
        }
    }
    let mut results: Vec<FitResult> = Vec::new();
    for &m in &options.models {
        if let Some(r) = fit_single_model(&data, m, &est) {
            results.push(r);
        }
    }
    if results.is_empty() {
        return Err(Error::Numerical(
            "no model produced a finite fit".into(),
        ));
    }
    results.sort_by(|a, b| a.aicc.partial_cmp(&b.aicc).unwrap());
    let margin = if results.len() > 1 {
        results[1].aicc - results[0].aicc
    } else {
        f64::INFINITY
    };
    let mut best = results.swap_remove(0);
    best.selection_margin = margin;
    best.ambiguous = margin < AMBIGUITY_MARGIN;
    if best.aicc >= 1e6 {
        let reason = "no model converged within the restart budget".to_string();
        best.aicc -= 1e6;
        return Err(Error::FitFailure {
            reason,
            best_so_far: Box::new(best),
        });
    }
    // τ range must cover several decay times of the fitted envelope.
    let decay = 1.0 / (2.0 * best.params.gamma_eff);
    if est.tau_span < 3.0 * decay {
        return Err(Error::WrongRegime(format!(
            "tau range {} shorter than 3 decay times {}",
            est.tau_span,
            3.0 * decay
        )));
    }
    Ok(best)
}

/// One fitted point of a strong-to-weak transition trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub omega3: f64,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

/// Fit a series of waveforms taken at different Ω3 and return the fitted
/// eigenvalues sorted by Ω3. Per-point failures are recorded, not fatal.
pub fn trace_transition(
    points: Vec<(f64, FitData)>,
    options: &FitOptions,
) -> Result<Vec<TransitionRow>> {
    if points.len() < 1 {
        return Err(Error::InvalidParameter("empty transition series".into()));
    }
    let mut rows: Vec<TransitionRow> = points
        .into_iter()
        .map(|(omega3, data)| match fit_waveform(&data, options) {
            Ok(fit) => TransitionRow {
                omega3,
                fit: Some(fit),
                error: None,
            },
            Err(e) => TransitionRow {
                omega3,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    rows.sort_by(|a, b| a.omega3.partial_cmp(&b.omega3).unwrap());
    Ok(rows)
}

/// Waveform shape classes along the strong → weak trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    /// Oscillation whose minima touch zero (real splitting, on resonance).
    R1Oscillatory,
    /// Oscillation with lifted minima (complex splitting, detuned).
    OscillatoryWithOffset,
    /// τ²-onset single-hump shape of the coalesced pair.
    ExceptionalPoint,
    /// Two-exponential antibunching close to the coalescence.
    Weak,
    /// Deep weak regime: widely bifurcated linewidths.
    R3Antibunching,
}

/// Splitting/linewidth ratio separating [`ShapeClass::Weak`] from
/// [`ShapeClass::R3Antibunching`].
pub const WEAK_DEEP_BOUNDARY: f64 = 1.1;
/// Fitted splitting/linewidth ratio below which a non-oscillatory shape is
/// called coalesced.
pub const EP_RATIO: f64 = 0.2;
/// Oscillation minima below this fraction of the neighboring maximum count
/// as touching zero.
pub const ZERO_TOUCH_RATIO: f64 = 0.05;

/// Classify a (noise-free or lightly smoothed) correlation waveform by its
/// shape: interior-minimum structure first, then a single- vs
/// double-exponential residual comparison for the non-oscillatory shapes.
pub fn classify_waveform_shape(w: &CorrelationWaveform) -> Result<ShapeClass> {
    let w = w.normalized();
    let n = w.g2.len();
    if n < 16 {
        return Err(Error::InvalidParameter("waveform too short".into()));
    }
    // Light moving-average smoothing for histogram-derived curves.
    let win = (n / 400).max(1);
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(win);
            let hi = (i + win + 1).min(n);
            w.g2[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    // Interior minima followed by a genuine rebound → oscillation. The
    // rebound test is local (min against the next local max), so fast
    // envelope decay does not hide later oscillation periods.
    let peak = smooth.iter().cloned().fold(0.0, f64::max);
    let mut min_ratio: Option<f64> = None;
    for i in 1..n - 1 {
        if !(smooth[i] < smooth[i - 1] && smooth[i] <= smooth[i + 1]) {
            continue;
        }
        // Next local max to the right.
        let mut j = i + 1;
        while j < n - 1 && smooth[j + 1] >= smooth[j] {
            j += 1;
        }
        let (m, rebound) = (smooth[i], smooth[j]);
        // Reject numerical-floor wiggles and marginal rebounds.
        if rebound > 1e-4 * peak && rebound > 1.5 * m {
            let r = m / rebound;
            min_ratio = Some(min_ratio.map_or(r, |b: f64| b.min(r)));
        }
    }
    if let Some(r) = min_ratio {
        return Ok(if r < ZERO_TOUCH_RATIO {
            ShapeClass::R1Oscillatory
        } else {
            ShapeClass::OscillatoryWithOffset
        });
    }
    // Non-oscillatory: single- vs double-exponential residual test. The
    // coalesced τ² shape is the zero-splitting limit of the two-exponential
    // family, so the call is EP unless freeing the splitting buys a large
    // relative residual improvement.
    let data = FitData::from_waveform(&w);
    let one = |m: FitModel| {
        fit_waveform(
            &data,
            &FitOptions {
                models: vec![m],
                ..FitOptions::default()
            },
        )
    };
    let ep = one(FitModel::EpLimit)?;
    let eq4 = one(FitModel::Eq4Canonical)?;
    let ratio = eq4.params.splitting / eq4.params.gamma_eff;
    let improvement = (ep.chi2 - eq4.chi2) / ep.chi2.max(1e-300);
    if ratio < EP_RATIO || improvement < 0.5 {
        return Ok(ShapeClass::ExceptionalPoint);
    }
    Ok(if ratio < WEAK_DEEP_BOUNDARY {
        ShapeClass::Weak
    } else {
        ShapeClass::R3Antibunching
    })
}

impl std::fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ShapeClass::R1Oscillatory => "r1_oscillatory",
            ShapeClass::OscillatoryWithOffset => "oscillatory_with_offset",
            ShapeClass::ExceptionalPoint => "exceptional_point",
            ShapeClass::Weak => "weak",
            ShapeClass::R3Antibunching => "r3_antibunching",
        };
        f.write_str(s)
    }
}
