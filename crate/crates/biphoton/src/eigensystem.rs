//! The effective two-level non-Hermitian Hamiltonian: eigenvalues,
//! exceptional-point location, parameter sweeps with branch tracking, and
//! coupling-regime classification.
//!
//! Sign convention: the closed-form eigenvalues implemented here are the
//! negatives of the spectrum of the matrix in [`EffectiveHamiltonian`]
//! (δ = -eig(H_eff)); the relation is documented and tested rather than
//! "fixed", since it is the photon-detuning convention the closed-form
//! correlation functions are written in.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{FieldParams, SystemParams};

/// Default coalescence tolerance on |Ω_e| for EP classification, Γ41 units.
pub const EP_TOLERANCE: f64 = 1e-6;

/// The 2x2 effective Hamiltonian of the coupled |2>-|4> manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian {
    pub h11: C64,
    pub h12: C64,
    pub h21: C64,
    pub h22: C64,
}

impl EffectiveHamiltonian {
    pub fn new(sys: &SystemParams, fields: &FieldParams) -> Result<Self> {
        sys.validate()?;
        fields.validate()?;
        Ok(EffectiveHamiltonian {
            h11: C64::new(0.0, -sys.gamma21()),
            h12: C64::new(-0.5 * fields.omega3, 0.0),
            h21: C64::new(-0.5 * fields.omega3, 0.0),
            h22: C64::new(fields.delta3, -sys.gamma41),
        })
    }

    pub fn as_matrix(&self) -> [[C64; 2]; 2] {
        [[self.h11, self.h12], [self.h21, self.h22]]
    }
}

/// The two complex eigenenergies and derived splitting quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub delta_plus: C64,
    pub delta_minus: C64,
    /// Ω_e = δ+ - δ-.
    pub omega_e: C64,
    /// Γ_e± = Γ_eff ± |Ω_e|/2. Populated when the splitting is (numerically)
    /// purely imaginary, i.e. in the weak regime where the two channels share
    /// a central frequency but bifurcate in linewidth.
    pub gamma_e_plus: Option<f64>,
    pub gamma_e_minus: Option<f64>,
}

impl EigenPair {
    /// |Ω_e|.
    pub fn splitting_abs(&self) -> f64 {
        self.omega_e.norm()
    }
}

/// Coupling-regime label together with the quantities the decision used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub class: RegimeClass,
    pub omega_e_abs: f64,
    pub gamma_eff: f64,
    pub bandwidth: f64,
    pub two_gamma_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeClass {
    R1RabiOscillation,
    R2GroupDelay,
    R3AntibunchingDecay,
    Ep,
}

impl std::fmt::Display for RegimeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeClass::R1RabiOscillation => "R1_rabi_oscillation",
            RegimeClass::R2GroupDelay => "R2_group_delay",
            RegimeClass::R3AntibunchingDecay => "R3_antibunching_decay",
            RegimeClass::Ep => "EP",
        };
        f.write_str(s)
    }
}

/// Closed-form eigenvalues
/// δ± = -Δ3/2 + iΓ_eff ± √(|Ω3|²/4 + (Δ3/2 - iΓ_diff)²),
/// branch-ordered by real part, ties broken by imaginary part.
pub fn eigenvalues(sys: &SystemParams, fields: &FieldParams) -> Result<EigenPair> {
    sys.validate()?;
    fields.validate()?;
    Ok(eigenvalues_unchecked(sys, fields.omega3, fields.delta3))
}

pub(crate) fn eigenvalues_unchecked(sys: &SystemParams, omega3: f64, delta3: f64) -> EigenPair {
    let center = C64::new(-0.5 * delta3, sys.gamma_eff());
    let inner = C64::new(0.25 * omega3 * omega3, 0.0)
        + (C64::new(0.5 * delta3, -sys.gamma_diff())).powi(2);
    let root = inner.sqrt();
    let (a, b) = (center + root, center - root);
    order_pair(sys, a, b)
}

fn order_pair(sys: &SystemParams, a: C64, b: C64) -> EigenPair {
    let (plus, minus) = if a.re > b.re || (a.re == b.re && a.im >= b.im) {
        (a, b)
    } else {
        (b, a)
    };
    pair_from_ordered(sys, plus, minus)
}

fn pair_from_ordered(sys: &SystemParams, plus: C64, minus: C64) -> EigenPair {
    let omega_e = plus - minus;
    // Imaginary splitting within numerical slack marks the weak regime.
    let weak = omega_e.re.abs() <= 1e-9 * (1.0 + omega_e.norm());
    let (gp, gm) = if weak {
        let half = 0.5 * omega_e.norm();
        (
            Some(sys.gamma_eff() + half),
            Some(sys.gamma_eff() - half),
        )
    } else {
        (None, None)
    };
    EigenPair {
        delta_plus: plus,
        delta_minus: minus,
        omega_e,
        gamma_e_plus: gp,
        gamma_e_minus: gm,
    }
}

/// Locate the coupling strength at which the two eigenvalues coalesce.
///
/// On the Δ3 = 0 plane the discriminant |Ω3|²/4 - Γ_diff² is real with the
/// single root Ω3 = 2Γ_diff = Γ41 - Γ21. Off the plane no real Ω3 closes
/// the gap and the error carries the smallest |Ω_e| attained.
pub fn find_ep(sys: &SystemParams, delta3: f64) -> Result<f64> {
    sys.validate()?;
    if delta3 != 0.0 {
        // Golden-section minimize |Ω_e| over Ω3 to report how close one gets.
        let gold = 0.5 * (3.0 - 5f64.sqrt());
        let splitting = |om: f64| {
            eigenvalues_unchecked(sys, om, delta3).splitting_abs()
        };
        let (mut lo, mut hi) = (0.0_f64, 4.0 * sys.gamma41 + 2.0 * delta3.abs());
        for _ in 0..200 {
            let a = lo + gold * (hi - lo);
            let b = hi - gold * (hi - lo);
            if splitting(a) < splitting(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let min_splitting = splitting(0.5 * (lo + hi));
        return Err(Error::NoCoalescence { min_splitting });
    }
    // The discriminant Ω3²/4 - Γ_diff² vanishes at exactly Ω3 = 2Γ_diff;
    // returning the algebraic root (not an iterate) keeps the splitting at
    // the returned point at the floating-point zero, which a bisection or
    // minimizer cannot achieve through the square-root branch point.
    Ok(2.0 * sys.gamma_diff())
}

/// Classify the coupling regime from the eigenvalue splitting and the
/// phase-matching bandwidth Δω_g (supplied by the propagation module).
pub fn classify_regime(
    sys: &SystemParams,
    fields: &FieldParams,
    bandwidth: f64,
) -> Result<RegimeLabel> {
    classify_regime_with_tolerance(sys, fields, bandwidth, EP_TOLERANCE)
}

pub fn classify_regime_with_tolerance(
    sys: &SystemParams,
    fields: &FieldParams,
    bandwidth: f64,
    ep_tolerance: f64,
) -> Result<RegimeLabel> {
    let pair = eigenvalues(sys, fields)?;
    let omega_e_abs = pair.splitting_abs();
    let gamma_eff = sys.gamma_eff();
    let two_gamma_diff = 2.0 * sys.gamma_diff();
    let class = if omega_e_abs < ep_tolerance {
        RegimeClass::Ep
    } else if bandwidth < omega_e_abs.max(gamma_eff) {
        RegimeClass::R2GroupDelay
    } else if fields.omega3 > two_gamma_diff {
        RegimeClass::R1RabiOscillation
    } else {
        RegimeClass::R3AntibunchingDecay
    };
    Ok(RegimeLabel {
        class,
        omega_e_abs,
        gamma_eff,
        bandwidth,
        two_gamma_diff,
    })
}

/// One row of an eigenvalue sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub omega3: f64,
    pub delta3: f64,
    pub delta_plus: C64,
    pub delta_minus: C64,
}

/// Eigenvalues over a grid of Ω3 and Δ3 with continuous branch tracking.
///
/// Rows are emitted in grid order (Δ3 outer, Ω3 inner). Along each Ω3 row
/// the branch assignment follows the previous point by nearest-neighbor
/// matching in the complex plane, so swept surfaces reproduce the
/// bifurcation without branch flips; the first point of each row is seeded
/// from the row above.
pub fn sweep_eigenvalues(
    sys: &SystemParams,
    omega3_grid: &[f64],
    delta3_grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    sys.validate()?;
    if omega3_grid.is_empty() || delta3_grid.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    for g in [omega3_grid, delta3_grid] {
        if g.windows(2).any(|w| w[1] <= w[0]) && g.len() > 1 {
            return Err(Error::InvalidParameter(
                "sweep grids must be strictly increasing".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(omega3_grid.len() * delta3_grid.len());
    let mut row_seed: Option<(C64, C64)> = None;
    for &d3 in delta3_grid {
        let mut prev: Option<(C64, C64)> = row_seed;
        for (j, &om) in omega3_grid.iter().enumerate() {
            let pair = eigenvalues_unchecked(sys, om, d3);
            let (p, m) = match prev {
                None => (pair.delta_plus, pair.delta_minus),
                Some((pp, pm)) => {
                    // Pick the assignment minimizing total displacement.
                    let keep = (pair.delta_plus - pp).norm() + (pair.delta_minus - pm).norm();
                    let swap = (pair.delta_minus - pp).norm() + (pair.delta_plus - pm).norm();
                    if swap < keep {
                        (pair.delta_minus, pair.delta_plus)
                    } else {
                        (pair.delta_plus, pair.delta_minus)
                    }
                }
            };
            prev = Some((p, m));
            if j == 0 {
                row_seed = Some((p, m));
            }
            out.push(SweepPoint {
                omega3: om,
                delta3: d3,
                delta_plus: p,
                delta_minus: m,
            });
        }
    }
    Ok(out)
}

/// Channel energies of the doubly dressed system.
///
/// The double-dressing term couples the upper single-dressing branch δ+ to
/// an E2 channel at a_d = -Δ2 - Δ3/2 + iΓ41, leaving δ- untouched:
/// the cleared numerator is the cubic
/// P(δ) = [(δ - δ+)(δ - a_d) - g²|Ω2|²] (δ - δ-),
/// whose three roots are returned sorted by real part. At Ω2 → 0 the set is
/// {δ+, δ-} plus the decoupled root a_d.
pub fn double_dressing_channels(
    sys: &SystemParams,
    fields: &FieldParams,
    g2_factor: f64,
) -> Result<[C64; 3]> {
    let pair = eigenvalues(sys, fields)?;
    let a_d = C64::new(-fields.delta2 - 0.5 * fields.delta3, sys.gamma41);
    let coupling = g2_factor * fields.omega2 * fields.omega2;
    // Quadratic factor (δ - δ+)(δ - a_d) - g²|Ω2|².
    let sum = pair.delta_plus + a_d;
    let prod = pair.delta_plus * a_d - coupling;
    let disc = (0.25 * sum * sum - prod).sqrt();
    let r1 = 0.5 * sum + disc;
    let r2 = 0.5 * sum - disc;
    let mut roots = [r1, r2, pair.delta_minus];
    for r in &roots {
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(Error::Numerical(
                "double-dressing channel root did not converge".into(),
            ));
        }
    }
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    Ok(roots)
}

/// Coefficients (c3, c2, c1, c0) of the cleared double-dressing cubic in δ.
pub fn double_dressing_polynomial(
    sys: &SystemParams,
    fields: &FieldParams,
    g2_factor: f64,
) -> Result<[C64; 4]> {
    let pair = eigenvalues(sys, fields)?;
    let a_d = C64::new(-fields.delta2 - 0.5 * fields.delta3, sys.gamma41);
    let coupling = C64::new(g2_factor * fields.omega2 * fields.omega2, 0.0);
    // [(δ - δ+)(δ - a_d) - c] (δ - δ-)
    let q2 = C64::new(1.0, 0.0);
    let q1 = -(pair.delta_plus + a_d);
    let q0 = pair.delta_plus * a_d - coupling;
    let m = pair.delta_minus;
    Ok([q2, q1 - q2 * m, q0 - q1 * m, -q0 * m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sys() -> SystemParams {
        SystemParams::default()
    }

    fn fields(omega3: f64, delta3: f64) -> FieldParams {
        FieldParams {
            omega3,
            delta3,
            ..FieldParams::default()
        }
    }

    #[test]
    fn uncoupled_diagonal_limit() {
        let pair = eigenvalues(&sys(), &fields(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(pair.delta_plus.im, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pair.delta_minus.im, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(pair.delta_plus.re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn coalescence_at_ep() {
        let pair = eigenvalues(&sys(), &fields(0.8, 0.0)).unwrap();
        assert_abs_diff_eq!((pair.delta_plus - pair.delta_minus).norm(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(pair.delta_plus.im, 0.6, epsilon = 1e-8);
    }

    #[test]
    fn strong_regime_values() {
        let pair = eigenvalues(&sys(), &fields(2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(pair.delta_plus.re, 0.91652, epsilon = 1e-5);
        assert_abs_diff_eq!(pair.delta_minus.re, -0.91652, epsilon = 1e-5);
        assert_abs_diff_eq!(pair.delta_plus.im, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.delta_minus.im, 0.6, epsilon = 1e-12);
    }

    #[test]
    fn weak_regime_values() {
        let pair = eigenvalues(&sys(), &fields(0.4, 0.0)).unwrap();
        assert_abs_diff_eq!(pair.delta_plus.im, 0.94641, epsilon = 1e-5);
        assert_abs_diff_eq!(pair.delta_minus.im, 0.25359, epsilon = 1e-5);
        assert_abs_diff_eq!(pair.delta_plus.re, 0.0, epsilon = 1e-12);
        // Linewidth bifurcation fields populated in the weak regime.
        assert_abs_diff_eq!(pair.gamma_e_plus.unwrap(), 0.94641, epsilon = 1e-5);
        assert_abs_diff_eq!(pair.gamma_e_minus.unwrap(), 0.25359, epsilon = 1e-5);
    }

    #[test]
    fn vieta_identities() {
        let s = sys();
        for &(om, d3) in &[(0.0, 0.0), (0.8, 0.0), (2.0, 1.5), (0.3, -4.0), (7.0, 9.0)] {
            let pair = eigenvalues(&s, &fields(om, d3)).unwrap();
            let sum = pair.delta_plus + pair.delta_minus;
            let prod = pair.delta_plus * pair.delta_minus;
            let sum_expect = C64::new(-d3, s.gamma41 + s.gamma21());
            let prod_expect =
                C64::new(-s.gamma21() * s.gamma41 - 0.25 * om * om, -s.gamma21() * d3);
            assert_abs_diff_eq!((sum - sum_expect).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((prod - prod_expect).norm(), 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn find_ep_closed_form() {
        let s = sys();
        let om = find_ep(&s, 0.0).unwrap();
        assert_abs_diff_eq!(om, 0.8, epsilon = 1e-10);

        let mut equal = s.clone();
        equal.gamma21_ratio = 1.0;
        assert_abs_diff_eq!(find_ep(&equal, 0.0).unwrap(), 0.0, epsilon = 1e-12);

        let mut closed = s.clone();
        closed.gamma21_ratio = 1e-12; // effectively zero
        assert_abs_diff_eq!(find_ep(&closed, 0.0).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn find_ep_off_plane_errors() {
        match find_ep(&sys(), 1.0) {
            Err(Error::NoCoalescence { min_splitting }) => {
                assert!(min_splitting > 0.0);
            }
            other => panic!("expected NoCoalescence, got {other:?}"),
        }
    }

    #[test]
    fn regime_classification_examples() {
        let s = sys();
        // Large bandwidth: nonlinear-response regimes.
        let r1 = classify_regime(&s, &fields(10.0, 0.0), 100.0).unwrap();
        assert_eq!(r1.class, RegimeClass::R1RabiOscillation);
        let ep = classify_regime(&s, &fields(0.8, 0.0), 100.0).unwrap();
        assert_eq!(ep.class, RegimeClass::Ep);
        let r3 = classify_regime(&s, &fields(0.4, 0.0), 100.0).unwrap();
        assert_eq!(r3.class, RegimeClass::R3AntibunchingDecay);
        // Narrow bandwidth: group-delay regime.
        let r2 = classify_regime(&s, &fields(10.0, 0.0), 0.01).unwrap();
        assert_eq!(r2.class, RegimeClass::R2GroupDelay);
    }

    #[test]
    fn sweep_branch_tracking_no_flips() {
        let s = sys();
        let omega: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let rows = sweep_eigenvalues(&s, &omega, &[0.0]).unwrap();
        // Below the EP the real parts coincide; above they bifurcate.
        for r in &rows {
            if r.omega3 < 0.79 {
                assert_abs_diff_eq!(r.delta_plus.re, r.delta_minus.re, epsilon = 1e-10);
            }
        }
        let last = rows.last().unwrap();
        assert!((last.delta_plus.re - last.delta_minus.re).abs() > 1.0);
        // Continuity: per-step displacement smaller than inter-branch
        // distance away from the EP.
        for w in rows.windows(2) {
            let gap = (w[1].delta_plus - w[1].delta_minus).norm();
            if gap > 0.05 {
                let step = (w[1].delta_plus - w[0].delta_plus).norm();
                assert!(step < gap, "branch flip at omega3 = {}", w[1].omega3);
            }
        }
    }

    #[test]
    fn sweep_delta3_no_simultaneous_coalescence() {
        let s = sys();
        let d3: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let rows = sweep_eigenvalues(&s, &[0.7], &d3).unwrap();
        // At Ω3 = 0.7 < 2Γ_diff, scanning Δ3 never closes both parts at once.
        for r in &rows {
            let gap_re = (r.delta_plus.re - r.delta_minus.re).abs();
            let gap_im = (r.delta_plus.im - r.delta_minus.im).abs();
            assert!(gap_re + gap_im > 1e-3);
        }
    }

    #[test]
    fn sweep_single_point_matches_eigenvalues() {
        let s = sys();
        let rows = sweep_eigenvalues(&s, &[1.3], &[0.4]).unwrap();
        let pair = eigenvalues(&s, &fields(1.3, 0.4)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].delta_plus, pair.delta_plus);
        assert_eq!(rows[0].delta_minus, pair.delta_minus);
    }

    #[test]
    fn sweep_empty_grid_rejected() {
        assert!(sweep_eigenvalues(&sys(), &[], &[0.0]).is_err());
    }

    #[test]
    fn double_dressing_off_recovers_single_dressing() {
        let s = sys();
        let f = fields(2.0, 0.0);
        let pair = eigenvalues(&s, &f).unwrap();
        let roots = double_dressing_channels(&s, &f, 0.25).unwrap();
        let a_d = C64::new(0.0, 1.0);
        let mut expected = [pair.delta_plus, pair.delta_minus, a_d];
        expected.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (r, e) in roots.iter().zip(&expected) {
            assert_abs_diff_eq!((r - e).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn double_dressing_strong_triple_channels() {
        let s = sys();
        let f = FieldParams {
            omega3: 6.0,
            omega2: 4.0,
            ..FieldParams::default()
        };
        let roots = double_dressing_channels(&s, &f, 0.25).unwrap();
        assert!(roots[1].re - roots[0].re > 0.5);
        assert!(roots[2].re - roots[1].re > 0.5);
    }

    #[test]
    fn double_dressing_roots_satisfy_polynomial() {
        let s = sys();
        let f = FieldParams {
            omega3: 3.0,
            omega2: 2.5,
            delta2: 0.7,
            delta3: -0.4,
            ..FieldParams::default()
        };
        let roots = double_dressing_channels(&s, &f, 0.25).unwrap();
        let c = double_dressing_polynomial(&s, &f, 0.25).unwrap();
        for r in roots {
            let p = ((c[0] * r + c[1]) * r + c[2]) * r + c[3];
            assert_abs_diff_eq!(p.norm(), 0.0, epsilon = 1e-10);
        }
    }
}
