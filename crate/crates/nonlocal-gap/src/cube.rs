//! Reversible (uniform) jump measure on the zero-drift cube, any dimension:
//! the secular series collapses to the odd lattice, so it can be evaluated
//! either by multiset-compressed enumeration or through the integral
//! transform of [`crate::series`], and the gap dichotomy is decided by the
//! H_d enclosure. The two routes are mutual oracles.
//!
//! With σ(λ) = −2λ/π², the series on the cube is
//!
//!   E(λ) = (8/π²)^d · [ 1/(λ₀−λ) − (2/π²) · J_d(σ(λ)) ],
//!
//! where J_d is the transform integral with exponent σ; J_d(d+3) = H_d.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::Kahan;
use crate::series::{
    for_each_odd_multiset, hd_transform, transform_integral, HdResult, Verdict,
};

/// Gap report for the uniform jump measure on the d-cube.
#[derive(Debug, Clone, Serialize)]
pub struct CubeGapReport {
    pub d: u32,
    pub lambda0: f64,
    pub lambda1: f64,
    pub hd: HdResult,
    pub gap: f64,
    /// Certified enclosure of the gap (degenerate when it equals λ₁).
    pub gap_lo: f64,
    pub gap_hi: f64,
    pub strictly_above: bool,
}

pub fn cube_lambda0(d: u32) -> f64 {
    -(d as f64) * PI * PI / 2.0
}

pub fn cube_lambda1(d: u32) -> f64 {
    -((d + 3) as f64) * PI * PI / 2.0
}

/// E(λ) for the uniform measure on the d-cube through the integral
/// transform, with a certified error. Valid for λ ∈ (λ₁, λ₀).
pub fn eval_reversible_cube(d: u32, lambda: f64, quad_tolerance: f64) -> Result<(f64, f64)> {
    let l0 = cube_lambda0(d);
    let l1 = cube_lambda1(d);
    if !(lambda > l1 && lambda < l0) {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} outside (lambda1, lambda0) = ({l1}, {l0})"
        )));
    }
    let sigma = -2.0 * lambda / (PI * PI);
    let (j, je) = transform_integral(d, sigma, quad_tolerance)?;
    let scale = (8.0 / (PI * PI)).powi(d as i32);
    let v = scale * (1.0 / (l0 - lambda) - 2.0 / (PI * PI) * j);
    let e = scale * 2.0 / (PI * PI) * je;
    Ok((v, e))
}

/// E(λ) for the uniform measure on the d-cube by multiset enumeration with
/// per-axis cutoff `cutoff` (odd), with a certified tail bound. Valid for
/// λ > λ₁ away from λ₀.
pub fn eval_reversible_cube_enumerated(d: u32, lambda: f64, cutoff: u32) -> Result<(f64, f64)> {
    if cutoff < 3 || cutoff % 2 == 0 {
        return Err(Error::InvalidArgument(
            "cutoff must be an odd integer >= 3".into(),
        ));
    }
    let l0 = cube_lambda0(d);
    if (lambda - l0).abs() < 1e-10 * l0.abs() {
        return Err(Error::AtPole(l0));
    }
    let scale = (8.0 / (PI * PI)).powi(d as i32);
    let odds: Vec<u32> = (1..=cutoff).step_by(2).collect();
    let mut acc = Kahan::new();
    for_each_odd_multiset(d, &odds, &mut |tuple, weight| {
        let mut prod_sq = 1.0;
        let mut sum_sq = 0u64;
        for &v in tuple {
            prod_sq *= (v as f64) * (v as f64);
            sum_sq += (v as u64) * (v as u64);
        }
        let lam_n = -(PI * PI / 2.0) * sum_sq as f64;
        acc.add(weight / prod_sq / (lam_n - lambda));
    });
    let value = scale * acc.value();
    // Parseval per axis: retained Σ F² = s_c^d with s_c = Σ_{odd n≤c} 8/(π²n²)
    let mut s_axis = 0.0;
    for n in (1..=cutoff).step_by(2) {
        s_axis += 8.0 / (PI * PI * (n as f64) * (n as f64));
    }
    let sq_f_tail = (1.0 - s_axis.powi(d as i32)).max(0.0) + 1e-15;
    let omit = (PI * PI / 2.0) * ((cutoff as f64 + 2.0).powi(2) + d as f64 - 1.0);
    let dist = omit - lambda.abs();
    if dist <= 0.0 {
        return Err(Error::InvalidArgument(
            "cutoff too small for this lambda".into(),
        ));
    }
    Ok((value, sq_f_tail / dist + 4e-16 * value.abs()))
}

/// The spectral gap of the uniform jump measure on the d-cube: λ₁ when the
/// H_d enclosure stays below 1/3, otherwise the unique root of E in
/// (λ₁, λ₀), found by bisection with certified signs.
pub fn reversible_cube_gap(d: u32, quad_tolerance: f64) -> Result<CubeGapReport> {
    let l0 = cube_lambda0(d);
    let l1 = cube_lambda1(d);
    let hd = hd_transform(d, quad_tolerance)?;
    match hd.decided()? {
        Verdict::GapEqualsLambda1 => Ok(CubeGapReport {
            d,
            lambda0: l0,
            lambda1: l1,
            hd,
            gap: l1,
            gap_lo: l1,
            gap_hi: l1,
            strictly_above: false,
        }),
        Verdict::GapStrictlyAbove => {
            // E is strictly increasing on (λ₁, λ₀): E(λ₁⁺) < 0 by the H_d
            // verdict and E(λ₀⁻) → +∞
            let tol = 1e-9 * l0.abs();
            let mut a = l1 + 1e-7 * l0.abs();
            let mut b = l0 - 1e-7 * l0.abs();
            for _ in 0..200 {
                if b - a <= tol {
                    break;
                }
                let mid = 0.5 * (a + b);
                let mut decided = false;
                let mut qt = quad_tolerance;
                for _ in 0..3 {
                    let (v, e) = eval_reversible_cube(d, mid, qt)?;
                    if v.abs() > e {
                        if v > 0.0 {
                            b = mid;
                        } else {
                            a = mid;
                        }
                        decided = true;
                        break;
                    }
                    qt /= 100.0;
                }
                if !decided {
                    // sign uncertifiable even at tightened tolerance: keep
                    // the current certified bracket
                    break;
                }
            }
            Ok(CubeGapReport {
                d,
                lambda0: l0,
                lambda1: l1,
                hd,
                gap: 0.5 * (a + b),
                gap_lo: a,
                gap_hi: b,
                strictly_above: true,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::EigenBasis;
    use crate::domain::DomainSpec;
    use crate::measure::JumpMeasure;
    use crate::secular::SecularFunction;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn transform_route_matches_generic_secular_series_in_low_dimension() {
        for d in 1..=2usize {
            let basis = EigenBasis::build(&DomainSpec::cube(d).unwrap(), 48).unwrap();
            let ef = SecularFunction::build(&basis, &JumpMeasure::Reversible).unwrap();
            let l0 = cube_lambda0(d as u32);
            let l1 = cube_lambda1(d as u32);
            for frac in [0.2, 0.5, 0.8] {
                let lam = l1 + (l0 - l1) * frac;
                let (vt, et) = eval_reversible_cube(d as u32, lam, 1e-9).unwrap();
                let (vg, eg) = ef.evaluate_real(lam).unwrap();
                assert!(
                    (vt - vg).abs() <= et + eg,
                    "d={d} lam={lam}: transform {vt}±{et} vs series {vg}±{eg}"
                );
            }
        }
    }

    #[test]
    fn enumerated_route_matches_transform_route() {
        for d in [2u32, 6, 11] {
            let l0 = cube_lambda0(d);
            let l1 = cube_lambda1(d);
            for frac in [0.3, 0.7] {
                let lam = l1 + (l0 - l1) * frac;
                let (vt, et) = eval_reversible_cube(d, lam, 1e-9).unwrap();
                let (ve, ee) = eval_reversible_cube_enumerated(d, lam, 9).unwrap();
                assert!(
                    (vt - ve).abs() <= et + ee,
                    "d={d} lam={lam}: {vt}±{et} vs {ve}±{ee}"
                );
            }
        }
    }

    #[test]
    fn square_gap_sticks_at_lambda1() {
        let r = reversible_cube_gap(2, 1e-7).unwrap();
        assert!(!r.strictly_above);
        assert_relative_eq!(r.gap, -2.5 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn high_dimensional_gap_detaches_and_is_bracketed() {
        for d in [11u32, 15] {
            let r = reversible_cube_gap(d, 1e-7).unwrap();
            assert!(r.strictly_above);
            assert!(r.gap > r.lambda1 && r.gap < r.lambda0);
            assert!(r.gap_hi - r.gap_lo < 1e-6 * r.lambda0.abs());
            // cross-check the root against the enumerated series
            let (vlo, elo) = eval_reversible_cube_enumerated(d, r.gap_lo, 9).unwrap();
            let (vhi, ehi) = eval_reversible_cube_enumerated(d, r.gap_hi, 9).unwrap();
            assert!(vlo < elo && vhi > -ehi, "{vlo}±{elo} / {vhi}±{ehi}");
        }
    }

    #[test]
    fn dichotomy_and_root_existence_agree_for_all_checked_dimensions() {
        // the H_d decision and the root search must tell the same story
        for d in 1..=12u32 {
            let r = reversible_cube_gap(d, 1e-7).unwrap();
            if r.strictly_above {
                assert!(r.gap > r.lambda1);
                assert_eq!(r.hd.verdict, Some(Verdict::GapStrictlyAbove));
            } else {
                assert_eq!(r.gap, r.lambda1);
                assert_eq!(r.hd.verdict, Some(Verdict::GapEqualsLambda1));
            }
        }
    }

    #[test]
    fn low_dimension_gap_agrees_with_spectrum_report() {
        let basis = EigenBasis::build(&DomainSpec::cube(2).unwrap(), 48).unwrap();
        let rep = crate::spectrum::spectrum_report(
            &basis,
            &JumpMeasure::LebesgueNormalized,
            -12.0 * PI * PI,
        )
        .unwrap();
        let cube = reversible_cube_gap(2, 1e-7).unwrap();
        assert_relative_eq!(rep.gap, cube.gap, max_relative = 1e-12);
    }

    #[test]
    fn complex_evaluation_used_by_contour_stays_consistent() {
        // sanity: the generic secular series at a complex point equals the
        // conjugate-symmetric continuation of the real values
        let basis = EigenBasis::build(&DomainSpec::cube(2).unwrap(), 24).unwrap();
        let ef = SecularFunction::build(&basis, &JumpMeasure::Reversible).unwrap();
        let (v, _) = ef.evaluate(Complex64::new(-20.0, 1e-6)).unwrap();
        let (vr, _) = ef.evaluate_real(-20.0).unwrap();
        assert_relative_eq!(v.re, vr, max_relative = 1e-6);
    }
}
