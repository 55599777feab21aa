//! Complex-root counting for the secular series by the argument principle:
//! accumulate the phase of the truncated E along a rectangle symmetric about
//! the real axis, refining adaptively until every increment is below π/4.
//! The winding number counts zeros minus poles inside; adding the retained
//! pole count returns the zero count. This is a verification instrument —
//! it locates nothing, it only counts.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::secular::SecularFunction;

/// Minimum distance of the contour from every retained pole, × |λ_0^D|.
pub const CONTOUR_POLE_CLEARANCE_REL: f64 = 1e-6;
const PHASE_TARGET: f64 = std::f64::consts::FRAC_PI_4;
const PHASE_HARD_LIMIT: f64 = std::f64::consts::FRAC_PI_2;
const MAX_DEPTH: u32 = 42;
const INITIAL_SAMPLES_PER_EDGE: usize = 32;

/// A closed axis-aligned rectangle symmetric about the real axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rectangle {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_lo: f64, re_hi: f64, im_max: f64) -> Result<Self> {
        if !(re_lo < re_hi) || !(im_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle [{re_lo}, {re_hi}] × ±{im_max}i"
            )));
        }
        Ok(Self {
            re_lo,
            re_hi,
            im_max,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroCount {
    pub winding: i64,
    pub poles_inside: usize,
    pub zeros_inside: usize,
    /// True when min |E| on the sampled contour exceeded the maximal
    /// certified truncation error there, so the count transfers to the
    /// untruncated series by Rouché's bound.
    pub rouche_certified: bool,
}

/// Retained poles of E strictly inside the rectangle.
pub fn poles_inside(ef: &SecularFunction, rect: &Rectangle) -> Vec<f64> {
    ef.poles_in(rect.re_lo, rect.re_hi)
        .into_iter()
        .filter(|&p| p > rect.re_lo && p < rect.re_hi)
        .collect()
}

/// Count the zeros of the truncated E inside the rectangle.
pub fn complex_root_count(ef: &SecularFunction, rect: &Rectangle) -> Result<ZeroCount> {
    let clearance = CONTOUR_POLE_CLEARANCE_REL * ef.lambda0().abs();
    // every retained pole is real, so its distance to the boundary is easy
    for p in ef.poles_in(f64::NEG_INFINITY, 0.0) {
        let d = if p < rect.re_lo {
            rect.re_lo - p
        } else if p > rect.re_hi {
            p - rect.re_hi
        } else {
            (p - rect.re_lo).min(rect.re_hi - p).min(rect.im_max)
        };
        if d <= clearance {
            return Err(Error::InvalidArgument(format!(
                "rectangle boundary within {d:.3e} of the retained pole at {p:.6e}"
            )));
        }
    }

    let corners = [
        Complex64::new(rect.re_lo, -rect.im_max),
        Complex64::new(rect.re_hi, -rect.im_max),
        Complex64::new(rect.re_hi, rect.im_max),
        Complex64::new(rect.re_lo, rect.im_max),
    ];
    let mut total_phase = 0.0;
    let mut min_abs = f64::INFINITY;
    let mut max_err: f64 = 0.0;
    for k in 0..4 {
        let za = corners[k];
        let zb = corners[(k + 1) % 4];
        let mut prev = za;
        let (mut fprev, eprev) = ef.evaluate(za)?;
        min_abs = min_abs.min(fprev.norm());
        max_err = max_err.max(eprev);
        for i in 1..=INITIAL_SAMPLES_PER_EDGE {
            let z = za + (zb - za) * (i as f64 / INITIAL_SAMPLES_PER_EDGE as f64);
            let (fz, ez) = ef.evaluate(z)?;
            min_abs = min_abs.min(fz.norm());
            max_err = max_err.max(ez);
            total_phase += phase_step(ef, prev, fprev, z, fz, 0, &mut min_abs, &mut max_err)?;
            prev = z;
            fprev = fz;
        }
    }

    let winding_f = total_phase / std::f64::consts::TAU;
    let winding = winding_f.round();
    if (winding_f - winding).abs() > 0.25 {
        return Err(Error::ContourTooClose {
            step: total_phase,
            at: "phase total far from an integer multiple of 2π".into(),
        });
    }
    let poles = poles_inside(ef, rect);
    let zeros = winding as i64 + poles.len() as i64;
    if zeros < 0 {
        return Err(Error::ContourTooClose {
            step: total_phase,
            at: format!("negative zero count {zeros}"),
        });
    }
    Ok(ZeroCount {
        winding: winding as i64,
        poles_inside: poles.len(),
        zeros_inside: zeros as usize,
        rouche_certified: min_abs > max_err,
    })
}

#[allow(clippy::too_many_arguments)]
fn phase_step(
    ef: &SecularFunction,
    za: Complex64,
    fa: Complex64,
    zb: Complex64,
    fb: Complex64,
    depth: u32,
    min_abs: &mut f64,
    max_err: &mut f64,
) -> Result<f64> {
    let step = (fb / fa).arg();
    if step.abs() < PHASE_TARGET {
        return Ok(step);
    }
    if depth >= MAX_DEPTH {
        if step.abs() < PHASE_HARD_LIMIT {
            return Ok(step);
        }
        return Err(Error::ContourTooClose {
            step: step.abs(),
            at: format!("segment [{za}, {zb}] after maximal refinement"),
        });
    }
    let zm = 0.5 * (za + zb);
    let (fm, em) = ef.evaluate(zm)?;
    *min_abs = min_abs.min(fm.norm());
    *max_err = max_err.max(em);
    Ok(
        phase_step(ef, za, fa, zm, fm, depth + 1, min_abs, max_err)?
            + phase_step(ef, zm, fm, zb, fb, depth + 1, min_abs, max_err)?,
    )
}
