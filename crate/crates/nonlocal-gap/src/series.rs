//! Certified evaluation of the dimension-indexed odd-lattice sum
//!
//!   H_d = Σ' 1 / (Π n_j² · (Σ n_j² − d − 3)),
//!
//! over odd multi-indices n ≠ (1,…,1), whose comparison with 1/3 decides
//! whether the gap on the d-cube with uniform jump measure detaches from the
//! second Dirichlet eigenvalue. Two independent methods:
//!
//! * direct enumeration with sorted-multiset compression and multinomial
//!   weights (exact terms, crude tail bound — the oracle for small d);
//! * an exponential integral transform: with S(t) = Σ_{n odd} e^{−tn²}/n²,
//!
//!     H_d = ∫₀^∞ e^{(d+3)t} (S(t)^d − e^{−dt}) dt,
//!
//!   evaluated in log space against the all-ones term (production path; the
//!   same kernel with exponent σ = −2λ/π² evaluates the reversible-measure
//!   secular series on cubes of any dimension).
//!
//! All enclosures are conservative: tail bounds enter with a 2× safety
//! factor and quadrature error estimates are doubled.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, Kahan};
use std::f64::consts::PI;

/// Enumeration budget (uncompressed term count) before the transform is
/// suggested instead.
pub const ENUMERATION_BUDGET: f64 = 1e9;
/// Upper integration limit for the transform; the integrand beyond decays
/// like e^{(σ−d−8)t} with σ ≤ d+3.
const T_END: f64 = 8.0;
/// Below this t the odd-lattice heat sum is enclosed analytically.
const T_DIRECT_MIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "gap-equals-lambda1")]
    GapEqualsLambda1,
    #[serde(rename = "gap-strictly-above")]
    GapStrictlyAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Enumeration,
    IntegralTransform,
}

/// A certified enclosure of H_d with the dichotomy verdict it implies.
#[derive(Debug, Clone, Serialize)]
pub struct HdResult {
    pub d: u32,
    pub value_lo: f64,
    pub value_hi: f64,
    pub method: Method,
    /// `None` when the enclosure straddles 1/3.
    pub verdict: Option<Verdict>,
}

impl HdResult {
    fn new(d: u32, value_lo: f64, value_hi: f64, method: Method) -> Self {
        let third = 1.0 / 3.0;
        let verdict = if value_lo > third {
            Some(Verdict::GapStrictlyAbove)
        } else if value_hi < third {
            Some(Verdict::GapEqualsLambda1)
        } else {
            None
        };
        Self {
            d,
            value_lo,
            value_hi,
            method,
            verdict,
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.value_lo + self.value_hi)
    }

    pub fn width(&self) -> f64 {
        self.value_hi - self.value_lo
    }

    pub fn decided(&self) -> Result<Verdict> {
        self.verdict.ok_or(Error::Undecided {
            lo: self.value_lo,
            hi: self.value_hi,
            threshold: 1.0 / 3.0,
        })
    }
}

/// Visit every nondecreasing d-tuple drawn from `values` with its multinomial
/// weight (the number of ordered multi-indices it represents).
pub(crate) fn for_each_odd_multiset(d: u32, values: &[u32], f: &mut dyn FnMut(&[u32], f64)) {
    fn factorial(n: u32) -> f64 {
        (1..=n as u64).map(|k| k as f64).product()
    }
    fn recurse(
        tuple: &mut Vec<u32>,
        start: usize,
        values: &[u32],
        d: u32,
        f: &mut dyn FnMut(&[u32], f64),
    ) {
        if tuple.len() == d as usize {
            // d! / Π (multiplicity!)
            let mut weight = factorial(d);
            let mut run = 1u32;
            for i in 1..tuple.len() {
                if tuple[i] == tuple[i - 1] {
                    run += 1;
                } else {
                    weight /= factorial(run);
                    run = 1;
                }
            }
            weight /= factorial(run);
            f(tuple, weight);
            return;
        }
        for (i, &v) in values.iter().enumerate().skip(start) {
            tuple.push(v);
            recurse(tuple, i, values, d, f);
            tuple.pop();
        }
    }
    let mut tuple = Vec::with_capacity(d as usize);
    recurse(&mut tuple, 0, values, d, f);
}

/// Direct enumeration of H_d over odd indices up to `per_axis_cutoff`.
/// Lower bound: the partial sum. Upper bound: partial sum plus the tail bound
/// 2 · d · (1/(2·cutoff)) · (π²/8)^{d−1} / 5, from Σ_{odd n>c} 1/n² ≤ 1/(2c)
/// and the minimum denominator 5 over admissible indices.
pub fn hd_enumerate(d: u32, per_axis_cutoff: u32) -> Result<HdResult> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    if per_axis_cutoff < 3 || per_axis_cutoff % 2 == 0 {
        return Err(Error::InvalidArgument(
            "cutoff must be an odd integer >= 3".into(),
        ));
    }
    let odds: Vec<u32> = (1..=per_axis_cutoff).step_by(2).collect();
    // multiset compression reduces the work to C(#odds + d − 1, d) tuples
    let mut compressed = 1.0f64;
    for i in 0..d as usize {
        compressed *= (odds.len() + i) as f64 / (i + 1) as f64;
    }
    let terms = d as f64 * compressed;
    if terms > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget { terms });
    }
    let mut acc = Kahan::new();
    for_each_odd_multiset(d, &odds, &mut |tuple, weight| {
        if tuple.iter().all(|&v| v == 1) {
            return;
        }
        let mut prod_sq = 1.0;
        let mut sum_sq = 0u64;
        for &v in tuple {
            prod_sq *= (v as f64) * (v as f64);
            sum_sq += (v as u64) * (v as u64);
        }
        let denom = sum_sq as f64 - d as f64 - 3.0;
        acc.add(weight / (prod_sq * denom));
    });
    let partial = acc.value();
    let tail = 2.0 * d as f64 * (1.0 / (2.0 * per_axis_cutoff as f64))
        * (PI * PI / 8.0).powi(d as i32 - 1)
        / 5.0;
    Ok(HdResult::new(
        d,
        partial,
        partial + tail,
        Method::Enumeration,
    ))
}

/// The odd-lattice heat remainder R(t) = Σ_{odd n ≥ 3} e^{−t(n²−1)}/n², so
/// that e^t S(t) = 1 + R(t). Returns the value and a certified error.
pub(crate) fn odd_heat_remainder(t: f64) -> (f64, f64) {
    debug_assert!(t >= 0.0);
    if t < T_DIRECT_MIN {
        // S(0) − S(t) = Σ (1−e^{−tn²})/n² ≤ √t + 2t, so enclose R between
        // e^t(S0 − √t − 2t) − 1 and e^t S0 − 1 and take the midpoint
        let s0 = PI * PI / 8.0;
        let et = t.exp();
        let hi = et * s0 - 1.0;
        let lo = et * (s0 - t.sqrt() - 2.0 * t) - 1.0;
        return (0.5 * (hi + lo), 0.5 * (hi - lo) + 1e-16);
    }
    let mut acc = Kahan::new();
    let mut n: u64 = 3;
    loop {
        let nf = n as f64;
        let term = (-t * (nf * nf - 1.0)).exp() / (nf * nf);
        acc.add(term);
        // each further step multiplies the exponential by ≤ e^{−t(4n+4)}
        let ratio = (-t * (4.0 * nf + 4.0)).exp();
        let rem = term * ratio / (1.0 - ratio);
        if rem < 1e-18 * acc.value() + 1e-300 {
            return (acc.value(), rem + 4e-16 * acc.value());
        }
        n += 2;
    }
}

/// J_d(σ) = ∫₀^∞ e^{σt}(S(t)^d − e^{−dt}) dt with a certified enclosure.
/// Requires σ ≤ d + 6 (the integrand decays like e^{(σ−d−8)t}).
pub fn transform_integral(d: u32, sigma: f64, quad_tolerance: f64) -> Result<(f64, f64)> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    if !(sigma <= d as f64 + 6.0) {
        return Err(Error::InvalidArgument(format!(
            "transform exponent sigma = {sigma} too large for d = {d} (needs sigma <= d+6)"
        )));
    }
    if !(quad_tolerance > 0.0) {
        return Err(Error::ToleranceUnreachable(quad_tolerance));
    }
    let df = d as f64;
    // integrand assembled in log space against the all-ones term:
    // e^{(σ−d)t}·((1+R)^d − 1) with R = e^t S − 1
    let f = move |t: f64| -> f64 {
        let (r, _) = odd_heat_remainder(t);
        let y = df * r.ln_1p();
        ((sigma - df) * t + ln_expm1(y)).exp()
    };
    // √t substitution renders the half-power expansion at t = 0 smooth
    let g = move |u: f64| -> f64 {
        if u == 0.0 {
            0.0
        } else {
            2.0 * u * f(u * u)
        }
    };
    let (v1, e1) = adaptive_simpson(&g, 0.0, 1.0, quad_tolerance / 4.0);
    let (v2, e2) = adaptive_simpson(&f, 1.0, T_END, quad_tolerance / 4.0);
    // analytic tail: ∫_T^∞ ≤ d e^{dR(T)} R(T) e^{(σ−d)T} / (d+8−σ)
    let (rt, _) = odd_heat_remainder(T_END);
    let tail = df * (df * rt).exp() * rt * ((sigma - df) * T_END).exp() / (df + 8.0 - sigma);
    // propagated model error from the small-t enclosure of R
    let value = v1 + v2;
    let model = df * (PI * PI / 8.0).powi(d as i32 - 1) * 1e-10 + 1e-12 * value.abs();
    let err = 2.0 * (e1 + e2) + 2.0 * tail + model;
    if !err.is_finite() || !value.is_finite() {
        return Err(Error::ToleranceUnreachable(quad_tolerance));
    }
    Ok((value, err))
}

/// ln(e^y − 1) for y > 0, stable for tiny y.
fn ln_expm1(y: f64) -> f64 {
    if y > 1e-3 {
        y.exp_m1().ln()
    } else {
        // expm1(y) = y(1 + y/2 + y²/6 + …)
        y.ln() + (y * (0.5 + y / 6.0)).ln_1p()
    }
}

/// H_d by the integral transform (σ = d + 3).
pub fn hd_transform(d: u32, quad_tolerance: f64) -> Result<HdResult> {
    let (v, e) = transform_integral(d, d as f64 + 3.0, quad_tolerance)?;
    Ok(HdResult::new(d, v - e, v + e, Method::IntegralTransform))
}

/// Truncated double sum of the square point-jump secular series
///
///   Σ_{m1,m2 ≥ 0} sin(n1π/9) sin(n2π/9) / (n1 n2 (n1² + n2² + 2λ/π²)),
///
/// n_i = 2m_i + 1, returning (value, certified_error). The caller applies the
/// negative constant −32/π⁴ to recover E for the jump point (1/9, 1/9).
pub fn square_point_jump_sum(lambda: f64, cutoff: u32) -> Result<(f64, f64)> {
    if cutoff < 50 {
        return Err(Error::InvalidArgument("cutoff must be at least 50".into()));
    }
    if !(lambda < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be negative, got {lambda}"
        )));
    }
    let s = -2.0 * lambda / (PI * PI);
    let a_max = (2 * cutoff - 1) as f64;
    if (a_max + 2.0).powi(2) <= 2.0 * s {
        return Err(Error::InvalidArgument(
            "cutoff too small for this lambda".into(),
        ));
    }
    let mut acc = Kahan::new();
    for m1 in 0..cutoff {
        let n1 = (2 * m1 + 1) as f64;
        let s1 = (n1 * PI / 9.0).sin();
        for m2 in 0..cutoff {
            let n2 = (2 * m2 + 1) as f64;
            let denom = n1 * n1 + n2 * n2 - s;
            if denom.abs() < 1e-9 * (n1 * n1 + n2 * n2) {
                return Err(Error::AtPole(-(n1 * n1 + n2 * n2) * PI * PI / 2.0));
            }
            acc.add(s1 * (n2 * PI / 9.0).sin() / (n1 * n2 * denom));
        }
    }
    // tail over indices with max(n1,n2) > a_max, using |sin·sin| ≤ 1:
    // (2/g) Σ_{odd n > a_max} (4/3 + ln(n)/2)/n³ with g deflating the
    // denominator by s, then the crate-wide 2× safety factor
    let g = 1.0 - s / ((a_max + 2.0).powi(2) + 1.0);
    let mut tail_sum = 0.0;
    let mut n = a_max + 2.0;
    while n <= 40.0 * a_max {
        tail_sum += (4.0 / 3.0 + 0.5 * n.ln()) / (n * n * n);
        n += 2.0;
    }
    // ∫_M^∞ (4/3 + ln x/2)/x³ dx = (4/3)/(2M²) + (2 ln M + 1)/(8M²)
    let integral_rem = (4.0 / 3.0) / (2.0 * n * n) + (2.0 * n.ln() + 1.0) / (8.0 * n * n);
    tail_sum += 0.5 * integral_rem;
    let tail = 2.0 * (2.0 / g) * tail_sum;
    Ok((acc.value(), tail + 4e-16 * cutoff as f64))
}

/// The constant relating `square_point_jump_sum` to the secular series of
/// δ_{(1/9,1/9)} on the unit square: E(λ) = C · sum with C = −32/π⁴.
pub fn square_point_jump_constant() -> f64 {
    -32.0 / PI.powi(4)
}
