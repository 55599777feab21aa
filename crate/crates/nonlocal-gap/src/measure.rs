//! Jump measures ν on the open domain and the coefficients G_n = ∫ φ_n dν.
//!
//! The spectral machinery is discontinuous in whether F_n or G_n vanishes
//! *exactly*, so every coefficient carries an exactness tag: structural zeros
//! (orthogonality, parity on zero-drift factors, point masses at rational
//! coordinates) are distinguished from merely small quadrature values.

use serde::{Deserialize, Serialize};

use crate::basis::{EigenBasis, EigenEntry};
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, Kahan};

/// Mass-validation tolerance for density variants.
pub const MASS_TOL: f64 = 1e-8;
/// Renormalization threshold above which grid-density loading warns.
pub const GRID_RENORM_WARN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    /// Provably zero by structure (parity, orthogonality, rational point).
    ExactZero,
    /// Provably nonzero by closed form.
    ExactNonZero,
    /// A quadrature or pointwise value with no structural proof attached.
    Numeric,
}

/// A coefficient together with what is provable about its vanishing.
#[derive(Debug, Clone, Copy)]
pub struct Coefficient {
    pub value: f64,
    pub exactness: Exactness,
}

impl Coefficient {
    pub fn exact_zero() -> Self {
        Self {
            value: 0.0,
            exactness: Exactness::ExactZero,
        }
    }

    pub fn exact_nonzero(value: f64) -> Self {
        Self {
            value,
            exactness: Exactness::ExactNonZero,
        }
    }

    pub fn numeric(value: f64) -> Self {
        Self {
            value,
            exactness: Exactness::Numeric,
        }
    }

    /// Coefficient of an entry's F value (always structurally decidable).
    pub fn of_f(entry: &EigenEntry) -> Self {
        if entry.f_exact_zero {
            Self::exact_zero()
        } else {
            Self::exact_nonzero(entry.f)
        }
    }
}

/// The jump measure ν: where the diffusion restarts after hitting ∂D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "kebab-case")]
pub enum JumpMeasure {
    /// δ_p for a strictly interior point p.
    PointMass { point: Vec<f64> },
    /// Normalized Lebesgue measure on the domain.
    LebesgueNormalized,
    /// The reversible measure exp(2Q)dx (Lebesgue when all drifts vanish).
    Reversible,
    /// Density proportional to φ_0^D · exp(2Q): the quasi-stationary
    /// distribution of the killed diffusion in the self-adjoint setting.
    QuasiStationary,
    /// Density c_±(φ_0 ± ε φ̂_1) with respect to μ_rev, where φ̂_1 is the
    /// second eigenfunction oriented so that ∫ φ̂_1 dμ_rev ≥ 0.
    EigenMixture { epsilon: f64, sign: i8 },
    /// Nonnegative values on a uniform grid including the endpoints,
    /// row-major in two dimensions; trapezoid mass normalized to 1.
    GridDensity { values: Vec<f64>, shape: Vec<usize> },
}

/// Mixture internals shared by density, sampling, and coefficients.
pub(crate) struct MixtureParts {
    pub epsilon: f64,
    pub sign: f64,
    /// ±1 so that the oriented second coefficient sign·F₁ is ≥ 0.
    pub orient: f64,
    /// Normalizer c_± = 1/(F₀ ± ε|F₁|).
    pub c: f64,
}

impl JumpMeasure {
    pub fn point(coords: &[f64]) -> Self {
        Self::PointMass {
            point: coords.to_vec(),
        }
    }

    pub fn mixture(epsilon: f64, positive: bool) -> Self {
        Self::EigenMixture {
            epsilon,
            sign: if positive { 1 } else { -1 },
        }
    }

    /// Whether ν has an L²(μ_rev) density; all variants except point masses do.
    pub fn has_l2_density(&self) -> bool {
        !matches!(self, Self::PointMass { .. })
    }

    pub(crate) fn mixture_parts(&self, basis: &EigenBasis) -> Result<MixtureParts> {
        let (epsilon, sign) = match *self {
            Self::EigenMixture { epsilon, sign } => (epsilon, sign),
            _ => return Err(Error::InvalidArgument("not a mixture measure".into())),
        };
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mixture epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidArgument(format!(
                "mixture sign must be +1 or -1, got {sign}"
            )));
        }
        if basis.entries().len() < 2 {
            return Err(Error::InvalidArgument(
                "mixture needs a basis with at least two entries".into(),
            ));
        }
        let f0 = basis.ground().f;
        let f1 = basis.entries()[1].f;
        let orient = if f1 < 0.0 { -1.0 } else { 1.0 };
        let s = sign as f64;
        let c = 1.0 / (f0 + s * epsilon * f1.abs());
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(
                "mixture epsilon too large: normalizer not positive".into(),
            ));
        }
        Ok(MixtureParts {
            epsilon,
            sign: s,
            orient,
            c,
        })
    }

    /// Density of ν with respect to Lebesgue measure at an interior point.
    /// `None` for point masses.
    pub fn density(&self, basis: &EigenBasis, point: &[f64]) -> Result<Option<f64>> {
        basis.domain().check_interior(point)?;
        let rev = basis.rev_measure();
        Ok(match self {
            Self::PointMass { .. } => None,
            Self::LebesgueNormalized => Some(1.0),
            Self::Reversible => Some(rev.density(point)),
            Self::QuasiStationary => {
                let g = basis.ground().clone();
                let phi0 = basis.evaluate(&g, point)?;
                Some(phi0 * rev.density(point) / g.f)
            }
            Self::EigenMixture { .. } => {
                let parts = self.mixture_parts(basis)?;
                let phi0 = basis.evaluate(basis.ground(), point)?;
                let e1 = basis.entries()[1].clone();
                let phi1 = basis.evaluate(&e1, point)?;
                Some(
                    parts.c
                        * (phi0 + parts.sign * parts.epsilon * parts.orient * phi1)
                        * rev.density(point),
                )
            }
            Self::GridDensity { values, shape } => {
                Some(grid_interpolate(values, shape, point)?)
            }
        })
    }

    /// Validate invariants: interior point mass, unit mass of densities
    /// within `MASS_TOL`, nonnegativity of mixtures on a validation grid.
    pub fn validate(&self, basis: &EigenBasis) -> Result<()> {
        let d = basis.dim();
        match self {
            Self::PointMass { point } => basis.domain().check_interior(point),
            Self::GridDensity { values, shape } => {
                check_grid_shape(values, shape, d)?;
                if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "grid density values must be nonnegative and finite".into(),
                    ));
                }
                let mass = grid_trapezoid_mass(values, shape);
                if (mass - 1.0).abs() > MASS_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "grid density mass {mass} differs from 1 beyond tolerance; \
                         renormalize at load"
                    )));
                }
                Ok(())
            }
            Self::EigenMixture { .. } => {
                let parts = self.mixture_parts(basis)?;
                let g = basis.ground().clone();
                let e1 = basis.entries()[1].clone();
                let per_axis = validation_grid_per_axis(d);
                let mut idx = vec![0usize; d];
                let mut point = vec![0.0; d];
                loop {
                    for j in 0..d {
                        point[j] = (idx[j] as f64 + 1.0) / (per_axis as f64 + 1.0);
                    }
                    let v = basis.evaluate(&g, &point)?
                        + parts.sign * parts.epsilon * parts.orient * basis.evaluate(&e1, &point)?;
                    if v < 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "mixture density negative at {point:?}: epsilon too large"
                        )));
                    }
                    if !advance_grid(&mut idx, per_axis) {
                        break;
                    }
                }
                self.check_mass(basis)
            }
            _ => self.check_mass(basis),
        }
    }

    fn check_mass(&self, basis: &EigenBasis) -> Result<()> {
        let mass = self.mass(basis)?;
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidArgument(format!(
                "measure mass {mass} differs from 1 beyond {MASS_TOL:e}"
            )));
        }
        Ok(())
    }

    /// Total mass by quadrature (1 for point masses by definition).
    pub fn mass(&self, basis: &EigenBasis) -> Result<f64> {
        let d = basis.dim();
        match self {
            Self::PointMass { .. } => Ok(1.0),
            Self::LebesgueNormalized => Ok(1.0),
            Self::Reversible => {
                // product of 1-d masses of e^{2bx}/Z
                let mut m = 1.0;
                for ax in basis.axes() {
                    let b = ax.drift;
                    let z = ax.normalizer;
                    m *= adaptive_simpson(&|x| (2.0 * b * x).exp() / z, 0.0, 1.0, 1e-12).0;
                }
                Ok(m)
            }
            Self::QuasiStationary => {
                // density factorizes: per-axis mass = (∫ mode e^{2bx}/Z dx)/f_axis
                let mut m = 1.0;
                for ax in basis.axes() {
                    let mode = ax.modes[0];
                    let b = ax.drift;
                    let z = ax.normalizer;
                    let num = adaptive_simpson(
                        &|x| mode.eval(x) * (2.0 * b * x).exp() / z,
                        0.0,
                        1.0,
                        1e-12,
                    )
                    .0;
                    m *= num / mode.rev_coeff;
                }
                Ok(m)
            }
            Self::EigenMixture { .. } => {
                if d > 2 {
                    return Err(Error::Unsupported(
                        "mixture mass quadrature implemented for d <= 2".into(),
                    ));
                }
                self.mass_by_grid_quadrature(basis)
            }
            Self::GridDensity { values, shape } => {
                check_grid_shape(values, shape, d)?;
                Ok(grid_trapezoid_mass(values, shape))
            }
        }
    }

    fn mass_by_grid_quadrature(&self, basis: &EigenBasis) -> Result<f64> {
        let d = basis.dim();
        if d == 1 {
            let f = |x: f64| -> f64 {
                self.density(basis, &[x]).unwrap().unwrap_or(0.0)
            };
            Ok(adaptive_simpson(&f, 1e-12, 1.0 - 1e-12, 1e-10).0)
        } else {
            let f = |x: f64, y: f64| -> f64 {
                self.density(basis, &[x, y]).unwrap().unwrap_or(0.0)
            };
            let inner = |x: f64| adaptive_simpson(&|y| f(x, y), 1e-12, 1.0 - 1e-12, 1e-10).0;
            Ok(adaptive_simpson(&inner, 1e-12, 1.0 - 1e-12, 1e-9).0)
        }
    }

    /// G_n(ν) = ∫ φ_n dν with exactness tracking.
    pub fn jump_coefficient(
        &self,
        basis: &EigenBasis,
        entry: &EigenEntry,
    ) -> Result<Coefficient> {
        let d = basis.dim();
        if entry.multi_index.len() != d
            || entry.multi_index.iter().any(|&n| n == 0 || n > basis.cutoff())
        {
            return Err(Error::EntryMismatch);
        }
        match self {
            Self::PointMass { point } => {
                basis.domain().check_interior(point)?;
                // structural zero when some coordinate is a small-denominator
                // rational r/q with q | n·r  (sin(nπ r/q) = 0)
                for (j, (&n, &p)) in entry.multi_index.iter().zip(point).enumerate() {
                    let _ = j;
                    if let Some((r, q)) = detect_rational(p) {
                        if (n as u64 * r) % q == 0 {
                            return Ok(Coefficient::exact_zero());
                        }
                    }
                }
                Ok(Coefficient::numeric(basis.evaluate(entry, point)?))
            }
            Self::LebesgueNormalized => {
                let mut v = 1.0;
                let mut zero = false;
                for (j, &n) in entry.multi_index.iter().enumerate() {
                    let m = &basis.axes()[j].modes[(n - 1) as usize];
                    v *= m.leb_coeff;
                    zero |= m.leb_coeff_exact_zero;
                }
                Ok(if zero {
                    Coefficient::exact_zero()
                } else {
                    Coefficient::exact_nonzero(v)
                })
            }
            Self::Reversible => Ok(Coefficient::of_f(entry)),
            Self::QuasiStationary => {
                if entry.multi_index == basis.ground().multi_index {
                    Ok(Coefficient::exact_nonzero(1.0 / basis.ground().f))
                } else {
                    // orthogonality of the eigenbasis in L²(μ_rev)
                    Ok(Coefficient::exact_zero())
                }
            }
            Self::EigenMixture { .. } => {
                let parts = self.mixture_parts(basis)?;
                if entry.multi_index == basis.ground().multi_index {
                    Ok(Coefficient::exact_nonzero(parts.c))
                } else if entry.multi_index == basis.entries()[1].multi_index {
                    Ok(Coefficient::exact_nonzero(
                        parts.sign * parts.c * parts.epsilon * parts.orient,
                    ))
                } else {
                    Ok(Coefficient::exact_zero())
                }
            }
            Self::GridDensity { values, shape } => {
                check_grid_shape(values, shape, d)?;
                Ok(Coefficient::numeric(grid_pairing(
                    values, shape, basis, entry,
                )?))
            }
        }
    }
}

/// Largest ε (scaled by 0.9) keeping φ_0 ± ε φ̂_1 nonnegative on a 10⁴-point
/// validation grid.
pub fn max_safe_epsilon(basis: &EigenBasis) -> Result<f64> {
    if basis.entries().len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two basis entries".into(),
        ));
    }
    let d = basis.dim();
    let g = basis.ground().clone();
    let e1 = basis.entries()[1].clone();
    let per_axis = validation_grid_per_axis(d);
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut best = f64::INFINITY;
    loop {
        for j in 0..d {
            point[j] = (idx[j] as f64 + 1.0) / (per_axis as f64 + 1.0);
        }
        let p0 = basis.evaluate(&g, &point)?;
        let p1 = basis.evaluate(&e1, &point)?.abs();
        if p1 > 1e-14 {
            best = best.min(p0 / p1);
        }
        if !advance_grid(&mut idx, per_axis) {
            break;
        }
    }
    if !best.is_finite() {
        return Err(Error::InvalidArgument(
            "second eigenfunction vanished on the whole validation grid".into(),
        ));
    }
    Ok(0.9 * best)
}

/// Detect p ≈ r/q with q ≤ 64 within 1e-9; the user supplying such a
/// coordinate is taken to mean the rational point exactly.
fn detect_rational(p: f64) -> Option<(u64, u64)> {
    for q in 1..=64u64 {
        let r = (p * q as f64).round();
        if r >= 0.0 && (p - r / q as f64).abs() <= 1e-9 {
            return Some((r as u64, q));
        }
    }
    None
}

fn validation_grid_per_axis(d: usize) -> usize {
    match d {
        1 => 10_000,
        2 => 100,
        _ => 22,
    }
}

fn advance_grid(idx: &mut [usize], per_axis: usize) -> bool {
    for j in (0..idx.len()).rev() {
        if idx[j] + 1 < per_axis {
            idx[j] += 1;
            for k in idx.iter_mut().skip(j + 1) {
                *k = 0;
            }
            return true;
        }
    }
    false
}

fn check_grid_shape(values: &[f64], shape: &[usize], d: usize) -> Result<()> {
    if shape.len() != d {
        return Err(Error::InvalidArgument(format!(
            "grid density shape {shape:?} does not match dimension {d}"
        )));
    }
    if shape.iter().any(|&s| s < 2) {
        return Err(Error::InvalidArgument(
            "grid density needs at least 2 nodes per axis".into(),
        ));
    }
    if shape.iter().product::<usize>() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "grid density has {} values but shape {shape:?}",
            values.len()
        )));
    }
    Ok(())
}

/// Trapezoid mass of node values on the uniform grid over [0,1]^d (d ≤ 2).
pub(crate) fn grid_trapezoid_mass(values: &[f64], shape: &[usize]) -> f64 {
    let mut acc = Kahan::new();
    match shape.len() {
        1 => {
            let n = shape[0];
            let h = 1.0 / (n - 1) as f64;
            for (i, &v) in values.iter().enumerate() {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                acc.add(w * v * h);
            }
        }
        2 => {
            let (rows, cols) = (shape[0], shape[1]);
            let hx = 1.0 / (rows - 1) as f64;
            let hy = 1.0 / (cols - 1) as f64;
            for ix in 0..rows {
                let wx = if ix == 0 || ix == rows - 1 { 0.5 } else { 1.0 };
                for iy in 0..cols {
                    let wy = if iy == 0 || iy == cols - 1 { 0.5 } else { 1.0 };
                    acc.add(wx * wy * values[ix * cols + iy] * hx * hy);
                }
            }
        }
        _ => unreachable!("grid densities are restricted to d <= 2"),
    }
    acc.value()
}

/// Multilinear interpolation of grid node values at an interior point.
pub(crate) fn grid_interpolate(values: &[f64], shape: &[usize], point: &[f64]) -> Result<f64> {
    match shape.len() {
        1 => {
            let n = shape[0];
            let t = point[0] * (n - 1) as f64;
            let i = (t.floor() as usize).min(n - 2);
            let frac = t - i as f64;
            Ok(values[i] * (1.0 - frac) + values[i + 1] * frac)
        }
        2 => {
            let (rows, cols) = (shape[0], shape[1]);
            let tx = point[0] * (rows - 1) as f64;
            let ty = point[1] * (cols - 1) as f64;
            let ix = (tx.floor() as usize).min(rows - 2);
            let iy = (ty.floor() as usize).min(cols - 2);
            let fx = tx - ix as f64;
            let fy = ty - iy as f64;
            let v00 = values[ix * cols + iy];
            let v01 = values[ix * cols + iy + 1];
            let v10 = values[(ix + 1) * cols + iy];
            let v11 = values[(ix + 1) * cols + iy + 1];
            Ok(v00 * (1.0 - fx) * (1.0 - fy)
                + v01 * (1.0 - fx) * fy
                + v10 * fx * (1.0 - fy)
                + v11 * fx * fy)
        }
        _ => Err(Error::Unsupported(
            "grid densities are restricted to d <= 2".into(),
        )),
    }
}

/// Trapezoid pairing ∫ φ_n ρ dx on the density's own grid.
fn grid_pairing(
    values: &[f64],
    shape: &[usize],
    basis: &EigenBasis,
    entry: &EigenEntry,
) -> Result<f64> {
    let mut acc = Kahan::new();
    match shape.len() {
        1 => {
            let n = shape[0];
            let h = 1.0 / (n - 1) as f64;
            let mode = &basis.axes()[0].modes[(entry.multi_index[0] - 1) as usize];
            for (i, &v) in values.iter().enumerate() {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                let x = i as f64 * h;
                acc.add(w * v * mode.eval(x) * h);
            }
        }
        2 => {
            let (rows, cols) = (shape[0], shape[1]);
            let hx = 1.0 / (rows - 1) as f64;
            let hy = 1.0 / (cols - 1) as f64;
            let mx = &basis.axes()[0].modes[(entry.multi_index[0] - 1) as usize];
            let my = &basis.axes()[1].modes[(entry.multi_index[1] - 1) as usize];
            for ix in 0..rows {
                let wx = if ix == 0 || ix == rows - 1 { 0.5 } else { 1.0 };
                let px = mx.eval(ix as f64 * hx);
                for iy in 0..cols {
                    let wy = if iy == 0 || iy == cols - 1 { 0.5 } else { 1.0 };
                    let py = my.eval(iy as f64 * hy);
                    acc.add(wx * wy * values[ix * cols + iy] * px * py * hx * hy);
                }
            }
        }
        _ => {
            return Err(Error::Unsupported(
                "grid densities are restricted to d <= 2".into(),
            ))
        }
    }
    Ok(acc.value())
}

/// Load a grid density from CSV text (one value per line, row-major for
/// d = 2). Returns the normalized measure and the relative mass correction
/// that was applied; callers should warn when it exceeds `GRID_RENORM_WARN`.
pub fn grid_density_from_csv(text: &str, dim: usize) -> Result<(JumpMeasure, f64)> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: not a number: {t:?}", lineno + 1)))?;
        values.push(v);
    }
    if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Parse(
            "grid density values must be nonnegative and finite".into(),
        ));
    }
    let shape = match dim {
        1 => vec![values.len()],
        2 => {
            let side = (values.len() as f64).sqrt().round() as usize;
            if side * side != values.len() {
                return Err(Error::Parse(format!(
                    "two-dimensional grid density needs a square value count, got {}",
                    values.len()
                )));
            }
            vec![side, side]
        }
        _ => {
            return Err(Error::Unsupported(
                "grid densities are restricted to d <= 2".into(),
            ))
        }
    };
    check_grid_shape(&values, &shape, dim)?;
    let mass = grid_trapezoid_mass(&values, &shape);
    if mass <= 0.0 {
        return Err(Error::Parse("grid density has zero mass".into()));
    }
    let delta = (mass - 1.0).abs();
    for v in values.iter_mut() {
        *v /= mass;
    }
    Ok((JumpMeasure::GridDensity { values, shape }, delta))
}

/// Parse the CLI/browser encoding `kind:params`. Grid densities are handled
/// by the caller (they need file access).
pub fn parse_measure(s: &str, dim: usize) -> Result<JumpMeasure> {
    let (kind, params) = match s.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (s, None),
    };
    match kind {
        "lebesgue" => Ok(JumpMeasure::LebesgueNormalized),
        "reversible" => Ok(JumpMeasure::Reversible),
        "quasistationary" | "quasi-stationary" => Ok(JumpMeasure::QuasiStationary),
        "delta" => {
            let p = params.ok_or_else(|| Error::Parse("delta needs coordinates".into()))?;
            let coords: Vec<f64> = p
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad coordinate {t:?}")))
                })
                .collect::<Result<_>>()?;
            if coords.len() != dim {
                return Err(Error::Parse(format!(
                    "delta has {} coordinates but dimension is {dim}",
                    coords.len()
                )));
            }
            Ok(JumpMeasure::point(&coords))
        }
        "mixture" => {
            let p = params.ok_or_else(|| Error::Parse("mixture needs eps,sign".into()))?;
            let (eps_s, sign_s) = p
                .split_once(',')
                .ok_or_else(|| Error::Parse("mixture needs eps,sign".into()))?;
            let epsilon: f64 = eps_s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad epsilon {eps_s:?}")))?;
            let positive = match sign_s.trim() {
                "+" | "plus" | "1" => true,
                "-" | "minus" | "-1" => false,
                other => return Err(Error::Parse(format!("bad mixture sign {other:?}"))),
            };
            Ok(JumpMeasure::mixture(epsilon, positive))
        }
        other => Err(Error::Parse(format!(
            "unknown measure kind {other:?} (expected delta, lebesgue, reversible, \
             quasistationary, mixture, grid)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cube_basis(d: usize, cutoff: u32) -> EigenBasis {
        EigenBasis::build(&DomainSpec::cube(d).unwrap(), cutoff).unwrap()
    }

    #[test]
    fn point_mass_coefficient_matches_eigenfunction_value() {
        let basis = cube_basis(2, 6);
        let nu = JumpMeasure::point(&[1.0 / 9.0, 1.0 / 9.0]);
        for e in basis.entries().iter().take(12) {
            let g = nu.jump_coefficient(&basis, e).unwrap();
            let (n1, n2) = (e.multi_index[0] as f64, e.multi_index[1] as f64);
            let expect = 2.0 * (n1 * PI / 9.0).sin() * (n2 * PI / 9.0).sin();
            if (n1 as u64 % 9 == 0) || (n2 as u64 % 9 == 0) {
                assert_eq!(g.exactness, Exactness::ExactZero);
            } else {
                assert_relative_eq!(g.value, expect, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn point_mass_rational_detection() {
        let basis = cube_basis(1, 8);
        // the ten-digit truncation of 1/3 is treated as 1/3
        let nu = JumpMeasure::point(&[0.3333333333]);
        let e3 = &basis.entries()[2]; // index 3
        assert_eq!(e3.multi_index, vec![3]);
        assert_eq!(
            nu.jump_coefficient(&basis, e3).unwrap().exactness,
            Exactness::ExactZero
        );
        let e2 = &basis.entries()[1];
        let g2 = nu.jump_coefficient(&basis, e2).unwrap();
        assert_eq!(g2.exactness, Exactness::Numeric);
        assert_relative_eq!(
            g2.value,
            2.0f64.sqrt() * (2.0 * PI / 3.0).sin(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn reversible_equals_f_same_code_path() {
        let basis =
            EigenBasis::build(&DomainSpec::with_drifts(&[0.8]).unwrap(), 12).unwrap();
        for e in basis.entries() {
            let g = JumpMeasure::Reversible.jump_coefficient(&basis, e).unwrap();
            assert_eq!(g.value, e.f);
        }
    }

    #[test]
    fn quasi_stationary_is_orthogonal_to_excited_modes() {
        let basis = cube_basis(2, 5);
        let nu = JumpMeasure::QuasiStationary;
        for (i, e) in basis.entries().iter().enumerate() {
            let g = nu.jump_coefficient(&basis, e).unwrap();
            if i == 0 {
                // 1/F0 with F0 = (2√2/π)² = 8/π²
                assert_relative_eq!(g.value, PI * PI / 8.0, max_relative = 1e-12);
            } else {
                assert_eq!(g.exactness, Exactness::ExactZero);
            }
        }
    }

    #[test]
    fn mixture_coefficients() {
        let basis = cube_basis(1, 6);
        let eps = 0.3;
        for positive in [true, false] {
            let nu = JumpMeasure::mixture(eps, positive);
            let s = if positive { 1.0 } else { -1.0 };
            let parts = nu.mixture_parts(&basis).unwrap();
            // F1 = 0 on the zero-drift interval: orientation defaults to +
            assert_eq!(parts.orient, 1.0);
            let g0 = nu.jump_coefficient(&basis, basis.ground()).unwrap();
            assert_relative_eq!(g0.value, parts.c);
            let g1 = nu
                .jump_coefficient(&basis, &basis.entries()[1].clone())
                .unwrap();
            assert_relative_eq!(g1.value, s * parts.c * eps);
            for e in basis.entries().iter().skip(2) {
                assert_eq!(
                    nu.jump_coefficient(&basis, e).unwrap().exactness,
                    Exactness::ExactZero
                );
            }
        }
    }

    #[test]
    fn mixture_orientation_makes_plus_push_up() {
        // drift b = 1: F at the second mode is negative, so the oriented
        // second coefficient must flip sign to keep F₁·G₁(ν⁺) > 0
        let basis = EigenBasis::build(&DomainSpec::with_drifts(&[1.0]).unwrap(), 8).unwrap();
        let f1 = basis.entries()[1].f;
        assert!(f1 < 0.0);
        let nu = JumpMeasure::mixture(0.2, true);
        let g1 = nu
            .jump_coefficient(&basis, &basis.entries()[1].clone())
            .unwrap();
        assert!(f1 * g1.value > 0.0);
    }

    #[test]
    fn density_masses_are_one() {
        let basis = EigenBasis::build(&DomainSpec::with_drifts(&[1.0]).unwrap(), 8).unwrap();
        for nu in [
            JumpMeasure::LebesgueNormalized,
            JumpMeasure::Reversible,
            JumpMeasure::QuasiStationary,
            JumpMeasure::mixture(0.2, true),
            JumpMeasure::mixture(0.2, false),
        ] {
            let m = nu.mass(&basis).unwrap();
            assert!((m - 1.0).abs() < MASS_TOL, "{nu:?}: mass {m}");
            nu.validate(&basis).unwrap();
        }
    }

    #[test]
    fn mixture_rejects_oversized_epsilon() {
        let basis = cube_basis(1, 6);
        let eps = max_safe_epsilon(&basis).unwrap() * 2.0;
        let nu = JumpMeasure::mixture(eps, true);
        assert!(nu.validate(&basis).is_err());
    }

    #[test]
    fn max_safe_epsilon_interval() {
        let basis = cube_basis(1, 6);
        let eps = max_safe_epsilon(&basis).unwrap();
        // min over the grid of sin(πx)/|sin(2πx)| = 1/2 at the endpoints
        assert_relative_eq!(eps, 0.45, max_relative = 1e-3);
        assert!(eps > 0.0);
        // two-resolution agreement: coarse grid by subsampling
        let coarse = {
            let g = basis.ground().clone();
            let e1 = basis.entries()[1].clone();
            let mut best = f64::INFINITY;
            for i in 1..=5000 {
                let x = i as f64 / 5001.0;
                let p1 = basis.evaluate(&e1, &[x]).unwrap().abs();
                if p1 > 1e-14 {
                    best = best.min(basis.evaluate(&g, &[x]).unwrap() / p1);
                }
            }
            0.9 * best
        };
        assert!((eps - coarse).abs() < 1e-3);
    }

    #[test]
    fn point_mass_on_boundary_rejected() {
        let basis = cube_basis(1, 4);
        assert!(JumpMeasure::point(&[0.0]).validate(&basis).is_err());
        assert!(JumpMeasure::point(&[1.0]).validate(&basis).is_err());
    }

    #[test]
    fn grid_density_loader_normalizes() {
        let text = "0.5\n1.0\n2.0\n1.0\n0.5\n";
        let (nu, delta) = grid_density_from_csv(text, 1).unwrap();
        assert!(delta > 0.0);
        if let JumpMeasure::GridDensity { values, shape } = &nu {
            assert_eq!(shape, &vec![5]);
            assert_relative_eq!(grid_trapezoid_mass(values, shape), 1.0, epsilon = 1e-14);
        } else {
            panic!("wrong variant");
        }
        let basis = cube_basis(1, 4);
        nu.validate(&basis).unwrap();
    }

    #[test]
    fn grid_density_pairing_matches_quadrature() {
        // sample a sine density on a fine grid and compare G against the
        // exact integral ∫ √2 sin(nπx)·(π/2)sin(πx) dx
        let n = 2001usize;
        let values: Vec<f64> = (0..n)
            .map(|i| (PI / 2.0) * (PI * i as f64 / (n - 1) as f64).sin())
            .collect();
        let nu = JumpMeasure::GridDensity {
            values,
            shape: vec![n],
        };
        let basis = cube_basis(1, 4);
        let g1 = nu.jump_coefficient(&basis, basis.ground()).unwrap();
        // ∫ √2 sin(πx) (π/2) sin(πx) dx = √2 π/4
        assert_relative_eq!(
            g1.value,
            2.0f64.sqrt() * PI / 4.0,
            max_relative = 1e-6
        );
        let e2 = basis.entries()[1].clone();
        let g2 = nu.jump_coefficient(&basis, &e2).unwrap();
        assert!(g2.value.abs() < 1e-10);
        assert_eq!(g2.exactness, Exactness::Numeric);
    }

    #[test]
    fn parse_measure_strings() {
        assert_eq!(
            parse_measure("lebesgue", 3).unwrap(),
            JumpMeasure::LebesgueNormalized
        );
        assert_eq!(
            parse_measure("delta:0.25,0.75", 2).unwrap(),
            JumpMeasure::point(&[0.25, 0.75])
        );
        assert_eq!(
            parse_measure("mixture:0.1,-", 1).unwrap(),
            JumpMeasure::mixture(0.1, false)
        );
        assert!(parse_measure("delta:0.5", 2).is_err());
        assert!(parse_measure("nonsense", 1).is_err());
    }
}
